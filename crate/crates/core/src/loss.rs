//! Loss of an intervention set on a moral tree.
//!
//! Two independent routes are provided. The closed form works from the
//! components left after deleting the intervened vertices and their
//! boundaries. The oracle enumerates every candidate root, keeps those whose
//! oriented tree agrees with the true one on everything the interventions
//! reveal, and counts the edges whose orientation still differs among them.
//!
//! Observation model used by the oracle: intervening on `X` reveals the
//! orientation of every edge incident to `X` and the descendant set of `X`.

use std::ops::RangeInclusive;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{RootedTree, Skeleton, Vertex};
use crate::prior::{RootPrior, PROB_TOL};

/// Distinct vertices chosen for single-vertex interventions, in choice order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct InterventionSet(Vec<Vertex>);

impl InterventionSet {
    pub fn new(g: &Skeleton, vertices: Vec<Vertex>) -> Result<Self> {
        let mut seen = vec![false; g.order()];
        for &v in &vertices {
            g.check_vertex(v)?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::DuplicateIntervention(g.label(v).to_string()));
            }
        }
        Ok(InterventionSet(vertices))
    }

    pub fn from_labels<S: AsRef<str>>(g: &Skeleton, labels: &[S]) -> Result<Self> {
        let vs = labels
            .iter()
            .map(|l| g.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, vs)
    }

    pub fn empty() -> Self {
        InterventionSet(Vec::new())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }

    pub(crate) fn push(&mut self, v: Vertex) {
        debug_assert!(!self.0.contains(&v));
        self.0.push(v);
    }

    pub fn labels(&self, g: &Skeleton) -> Vec<String> {
        self.0.iter().map(|&v| g.label(v).to_string()).collect()
    }
}

/// Components `C_j` of `T \ I` together with their boundaries `B_j = C_j ∩ N(I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecomposition {
    pub components: Vec<Vec<Vertex>>,
    pub boundaries: Vec<Vec<Vertex>>,
    /// Weighted size of each component.
    pub sizes: Vec<u64>,
    component_of: Vec<Option<usize>>,
    intervened: Vec<bool>,
}

impl ComponentDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_of(&self, v: Vertex) -> Option<usize> {
        self.component_of[v]
    }

    fn no_interventions(&self) -> bool {
        !self.intervened.iter().any(|&b| b)
    }
}

pub fn decompose(
    tree: &Skeleton,
    interventions: &InterventionSet,
) -> Result<ComponentDecomposition> {
    let n = tree.order();
    let mut intervened = vec![false; n];
    for &v in interventions.vertices() {
        tree.check_vertex(v)?;
        intervened[v] = true;
    }
    let components = tree.components(interventions.vertices())?;
    let mut component_of = vec![None; n];
    for (j, c) in components.iter().enumerate() {
        for &v in c {
            component_of[v] = Some(j);
        }
    }
    let boundaries = components
        .iter()
        .map(|c| {
            c.iter()
                .copied()
                .filter(|&v| tree.neighbors(v).iter().any(|&w| intervened[w]))
                .collect()
        })
        .collect();
    let sizes = components.iter().map(|c| tree.weight_of(c)).collect();
    Ok(ComponentDecomposition {
        components,
        boundaries,
        sizes,
        component_of,
        intervened,
    })
}

/// Closed-form loss when the root is `v`: zero on an intervened root,
/// otherwise weighted `|C_j|` minus `|B_j|` for the component holding `v`.
///
/// With no interventions at all every edge of the tree is unresolved, so the
/// loss is the weighted order minus one.
pub fn closed_form_loss(dec: &ComponentDecomposition, v: Vertex) -> Result<u64> {
    if v >= dec.intervened.len() {
        return Err(Error::UnknownVertex(format!("#{v}")));
    }
    if dec.intervened[v] {
        return Ok(0);
    }
    let j = dec.component_of[v].expect("non-intervened vertex lies in a component");
    if dec.no_interventions() {
        return Ok(dec.sizes[j] - 1);
    }
    Ok(dec.sizes[j] - dec.boundaries[j].len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageLoss {
    /// `Σ_v P(v) l(E, T_v)`.
    pub loss: f64,
    /// `Σ_j P(C_j) |C_j|`.
    pub surrogate: f64,
    /// `Σ_j P(C_j) |B_j|`.
    pub boundary_mass: f64,
}

pub fn average_loss(
    tree: &Skeleton,
    prior: &RootPrior,
    interventions: &InterventionSet,
) -> Result<AverageLoss> {
    let dec = decompose(tree, interventions)?;
    let mut loss = 0.0;
    for v in 0..tree.order() {
        loss += prior.mass(v) * closed_form_loss(&dec, v)? as f64;
    }
    let (surrogate, boundary_mass) = component_sums(&dec, prior);
    Ok(AverageLoss {
        loss,
        surrogate,
        boundary_mass,
    })
}

fn component_sums(dec: &ComponentDecomposition, prior: &RootPrior) -> (f64, f64) {
    let mut surrogate = 0.0;
    let mut boundary = 0.0;
    for (j, c) in dec.components.iter().enumerate() {
        let p = prior.mass_of(c);
        surrogate += p * dec.sizes[j] as f64;
        boundary += p * dec.boundaries[j].len() as f64;
    }
    (surrogate, boundary)
}

/// Surrogate loss `Σ_j P(C_j) |C_j|` alone.
pub fn surrogate_loss(
    tree: &Skeleton,
    prior: &RootPrior,
    interventions: &InterventionSet,
) -> Result<f64> {
    Ok(component_sums(&decompose(tree, interventions)?, prior).0)
}

/// Largest weighted component size; zero when nothing is left.
pub fn minimax_surrogate(dec: &ComponentDecomposition) -> u64 {
    dec.sizes.iter().copied().max().unwrap_or(0)
}

/// Sandwich bounds on the average loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Bounds {
    pub loss: f64,
    pub surrogate: f64,
    /// `L̂ - m`.
    pub loose_lower: f64,
    /// `L̂ - 1`.
    pub loose_upper: f64,
    /// `L̂ - m (1 - P(I))`.
    pub tight_lower: f64,
    /// `L̂ - (1 - P(I))`.
    pub tight_upper: f64,
    /// Whether `L̂ - m <= L <= L̂ - 1` holds here (vacuously true with no components).
    pub holds_loose_form: bool,
    pub holds_tight_form: bool,
}

pub fn theorem1_bounds(
    tree: &Skeleton,
    prior: &RootPrior,
    interventions: &InterventionSet,
) -> Result<Theorem1Bounds> {
    if interventions.is_empty() {
        return Err(Error::EmptyIntervention);
    }
    let dec = decompose(tree, interventions)?;
    let avg = average_loss(tree, prior, interventions)?;
    let m = interventions.len() as f64;
    let outside = 1.0 - prior.mass_of(interventions.vertices());
    let l = avg.loss;
    let s = avg.surrogate;
    let within = |lo: f64, hi: f64| lo <= l + PROB_TOL && l <= hi + PROB_TOL;
    Ok(Theorem1Bounds {
        loss: l,
        surrogate: s,
        loose_lower: s - m,
        loose_upper: s - 1.0,
        tight_lower: s - m * outside,
        tight_upper: s - outside,
        holds_loose_form: dec.is_empty() || within(s - m, s - 1.0),
        holds_tight_form: within(s - m * outside, s - outside),
    })
}

/// Every rooting of one tree, precomputed for repeated oracle queries.
pub struct OracleTable<'a> {
    tree: &'a Skeleton,
    rootings: Vec<RootedTree<'a>>,
}

impl<'a> OracleTable<'a> {
    pub fn new(tree: &'a Skeleton) -> Result<Self> {
        let rootings = (0..tree.order())
            .map(|w| RootedTree::new(tree, w))
            .collect::<Result<_>>()?;
        Ok(OracleTable { tree, rootings })
    }

    /// Does `T_w` show the same thing as `T_r` to an intervention on `x`?
    fn agrees_on(&self, w: Vertex, r: Vertex, x: Vertex) -> bool {
        let (tw, tr) = (&self.rootings[w], &self.rootings[r]);
        if tw.parent(x) != tr.parent(x) {
            return false;
        }
        let edges_agree = self
            .tree
            .neighbors(x)
            .iter()
            .all(|&y| (tw.parent(y) == Some(x)) == (tr.parent(y) == Some(x)));
        edges_agree
            && (0..self.tree.order())
                .all(|u| tw.is_strict_descendant(u, x) == tr.is_strict_descendant(u, x))
    }

    pub fn consistent_roots(
        &self,
        true_root: Vertex,
        interventions: &InterventionSet,
    ) -> Result<Vec<Vertex>> {
        self.tree.check_vertex(true_root)?;
        Ok((0..self.tree.order())
            .filter(|&w| {
                interventions
                    .vertices()
                    .iter()
                    .all(|&x| self.agrees_on(w, true_root, x))
            })
            .collect())
    }

    pub fn unresolved_edges(
        &self,
        true_root: Vertex,
        interventions: &InterventionSet,
    ) -> Result<Vec<(Vertex, Vertex)>> {
        let roots = self.consistent_roots(true_root, interventions)?;
        Ok(self
            .tree
            .edges()
            .iter()
            .copied()
            .filter(|&(a, b)| {
                let first = self.rootings[roots[0]].parent(b) == Some(a);
                roots[1..]
                    .iter()
                    .any(|&w| (self.rootings[w].parent(b) == Some(a)) != first)
            })
            .collect())
    }
}

/// Candidate roots indistinguishable from `true_root` after intervening on `I`.
pub fn oracle_consistent_roots(
    tree: &Skeleton,
    true_root: Vertex,
    interventions: &InterventionSet,
) -> Result<Vec<Vertex>> {
    OracleTable::new(tree)?.consistent_roots(true_root, interventions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleLoss {
    pub unresolved: Vec<(Vertex, Vertex)>,
    pub count: usize,
}

pub fn oracle_loss(
    tree: &Skeleton,
    true_root: Vertex,
    interventions: &InterventionSet,
) -> Result<OracleLoss> {
    let unresolved = OracleTable::new(tree)?.unresolved_edges(true_root, interventions)?;
    Ok(OracleLoss {
        count: unresolved.len(),
        unresolved,
    })
}

/// True iff exactly one vertex has no incoming arc.
pub fn check_single_root(order: usize, arcs: &[(Vertex, Vertex)]) -> bool {
    let mut has_parent = vec![false; order];
    for &(_, child) in arcs {
        has_parent[child] = true;
    }
    has_parent.iter().filter(|&&p| !p).count() == 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRow {
    pub tree: usize,
    pub root: Vertex,
    pub interventions: Vec<Vertex>,
    pub closed_form: u64,
    pub oracle: u64,
    pub closed_le_oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub instances: u64,
    pub agreements: u64,
    pub dominance_violations: u64,
    /// All rows when requested, otherwise only the disagreeing ones.
    pub rows: Vec<DiscrepancyRow>,
}

impl DiscrepancyReport {
    pub fn agreement_rate(&self) -> f64 {
        if self.instances == 0 {
            1.0
        } else {
            self.agreements as f64 / self.instances as f64
        }
    }
}

/// Compare closed form and oracle on every (tree, root, I) with `|I|` in `sizes`.
pub fn discrepancy_report(
    trees: &[Skeleton],
    sizes: RangeInclusive<usize>,
    keep_all_rows: bool,
) -> Result<DiscrepancyReport> {
    let parts: Vec<DiscrepancyReport> = trees
        .par_iter()
        .enumerate()
        .map(|(ti, tree)| {
            let table = OracleTable::new(tree)?;
            let n = tree.order();
            let mut rep = DiscrepancyReport {
                instances: 0,
                agreements: 0,
                dominance_violations: 0,
                rows: Vec::new(),
            };
            for k in sizes.clone() {
                if k > n {
                    break;
                }
                for set in (0..n).combinations(k) {
                    let iset = InterventionSet(set);
                    let dec = decompose(tree, &iset)?;
                    for root in 0..n {
                        let closed = closed_form_loss(&dec, root)?;
                        let oracle = table.unresolved_edges(root, &iset)?.len() as u64;
                        rep.instances += 1;
                        if closed == oracle {
                            rep.agreements += 1;
                        }
                        if closed > oracle {
                            rep.dominance_violations += 1;
                        }
                        if keep_all_rows || closed != oracle {
                            rep.rows.push(DiscrepancyRow {
                                tree: ti,
                                root,
                                interventions: iset.0.clone(),
                                closed_form: closed,
                                oracle,
                                closed_le_oracle: closed <= oracle,
                            });
                        }
                    }
                }
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let mut out = DiscrepancyReport {
        instances: 0,
        agreements: 0,
        dominance_violations: 0,
        rows: Vec::new(),
    };
    for p in parts {
        out.instances += p.instances;
        out.agreements += p.agreements;
        out.dominance_violations += p.dominance_violations;
        out.rows.extend(p.rows);
    }
    Ok(out)
}

/// Per-root line of a [`LossReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootLoss {
    pub root: String,
    pub closed_form_loss: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_loss: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unresolved_edges: Option<Vec<[String; 2]>>,
}

/// Everything `eval` reports about one intervention set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub interventions: Vec<String>,
    pub components: Vec<Vec<String>>,
    pub boundaries: Vec<Vec<String>>,
    pub average_loss: f64,
    pub surrogate_loss: f64,
    pub boundary_mass: f64,
    pub minimax_loss: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem1: Option<Theorem1Bounds>,
    pub per_root: Vec<RootLoss>,
}

/// Build a [`LossReport`], restricted to one root when `root` is given.
pub fn loss_report(
    tree: &Skeleton,
    prior: &RootPrior,
    interventions: &InterventionSet,
    root: Option<Vertex>,
    with_oracle: bool,
) -> Result<LossReport> {
    let dec = decompose(tree, interventions)?;
    let avg = average_loss(tree, prior, interventions)?;
    let names = |vs: &[Vertex]| {
        vs.iter()
            .map(|&v| tree.label(v).to_string())
            .collect::<Vec<_>>()
    };
    let table = if with_oracle {
        Some(OracleTable::new(tree)?)
    } else {
        None
    };
    let roots: Vec<Vertex> = match root {
        Some(r) => {
            tree.check_vertex(r)?;
            vec![r]
        }
        None => (0..tree.order()).collect(),
    };
    let mut per_root = Vec::with_capacity(roots.len());
    for r in roots {
        let unresolved = table
            .as_ref()
            .map(|t| t.unresolved_edges(r, interventions))
            .transpose()?;
        per_root.push(RootLoss {
            root: tree.label(r).to_string(),
            closed_form_loss: closed_form_loss(&dec, r)?,
            oracle_loss: unresolved.as_ref().map(|u| u.len() as u64),
            unresolved_edges: unresolved.map(|u| {
                u.into_iter()
                    .map(|(a, b)| [tree.label(a).to_string(), tree.label(b).to_string()])
                    .collect()
            }),
        });
    }
    Ok(LossReport {
        interventions: interventions.labels(tree),
        components: dec.components.iter().map(|c| names(c)).collect(),
        boundaries: dec.boundaries.iter().map(|b| names(b)).collect(),
        average_loss: avg.loss,
        surrogate_loss: avg.surrogate,
        boundary_mass: avg.boundary_mass,
        minimax_loss: minimax_surrogate(&dec),
        theorem1: if interventions.is_empty() {
            None
        } else {
            Some(theorem1_bounds(tree, prior, interventions)?)
        },
        per_root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, star_graph};
    use crate::prior::uniform_prior;

    fn iset(g: &Skeleton, labels: &[&str]) -> InterventionSet {
        InterventionSet::from_labels(g, labels).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn intervention_set_validation() {
        let p = path_graph(3);
        assert!(matches!(
            InterventionSet::new(&p, vec![1, 1]),
            Err(Error::DuplicateIntervention(_))
        ));
        assert!(matches!(
            InterventionSet::new(&p, vec![7]),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn decompose_examples() {
        let p = path_graph(5);
        let d = decompose(&p, &iset(&p, &["3"])).unwrap();
        assert_eq!(d.components, vec![vec![0, 1], vec![3, 4]]);
        assert_eq!(d.boundaries, vec![vec![1], vec![3]]);
        let d = decompose(&p, &iset(&p, &["1", "5"])).unwrap();
        assert_eq!(d.components, vec![vec![1, 2, 3]]);
        assert_eq!(d.boundaries, vec![vec![1, 3]]);
        let d = decompose(&p, &InterventionSet::empty()).unwrap();
        assert_eq!(d.components.len(), 1);
        assert!(d.boundaries[0].is_empty());
    }

    #[test]
    fn closed_form_examples() {
        let p = path_graph(5);
        let d = decompose(&p, &iset(&p, &["3"])).unwrap();
        assert_eq!(closed_form_loss(&d, 2).unwrap(), 0);
        assert_eq!(closed_form_loss(&d, 0).unwrap(), 1);
        let d = decompose(&p, &iset(&p, &["1", "5"])).unwrap();
        assert_eq!(closed_form_loss(&d, 2).unwrap(), 1);
        assert!(closed_form_loss(&d, 11).is_err());
    }

    #[test]
    fn average_loss_examples() {
        let p = path_graph(5);
        let u = uniform_prior(&p);
        let a = average_loss(&p, &u, &iset(&p, &["3"])).unwrap();
        assert!(close(a.loss, 0.8) && close(a.surrogate, 1.6));
        let a = average_loss(&p, &u, &iset(&p, &["2", "4"])).unwrap();
        assert!(close(a.surrogate, 0.6));
        let a = average_loss(&p, &u, &InterventionSet::empty()).unwrap();
        assert!(close(a.surrogate, 5.0));
    }

    #[test]
    fn loss_bracket_examples() {
        let p = path_graph(5);
        let u = uniform_prior(&p);
        let b = theorem1_bounds(&p, &u, &iset(&p, &["3"])).unwrap();
        assert!(close(b.loss, 0.8));
        assert!(close(b.tight_upper, 0.8));
        assert!(b.holds_tight_form);
        assert!(close(b.loose_upper, 0.6));
        assert!(!b.holds_loose_form);
        let all = iset(&p, &["1", "2", "3", "4", "5"]);
        let b = theorem1_bounds(&p, &u, &all).unwrap();
        assert!(close(b.loss, 0.0) && close(b.surrogate, 0.0));
        assert!(b.holds_loose_form);
        assert_eq!(
            theorem1_bounds(&p, &u, &InterventionSet::empty()),
            Err(Error::EmptyIntervention)
        );
    }

    #[test]
    fn minimax_examples() {
        let p = path_graph(5);
        let m = |l: &[&str]| minimax_surrogate(&decompose(&p, &iset(&p, l)).unwrap());
        assert_eq!(m(&["3"]), 2);
        assert_eq!(m(&["2", "4"]), 1);
        assert_eq!(m(&[]), 5);
    }

    #[test]
    fn oracle_examples() {
        let p = path_graph(5);
        assert_eq!(
            oracle_consistent_roots(&p, 2, &iset(&p, &["3"])).unwrap(),
            vec![2]
        );
        assert_eq!(
            oracle_consistent_roots(&p, 2, &iset(&p, &["1"])).unwrap(),
            vec![1, 2, 3, 4]
        );
        assert_eq!(
            oracle_consistent_roots(&p, 2, &iset(&p, &["1", "5"])).unwrap(),
            vec![1, 2, 3]
        );
        assert_eq!(oracle_loss(&p, 2, &iset(&p, &["3"])).unwrap().count, 0);
        assert_eq!(oracle_loss(&p, 2, &iset(&p, &["1"])).unwrap().count, 3);
        let o = oracle_loss(&p, 2, &iset(&p, &["1", "5"])).unwrap();
        assert_eq!(o.count, 2);
        assert_eq!(o.unresolved, vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn empty_intervention_leaves_every_edge() {
        let p = path_graph(5);
        let d = decompose(&p, &InterventionSet::empty()).unwrap();
        for r in 0..5 {
            assert_eq!(closed_form_loss(&d, r).unwrap(), 4);
            assert_eq!(
                oracle_loss(&p, r, &InterventionSet::empty()).unwrap().count,
                4
            );
        }
    }

    #[test]
    fn discrepancy_on_path5() {
        let rep = discrepancy_report(&[path_graph(5)], 2..=2, false).unwrap();
        assert!(rep.rows.iter().any(|r| r.root == 2
            && r.interventions == vec![0, 4]
            && r.closed_form == 1
            && r.oracle == 2));
        assert_eq!(rep.dominance_violations, 0);
        let rep = discrepancy_report(&[path_graph(4), star_graph(3)], 1..=1, false).unwrap();
        assert_eq!(rep.agreement_rate(), 1.0);
        let rep = discrepancy_report(&[path_graph(4)], 0..=0, true).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert_eq!(rep.agreement_rate(), 1.0);
    }

    #[test]
    fn single_root_examples() {
        let p = path_graph(5);
        assert!(check_single_root(
            5,
            &RootedTree::new(&p, 3).unwrap().arcs()
        ));
        assert!(!check_single_root(3, &[(0, 1), (2, 1)]));
        assert!(check_single_root(1, &[]));
    }

    #[test]
    fn loss_report_shapes() {
        let p = path_graph(5);
        let r = loss_report(
            &p,
            &uniform_prior(&p),
            &iset(&p, &["1", "5"]),
            Some(2),
            true,
        )
        .unwrap();
        assert_eq!(r.per_root.len(), 1);
        assert_eq!(r.per_root[0].closed_form_loss, 1);
        assert_eq!(r.per_root[0].oracle_loss, Some(2));
        assert_eq!(r.boundaries, vec![vec!["2".to_string(), "4".to_string()]]);
    }

    mod props {
        use super::*;
        use crate::synth::random_prufer_tree;
        use proptest::prelude::*;
        use rand::seq::index::sample;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn instance(n: usize, seed: u64) -> (Skeleton, RootPrior, Vec<Vertex>) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_prufer_tree(n, &mut rng);
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let prior = RootPrior::from_masses(
                &t,
                raw.iter().map(|m| m / total).collect(),
                crate::prior::PriorKind::Explicit,
            )
            .unwrap();
            let k = rng.random_range(1..=n);
            let picks = sample(&mut rng, n, k).into_vec();
            (t, prior, picks)
        }

        proptest! {
            #[test]
            fn identity_and_lower_bound(n in 1usize..40, seed in any::<u64>()) {
                let (t, prior, picks) = instance(n, seed);
                let i = InterventionSet::new(&t, picks).unwrap();
                let a = average_loss(&t, &prior, &i).unwrap();
                prop_assert!((a.loss - (a.surrogate - a.boundary_mass)).abs() < 1e-12);
                prop_assert!(a.surrogate - i.len() as f64 <= a.loss + 1e-12);
                prop_assert!(a.surrogate <= n as f64 + 1e-12);
                let b = theorem1_bounds(&t, &prior, &i).unwrap();
                prop_assert!(b.holds_tight_form);
            }

            #[test]
            fn uniform_surrogate_is_mean_square(n in 1usize..40, seed in any::<u64>()) {
                let (t, _, picks) = instance(n, seed);
                let i = InterventionSet::new(&t, picks).unwrap();
                let d = decompose(&t, &i).unwrap();
                let squares: u64 = d.components.iter().map(|c| (c.len() * c.len()) as u64).sum();
                let s = surrogate_loss(&t, &uniform_prior(&t), &i).unwrap();
                prop_assert!((s - squares as f64 / n as f64).abs() < 1e-12);
            }

            #[test]
            fn more_interventions_never_hurt(n in 2usize..40, seed in any::<u64>()) {
                let (t, prior, picks) = instance(n, seed);
                let k = picks.len();
                let small = InterventionSet::new(&t, picks[..k / 2].to_vec()).unwrap();
                let big = InterventionSet::new(&t, picks).unwrap();
                let (ds, db) = (decompose(&t, &small).unwrap(), decompose(&t, &big).unwrap());
                prop_assert!(surrogate_loss(&t, &prior, &big).unwrap() <= surrogate_loss(&t, &prior, &small).unwrap() + 1e-12);
                prop_assert!(minimax_surrogate(&db) <= minimax_surrogate(&ds));
                // refinement: every component under the larger set sits inside one under the smaller
                for c in &db.components {
                    let owner = ds.component_of(c[0]);
                    prop_assert!(c.iter().all(|&v| ds.component_of(v) == owner));
                }
            }

            #[test]
            fn intervening_on_root_resolves_everything(n in 1usize..60, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let t = random_prufer_tree(n, &mut rng);
                let root = rng.random_range(0..n);
                let i = InterventionSet::new(&t, vec![root]).unwrap();
                prop_assert_eq!(oracle_loss(&t, root, &i).unwrap().count, 0);
            }
        }
    }
}
