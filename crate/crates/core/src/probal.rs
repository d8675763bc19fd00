//! The probability-balancing intervention designer.
//!
//! The tree is cut repeatedly into segments: connected subtrees that share
//! separator vertices. Each round takes the segment with the most root mass,
//! finds the vertex whose lobes split that mass most evenly into two wings,
//! intervenes on it, and replaces the segment by the two halves (separator
//! kept in both with zero mass). Halves that are stars around the separator,
//! or that contain only intervened vertices, are dropped.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Skeleton, Vertex};
use crate::loss::InterventionSet;
use crate::prior::{normalize_segment, uniform_prior, RootPrior, PROB_TOL};

/// Largest lobe count for which wings are found by exhaustive search.
pub const EXHAUSTIVE_WING_LIMIT: usize = 20;

/// Split lobe masses into two wings as evenly as possible.
///
/// Up to [`EXHAUSTIVE_WING_LIMIT`] lobes every bipartition is tried, with
/// lobe 0 always in the first wing and the first minimizer (by bitmask of the
/// remaining lobes) kept. Above that the sorted-prefix construction is used:
/// it guarantees both wings stay below 2/3 of the total whenever no single
/// lobe reaches half of it.
pub fn partition_lobes(masses: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let k = masses.len();
    if k == 0 {
        return (Vec::new(), Vec::new());
    }
    if k <= EXHAUSTIVE_WING_LIMIT {
        exhaustive_wings(masses)
    } else {
        prefix_wings(masses)
    }
}

fn exhaustive_wings(masses: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let k = masses.len();
    let total: f64 = masses.iter().sum();
    let rest = &masses[1..];
    // Subset sums of the remaining lobes, split into a low and a high table.
    let lo_bits = rest.len() / 2;
    let hi_bits = rest.len() - lo_bits;
    let subset_sums = |part: &[f64]| -> Vec<f64> {
        let mut sums = vec![0.0; 1 << part.len()];
        for mask in 1..sums.len() {
            let b = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + part[b];
        }
        sums
    };
    let lo = subset_sums(&rest[..lo_bits]);
    let hi = subset_sums(&rest[lo_bits..]);
    let mut best_mask = 0usize;
    let mut best_diff = f64::INFINITY;
    for h in 0..(1usize << hi_bits) {
        for l in 0..(1usize << lo_bits) {
            let w1 = masses[0] + lo[l] + hi[h];
            let diff = (2.0 * w1 - total).abs();
            // Masks ascend, so only a strict improvement replaces the incumbent.
            if diff < best_diff - PROB_TOL {
                best_diff = diff;
                best_mask = (h << lo_bits) | l;
            }
        }
    }
    let mut w1 = vec![0];
    let mut w2 = Vec::new();
    for i in 1..k {
        if best_mask >> (i - 1) & 1 == 1 {
            w1.push(i);
        } else {
            w2.push(i);
        }
    }
    (w1, w2)
}

fn prefix_wings(masses: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let total: f64 = masses.iter().sum();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| masses[a].total_cmp(&masses[b]).then(a.cmp(&b)));
    let limit = 2.0 / 3.0 * total;
    let mut acc = 0.0;
    let mut split = 0;
    for &i in &order {
        if acc + masses[i] > limit {
            break;
        }
        acc += masses[i];
        split += 1;
    }
    let sorted_set = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    if split == order.len() || total - acc <= limit {
        return (sorted_set(&order[..split]), sorted_set(&order[split..]));
    }
    let heavy = order[split];
    let rest: Vec<usize> = order.iter().copied().filter(|&i| i != heavy).collect();
    (vec![heavy], sorted_set(&rest))
}

/// A connected subtree of the master tree; zeroed vertices carry no mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    vertices: Vec<Vertex>,
    zeroed: Vec<Vertex>,
    mass: f64,
}

impl Segment {
    /// Segment from sorted vertex lists; mass is recomputed from the prior.
    pub fn new(mut vertices: Vec<Vertex>, mut zeroed: Vec<Vertex>, prior: &RootPrior) -> Self {
        vertices.sort_unstable();
        zeroed.sort_unstable();
        let mass = vertices
            .iter()
            .filter(|v| zeroed.binary_search(v).is_err())
            .map(|&v| prior.mass(v))
            .sum();
        Segment {
            vertices,
            zeroed,
            mass,
        }
    }

    pub fn whole(tree: &Skeleton, prior: &RootPrior) -> Self {
        Self::new((0..tree.order()).collect(), Vec::new(), prior)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn zeroed(&self) -> &[Vertex] {
        &self.zeroed
    }

    /// Unnormalized root mass of the non-zeroed vertices.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Every edge of the segment touches `c`.
    pub fn is_star_with_center(&self, tree: &Skeleton, c: Vertex) -> bool {
        self.contains(c) && self.vertices.iter().all(|&v| v == c || tree.has_edge(v, c))
    }

    /// Selection order: more mass first, then more vertices, then the
    /// lexicographically smaller vertex list.
    fn priority(&self, other: &Segment) -> Ordering {
        if (self.mass - other.mass).abs() > PROB_TOL {
            return other.mass.total_cmp(&self.mass);
        }
        other
            .len()
            .cmp(&self.len())
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// Best wing split of a candidate vertex inside a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct WingPartition {
    pub vertex: Vertex,
    /// Lobes within the segment, ordered by smallest vertex.
    pub lobes: Vec<Vec<Vertex>>,
    /// Normalized root mass of each lobe.
    pub lobe_masses: Vec<f64>,
    /// Lobe indices of each wing.
    pub wing1: Vec<usize>,
    pub wing2: Vec<usize>,
    pub wing1_mass: f64,
    pub wing2_mass: f64,
    /// Normalized mass of the vertex itself.
    pub vertex_mass: f64,
    pub unbalancedness: f64,
}

impl WingPartition {
    pub fn wing_vertices(&self, second: bool) -> Vec<Vertex> {
        let wing = if second { &self.wing2 } else { &self.wing1 };
        let mut vs: Vec<Vertex> = wing
            .iter()
            .flat_map(|&i| self.lobes[i].iter().copied())
            .collect();
        vs.sort_unstable();
        vs
    }

    /// Every lobe carries less than half of the segment mass.
    pub fn is_separator(&self) -> bool {
        self.lobe_masses.iter().all(|&m| m < 0.5 + PROB_TOL)
    }

    /// Both wings carry less than two thirds of the segment mass.
    pub fn wings_below_two_thirds(&self) -> bool {
        self.wing1_mass < 2.0 / 3.0 + PROB_TOL && self.wing2_mass < 2.0 / 3.0 + PROB_TOL
    }
}

/// Per-vertex summary computed while scanning a segment.
struct Candidate {
    local: usize,
    /// (smallest vertex, mass, child root or usize::MAX for the parent side)
    lobes: Vec<(Vertex, f64, usize)>,
    wing1: Vec<usize>,
    wing2: Vec<usize>,
    wing1_mass: f64,
    wing2_mass: f64,
    vertex_mass: f64,
    s: f64,
}

impl Candidate {
    /// Tie-break rank among equally balanced candidates; higher wins.
    fn rank(&self) -> (bool, bool) {
        let separator = self.lobes.iter().all(|l| l.1 < 0.5 + PROB_TOL);
        (separator, self.lobes.len() > 1)
    }
}

/// Find the vertex of `segment` with the most balanced wings.
///
/// Ties on unbalancedness prefer a separator (no lobe above half the mass),
/// then a vertex that is not a leaf of the segment, then the smaller index.
/// Without the first rule a zero-mass vertex with lobes 0.4 / 0.6 can tie
/// with a true separator and win on index.
pub fn find_sep(tree: &Skeleton, segment: &Segment, prior: &RootPrior) -> Result<WingPartition> {
    let measure = normalize_segment(prior, &segment.vertices, &segment.zeroed)?;
    let verts = &segment.vertices;
    let k = verts.len();
    let local_of = |v: Vertex| verts.binary_search(&v).ok();

    let adj: Vec<Vec<usize>> = verts
        .iter()
        .map(|&v| {
            tree.neighbors(v)
                .iter()
                .filter_map(|&w| local_of(w))
                .collect()
        })
        .collect();

    // Iterative DFS from local 0 for preorder, parents and subtree sums.
    let mut parent = vec![usize::MAX; k];
    let mut preorder = Vec::with_capacity(k);
    let mut seen = vec![false; k];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        preorder.push(u);
        for &w in adj[u].iter().rev() {
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                stack.push(w);
            }
        }
    }
    debug_assert_eq!(preorder.len(), k, "segment must be connected");
    let mut tin = vec![0; k];
    for (i, &u) in preorder.iter().enumerate() {
        tin[u] = i;
    }
    let mut sub_mass = measure.masses.clone();
    let mut sub_size = vec![1usize; k];
    let mut sub_min: Vec<Vertex> = verts.clone();
    for &u in preorder.iter().rev() {
        let p = parent[u];
        if p != usize::MAX {
            sub_mass[p] += sub_mass[u];
            sub_size[p] += sub_size[u];
            sub_min[p] = sub_min[p].min(sub_min[u]);
        }
    }
    let total = sub_mass[0];
    // Smallest vertex before / after each preorder position.
    let mut prefix_min = vec![usize::MAX; k + 1];
    let mut suffix_min = vec![usize::MAX; k + 1];
    for i in 0..k {
        prefix_min[i + 1] = prefix_min[i].min(verts[preorder[i]]);
    }
    for i in (0..k).rev() {
        suffix_min[i] = suffix_min[i + 1].min(verts[preorder[i]]);
    }

    let mut best: Option<Candidate> = None;
    for x in 0..k {
        let mut lobes: Vec<(Vertex, f64, usize)> = adj[x]
            .iter()
            .filter(|&&c| parent[c] == x)
            .map(|&c| (sub_min[c], sub_mass[c], c))
            .collect();
        if parent[x] != usize::MAX {
            let end = tin[x] + sub_size[x];
            let lo = prefix_min[tin[x]].min(suffix_min[end]);
            lobes.push((lo, total - sub_mass[x], usize::MAX));
        }
        lobes.sort_by_key(|l| l.0);
        let masses: Vec<f64> = lobes.iter().map(|l| l.1).collect();
        let (wing1, wing2) = partition_lobes(&masses);
        let wing1_mass: f64 = wing1.iter().map(|&i| masses[i]).sum();
        let wing2_mass: f64 = wing2.iter().map(|&i| masses[i]).sum();
        let vertex_mass = measure.masses[x];
        let s = (wing1_mass - 0.5 * (1.0 - vertex_mass)).abs();
        let cand = Candidate {
            local: x,
            lobes,
            wing1,
            wing2,
            wing1_mass,
            wing2_mass,
            vertex_mass,
            s,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                cand.s < b.s - PROB_TOL || (cand.s <= b.s + PROB_TOL && cand.rank() > b.rank())
            }
        };
        if better {
            best = Some(cand);
        }
    }
    let best = best.ok_or(Error::AllZeroSegment)?;

    let x = best.local;
    let lobes: Vec<Vec<Vertex>> = best
        .lobes
        .iter()
        .map(|&(_, _, child)| {
            let mut vs: Vec<Vertex> = if child == usize::MAX {
                let end = tin[x] + sub_size[x];
                preorder[..tin[x]]
                    .iter()
                    .chain(&preorder[end..])
                    .map(|&u| verts[u])
                    .collect()
            } else {
                preorder[tin[child]..tin[child] + sub_size[child]]
                    .iter()
                    .map(|&u| verts[u])
                    .collect()
            };
            vs.sort_unstable();
            vs
        })
        .collect();
    Ok(WingPartition {
        vertex: verts[x],
        lobes,
        lobe_masses: best.lobes.iter().map(|l| l.1).collect(),
        wing1: best.wing1,
        wing2: best.wing2,
        wing1_mass: best.wing1_mass,
        wing2_mass: best.wing2_mass,
        vertex_mass: best.vertex_mass,
        unbalancedness: best.s,
    })
}

/// Split a segment at the separator of `wp`: the first half drops the
/// second wing, the second half drops the first; the separator is zeroed in both.
pub fn div(segment: &Segment, wp: &WingPartition, prior: &RootPrior) -> (Segment, Segment) {
    let x = wp.vertex;
    let mut zeroed = segment.zeroed.clone();
    if let Err(pos) = zeroed.binary_search(&x) {
        zeroed.insert(pos, x);
    }
    let without = |drop: Vec<Vertex>| -> Segment {
        let vs: Vec<Vertex> = segment
            .vertices
            .iter()
            .copied()
            .filter(|v| drop.binary_search(v).is_err())
            .collect();
        let zs: Vec<Vertex> = zeroed
            .iter()
            .copied()
            .filter(|v| drop.binary_search(v).is_err())
            .collect();
        Segment::new(vs, zs, prior)
    };
    (
        without(wp.wing_vertices(true)),
        without(wp.wing_vertices(false)),
    )
}

/// One round of the designer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub segment: Vec<Vertex>,
    pub segment_mass: f64,
    pub separator: Vertex,
    /// False when the separator was already intervened on.
    pub added: bool,
    pub unbalancedness: f64,
    pub lobe_masses: Vec<f64>,
    pub wing_masses: [f64; 2],
    pub is_separator: bool,
    pub kept: Vec<Vec<Vertex>>,
    pub pruned: Vec<Vec<Vertex>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignTrace {
    pub rounds: usize,
    pub records: Vec<RoundRecord>,
}

/// Choose up to `budget` interventions on `tree` under `prior`.
pub fn probal(
    tree: &Skeleton,
    prior: &RootPrior,
    budget: usize,
) -> Result<(InterventionSet, DesignTrace)> {
    assert_eq!(prior.len(), tree.order(), "prior must match the tree");
    if !tree.is_tree() {
        return Err(Error::NotATree(
            "the designer runs on trees; contract cysts first".into(),
        ));
    }
    let cap = 2 * tree.order();
    let mut chosen = InterventionSet::empty();
    let mut is_chosen = vec![false; tree.order()];
    let mut pool = vec![Segment::whole(tree, prior)];
    let mut records = Vec::new();

    while chosen.len() < budget && !pool.is_empty() {
        let round = records.len() + 1;
        if round > cap {
            return Err(Error::RoundCapExceeded {
                rounds: round - 1,
                order: tree.order(),
            });
        }
        let pick = (0..pool.len())
            .min_by(|&a, &b| pool[a].priority(&pool[b]))
            .expect("pool is non-empty");
        let seg = pool.remove(pick);
        let wp = find_sep(tree, &seg, prior)?;
        let x = wp.vertex;
        let added = !is_chosen[x];
        if added {
            is_chosen[x] = true;
            chosen.push(x);
        }
        let (g1, g2) = div(&seg, &wp, prior);
        let mut kept = Vec::new();
        let mut pruned = Vec::new();
        for g in [g1, g2] {
            if g.is_star_with_center(tree, x) || g.vertices.iter().all(|&v| is_chosen[v]) {
                pruned.push(g.vertices.clone());
            } else {
                kept.push(g.vertices.clone());
                pool.push(g);
            }
        }
        records.push(RoundRecord {
            round,
            segment: seg.vertices.clone(),
            segment_mass: seg.mass,
            separator: x,
            added,
            unbalancedness: wp.unbalancedness,
            is_separator: wp.is_separator(),
            lobe_masses: wp.lobe_masses,
            wing_masses: [wp.wing1_mass, wp.wing2_mass],
            kept,
            pruned,
        });
    }
    Ok((
        chosen,
        DesignTrace {
            rounds: records.len(),
            records,
        },
    ))
}

/// Minimax variant: balance vertex counts, i.e. run under the
/// weight-proportional uniform prior.
pub fn probal_minimax(tree: &Skeleton, budget: usize) -> Result<(InterventionSet, DesignTrace)> {
    probal(tree, &uniform_prior(tree), budget)
}

/// `(2/3)^floor(log2(r + 1)) * n`.
pub fn theorem3_upper(rounds: usize, order: f64) -> f64 {
    let k = (rounds + 1).ilog2();
    (2.0f64 / 3.0).powi(k as i32) * order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, star_graph, validate_skeleton};
    use crate::loss::{decompose, minimax_surrogate, surrogate_loss};
    use crate::prior::{degree_prior, explicit_prior};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    /// Independent oracle: best |W1 - W2| over all 2^k two-colorings.
    fn brute_balance(masses: &[f64]) -> f64 {
        let k = masses.len();
        let total: f64 = masses.iter().sum();
        (0..1usize << k)
            .map(|mask| {
                let w1: f64 = (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| masses[i])
                    .sum();
                (2.0 * w1 - total).abs()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition_lobes(&[0.4, 0.4]), (vec![0], vec![1]));
        let (w1, w2) = partition_lobes(&[0.25, 0.25, 0.25]);
        let m = |w: &[usize]| w.len() as f64 * 0.25;
        let mut pair = [m(&w1), m(&w2)];
        pair.sort_by(f64::total_cmp);
        assert_eq!(pair, [0.25, 0.5]);
        assert_eq!(partition_lobes(&[0.45, 0.3, 0.25]), (vec![0], vec![1, 2]));
        assert_eq!(partition_lobes(&[]), (vec![], vec![]));
        assert_eq!(partition_lobes(&[1.0]), (vec![0], vec![]));
    }

    #[test]
    fn prefix_construction_keeps_wings_small() {
        // 25 lobes forces the constructive path.
        let mut masses = vec![0.02; 24];
        masses.push(0.45);
        let total: f64 = masses.iter().sum();
        let (w1, w2) = partition_lobes(&masses);
        assert_eq!(w1.len() + w2.len(), 25);
        for w in [&w1, &w2] {
            let s: f64 = w.iter().map(|&i| masses[i]).sum();
            assert!(s < 2.0 / 3.0 * total);
        }
    }

    #[test]
    fn find_sep_examples() {
        let p = path_graph(5);
        let u = uniform_prior(&p);
        let wp = find_sep(&p, &Segment::whole(&p, &u), &u).unwrap();
        assert_eq!(wp.vertex, 2);
        assert!(close(wp.unbalancedness, 0.0));
        assert_eq!(wp.wing_vertices(false), vec![0, 1]);
        assert_eq!(wp.wing_vertices(true), vec![3, 4]);

        let seg = Segment::new(vec![0, 1, 2], vec![2], &u);
        let wp = find_sep(&p, &seg, &u).unwrap();
        assert_eq!(wp.vertex, 1);
        assert!(close(wp.unbalancedness, 0.25));

        let s = star_graph(3);
        let us = uniform_prior(&s);
        let wp = find_sep(&s, &Segment::whole(&s, &us), &us).unwrap();
        assert_eq!(wp.vertex, 0);
        assert!(close(wp.unbalancedness, 0.125));

        let all_zero = Segment::new(vec![1, 2], vec![1, 2], &u);
        assert_eq!(find_sep(&p, &all_zero, &u), Err(Error::AllZeroSegment));
    }

    #[test]
    fn ties_prefer_separators() {
        // Five unit masses remain. Zeroed 0, 3 and 6 all reach s = 0.1, but
        // only 3 keeps every lobe at or below one half.
        let edges = [
            (0, 1),
            (1, 2),
            (0, 3),
            (3, 4),
            (4, 5),
            (3, 6),
            (6, 7),
            (7, 8),
        ];
        let t = Skeleton::from_index_edges(9, &edges, true).unwrap();
        let u = uniform_prior(&t);
        let seg = Segment::new((0..9).collect(), vec![0, 3, 4, 6], &u);
        let wp = find_sep(&t, &seg, &u).unwrap();
        assert_eq!(wp.vertex, 3);
        assert!(close(wp.unbalancedness, 0.1));
        assert!(wp.is_separator());
    }

    #[test]
    fn minimum_unbalancedness_need_not_be_a_separator() {
        let edges = [
            ("1", "2"),
            ("1", "4"),
            ("2", "5"),
            ("2", "6"),
            ("4", "9"),
            ("9", "16"),
            ("9", "17"),
            ("16", "25"),
        ];
        let t = validate_skeleton(&edges, true).unwrap();
        let raw = [
            ("1", 1.0),
            ("2", 3.0),
            ("4", 1.0),
            ("5", 1.0),
            ("6", 1.0),
            ("9", 3.0),
            ("16", 2.0),
            ("17", 1.0),
            ("25", 1.0),
        ];
        let table: Vec<(&str, f64)> = raw.iter().map(|&(l, m)| (l, m / 14.0)).collect();
        let p = explicit_prior(&t, &table).unwrap();
        let ix = |l: &str| t.index_of(l).unwrap();
        let seg = Segment::new(
            (0..t.order()).collect(),
            vec![ix("1"), ix("4"), ix("25")],
            &p,
        );
        let wp = find_sep(&t, &seg, &p).unwrap();
        // Vertex 1 splits the remaining mass 5/11 : 6/11, so s = 1/22, but its
        // heavier lobe exceeds one half. The separator 9 only reaches s = 1/11.
        assert_eq!(t.label(wp.vertex), "1");
        assert!(close(wp.unbalancedness, 1.0 / 22.0));
        assert!(!wp.is_separator());
        assert!(wp.wings_below_two_thirds());
    }

    #[test]
    fn div_examples() {
        let p = path_graph(5);
        let u = uniform_prior(&p);
        let whole = Segment::whole(&p, &u);
        let wp = find_sep(&p, &whole, &u).unwrap();
        let (g1, g2) = div(&whole, &wp, &u);
        assert_eq!(g1.vertices(), &[0, 1, 2]);
        assert_eq!(g2.vertices(), &[2, 3, 4]);
        assert_eq!(g1.zeroed(), &[2]);
        assert!(close(g1.mass(), 0.4));

        // leaf separator: second wing empty
        let leaf = WingPartition {
            vertex: 0,
            lobes: vec![vec![1, 2, 3, 4]],
            lobe_masses: vec![1.0],
            wing1: vec![0],
            wing2: vec![],
            wing1_mass: 1.0,
            wing2_mass: 0.0,
            vertex_mass: 0.0,
            unbalancedness: 0.5,
        };
        let (g1, g2) = div(&whole, &leaf, &u);
        assert_eq!(g1.vertices(), &[0, 1, 2, 3, 4]);
        assert_eq!(g1.zeroed(), &[0]);
        assert_eq!(g2.vertices(), &[0]);

        let edge = path_graph(2);
        let ue = uniform_prior(&edge);
        let seg = Segment::whole(&edge, &ue);
        let wp = find_sep(&edge, &seg, &ue).unwrap();
        let (g1, g2) = div(&seg, &wp, &ue);
        assert_eq!(g1.len() + g2.len(), 3);
        assert!(
            g1.is_star_with_center(&edge, wp.vertex) && g2.is_star_with_center(&edge, wp.vertex)
        );
    }

    #[test]
    fn probal_examples() {
        let p = path_graph(5);
        let u = uniform_prior(&p);
        let (i, trace) = probal(&p, &u, 2).unwrap();
        assert_eq!(i.vertices(), &[2, 1]);
        assert_eq!(trace.rounds, 2);
        assert!(close(surrogate_loss(&p, &u, &i).unwrap(), 1.0));

        let s = star_graph(3);
        for prior in [uniform_prior(&s), degree_prior(&s).unwrap()] {
            let (i, trace) = probal(&s, &prior, 1).unwrap();
            assert_eq!(i.vertices(), &[0]);
            assert!(trace.records[0].kept.is_empty());
            // pool emptied, so a larger budget changes nothing
            let (i3, _) = probal(&s, &prior, 3).unwrap();
            assert_eq!(i3.vertices(), &[0]);
        }

        let (i, trace) = probal(&p, &u, 0).unwrap();
        assert!(i.is_empty());
        assert_eq!(trace.rounds, 0);
    }

    #[test]
    fn minimax_examples() {
        let p = path_graph(5);
        let (i, _) = probal_minimax(&p, 2).unwrap();
        assert_eq!(i.vertices(), &[2, 1]);
        assert_eq!(minimax_surrogate(&decompose(&p, &i).unwrap()), 2);
        let p3 = path_graph(3);
        let (i, _) = probal_minimax(&p3, 1).unwrap();
        assert_eq!(i.vertices(), &[1]);
        assert_eq!(minimax_surrogate(&decompose(&p3, &i).unwrap()), 1);
        let s = star_graph(6);
        let (i, _) = probal_minimax(&s, 1).unwrap();
        assert_eq!(i.vertices(), &[0]);
        assert_eq!(minimax_surrogate(&decompose(&s, &i).unwrap()), 1);
    }

    #[test]
    fn round_bound_examples() {
        assert!((theorem3_upper(1, 100.0) - 200.0 / 3.0).abs() < 1e-9);
        assert!((theorem3_upper(3, 100.0) - 400.0 / 9.0).abs() < 1e-9);
        assert_eq!(theorem3_upper(1, 0.0), 0.0);
        assert_eq!(theorem3_upper(2, 9.0), 6.0);
    }

    #[test]
    fn single_vertex_tree() {
        let p = path_graph(1);
        let u = uniform_prior(&p);
        let (i, t) = probal(&p, &u, 3).unwrap();
        assert_eq!(i.vertices(), &[0]);
        assert_eq!(t.rounds, 1);
    }

    mod props {
        use super::*;
        use crate::prior::PriorKind;
        use crate::synth::random_prufer_tree;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        proptest! {
            #[test]
            fn exhaustive_wings_are_optimal(masses in prop::collection::vec(0.0f64..1.0, 1..12)) {
                let (w1, w2) = partition_lobes(&masses);
                let mut all: Vec<usize> = w1.iter().chain(&w2).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..masses.len()).collect::<Vec<_>>());
                let a: f64 = w1.iter().map(|&i| masses[i]).sum();
                let b: f64 = w2.iter().map(|&i| masses[i]).sum();
                prop_assert!(((a - b).abs() - brute_balance(&masses)).abs() < 1e-9);
            }

            #[test]
            fn trace_invariants(n in 1usize..80, seed in any::<u64>(), budget in 0usize..30, degree in any::<bool>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let t = random_prufer_tree(n, &mut rng);
                let prior = if degree && n >= 2 {
                    degree_prior(&t).unwrap()
                } else {
                    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
                    let s: f64 = raw.iter().sum();
                    RootPrior::from_masses(&t, raw.iter().map(|m| m / s).collect(), PriorKind::Explicit).unwrap()
                };
                let (i, trace) = probal(&t, &prior, budget).unwrap();
                prop_assert!(i.len() <= budget);
                prop_assert!(trace.rounds <= 2 * n);
                // Budget is used up unless the pool ran dry, in which case
                // any larger budget yields the same design.
                if i.len() < budget {
                    prop_assert_eq!(&probal(&t, &prior, n + 1).unwrap().0, &i);
                }
                let mut leaf_picks = vec![0; n];
                for r in &trace.records {
                    if t.degree(r.separator) <= 1 {
                        leaf_picks[r.separator] += 1;
                    }
                    // A non-leaf separator strictly shrinks both halves.
                    let seg_deg = r.segment.iter().filter(|&&v| t.has_edge(v, r.separator)).count();
                    if seg_deg >= 2 {
                        for half in r.kept.iter().chain(&r.pruned) {
                            prop_assert!(half.len() < r.segment.len());
                        }
                    }
                }
                prop_assert!(leaf_picks.iter().all(|&c| c <= 1));
                let s = surrogate_loss(&t, &prior, &i).unwrap();
                if trace.rounds >= 1 {
                    prop_assert!(s <= theorem3_upper(trace.rounds, n as f64) + 1e-9);
                }
                // Deterministic rerun.
                let again = probal(&t, &prior, budget).unwrap();
                prop_assert_eq!(again.0, i);
            }
        }
    }
}
