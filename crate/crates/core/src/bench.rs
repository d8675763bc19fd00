//! Experiment harness: parameter sweeps, the budget curve on a network
//! edge list, and wall-time scaling of the designer.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::chordal::{allocate_budget, contract, count_triangles};
use crate::error::{Error, Result};
use crate::exact::{
    binomial, brute_force_bayes, brute_force_minimax, lemma5_lower, theorem5b_lower,
};
use crate::graph::{Skeleton, Vertex};
use crate::loss::{decompose, minimax_surrogate, surrogate_loss, InterventionSet};
use crate::prior::PriorKind;
use crate::probal::{probal, probal_minimax, theorem3_upper};
use crate::synth::{attach_prior, derive_seed, gw_tree, GenSpec, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Probal,
    ProbalMinimax,
    OptimalBayes,
    OptimalMinimax,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Probal,
        Algorithm::ProbalMinimax,
        Algorithm::OptimalBayes,
        Algorithm::OptimalMinimax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Probal => "probal",
            Algorithm::ProbalMinimax => "probal-minimax",
            Algorithm::OptimalBayes => "optimal-bayes",
            Algorithm::OptimalMinimax => "optimal-minimax",
        }
    }

    pub fn is_optimal(self) -> bool {
        matches!(self, Algorithm::OptimalBayes | Algorithm::OptimalMinimax)
    }

    fn is_minimax(self) -> bool {
        matches!(self, Algorithm::ProbalMinimax | Algorithm::OptimalMinimax)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: Model,
    /// Used by the Galton-Watson model only.
    pub max_degree: usize,
    pub prior: PriorKind,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub cap: u128,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.prior == PriorKind::Explicit {
            return Err(Error::InvalidSweep(
                "sweeps take uniform or degree priors".into(),
            ));
        }
        for &n in &self.n {
            GenSpec {
                model: self.model,
                n,
                max_degree: self.max_degree,
                seed: 0,
            }
            .validate()?;
        }
        if self.algorithms.iter().any(|a| a.is_optimal()) {
            for &n in &self.n {
                for &m in &self.m {
                    let evaluations = binomial(n, m);
                    if evaluations > self.cap {
                        return Err(Error::InvalidSweep(format!(
                            "optimal search at n={n}, m={m} needs {evaluations} evaluations, cap is {}",
                            self.cap
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Seed of replicate `rep` at order `n`; shared by every budget so that
    /// budget sweeps run on the same trees.
    pub fn instance_seed(&self, n: usize, rep: usize) -> u64 {
        derive_seed(derive_seed(self.seed, n as u64), rep as u64)
    }
}

/// One CSV line. Column order is fixed by field order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub model: Model,
    pub prior: PriorKind,
    pub n: usize,
    pub m: usize,
    pub replicate: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Surrogate loss for Bayesian algorithms, largest component for minimax ones.
    pub loss: Option<f64>,
    pub rounds: Option<usize>,
    pub theorem3_upper: Option<f64>,
    /// Lower bound on the optimum: Bayes with a uniform prior, or minimax.
    pub lower_bound: Option<f64>,
    pub status: String,
    pub wall_ms: f64,
}

impl ResultRow {
    fn key(&self) -> (usize, usize, u64, Algorithm) {
        (self.n, self.m, self.seed, self.algorithm)
    }
}

pub const CSV_COLUMNS: [&str; 13] = [
    "model",
    "prior",
    "n",
    "m",
    "replicate",
    "seed",
    "algorithm",
    "loss",
    "rounds",
    "theorem3_upper",
    "lower_bound",
    "status",
    "wall_ms",
];

struct Outcome {
    loss: f64,
    rounds: Option<usize>,
    theorem3: Option<f64>,
}

fn run_one(tree: &Skeleton, spec: &SweepSpec, m: usize, alg: Algorithm) -> Result<Outcome> {
    let prior = attach_prior(tree, spec.prior)?;
    let n = tree.order();
    let score = |set: &InterventionSet| -> Result<f64> {
        if alg.is_minimax() {
            Ok(minimax_surrogate(&decompose(tree, set)?) as f64)
        } else {
            surrogate_loss(tree, &prior, set)
        }
    };
    let out = match alg {
        Algorithm::Probal | Algorithm::ProbalMinimax => {
            let (set, trace) = if alg == Algorithm::Probal {
                probal(tree, &prior, m)?
            } else {
                probal_minimax(tree, m)?
            };
            Outcome {
                loss: score(&set)?,
                rounds: Some(trace.rounds),
                theorem3: Some(theorem3_upper(trace.rounds, n as f64)),
            }
        }
        Algorithm::OptimalBayes => Outcome {
            loss: brute_force_bayes(tree, &prior, m, spec.cap)?.1,
            rounds: None,
            theorem3: None,
        },
        Algorithm::OptimalMinimax => Outcome {
            loss: brute_force_minimax(tree, m, spec.cap)?.1 as f64,
            rounds: None,
            theorem3: None,
        },
    };
    Ok(out)
}

/// Run every (n, m, replicate, algorithm) cell of a sweep.
///
/// Cells run in the rayon pool; rows come back sorted by
/// `(n, m, seed, algorithm)`. A failing cell yields a row whose status
/// carries the error and the sweep goes on.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut algorithms = spec.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    let cells: Vec<(usize, usize, usize)> = spec
        .n
        .iter()
        .flat_map(|&n| {
            spec.m
                .iter()
                .flat_map(move |&m| (0..spec.replicates).map(move |r| (n, m, r)))
        })
        .collect();
    if algorithms.is_empty() {
        return Ok(Vec::new());
    }
    let mut rows: Vec<ResultRow> = cells
        .par_iter()
        .flat_map_iter(|&(n, m, rep)| {
            let seed = spec.instance_seed(n, rep);
            let tree = GenSpec {
                model: spec.model,
                n,
                max_degree: spec.max_degree,
                seed,
            }
            .generate();
            algorithms
                .iter()
                .map(|&alg| {
                    let start = Instant::now();
                    let result = tree.as_ref().map_err(Clone::clone).and_then(|t| {
                        Ok((
                            run_one(t, spec, m, alg)?,
                            lower_bound(t, spec.prior, m, alg),
                        ))
                    });
                    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                    let base = ResultRow {
                        model: spec.model,
                        prior: spec.prior,
                        n,
                        m,
                        replicate: rep,
                        seed,
                        algorithm: alg,
                        loss: None,
                        rounds: None,
                        theorem3_upper: None,
                        lower_bound: None,
                        status: "ok".into(),
                        wall_ms,
                    };
                    match result {
                        Ok((out, lower)) => ResultRow {
                            loss: Some(out.loss),
                            rounds: out.rounds,
                            theorem3_upper: out.theorem3,
                            lower_bound: lower,
                            ..base
                        },
                        Err(e) => ResultRow {
                            status: format!("error: {e}"),
                            ..base
                        },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(rows)
}

fn lower_bound(t: &Skeleton, prior: PriorKind, m: usize, alg: Algorithm) -> Option<f64> {
    if alg.is_minimax() {
        theorem5b_lower(t.order(), m, t.max_degree()).ok()
    } else if prior == PriorKind::Uniform {
        lemma5_lower(t.order(), m, t.max_degree()).ok()
    } else {
        None
    }
}

/// Write rows as CSV with the fixed header; the header is written even
/// when there are no rows.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_COLUMNS)
        .map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrnComponent {
    pub id: usize,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub contracted_vertices: Option<usize>,
    /// `None` when the component was used, otherwise why it was skipped.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub budget: usize,
    /// Sum of per-component surrogate losses (each under its own normalized
    /// prior) divided by the vertex count of the used components.
    pub normalized_loss: f64,
    pub allocation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrnReport {
    pub prior: PriorKind,
    pub vertices: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
    pub components: Vec<GrnComponent>,
    /// Vertices in components that were used.
    pub used_vertices: usize,
    pub curve: Vec<CurvePoint>,
    pub non_increasing: bool,
}

struct Prepared {
    weight: u64,
    contracted: usize,
    /// Surrogate loss after the first `k` designer choices, `k = 0..`.
    losses: Vec<f64>,
}

fn prepare_component(g: &Skeleton, prior: PriorKind, max_budget: usize) -> Result<Prepared> {
    let dec = contract(g)?;
    let base = attach_prior(g, prior)?;
    let p = dec.lift_prior(&base)?;
    let t = &dec.contracted;
    let (set, _) = probal(t, &p, max_budget)?;
    // The designer's choices with a smaller budget are a prefix of these.
    let losses = (0..=set.len())
        .map(|k| {
            surrogate_loss(
                t,
                &p,
                &InterventionSet::new(t, set.vertices()[..k].to_vec())?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        weight: t.total_weight(),
        contracted: t.order(),
        losses,
    })
}

/// Budget curve on a (possibly directed) network.
///
/// Edges are symmetrized, self-loops and repeated pairs dropped. Each
/// connected component is contracted and designed on separately with its
/// share of the budget; components whose contraction is not a tree are
/// reported and left out of the curve.
pub fn grn_pipeline(
    edges: &[(String, String)],
    budgets: &[usize],
    prior: PriorKind,
) -> Result<GrnReport> {
    let mut self_loops = 0;
    let mut duplicates = 0;
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for (a, b) in edges {
        if a == b {
            self_loops += 1;
            continue;
        }
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if seen.insert(key) {
            kept.push((a.clone(), b.clone()));
        } else {
            duplicates += 1;
        }
    }
    let g = Skeleton::from_labeled_edges(&kept, &[] as &[&str], false)?;
    let parts = g.components(&[])?;
    let max_budget = budgets.iter().copied().max().unwrap_or(0);

    let prepared: Vec<(GrnComponent, Option<Prepared>)> = parts
        .par_iter()
        .enumerate()
        .map(|(id, part)| {
            let sub = induced(&g, part);
            let mut info = GrnComponent {
                id,
                vertices: part.len(),
                edges: sub.edge_count(),
                triangles: count_triangles(&sub),
                contracted_vertices: None,
                skipped: None,
            };
            match prepare_component(&sub, prior, max_budget.min(sub.order())) {
                Ok(p) => {
                    info.contracted_vertices = Some(p.contracted);
                    (info, Some(p))
                }
                Err(e) => {
                    info.skipped = Some(e.to_string());
                    (info, None)
                }
            }
        })
        .collect();

    let used: Vec<&Prepared> = prepared.iter().filter_map(|(_, p)| p.as_ref()).collect();
    let sizes: Vec<u64> = used.iter().map(|p| p.weight).collect();
    let used_vertices: u64 = sizes.iter().sum();
    let curve: Vec<CurvePoint> = budgets
        .iter()
        .map(|&budget| {
            let alloc = allocate_budget(&sizes, budget);
            let total: f64 = used
                .iter()
                .zip(&alloc.per_component)
                .map(|(p, &k)| p.losses[k.min(p.losses.len() - 1)])
                .sum();
            CurvePoint {
                budget,
                normalized_loss: if used_vertices == 0 {
                    0.0
                } else {
                    total / used_vertices as f64
                },
                allocation: alloc.per_component,
            }
        })
        .collect();
    let mut by_budget: Vec<&CurvePoint> = curve.iter().collect();
    by_budget.sort_by_key(|c| c.budget);
    let non_increasing = by_budget
        .windows(2)
        .all(|w| w[1].normalized_loss <= w[0].normalized_loss + 1e-12);
    Ok(GrnReport {
        prior,
        vertices: g.order(),
        edges: g.edge_count(),
        self_loops_dropped: self_loops,
        duplicate_edges_dropped: duplicates,
        components: prepared.into_iter().map(|(c, _)| c).collect(),
        used_vertices: used_vertices as usize,
        curve,
        non_increasing,
    })
}

/// Subgraph induced by a sorted vertex set, keeping original labels.
fn induced(g: &Skeleton, part: &[Vertex]) -> Skeleton {
    let local = |v: Vertex| part.binary_search(&v).ok();
    let labels = part.iter().map(|&v| g.label(v).to_string()).collect();
    let edges = g
        .edges()
        .iter()
        .filter_map(|&(u, v)| Some((local(u)?, local(v)?)))
        .collect();
    Skeleton::from_labels_and_edges(labels, edges, false)
        .expect("induced subgraph of a valid graph")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    /// Fastest of the repeats.
    pub wall_ms: f64,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of log time against log n.
    pub slope: f64,
    pub monotone: bool,
}

/// Time the designer on Galton-Watson trees with budget `n` (a full
/// decomposition). Runs are sequential so timings do not compete.
pub fn scaling_bench(
    ns: &[usize],
    max_degree: usize,
    repeats: usize,
    seed: u64,
) -> Result<ScalingReport> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let tree = gw_tree(n, max_degree, derive_seed(seed, n as u64))?;
        let prior = attach_prior(&tree, PriorKind::Uniform)?;
        let mut best = f64::INFINITY;
        let mut rounds = 0;
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            let (_, trace) = probal(&tree, &prior, n)?;
            best = best.min(start.elapsed().as_secs_f64() * 1e3);
            rounds = trace.rounds;
        }
        rows.push(ScalingRow {
            n,
            wall_ms: best,
            rounds,
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.wall_ms.max(1e-6).ln()))
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].wall_ms >= w[0].wall_ms);
    Ok(ScalingReport {
        slope: log_slope(&pts),
        rows,
        monotone,
    })
}

fn log_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
