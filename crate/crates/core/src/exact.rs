//! Exhaustive optimal designs, lower bounds and approximation factors.
//!
//! The brute force is an oracle: it walks all `C(n, m)` subsets in
//! lexicographic order and returns the first minimizer.

use std::ops::RangeInclusive;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Skeleton, Vertex};
use crate::loss::{decompose, minimax_surrogate, surrogate_loss, InterventionSet};
use crate::prior::{RootPrior, PROB_TOL};
use crate::probal::{probal, probal_minimax};

/// Default number of subset evaluations a brute-force search may perform.
pub const DEFAULT_EVAL_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bayes,
    Minimax,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bayes" => Ok(Mode::Bayes),
            "minimax" => Ok(Mode::Minimax),
            _ => Err(format!("unknown mode `{s}`, expected bayes or minimax")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Bayes => "bayes",
            Mode::Minimax => "minimax",
        })
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n as u128 - i) / (i + 1);
    }
    acc
}

/// Reusable scratch space for scoring one subset at a time.
struct Scorer<'a> {
    tree: &'a Skeleton,
    masses: Option<&'a [f64]>,
    blocked: Vec<bool>,
    seen: Vec<u32>,
    stamp: u32,
    stack: Vec<Vertex>,
}

impl<'a> Scorer<'a> {
    fn new(tree: &'a Skeleton, masses: Option<&'a [f64]>) -> Self {
        let n = tree.order();
        Scorer {
            tree,
            masses,
            blocked: vec![false; n],
            seen: vec![0; n],
            stamp: 0,
            stack: Vec::new(),
        }
    }

    /// Surrogate (with masses) or largest component weight (without).
    fn score(&mut self, subset: &[Vertex]) -> f64 {
        for &v in subset {
            self.blocked[v] = true;
        }
        self.stamp += 1;
        let mut total = 0.0;
        let mut worst = 0u64;
        for s in 0..self.tree.order() {
            if self.blocked[s] || self.seen[s] == self.stamp {
                continue;
            }
            self.seen[s] = self.stamp;
            self.stack.push(s);
            let mut size = 0u64;
            let mut mass = 0.0;
            while let Some(u) = self.stack.pop() {
                size += self.tree.weight(u);
                if let Some(p) = self.masses {
                    mass += p[u];
                }
                for &w in self.tree.neighbors(u) {
                    if !self.blocked[w] && self.seen[w] != self.stamp {
                        self.seen[w] = self.stamp;
                        self.stack.push(w);
                    }
                }
            }
            total += mass * size as f64;
            worst = worst.max(size);
        }
        for &v in subset {
            self.blocked[v] = false;
        }
        if self.masses.is_some() {
            total
        } else {
            worst as f64
        }
    }
}

/// Lexicographically first size-`m` subset whose score is within `tol` of the minimum.
fn search(
    tree: &Skeleton,
    masses: Option<&[f64]>,
    m: usize,
    cap: u128,
    tol: f64,
) -> Result<(Vec<Vertex>, f64)> {
    let n = tree.order();
    if m > n {
        return Err(Error::BudgetExceedsOrder {
            budget: m,
            order: n,
        });
    }
    let evaluations = binomial(n, m);
    if evaluations > cap {
        return Err(Error::SearchSpaceTooLarge { evaluations, cap });
    }
    if m == 0 {
        return Ok((Vec::new(), Scorer::new(tree, masses).score(&[])));
    }
    // Subsets are grouped by their smallest element; within a group the
    // remaining elements run in lexicographic order, so groups in ascending
    // order reproduce the global lexicographic order.
    let group = |first: Vertex| {
        (first + 1..n).combinations(m - 1).map(move |mut rest| {
            rest.insert(0, first);
            rest
        })
    };
    let best = (0..n)
        .into_par_iter()
        .map_init(
            || Scorer::new(tree, masses),
            |sc, first| {
                group(first)
                    .map(|s| sc.score(&s))
                    .fold(f64::INFINITY, f64::min)
            },
        )
        .reduce(|| f64::INFINITY, f64::min);
    let winner = (0..n)
        .into_par_iter()
        .map_init(
            || Scorer::new(tree, masses),
            |sc, first| group(first).find(|s| sc.score(s) <= best + tol),
        )
        .find_first(|hit| hit.is_some())
        .flatten()
        .expect("the minimum is attained");
    let value = Scorer::new(tree, masses).score(&winner);
    Ok((winner, value))
}

/// Size-`m` set minimizing the surrogate loss; the lexicographically
/// smallest among minimizers (within `1e-12`).
pub fn brute_force_bayes(
    tree: &Skeleton,
    prior: &RootPrior,
    m: usize,
    cap: u128,
) -> Result<(InterventionSet, f64)> {
    assert_eq!(prior.len(), tree.order(), "prior must match the tree");
    let (set, value) = search(tree, Some(prior.masses()), m, cap, PROB_TOL)?;
    Ok((InterventionSet::new(tree, set)?, value))
}

/// Size-`m` set minimizing the largest weighted component; ties broken lexicographically.
pub fn brute_force_minimax(tree: &Skeleton, m: usize, cap: u128) -> Result<(InterventionSet, u64)> {
    let (set, value) = search(tree, None, m, cap, 0.0)?;
    Ok((InterventionSet::new(tree, set)?, value as u64))
}

/// `(n - m)^2 / (n (Δ m - 1))`; zero once every vertex is intervened.
pub fn lemma5_lower(n: usize, m: usize, max_degree: usize) -> Result<f64> {
    if m >= n {
        return Ok(0.0);
    }
    let dm = max_degree * m;
    if dm <= 1 {
        return Err(Error::DegenerateBound(dm));
    }
    let gap = (n - m) as f64;
    Ok(gap * gap / (n as f64 * (dm - 1) as f64))
}

/// `(n - m) / (Δ m - 1)`; zero once every vertex is intervened.
pub fn theorem5b_lower(n: usize, m: usize, max_degree: usize) -> Result<f64> {
    if m >= n {
        return Ok(0.0);
    }
    let dm = max_degree * m;
    if dm <= 1 {
        return Err(Error::DegenerateBound(dm));
    }
    Ok((n - m) as f64 / (dm - 1) as f64)
}

/// `1.5 (m ∧ r)^{log2(2/3)} (Δ m - 1) / (1 - ε)^k`, with `k = 2` for the
/// Bayesian objective and `k = 1` for minimax.
pub fn rho(m: usize, rounds: usize, max_degree: usize, epsilon: f64, mode: Mode) -> Result<f64> {
    if !(epsilon < 1.0) {
        return Err(Error::BudgetFractionTooLarge(epsilon));
    }
    let dm = max_degree * m;
    if dm <= 1 || rounds == 0 {
        return Err(Error::DegenerateBound(if rounds == 0 { 0 } else { dm }));
    }
    let mr = m.min(rounds) as f64;
    let exponent = (2.0f64 / 3.0).log2();
    let power = match mode {
        Mode::Bayes => 2,
        Mode::Minimax => 1,
    };
    Ok(1.5 * mr.powf(exponent) * (dm - 1) as f64 / (1.0 - epsilon).powi(power))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub max_degree: usize,
    /// `None` where the bound is undefined.
    pub lemma5: Option<f64>,
    pub theorem5b: Option<f64>,
    pub rho: Option<f64>,
    /// Budget fraction `m / n`.
    pub epsilon: f64,
    /// `m ∧ r`.
    pub min_budget_rounds: usize,
}

pub fn bounds_report(tree: &Skeleton, m: usize, rounds: usize, mode: Mode) -> BoundsReport {
    let n = tree.order();
    let d = tree.max_degree();
    let epsilon = m as f64 / n as f64;
    BoundsReport {
        max_degree: d,
        lemma5: lemma5_lower(n, m, d).ok(),
        theorem5b: theorem5b_lower(n, m, d).ok(),
        rho: rho(m, rounds, d, epsilon, mode).ok(),
        epsilon,
        min_budget_rounds: m.min(rounds),
    }
}

/// One instance of an approximation study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub instance: usize,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub rounds: usize,
    pub probal_loss: f64,
    pub optimal_loss: f64,
    /// `probal / optimal`, with `0 / 0` reported as 1.
    pub ratio: f64,
    pub rho: Option<f64>,
    /// `ratio <= ρ`; `None` where ρ is undefined.
    pub within_rho: Option<bool>,
    /// The Bayes or minimax lower bound at `n, m, Δ`.
    pub lower_bound: Option<f64>,
    pub lower_bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStudy {
    pub mode: Mode,
    pub rows: Vec<RatioRow>,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub rho_violations: usize,
    pub rho_undefined: usize,
    pub lower_bound_violations: usize,
    pub lower_bound_undefined: usize,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() < PROB_TOL {
        if num.abs() < PROB_TOL {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

fn ratio_row(
    instance: usize,
    tree: &Skeleton,
    prior: &RootPrior,
    m: usize,
    mode: Mode,
    cap: u128,
) -> Result<RatioRow> {
    let n = tree.order();
    let (probal_loss, optimal_loss, rounds) = match mode {
        Mode::Bayes => {
            let (set, trace) = probal(tree, prior, m)?;
            let ours = surrogate_loss(tree, prior, &set)?;
            (
                ours,
                brute_force_bayes(tree, prior, m, cap)?.1,
                trace.rounds,
            )
        }
        Mode::Minimax => {
            let (set, trace) = probal_minimax(tree, m)?;
            let ours = minimax_surrogate(&decompose(tree, &set)?) as f64;
            (
                ours,
                brute_force_minimax(tree, m, cap)?.1 as f64,
                trace.rounds,
            )
        }
    };
    let bounds = bounds_report(tree, m, rounds, mode);
    let r = ratio(probal_loss, optimal_loss);
    let lower_bound = match mode {
        Mode::Bayes => bounds.lemma5,
        Mode::Minimax => bounds.theorem5b,
    };
    let slack = |x: f64| 1e-9 * x.abs().max(1.0);
    Ok(RatioRow {
        instance,
        n,
        m,
        max_degree: bounds.max_degree,
        rounds,
        probal_loss,
        optimal_loss,
        ratio: r,
        rho: bounds.rho,
        within_rho: bounds.rho.map(|p| r <= p + slack(p)),
        lower_bound,
        lower_bound_holds: lower_bound.map(|b| b <= optimal_loss + slack(b)),
    })
}

/// ProBal against the brute-force optimum on every instance and every
/// budget in `budgets` not exceeding the instance order.
pub fn approx_ratio_study(
    instances: &[(Skeleton, RootPrior)],
    budgets: RangeInclusive<usize>,
    mode: Mode,
    cap: u128,
) -> Result<RatioStudy> {
    let jobs: Vec<(usize, usize)> = instances
        .iter()
        .enumerate()
        .flat_map(|(i, (t, _))| {
            budgets
                .clone()
                .filter(move |&m| m <= t.order())
                .map(move |m| (i, m))
        })
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, m)| ratio_row(i, &instances[i].0, &instances[i].1, m, mode, cap))
        .collect::<Result<Vec<_>>>()?;
    // Full budgets leave the optimum at zero while the designer stops early,
    // so ratios are aggregated only where the approximation factor applies.
    let finite: Vec<f64> = rows
        .iter()
        .filter(|r| r.rho.is_some())
        .map(|r| r.ratio)
        .collect();
    let mean_ratio = if finite.is_empty() {
        1.0
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let max_ratio = finite.iter().copied().fold(1.0, f64::max);
    let count = |f: &dyn Fn(&RatioRow) -> bool| rows.iter().filter(|r| f(r)).count();
    Ok(RatioStudy {
        mode,
        mean_ratio,
        max_ratio,
        rho_violations: count(&|r| r.within_rho == Some(false)),
        rho_undefined: count(&|r| r.rho.is_none()),
        lower_bound_violations: count(&|r| r.lower_bound_holds == Some(false)),
        lower_bound_undefined: count(&|r| r.lower_bound.is_none()),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, star_graph};
    use crate::prior::{degree_prior, uniform_prior};
    use crate::synth::{labeled_trees, random_prufer_tree};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn labels(t: &Skeleton, s: &InterventionSet) -> Vec<String> {
        s.labels(t)
    }

    /// Independent oracle: every subset as a bitmask, scored with the
    /// library's decomposition, first minimizer in lexicographic order.
    fn bitmask_optimum(t: &Skeleton, p: &RootPrior, m: usize, minimax: bool) -> (Vec<Vertex>, f64) {
        let n = t.order();
        let mut all: Vec<(Vec<Vertex>, f64)> = (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize == m)
            .map(|mask| {
                let set: Vec<Vertex> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                let i = InterventionSet::new(t, set.clone()).unwrap();
                let score = if minimax {
                    minimax_surrogate(&decompose(t, &i).unwrap()) as f64
                } else {
                    surrogate_loss(t, p, &i).unwrap()
                };
                (set, score)
            })
            .collect();
        all.sort_by(|a, b| a.0.cmp(&b.0));
        let best = all.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        all.into_iter().find(|x| x.1 <= best + PROB_TOL).unwrap()
    }

    #[test]
    fn bayes_examples() {
        let t = path_graph(5);
        let p = uniform_prior(&t);
        let (s, v) = brute_force_bayes(&t, &p, 2, DEFAULT_EVAL_CAP).unwrap();
        assert_eq!(labels(&t, &s), ["2", "4"]);
        assert!(close(v, 0.6));
        let (s, v) = brute_force_bayes(&t, &p, 1, DEFAULT_EVAL_CAP).unwrap();
        assert_eq!(labels(&t, &s), ["3"]);
        assert!(close(v, 1.6));
        let (s, v) = brute_force_bayes(&t, &p, 5, DEFAULT_EVAL_CAP).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn minimax_examples() {
        let t = path_graph(5);
        let (s, v) = brute_force_minimax(&t, 2, DEFAULT_EVAL_CAP).unwrap();
        assert_eq!(
            (labels(&t, &s), v),
            (vec!["2".to_string(), "4".to_string()], 1)
        );
        let (s, v) = brute_force_minimax(&t, 1, DEFAULT_EVAL_CAP).unwrap();
        assert_eq!((labels(&t, &s), v), (vec!["3".to_string()], 2));
        let t = path_graph(2);
        let (s, v) = brute_force_minimax(&t, 1, DEFAULT_EVAL_CAP).unwrap();
        assert_eq!((labels(&t, &s), v), (vec!["1".to_string()], 1));
    }

    #[test]
    fn search_limits() {
        let t = path_graph(40);
        let p = uniform_prior(&t);
        assert_eq!(
            brute_force_bayes(&t, &p, 20, DEFAULT_EVAL_CAP),
            Err(Error::SearchSpaceTooLarge {
                evaluations: binomial(40, 20),
                cap: DEFAULT_EVAL_CAP
            })
        );
        assert_eq!(
            brute_force_minimax(&t, 41, DEFAULT_EVAL_CAP),
            Err(Error::BudgetExceedsOrder {
                budget: 41,
                order: 40
            })
        );
        let (s, v) = brute_force_bayes(&t, &p, 0, DEFAULT_EVAL_CAP).unwrap();
        assert!(s.is_empty());
        assert!(close(v, 40.0));
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn bound_examples() {
        assert!(close(lemma5_lower(100, 5, 3).unwrap(), 9025.0 / 1400.0));
        assert!(close(lemma5_lower(5, 2, 2).unwrap(), 0.6));
        assert_eq!(lemma5_lower(7, 7, 3).unwrap(), 0.0);
        assert!(close(theorem5b_lower(5, 2, 2).unwrap(), 1.0));
        assert!(close(theorem5b_lower(100, 5, 3).unwrap(), 95.0 / 14.0));
        assert_eq!(theorem5b_lower(9, 9, 2).unwrap(), 0.0);
        assert_eq!(lemma5_lower(2, 1, 1), Err(Error::DegenerateBound(1)));
        assert_eq!(theorem5b_lower(2, 1, 1), Err(Error::DegenerateBound(1)));
    }

    #[test]
    fn rho_examples() {
        assert!(close(
            rho(2, 2, 2, 0.4, Mode::Bayes).unwrap(),
            1.5 * (2.0 / 3.0) * 3.0 / 0.36
        ));
        assert!(close(
            rho(2, 2, 2, 0.4, Mode::Bayes).unwrap(),
            8.333333333333334
        ));
        assert!(close(rho(2, 2, 2, 0.4, Mode::Minimax).unwrap(), 5.0));
        assert!(close(rho(1, 1, 2, 0.0, Mode::Minimax).unwrap(), 1.5));
        assert_eq!(
            rho(1, 1, 2, 1.0, Mode::Bayes),
            Err(Error::BudgetFractionTooLarge(1.0))
        );
        assert!(rho(1, 1, 1, 0.5, Mode::Bayes).is_err());
    }

    #[test]
    fn study_examples() {
        let t = path_graph(5);
        let p = uniform_prior(&t);
        let study = approx_ratio_study(
            &[(t.clone(), p.clone())],
            2..=2,
            Mode::Bayes,
            DEFAULT_EVAL_CAP,
        )
        .unwrap();
        let row = &study.rows[0];
        assert!(close(row.probal_loss, 1.0));
        assert!(close(row.optimal_loss, 0.6));
        assert!(close(row.ratio, 1.0 / 0.6));
        assert!(close(row.rho.unwrap(), 8.333333333333334));
        assert_eq!(row.within_rho, Some(true));

        let s = star_graph(6);
        let study = approx_ratio_study(
            &[(s.clone(), uniform_prior(&s))],
            1..=1,
            Mode::Bayes,
            DEFAULT_EVAL_CAP,
        )
        .unwrap();
        assert!(close(study.rows[0].ratio, 1.0));

        assert_eq!(ratio(0.0, 0.0), 1.0);
        // The designer never intervenes on the leaves of a star segment, so a
        // full budget is not spent and the ratio has no finite value.
        let study = approx_ratio_study(&[(t, p)], 5..=5, Mode::Minimax, DEFAULT_EVAL_CAP).unwrap();
        assert_eq!(study.rows[0].optimal_loss, 0.0);
        assert_eq!(study.rows[0].probal_loss, 1.0);
        assert_eq!(study.rows[0].within_rho, None);
        assert_eq!(study.max_ratio, 1.0);
    }

    #[test]
    fn single_budget_lower_bounds_fail_on_stars() {
        // One intervention at the center of a star leaves only singletons, yet
        // both bounds exceed 1 there: they need at least two interventions.
        let t = star_graph(5);
        let n = t.order();
        let d = t.max_degree();
        assert_eq!(brute_force_minimax(&t, 1, DEFAULT_EVAL_CAP).unwrap().1, 1);
        assert!(theorem5b_lower(n, 1, d).unwrap() > 1.0);
        let (_, v) = brute_force_bayes(&t, &uniform_prior(&t), 1, DEFAULT_EVAL_CAP).unwrap();
        assert!(close(v, 5.0 / 6.0));
        assert!(lemma5_lower(n, 1, d).unwrap() > v);
    }

    #[test]
    fn optimality_exhaustive_small_trees() {
        for n in 2..=7 {
            for t in labeled_trees(n) {
                let p = degree_prior(&t).unwrap();
                for m in 1..=3.min(n) {
                    let (s, v) = brute_force_bayes(&t, &p, m, DEFAULT_EVAL_CAP).unwrap();
                    let (os, ov) = bitmask_optimum(&t, &p, m, false);
                    assert_eq!(s.vertices(), &os[..]);
                    assert!(close(v, ov));
                    let (s, v) = brute_force_minimax(&t, m, DEFAULT_EVAL_CAP).unwrap();
                    let (os, ov) = bitmask_optimum(&t, &p, m, true);
                    assert_eq!((s.vertices(), v as f64), (&os[..], ov));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn optimality_random_trees(n in 8usize..=10, m in 1usize..=3, seed in any::<u64>()) {
            let t = random_prufer_tree(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let p = uniform_prior(&t);
            let (s, v) = brute_force_bayes(&t, &p, m, DEFAULT_EVAL_CAP).unwrap();
            let (os, ov) = bitmask_optimum(&t, &p, m, false);
            prop_assert_eq!(s.vertices(), &os[..]);
            prop_assert!(close(v, ov));
            let (_, w) = brute_force_minimax(&t, m, DEFAULT_EVAL_CAP).unwrap();
            prop_assert_eq!(w as f64, bitmask_optimum(&t, &p, m, true).1);
        }

        #[test]
        fn minimax_lower_bound_holds(n in 3usize..=12, m in 2usize..=3, seed in any::<u64>()) {
            let t = random_prufer_tree(n, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assume!(m < n && t.max_degree() * m > 1);
            let (_, w) = brute_force_minimax(&t, m, DEFAULT_EVAL_CAP).unwrap();
            prop_assert!(theorem5b_lower(n, m, t.max_degree()).unwrap() <= w as f64 + 1e-9);
        }
    }
}
