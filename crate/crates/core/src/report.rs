//! JSON documents for single designs and optimal baselines.
//!
//! Inputs may be chordal: cysts are contracted first and each chosen
//! supernode is expanded back to its original members in the output.

use serde::Serialize;

use crate::chordal::{contract, ChordalDecomposition};
use crate::error::{Error, Result};
use crate::exact::{bounds_report, brute_force_bayes, brute_force_minimax, BoundsReport, Mode};
use crate::graph::{Skeleton, Vertex};
use crate::loss::{decompose, minimax_surrogate, surrogate_loss, InterventionSet};
use crate::prior::{PriorSpec, RootPrior};
use crate::probal::{probal, probal_minimax, theorem3_upper, DesignTrace};

/// A connected input reduced to the weighted tree the designer runs on.
#[derive(Debug, Clone)]
pub struct Instance {
    pub original: Skeleton,
    pub decomposition: ChordalDecomposition,
    /// Prior on the contracted tree.
    pub prior: RootPrior,
    pub prior_name: &'static str,
}

impl Instance {
    /// Contract `g` and lift the prior built on the original vertices.
    pub fn prepare(g: Skeleton, prior: &PriorSpec) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::NotConnected(
                "design inputs must be a single component".into(),
            ));
        }
        let decomposition = contract(&g)?;
        let base = prior.build(&g)?;
        let prior_lifted = decomposition.lift_prior(&base)?;
        Ok(Instance {
            original: g,
            decomposition,
            prior: prior_lifted,
            prior_name: prior.name(),
        })
    }

    pub fn tree(&self) -> &Skeleton {
        &self.decomposition.contracted
    }

    fn labels(&self, set: &[Vertex]) -> Vec<String> {
        set.iter()
            .map(|&v| self.tree().label(v).to_string())
            .collect()
    }

    fn expanded(&self, set: &[Vertex]) -> Vec<String> {
        self.decomposition
            .expand(set)
            .into_iter()
            .map(|v| self.original.label(v).to_string())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRound {
    pub round: usize,
    pub segment: Vec<String>,
    pub segment_mass: f64,
    pub separator: String,
    pub added: bool,
    pub unbalancedness: f64,
    pub lobe_masses: Vec<f64>,
    pub wing_masses: [f64; 2],
    pub is_separator: bool,
    pub kept: Vec<Vec<String>>,
    pub pruned: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub mode: Mode,
    pub prior: String,
    pub budget: usize,
    pub vertices: usize,
    pub contracted_vertices: usize,
    /// Chosen vertices of the contracted tree, in choice order.
    pub interventions: Vec<String>,
    /// The same choices as original vertex labels.
    pub expanded_interventions: Vec<String>,
    pub rounds: usize,
    pub surrogate_loss: f64,
    pub minimax_loss: u64,
    pub theorem3_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRound>>,
}

fn trace_rounds(inst: &Instance, trace: &DesignTrace) -> Vec<TraceRound> {
    let lbl = |vs: &[Vertex]| inst.labels(vs);
    trace
        .records
        .iter()
        .map(|r| TraceRound {
            round: r.round,
            segment: lbl(&r.segment),
            segment_mass: r.segment_mass,
            separator: inst.tree().label(r.separator).to_string(),
            added: r.added,
            unbalancedness: r.unbalancedness,
            lobe_masses: r.lobe_masses.clone(),
            wing_masses: r.wing_masses,
            is_separator: r.is_separator,
            kept: r.kept.iter().map(|s| lbl(s)).collect(),
            pruned: r.pruned.iter().map(|s| lbl(s)).collect(),
        })
        .collect()
}

pub fn design_report(
    inst: &Instance,
    budget: usize,
    mode: Mode,
    with_trace: bool,
) -> Result<DesignReport> {
    let t = inst.tree();
    let (set, trace) = match mode {
        Mode::Bayes => probal(t, &inst.prior, budget)?,
        Mode::Minimax => probal_minimax(t, budget)?,
    };
    Ok(DesignReport {
        mode,
        prior: inst.prior_name.to_string(),
        budget,
        vertices: inst.original.order(),
        contracted_vertices: t.order(),
        interventions: inst.labels(set.vertices()),
        expanded_interventions: inst.expanded(set.vertices()),
        rounds: trace.rounds,
        surrogate_loss: surrogate_loss(t, &inst.prior, &set)?,
        minimax_loss: minimax_surrogate(&decompose(t, &set)?),
        theorem3_upper: theorem3_upper(trace.rounds, t.total_weight() as f64),
        trace: with_trace.then(|| trace_rounds(inst, &trace)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalReport {
    pub mode: Mode,
    pub prior: String,
    pub budget: usize,
    pub vertices: usize,
    pub contracted_vertices: usize,
    pub interventions: Vec<String>,
    pub expanded_interventions: Vec<String>,
    /// The optimized objective: surrogate loss or largest component.
    pub loss: f64,
    pub surrogate_loss: f64,
    pub minimax_loss: u64,
    /// Bounds evaluated with the rounds of the paired designer run.
    pub bounds: BoundsReport,
}

pub fn optimal_report(
    inst: &Instance,
    budget: usize,
    mode: Mode,
    cap: u128,
) -> Result<OptimalReport> {
    let t = inst.tree();
    let (set, loss): (InterventionSet, f64) = match mode {
        Mode::Bayes => brute_force_bayes(t, &inst.prior, budget, cap)?,
        Mode::Minimax => {
            let (s, v) = brute_force_minimax(t, budget, cap)?;
            (s, v as f64)
        }
    };
    let rounds = match mode {
        Mode::Bayes => probal(t, &inst.prior, budget)?.1.rounds,
        Mode::Minimax => probal_minimax(t, budget)?.1.rounds,
    };
    Ok(OptimalReport {
        mode,
        prior: inst.prior_name.to_string(),
        budget,
        vertices: inst.original.order(),
        contracted_vertices: t.order(),
        interventions: inst.labels(set.vertices()),
        expanded_interventions: inst.expanded(set.vertices()),
        loss,
        surrogate_loss: surrogate_loss(t, &inst.prior, &set)?,
        minimax_loss: minimax_surrogate(&decompose(t, &set)?),
        bounds: bounds_report(t, budget, rounds, mode),
    })
}
