//! Priors over the location of the root, and the segment renormalization
//! used by the separator search.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Skeleton, Vertex};

/// Tolerance used when comparing probabilities.
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance on the total mass of a user supplied prior.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Uniform,
    Degree,
    Explicit,
}

/// Strictly positive distribution over the vertices of a skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct RootPrior {
    masses: Vec<f64>,
    kind: PriorKind,
}

impl RootPrior {
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, v: Vertex) -> f64 {
        self.masses[v]
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Total mass of a vertex set.
    pub fn mass_of(&self, vs: &[Vertex]) -> f64 {
        vs.iter().map(|&v| self.masses[v]).sum()
    }

    /// Validate raw masses indexed by vertex.
    pub fn from_masses(g: &Skeleton, masses: Vec<f64>, kind: PriorKind) -> Result<Self> {
        assert_eq!(masses.len(), g.order(), "one mass per vertex");
        for (v, &m) in masses.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::NonPositiveMass {
                    vertex: g.label(v).to_string(),
                    mass: m,
                });
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(RootPrior { masses, kind })
    }
}

/// Weight-proportional uniform prior (`1/n` on unit weights).
pub fn uniform_prior(t: &Skeleton) -> RootPrior {
    let total = t.total_weight() as f64;
    RootPrior {
        masses: t.weights().iter().map(|&w| w as f64 / total).collect(),
        kind: PriorKind::Uniform,
    }
}

/// Root probability proportional to vertex degree.
pub fn degree_prior(t: &Skeleton) -> Result<RootPrior> {
    if t.order() < 2 {
        return Err(Error::SingleVertex);
    }
    let total = (2 * t.edge_count()) as f64;
    Ok(RootPrior {
        masses: (0..t.order()).map(|v| t.degree(v) as f64 / total).collect(),
        kind: PriorKind::Degree,
    })
}

/// Prior from a label to probability table covering every vertex.
pub fn explicit_prior<S: AsRef<str>>(t: &Skeleton, table: &[(S, f64)]) -> Result<RootPrior> {
    let lookup: HashMap<&str, f64> = table.iter().map(|(l, p)| (l.as_ref(), *p)).collect();
    let mut masses = Vec::with_capacity(t.order());
    for v in 0..t.order() {
        let m = lookup
            .get(t.label(v))
            .copied()
            .ok_or_else(|| Error::MissingVertex(t.label(v).to_string()))?;
        masses.push(m);
    }
    RootPrior::from_masses(t, masses, PriorKind::Explicit)
}

/// Parse `label<TAB>probability` lines; `#` comments and blank lines skipped.
pub fn parse_prior_table(text: &str, source: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::FileFormat {
            path: source.to_string(),
            line: i + 1,
            msg,
        };
        let mut toks = line.split_whitespace();
        let (Some(label), Some(p), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(bad("expected `label<TAB>probability`".into()));
        };
        let p: f64 = p.parse().map_err(|_| bad(format!("not a number: {p}")))?;
        out.push((label.to_string(), p));
    }
    Ok(out)
}

/// Which prior to attach to a graph, as selected on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Uniform,
    Degree,
    File(PathBuf),
}

impl FromStr for PriorSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(PriorSpec::Uniform),
            "degree" => Ok(PriorSpec::Degree),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(PriorSpec::File(PathBuf::from(p))),
                _ => Err(format!(
                    "expected uniform, degree or file:<path>, got `{s}`"
                )),
            },
        }
    }
}

impl PriorSpec {
    pub fn build(&self, t: &Skeleton) -> Result<RootPrior> {
        match self {
            PriorSpec::Uniform => Ok(uniform_prior(t)),
            PriorSpec::Degree => degree_prior(t),
            PriorSpec::File(path) => {
                let table = read_prior_table(path)?;
                explicit_prior(t, &table)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PriorSpec::Uniform => "uniform",
            PriorSpec::Degree => "degree",
            PriorSpec::File(_) => "explicit",
        }
    }
}

pub fn read_prior_table(path: &Path) -> Result<Vec<(String, f64)>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_prior_table(&text, &path.display().to_string())
}

/// Renormalized prior restricted to a segment, with some vertices zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMeasure {
    pub vertices: Vec<Vertex>,
    /// Normalized masses aligned with `vertices`.
    pub masses: Vec<f64>,
}

impl SegmentMeasure {
    pub fn mass(&self, v: Vertex) -> Option<f64> {
        self.vertices
            .iter()
            .position(|&u| u == v)
            .map(|i| self.masses[i])
    }
}

/// Scale non-negative masses to sum to one.
pub fn normalize_masses(masses: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroSegment);
    }
    Ok(masses.iter().map(|m| m / total).collect())
}

pub fn normalize_segment(
    prior: &RootPrior,
    segment: &[Vertex],
    zeroed: &[Vertex],
) -> Result<SegmentMeasure> {
    let raw: Vec<f64> = segment
        .iter()
        .map(|v| {
            if zeroed.contains(v) {
                0.0
            } else {
                prior.mass(*v)
            }
        })
        .collect();
    Ok(SegmentMeasure {
        vertices: segment.to_vec(),
        masses: normalize_masses(&raw)?,
    })
}
