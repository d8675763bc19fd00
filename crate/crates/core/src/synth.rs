//! Seeded tree generators.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64`. Per-instance and
//! per-restart seeds are derived with SplitMix64, so a batch is a pure
//! function of its [`GenSpec`] whatever the thread count.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Skeleton, Vertex};
use crate::prior::{degree_prior, uniform_prior, PriorKind, RootPrior};

/// Restarts allowed before a Galton-Watson draw gives up.
pub const GW_RESTART_CAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ba,
    Gw,
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ba" => Ok(Model::Ba),
            "gw" | "bd" => Ok(Model::Gw),
            _ => Err(format!("unknown model `{s}`, expected ba or gw")),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Ba => "ba",
            Model::Gw => "gw",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenSpec {
    pub model: Model,
    pub n: usize,
    /// Degree bound, used by the Galton-Watson model only.
    pub max_degree: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidGenSpec(format!(
                "order must be at least 2, got {}",
                self.n
            )));
        }
        if self.model == Model::Gw && self.max_degree < 2 {
            return Err(Error::InvalidGenSpec(format!(
                "max degree must be at least 2, got {}",
                self.max_degree
            )));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Skeleton> {
        self.validate()?;
        match self.model {
            Model::Ba => ba_tree(self.n, self.seed),
            Model::Gw => gw_tree(self.n, self.max_degree, self.seed),
        }
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Preferential-attachment tree: start from one edge, attach each new vertex
/// to an existing one chosen with probability proportional to its degree.
pub fn ba_tree(n: usize, seed: u64) -> Result<Skeleton> {
    if n < 2 {
        return Err(Error::InvalidGenSpec(format!(
            "order must be at least 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = vec![(0, 1)];
    // Each vertex appears once per incident edge.
    let mut ends: Vec<Vertex> = vec![0, 1];
    for v in 2..n {
        let t = ends[rng.random_range(0..ends.len())];
        edges.push((t, v));
        ends.push(t);
        ends.push(v);
    }
    Skeleton::from_index_edges(n, &edges, true)
}

/// Bounded-degree Galton-Watson tree grown breadth first.
///
/// The root draws its offspring count from `1..=max_degree`, every other
/// vertex from `0..max_degree`, so no degree exceeds `max_degree`. Growth
/// stops at `n` vertices; an extinct draw restarts on a derived seed.
pub fn gw_tree(n: usize, max_degree: usize, seed: u64) -> Result<Skeleton> {
    GenSpec {
        model: Model::Gw,
        n,
        max_degree,
        seed,
    }
    .validate()?;
    for attempt in 0..=GW_RESTART_CAP {
        let s = if attempt == 0 {
            seed
        } else {
            derive_seed(seed, attempt as u64)
        };
        if let Some(edges) = gw_attempt(n, max_degree, s) {
            return Skeleton::from_index_edges(n, &edges, true);
        }
    }
    Err(Error::GenerationStalled(GW_RESTART_CAP))
}

fn gw_attempt(n: usize, max_degree: usize, seed: u64) -> Option<Vec<(Vertex, Vertex)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n - 1);
    let mut queue = VecDeque::from([0usize]);
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        if count == n {
            break;
        }
        let kids = if u == 0 {
            rng.random_range(1..=max_degree)
        } else {
            rng.random_range(0..max_degree)
        };
        for _ in 0..kids.min(n - count) {
            edges.push((u, count));
            queue.push_back(count);
            count += 1;
        }
    }
    (count == n).then_some(edges)
}

/// Decode a Prüfer sequence over `0..n` (length `n - 2`) into tree edges.
pub fn prufer_decode(n: usize, seq: &[Vertex]) -> Vec<(Vertex, Vertex)> {
    debug_assert_eq!(seq.len() + 2, n.max(2));
    if n < 2 {
        return Vec::new();
    }
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &v in seq {
        edges.push((leaf.min(v), leaf.max(v)));
        degree[v] -= 1;
        if v < ptr && degree[v] == 1 {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf.min(n - 1), leaf.max(n - 1)));
    edges
}

/// Uniformly random labeled tree on `n >= 1` vertices.
pub fn random_prufer_tree<R: Rng>(n: usize, rng: &mut R) -> Skeleton {
    assert!(n >= 1, "tree needs a vertex");
    let seq: Vec<Vertex> = (0..n.saturating_sub(2))
        .map(|_| rng.random_range(0..n))
        .collect();
    Skeleton::from_index_edges(n, &prufer_decode(n, &seq), true)
        .expect("Prüfer sequences decode to trees")
}

/// All `n^(n-2)` labeled trees on `n` vertices, in Prüfer order.
pub fn labeled_trees(n: usize) -> impl Iterator<Item = Skeleton> {
    assert!(n >= 1, "tree needs a vertex");
    let len = n.saturating_sub(2);
    let total = (n as u64).pow(len as u32);
    (0..total).map(move |mut code| {
        let mut seq = vec![0; len];
        for slot in seq.iter_mut().rev() {
            *slot = (code % n as u64) as usize;
            code /= n as u64;
        }
        Skeleton::from_index_edges(n, &prufer_decode(n, &seq), true)
            .expect("Prüfer sequences decode to trees")
    })
}

/// Attach a prior of the given kind.
pub fn attach_prior(tree: &Skeleton, kind: PriorKind) -> Result<RootPrior> {
    match kind {
        PriorKind::Uniform => Ok(uniform_prior(tree)),
        PriorKind::Degree => degree_prior(tree),
        PriorKind::Explicit => Err(Error::InvalidGenSpec(
            "generated instances take uniform or degree priors".into(),
        )),
    }
}

/// `count` instances; instance `i` uses seed `derive_seed(spec.seed, i)`.
pub fn instance_batch(
    spec: &GenSpec,
    count: usize,
    prior: PriorKind,
) -> Result<Vec<(Skeleton, RootPrior)>> {
    spec.validate()?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let tree = GenSpec {
                seed: derive_seed(spec.seed, i as u64),
                ..*spec
            }
            .generate()?;
            let p = attach_prior(&tree, prior)?;
            Ok((tree, p))
        })
        .collect()
}
