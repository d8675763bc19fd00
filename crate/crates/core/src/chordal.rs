//! Reduction of a moral chordal component to a weighted tree.
//!
//! Edges that sit in no triangle are kept; the connected pieces left after
//! deleting them (cysts) are contracted into supernodes whose weight is the
//! number of original vertices they stand for.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Skeleton, UnionFind, Vertex};
use crate::prior::RootPrior;

/// Result of contracting every cyst of a graph.
#[derive(Debug, Clone)]
pub struct ChordalDecomposition {
    /// Edges that belong to no triangle.
    pub triangle_free: Vec<(Vertex, Vertex)>,
    /// Cysts, each sorted, ordered by smallest member.
    pub cysts: Vec<Vec<Vertex>>,
    /// Weighted tree on the contracted vertices.
    pub contracted: Skeleton,
    /// Original vertex -> contracted vertex.
    pub vertex_map: Vec<Vertex>,
    /// Contracted vertex -> original vertices, sorted.
    pub members: Vec<Vec<Vertex>>,
}

impl ChordalDecomposition {
    /// Original vertices represented by a set of contracted vertices, in the
    /// given order with each supernode expanded ascending.
    pub fn expand(&self, contracted: &[Vertex]) -> Vec<Vertex> {
        contracted
            .iter()
            .flat_map(|&c| self.members[c].iter().copied())
            .collect()
    }

    /// Push a prior on the original graph onto the contracted tree.
    pub fn lift_prior(&self, prior: &RootPrior) -> Result<RootPrior> {
        let masses = self.members.iter().map(|m| prior.mass_of(m)).collect();
        RootPrior::from_masses(&self.contracted, masses, prior.kind())
    }

    pub fn report(&self, g: &Skeleton) -> DecompositionReport {
        let lbl = |v: Vertex| g.label(v).to_string();
        DecompositionReport {
            vertices: g.order(),
            triangle_free_edges: self
                .triangle_free
                .iter()
                .map(|&(u, v)| [lbl(u), lbl(v)])
                .collect(),
            cysts: self
                .cysts
                .iter()
                .map(|c| c.iter().map(|&v| lbl(v)).collect())
                .collect(),
            contraction: (0..g.order())
                .map(|v| ContractionEntry {
                    original: lbl(v),
                    contracted: self.contracted.label(self.vertex_map[v]).to_string(),
                })
                .collect(),
            contracted_edges: self
                .contracted
                .edges()
                .iter()
                .map(|&(u, v)| {
                    [
                        self.contracted.label(u).to_string(),
                        self.contracted.label(v).to_string(),
                    ]
                })
                .collect(),
            contracted_weights: (0..self.contracted.order())
                .map(|v| {
                    (
                        self.contracted.label(v).to_string(),
                        self.contracted.weight(v),
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub vertices: usize,
    pub triangle_free_edges: Vec<[String; 2]>,
    pub cysts: Vec<Vec<String>>,
    pub contraction: Vec<ContractionEntry>,
    pub contracted_edges: Vec<[String; 2]>,
    pub contracted_weights: Vec<(String, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionEntry {
    pub original: String,
    pub contracted: String,
}

fn has_common_neighbor(g: &Skeleton, u: Vertex, v: Vertex) -> bool {
    let (a, b) = (g.neighbors(u), g.neighbors(v));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Edges `(u, v)` with no common neighbor, in the graph's edge order.
pub fn triangle_free_edges(g: &Skeleton) -> Vec<(Vertex, Vertex)> {
    g.edges()
        .iter()
        .copied()
        .filter(|&(u, v)| !has_common_neighbor(g, u, v))
        .collect()
}

/// Connected components of `G \ S` with at least two vertices.
pub fn find_cysts(g: &Skeleton) -> Vec<Vec<Vertex>> {
    let n = g.order();
    let mut uf = UnionFind::new(n);
    for &(u, v) in g.edges() {
        if has_common_neighbor(g, u, v) {
            uf.union(u, v);
        }
    }
    let mut groups: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for v in 0..n {
        let r = uf.find(v);
        groups[r].push(v);
    }
    // Union-find roots are the smallest member, so iterating roots ascending
    // yields groups ordered by minimum index.
    groups.into_iter().filter(|c| c.len() >= 2).collect()
}

/// Contract every cyst into one weighted vertex.
pub fn contract(g: &Skeleton) -> Result<ChordalDecomposition> {
    let triangle_free = triangle_free_edges(g);
    let cysts = find_cysts(g);
    let n = g.order();

    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (i, c) in cysts.iter().enumerate() {
        for &v in c {
            owner[v] = Some(i);
        }
    }
    // Contracted vertices ordered by their smallest original member.
    let mut vertex_map = vec![usize::MAX; n];
    let mut members: Vec<Vec<Vertex>> = Vec::new();
    for v in 0..n {
        if vertex_map[v] != usize::MAX {
            continue;
        }
        let group = match owner[v] {
            Some(i) => cysts[i].clone(),
            None => vec![v],
        };
        for &u in &group {
            vertex_map[u] = members.len();
        }
        members.push(group);
    }
    let labels: Vec<String> = members
        .iter()
        .map(|m| m.iter().map(|&v| g.label(v)).collect::<Vec<_>>().join("+"))
        .collect();
    let weights: Vec<u64> = members.iter().map(|m| g.weight_of(m)).collect();

    let mut edges = Vec::with_capacity(triangle_free.len());
    for &(u, v) in &triangle_free {
        let (a, b) = (vertex_map[u], vertex_map[v]);
        if a == b {
            return Err(Error::ContractionNotTree(format!(
                "edge {} -- {} joins two vertices of the same cyst",
                g.label(u),
                g.label(v)
            )));
        }
        edges.push((a, b));
    }
    let contracted = Skeleton::from_labels_and_edges(labels, edges, true)
        .map_err(|e| Error::ContractionNotTree(e.to_string()))?
        .with_weights(weights)?;

    Ok(ChordalDecomposition {
        triangle_free,
        cysts,
        contracted,
        vertex_map,
        members,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordalDiagnostics {
    pub vertices: usize,
    pub triangles: usize,
    pub triangle_ratio: f64,
    pub contraction_is_tree: bool,
    pub contraction_error: Option<String>,
}

pub fn count_triangles(g: &Skeleton) -> usize {
    let mut count = 0;
    for &(a, b) in g.edges() {
        let (u, v) = (a.min(b), a.max(b));
        count += g
            .neighbors(u)
            .iter()
            .filter(|&&w| w > v && g.has_edge(v, w))
            .count();
    }
    count
}

/// Sanity report on the structural assumptions; never fails.
pub fn verify_chordal_moral_inputs(g: &Skeleton) -> ChordalDiagnostics {
    let triangles = count_triangles(g);
    let err = contract(g).err().map(|e| e.to_string());
    ChordalDiagnostics {
        vertices: g.order(),
        triangles,
        triangle_ratio: triangles as f64 / g.order() as f64,
        contraction_is_tree: err.is_none(),
        contraction_error: err,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetAllocation {
    /// Experiments per component, indexed by component id.
    pub per_component: Vec<usize>,
    pub total: usize,
}

/// Largest-remainder apportionment of `total` experiments by component size.
///
/// Ties on the remainder go to the larger component, then the lower id.
pub fn allocate_budget(sizes: &[u64], total: usize) -> BudgetAllocation {
    let sum: u128 = sizes.iter().map(|&s| s as u128).sum();
    if sum == 0 {
        return BudgetAllocation {
            per_component: vec![0; sizes.len()],
            total: 0,
        };
    }
    let m = total as u128;
    let mut alloc: Vec<usize> = sizes
        .iter()
        .map(|&s| (m * s as u128 / sum) as usize)
        .collect();
    let handed: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let rem = |i: usize| (m * sizes[i] as u128) % sum;
    order.sort_by(|&a, &b| {
        rem(b)
            .cmp(&rem(a))
            .then(sizes[b].cmp(&sizes[a]))
            .then(a.cmp(&b))
    });
    for &i in order.iter().take(total - handed) {
        alloc[i] += 1;
    }
    BudgetAllocation {
        per_component: alloc,
        total,
    }
}
