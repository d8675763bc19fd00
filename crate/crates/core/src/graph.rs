//! Undirected skeletons, rooted trees and the traversal primitives the rest
//! of the crate is built on.
//!
//! Vertices carry arbitrary text labels externally and dense `usize` indices
//! internally. Indices are assigned in order of first appearance, so a graph
//! read from an edge list and written back reproduces the input byte for byte.

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense vertex index into a [`Skeleton`].
pub type Vertex = usize;

/// Undirected simple graph with per-vertex integer weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    labels: Vec<String>,
    index: HashMap<String, Vertex>,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<Vertex>>,
    weights: Vec<u64>,
    tree: bool,
}

/// Validate a labeled edge list, optionally requiring a tree.
pub fn validate_skeleton<S: AsRef<str>>(edges: &[(S, S)], require_tree: bool) -> Result<Skeleton> {
    Skeleton::from_labeled_edges(edges, &[] as &[&str], require_tree)
}

impl Skeleton {
    /// Build from labeled edges plus optional isolated vertices.
    pub fn from_labeled_edges<S: AsRef<str>, T: AsRef<str>>(
        edges: &[(S, S)],
        vertices: &[T],
        require_tree: bool,
    ) -> Result<Self> {
        if edges.is_empty() && vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut labels = Vec::new();
        let mut index = HashMap::new();
        let mut intern = |l: &str| -> Vertex {
            if let Some(&i) = index.get(l) {
                return i;
            }
            let i = labels.len();
            labels.push(l.to_string());
            index.insert(l.to_string(), i);
            i
        };
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let u = intern(a.as_ref());
            let v = intern(b.as_ref());
            idx_edges.push((u, v));
        }
        for v in vertices {
            intern(v.as_ref());
        }
        Self::build(labels, index, idx_edges, require_tree)
    }

    /// Build from index edges on `0..n`; labels are the decimal indices.
    pub fn from_index_edges(
        n: usize,
        edges: &[(Vertex, Vertex)],
        require_tree: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = labels.iter().cloned().zip(0..n).collect();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(u.max(v).to_string()));
            }
        }
        Self::build(labels, index, edges.to_vec(), require_tree)
    }

    /// Build from explicit labels (index order preserved) and index edges.
    pub fn from_labels_and_edges(
        labels: Vec<String>,
        edges: Vec<(Vertex, Vertex)>,
        require_tree: bool,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateEdge(l.clone(), l.clone()));
            }
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            return Err(Error::UnknownVertex(format!("#{}", u.max(v))));
        }
        Self::build(labels, index, edges, require_tree)
    }

    fn build(
        labels: Vec<String>,
        index: HashMap<String, Vertex>,
        edges: Vec<(Vertex, Vertex)>,
        require_tree: bool,
    ) -> Result<Self> {
        let n = labels.len();
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::SelfLoop(labels[u].clone()));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(labels[u].clone(), labels[v].clone()));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let mut g = Skeleton {
            labels,
            index,
            edges,
            adj,
            weights: vec![1; n],
            tree: false,
        };
        match g.tree_violation() {
            None => g.tree = true,
            Some(msg) if require_tree => return Err(Error::NotATree(msg)),
            Some(_) => {}
        }
        Ok(g)
    }

    fn tree_violation(&self) -> Option<String> {
        let n = self.order();
        let mut uf = UnionFind::new(n);
        for &(u, v) in &self.edges {
            if !uf.union(u, v) {
                return Some(format!(
                    "edge {} -- {} closes a cycle",
                    self.labels[u], self.labels[v]
                ));
            }
        }
        let r0 = uf.find(0);
        (1..n).find(|&v| uf.find(v) != r0).map(|v| {
            format!(
                "vertex {} is disconnected from {}",
                self.labels[v], self.labels[0]
            )
        })
    }

    /// Replace the vertex weights; every weight must be positive.
    pub fn with_weights(mut self, weights: Vec<u64>) -> Result<Self> {
        assert_eq!(weights.len(), self.order(), "one weight per vertex");
        if let Some(v) = weights.iter().position(|&w| w == 0) {
            return Err(Error::NonPositiveMass {
                vertex: self.labels[v].clone(),
                mass: 0.0,
            });
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in insertion order and orientation.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn is_tree(&self) -> bool {
        self.tree
    }

    pub fn is_connected(&self) -> bool {
        self.components(&[]).map(|c| c.len() == 1).unwrap_or(false)
    }

    pub fn label(&self, v: Vertex) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<Vertex> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn weight(&self, v: Vertex) -> u64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn weight_of(&self, vs: &[Vertex]) -> u64 {
        vs.iter().map(|&v| self.weights[v]).sum()
    }

    pub(crate) fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.order() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{v}")))
        }
    }

    /// Connected components of the graph with `removed` deleted.
    ///
    /// Each component is sorted ascending and components are ordered by their
    /// smallest vertex index.
    pub fn components(&self, removed: &[Vertex]) -> Result<Vec<Vec<Vertex>>> {
        let n = self.order();
        let mut gone = vec![false; n];
        for &v in removed {
            self.check_vertex(v)?;
            gone[v] = true;
        }
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if gone[s] {
                continue;
            }
            gone[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &w in &self.adj[u] {
                    if !gone[w] {
                        gone[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        Ok(out)
    }

    /// The lobes of `v`: components of the tree after deleting `v`.
    pub fn lobes(&self, v: Vertex) -> Result<Vec<Vec<Vertex>>> {
        self.check_vertex(v)?;
        if !self.tree {
            return Err(Error::NotATree("lobes are defined on trees only".into()));
        }
        self.components(&[v])
    }

    /// True iff every edge is incident to `c`.
    pub fn is_star_with_center(&self, c: Vertex) -> Result<bool> {
        self.check_vertex(c)?;
        Ok(self.edges.iter().all(|&(u, v)| u == c || v == c))
    }
}

/// A tree skeleton oriented away from a chosen root.
#[derive(Debug, Clone)]
pub struct RootedTree<'a> {
    skeleton: &'a Skeleton,
    root: Vertex,
    parent: Vec<Option<Vertex>>,
    /// Preorder; every vertex appears after its parent.
    order: Vec<Vertex>,
    /// Preorder position and subtree size, for O(1) ancestor queries.
    pos: Vec<usize>,
    size: Vec<usize>,
}

impl<'a> RootedTree<'a> {
    pub fn new(skeleton: &'a Skeleton, root: Vertex) -> Result<Self> {
        skeleton.check_vertex(root)?;
        if !skeleton.is_tree() {
            return Err(Error::NotATree(
                "cannot root a graph that is not a tree".into(),
            ));
        }
        let n = skeleton.order();
        let mut parent = vec![None; n];
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        let mut visited = vec![false; n];
        visited[root] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &w in skeleton.neighbors(u).iter().rev() {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some(u);
                    stack.push(w);
                }
            }
        }
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut size = vec![1; n];
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                size[p] += size[v];
            }
        }
        Ok(RootedTree {
            skeleton,
            root,
            parent,
            order,
            pos,
            size,
        })
    }

    pub fn skeleton(&self) -> &Skeleton {
        self.skeleton
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    /// True iff `d` lies strictly below `a`.
    pub fn is_strict_descendant(&self, d: Vertex, a: Vertex) -> bool {
        d != a && self.pos[d] > self.pos[a] && self.pos[d] < self.pos[a] + self.size[a]
    }

    /// Vertices strictly below `v`, ascending.
    pub fn descendants(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.skeleton.check_vertex(v)?;
        let start = self.pos[v] + 1;
        let end = self.pos[v] + self.size[v];
        let mut out = self.order[start..end].to_vec();
        out.sort_unstable();
        Ok(out)
    }

    /// `V \ ({v} ∪ descendants(v))`, ascending.
    pub fn non_descendants(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.skeleton.check_vertex(v)?;
        Ok((0..self.skeleton.order())
            .filter(|&u| u != v && !self.is_strict_descendant(u, v))
            .collect())
    }

    /// Directed (parent, child) pairs.
    pub fn arcs(&self) -> Vec<(Vertex, Vertex)> {
        self.order
            .iter()
            .filter_map(|&v| self.parent[v].map(|p| (p, v)))
            .collect()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Parse the edge-list text format: one edge per line, two whitespace
/// separated labels, `#` comments and blank lines skipped.
///
/// With `lenient`, extra columns after the first two are ignored.
pub fn parse_edge_list(text: &str, source: &str, lenient: bool) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ok = if lenient {
            toks.len() >= 2
        } else {
            toks.len() == 2
        };
        if !ok {
            return Err(Error::FileFormat {
                path: source.to_string(),
                line: i + 1,
                msg: format!("expected two labels, found {}", toks.len()),
            });
        }
        out.push((toks[0].to_string(), toks[1].to_string()));
    }
    Ok(out)
}

pub fn read_edge_list(path: &Path, lenient: bool) -> Result<Vec<(String, String)>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text, &path.display().to_string(), lenient)
}

pub fn format_edge_list(g: &Skeleton) -> String {
    let mut s = String::new();
    for &(u, v) in g.edges() {
        s.push_str(g.label(u));
        s.push(' ');
        s.push_str(g.label(v));
        s.push('\n');
    }
    s
}

/// Path `0 - 1 - ... - (n-1)` with labels `"1".."n"`.
pub fn path_graph(n: usize) -> Skeleton {
    let edges: Vec<(String, String)> = (1..n)
        .map(|i| (i.to_string(), (i + 1).to_string()))
        .collect();
    let lone = if n == 1 {
        vec!["1".to_string()]
    } else {
        vec![]
    };
    Skeleton::from_labeled_edges(&edges, &lone, true).expect("path is a tree")
}

/// Star with center `0` and `leaves` leaves, index labels.
pub fn star_graph(leaves: usize) -> Skeleton {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    Skeleton::from_index_edges(leaves + 1, &edges, true).expect("star is a tree")
}
