//! Whitehead graph of a cyclic word and its connectivity classification.
//!
//! The graph has vertices `x+`, `x-` per generator `x`. Writing the word
//! circularly with a `-` on the left and a `+` on the right of every
//! positive letter (swapped for inverse letters), each adjacent sign pair
//! contributes one edge: the right side of a letter joins the left side of
//! its successor, wraparound included. Vertex ids reuse
//! [`Letter::index`]: `x+` is `2*gen`, `x-` is `2*gen + 1`.

use serde::Serialize;
use thiserror::Error;

use crate::free_group::{Alphabet, CyclicWord, Letter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WhiteheadGraphError {
    #[error("cannot classify a graph with no edges")]
    EmptyGraph,
}

/// Multigraph on the `2n` signed-generator vertices. Edges are stored as
/// normalized `(min, max)` vertex pairs, sorted, so the edge list doubles
/// as a canonical multiset representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadGraph {
    alphabet: Alphabet,
    edges: Vec<(usize, usize)>,
}

impl WhiteheadGraph {
    /// Build directly from an edge multiset; vertex ids must be below
    /// `2 * rank`.
    pub fn from_edges(alphabet: Alphabet, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let bound = 2 * alphabet.rank();
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| {
                assert!(u < bound && v < bound, "vertex id out of range");
                (u.min(v), u.max(v))
            })
            .collect();
        edges.sort_unstable();
        WhiteheadGraph { alphabet, edges }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.rank()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Human-readable vertex name, e.g. `a1+`.
    pub fn vertex_name(&self, v: usize) -> String {
        let letter = Letter::from_index(v);
        let side = if v.is_multiple_of(2) { "+" } else { "-" };
        format!("{}{}", self.alphabet.name(letter.gen), side)
    }

    /// DOT-safe vertex name, e.g. `a1_p`.
    pub fn dot_name(&self, v: usize) -> String {
        let letter = Letter::from_index(v);
        let side = if v.is_multiple_of(2) { "p" } else { "m" };
        format!("{}_{}", self.alphabet.name(letter.gen), side)
    }

    /// Undirected DOT text; parallel edges are emitted individually.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph whitehead {\n");
        for v in 0..self.vertex_count() {
            out.push_str(&format!("  {};\n", self.dot_name(v)));
        }
        for &(u, v) in &self.edges {
            out.push_str(&format!("  {} -- {};\n", self.dot_name(u), self.dot_name(v)));
        }
        out.push_str("}\n");
        out
    }

    /// Edge-list export: `{"rank": n, "edges": [["a1_p","a2_m"], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<[String; 2]> = self
            .edges
            .iter()
            .map(|&(u, v)| [self.dot_name(u), self.dot_name(v)])
            .collect();
        serde_json::json!({ "rank": self.rank(), "edges": edges })
    }
}

/// Build the Whitehead graph of a cyclically reduced word. Each circularly
/// adjacent pair `(x, y)` joins the vertex `x` reads into on its right to
/// the vertex `y` exposes on its left; in letter-index terms that is the
/// edge `{x.index(), y.inverse().index()}`.
pub fn build_whitehead_graph(c: &CyclicWord, alphabet: &Alphabet) -> WhiteheadGraph {
    let letters = c.letters();
    let n = letters.len();
    let edges = (0..n).map(|i| {
        let x = letters[i];
        let y = letters[(i + 1) % n];
        (x.index(), y.inverse().index())
    });
    WhiteheadGraph::from_edges(alphabet.clone(), edges)
}

/// Connectivity of the subgraph induced by degree-positive vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Connectivity {
    Disconnected { components: Vec<Vec<usize>> },
    CutVertex { witness: usize },
    TwoConnected,
}

impl Connectivity {
    pub fn label(&self) -> &'static str {
        match self {
            Connectivity::Disconnected { .. } => "disconnected",
            Connectivity::CutVertex { .. } => "cut_vertex",
            Connectivity::TwoConnected => "two_connected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityStatus {
    pub connectivity: Connectivity,
    /// Generators with no occurrence in the source word (both vertices
    /// isolated).
    pub isolated_generators: Vec<usize>,
}

impl ConnectivityStatus {
    pub fn is_two_connected(&self) -> bool {
        matches!(self.connectivity, Connectivity::TwoConnected)
    }
}

/// Classify the degree-positive induced subgraph: more than one component,
/// some cut vertex (witnessed by the least such vertex), or neither.
/// Parallel edges collapse to simple adjacency; a graph with no edges is a
/// distinguished error.
pub fn classify(g: &WhiteheadGraph) -> Result<ConnectivityStatus, WhiteheadGraphError> {
    let deg = g.degrees();
    let active: Vec<usize> = (0..g.vertex_count()).filter(|&v| deg[v] > 0).collect();
    if active.is_empty() {
        return Err(WhiteheadGraphError::EmptyGraph);
    }
    let isolated_generators = (0..g.rank())
        .filter(|&gen| deg[2 * gen] == 0 && deg[2 * gen + 1] == 0)
        .collect();

    // Relabel active vertices 0..n and collapse the multigraph.
    let mut local = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in active.iter().enumerate() {
        local[v] = i;
    }
    let n = active.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        if u == v {
            continue;
        }
        let (lu, lv) = (local[u], local[v]);
        if !adj[lu].contains(&lv) {
            adj[lu].push(lv);
            adj[lv].push(lu);
        }
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }

    let components = connected_components(n, &adj);
    if components.len() > 1 {
        let components = components
            .into_iter()
            .map(|comp| comp.into_iter().map(|l| active[l]).collect())
            .collect();
        return Ok(ConnectivityStatus {
            connectivity: Connectivity::Disconnected { components },
            isolated_generators,
        });
    }

    let aps = articulation_points(n, &adj);
    let witness = (0..n).find(|&l| aps[l]).map(|l| active[l]);
    let connectivity = match witness {
        Some(witness) => Connectivity::CutVertex { witness },
        None => Connectivity::TwoConnected,
    };
    Ok(ConnectivityStatus { connectivity, isolated_generators })
}

fn connected_components(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut queue = vec![start];
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push(v);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

/// Iterative lowpoint search over a simple graph.
fn articulation_points(n: usize, adj: &[Vec<usize>]) -> Vec<bool> {
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_ap = vec![false; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut root_children = 0;
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        // Frames: (vertex, dfs parent, next neighbor index).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&(u, parent, next)) = stack.last() {
            if next < adj[u].len() {
                stack.last_mut().unwrap().2 += 1;
                let v = adj[u][next];
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    if u == root {
                        root_children += 1;
                    }
                    stack.push((v, u, 0));
                } else if v != parent {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(pu, _, _)) = stack.last() {
                    low[pu] = low[pu].min(low[u]);
                    if pu != root && low[u] >= disc[pu] {
                        is_ap[pu] = true;
                    }
                }
            }
        }
        if root_children > 1 {
            is_ap[root] = true;
        }
    }
    is_ap
}
