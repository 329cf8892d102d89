//! Exact geometry of piecewise-isometric circle loops on metric graphs:
//! the graph family `G_k`, the 12k-step loop `f_k`, point preimages, the
//! exact preimage-diameter supremum, and spanning-tree word tracing.
//!
//! All lengths and circle positions are rationals in units of the full
//! circle (1 = 2*pi); pi itself never appears. Arc distance between circle
//! points is `min(|d|, 1 - |d|)` in these units.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::free_group::{free_reduce, Alphabet, Letter, Sign, Word};

pub type Rat = Rational64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricGeometryError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("epsilon must be positive")]
    InvalidEpsilon,
    #[error("edge length must be positive")]
    NonPositiveLength,
    #[error("edge endpoint out of range")]
    VertexOutOfRange,
    #[error("edge id {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("a loop needs at least one step")]
    EmptyLoop,
    #[error("step {step} starts at vertex {found} but the walk is at {expected}")]
    Discontinuous { step: usize, expected: usize, found: usize },
    #[error("loop ends at vertex {end} instead of its start {start}")]
    NotClosed { start: usize, end: usize },
    #[error("step {step}: edge length {length} differs from the circle arc 1/{steps}")]
    StepLengthMismatch { step: usize, length: Rat, steps: usize },
    #[error("offset outside [0, edge length]")]
    OffsetOutOfRange,
    #[error("invalid spanning tree: {0}")]
    InvalidTree(String),
    #[error("loop starts at vertex {start} but the tree root is {root}")]
    NotBasedAtRoot { start: usize, root: usize },
    #[error("traced generator index {gen} exceeds alphabet rank {rank}")]
    GeneratorOutOfRange { gen: usize, rank: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricEdge {
    pub ends: (VertexId, VertexId),
    /// Length in units of the full circle.
    pub length: Rat,
    pub label: String,
}

/// A finite graph with positive rational edge lengths. Loop edges (both
/// ends equal) are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    vertex_names: Vec<String>,
    edges: Vec<MetricEdge>,
}

impl MetricGraph {
    pub fn new(
        vertex_names: Vec<String>,
        edges: Vec<MetricEdge>,
    ) -> Result<Self, MetricGeometryError> {
        for e in &edges {
            if e.length <= Rat::zero() {
                return Err(MetricGeometryError::NonPositiveLength);
            }
            if e.ends.0 .0 >= vertex_names.len() || e.ends.1 .0 >= vertex_names.len() {
                return Err(MetricGeometryError::VertexOutOfRange);
            }
        }
        Ok(MetricGraph { vertex_names, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> &MetricEdge {
        &self.edges[id.0]
    }

    pub fn edges(&self) -> &[MetricEdge] {
        &self.edges
    }

    pub fn edge_by_label(&self, label: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.label == label).map(EdgeId)
    }

    pub fn total_length(&self) -> Rat {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Lengths serialize in units of pi: `{"num":1,"den":6,"unit":"pi"}`.
    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| {
                let per_pi = e.length * Rat::from_integer(2);
                serde_json::json!({
                    "label": e.label,
                    "ends": [self.vertex_name(e.ends.0), self.vertex_name(e.ends.1)],
                    "length": {"num": *per_pi.numer(), "den": *per_pi.denom(), "unit": "pi"},
                })
            })
            .collect();
        serde_json::json!({ "vertices": self.vertex_names, "edges": edges })
    }
}

/// The graph `G_k`: vertices `y_1..y_2k` on a circle of arcs, a loop edge
/// `a_i` at each `y_i`, and arc edges `e_i` from `y_i` to `y_(i+1)`
/// (indices mod 2k, increasing index = clockwise). Every edge has length
/// pi/6k, i.e. 1/12k of the circle; the total length is 2*pi/3 for all k.
pub fn build_gk(k: usize) -> Result<MetricGraph, MetricGeometryError> {
    if k < 1 {
        return Err(MetricGeometryError::InvalidK);
    }
    let n = 2 * k;
    let length = Rat::new(1, 12 * k as i64);
    let vertex_names = (1..=n).map(|i| format!("y{i}")).collect();
    let mut edges = Vec::with_capacity(2 * n);
    for i in 1..=n {
        edges.push(MetricEdge {
            ends: (VertexId(i - 1), VertexId(i - 1)),
            length,
            label: format!("a{i}"),
        });
    }
    for i in 1..=n {
        edges.push(MetricEdge {
            ends: (VertexId(i - 1), VertexId(i % n)),
            length,
            label: format!("e{i}"),
        });
    }
    MetricGraph::new(vertex_names, edges)
}

/// Loop-edge id of `a_i` in `build_gk(k)`.
pub fn gk_loop_edge(k: usize, i: usize) -> EdgeId {
    debug_assert!(1 <= i && i <= 2 * k);
    EdgeId(i - 1)
}

/// Arc-edge id of `e_i` in `build_gk(k)`.
pub fn gk_arc_edge(k: usize, i: usize) -> EdgeId {
    debug_assert!(1 <= i && i <= 2 * k);
    EdgeId(2 * k + i - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PLStep {
    pub edge: EdgeId,
    pub forward: bool,
}

impl PLStep {
    pub fn direction(&self) -> i64 {
        if self.forward {
            1
        } else {
            -1
        }
    }
}

/// A closed edge loop mapping the circle piecewise isometrically: step `i`
/// of `m` occupies the arc `[i/m, (i+1)/m)` and covers its whole edge, so
/// every stepped edge must have length exactly `1/m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLLoop {
    graph: MetricGraph,
    start: VertexId,
    steps: Vec<PLStep>,
    /// Entry vertex of each step; `boundary[i]` is where arc boundary
    /// `i/m` lands.
    boundary: Vec<VertexId>,
}

impl PLLoop {
    pub fn new(
        graph: MetricGraph,
        start: VertexId,
        steps: Vec<PLStep>,
    ) -> Result<Self, MetricGeometryError> {
        if steps.is_empty() {
            return Err(MetricGeometryError::EmptyLoop);
        }
        if start.0 >= graph.vertex_count() {
            return Err(MetricGeometryError::VertexOutOfRange);
        }
        let m = steps.len();
        let arc = Rat::new(1, m as i64);
        let mut boundary = Vec::with_capacity(m);
        let mut at = start;
        for (i, s) in steps.iter().enumerate() {
            if s.edge.0 >= graph.edge_count() {
                return Err(MetricGeometryError::EdgeOutOfRange(s.edge.0));
            }
            let e = graph.edge(s.edge);
            if e.length != arc {
                return Err(MetricGeometryError::StepLengthMismatch {
                    step: i,
                    length: e.length,
                    steps: m,
                });
            }
            let (from, to) = if s.forward { e.ends } else { (e.ends.1, e.ends.0) };
            if from != at {
                return Err(MetricGeometryError::Discontinuous {
                    step: i,
                    expected: at.0,
                    found: from.0,
                });
            }
            boundary.push(at);
            at = to;
        }
        if at != start {
            return Err(MetricGeometryError::NotClosed { start: start.0, end: at.0 });
        }
        Ok(PLLoop { graph, start, steps, boundary })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn steps(&self) -> &[PLStep] {
        &self.steps
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Vertex at circle position `i/m`.
    pub fn boundary_vertex(&self, i: usize) -> VertexId {
        self.boundary[i % self.steps.len()]
    }

    /// Schedule export: `[{"edge":"a1","dir":1}, ...]`.
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "edge": self.graph.edge(s.edge).label,
                    "dir": s.direction(),
                })
            })
            .collect();
        serde_json::json!({
            "start": self.graph.vertex_name(self.start),
            "steps": steps,
        })
    }
}

/// The loop `f_k` on `G_k`, 12k steps based at `y_1`: for each
/// `i = 1..2k-1` the block `a_i, e_i, a_(i+1), e_i backwards, a_i, e_i`,
/// then the closing block `a_2k, e_2k, a_1, e_2k backwards, a_2k, e_2k`.
/// Loop edges are always traversed in their positive direction.
pub fn build_fk(k: usize) -> Result<PLLoop, MetricGeometryError> {
    if k < 1 {
        return Err(MetricGeometryError::InvalidK);
    }
    let graph = build_gk(k)?;
    let n = 2 * k;
    let mut steps = Vec::with_capacity(12 * k);
    let mut push_block = |a: EdgeId, a_next: EdgeId, e: EdgeId| {
        steps.push(PLStep { edge: a, forward: true });
        steps.push(PLStep { edge: e, forward: true });
        steps.push(PLStep { edge: a_next, forward: true });
        steps.push(PLStep { edge: e, forward: false });
        steps.push(PLStep { edge: a, forward: true });
        steps.push(PLStep { edge: e, forward: true });
    };
    for i in 1..n {
        push_block(gk_loop_edge(k, i), gk_loop_edge(k, i + 1), gk_arc_edge(k, i));
    }
    push_block(gk_loop_edge(k, n), gk_loop_edge(k, 1), gk_arc_edge(k, n));
    PLLoop::new(graph, VertexId(0), steps)
}

/// A point of the circle as a rational fraction of a full turn, stored in
/// `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CirclePoint(Rat);

impl CirclePoint {
    /// Wraps into `[0, 1)`.
    pub fn new(position: Rat) -> CirclePoint {
        CirclePoint(position - position.floor())
    }

    pub fn position(&self) -> Rat {
        self.0
    }

    /// Arc distance in units of the full circle: `min(|d|, 1 - |d|)`.
    pub fn arc_distance(&self, other: &CirclePoint) -> Rat {
        let d = (self.0 - other.0).abs();
        d.min(Rat::one() - d)
    }
}

/// Largest pairwise arc distance in a finite set of circle points.
pub fn arc_diameter(points: &[CirclePoint]) -> Rat {
    let mut best = Rat::zero();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(p.arc_distance(q));
        }
    }
    best
}

/// A point on a metric graph: an edge and an exact offset along it.
/// Offsets 0 and the edge length denote the edge's endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphPoint {
    pub edge: EdgeId,
    pub offset: Rat,
}

/// A graph point with endpoint offsets identified with vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedPoint {
    Vertex(VertexId),
    Interior(EdgeId, Rat),
}

pub fn resolve(graph: &MetricGraph, p: GraphPoint) -> Result<ResolvedPoint, MetricGeometryError> {
    if p.edge.0 >= graph.edge_count() {
        return Err(MetricGeometryError::EdgeOutOfRange(p.edge.0));
    }
    let e = graph.edge(p.edge);
    if p.offset < Rat::zero() || p.offset > e.length {
        return Err(MetricGeometryError::OffsetOutOfRange);
    }
    if p.offset.is_zero() {
        Ok(ResolvedPoint::Vertex(e.ends.0))
    } else if p.offset == e.length {
        Ok(ResolvedPoint::Vertex(e.ends.1))
    } else {
        Ok(ResolvedPoint::Interior(p.edge, p.offset))
    }
}

/// Image of a circle point: locate its step and map the arc isometrically
/// onto the step's edge, respecting direction.
pub fn evaluate(lp: &PLLoop, theta: CirclePoint) -> GraphPoint {
    let m = lp.step_count() as i64;
    let scaled = theta.position() * Rat::from_integer(m);
    let index = scaled.floor().to_integer();
    let u = scaled - Rat::from_integer(index);
    let step = lp.steps()[index as usize];
    let length = lp.graph().edge(step.edge).length;
    let offset = if step.forward { u * length } else { (Rat::one() - u) * length };
    GraphPoint { edge: step.edge, offset }
}

/// Exact preimage of a graph point. Interior points get one circle point
/// per step covering their edge; vertices collect every step boundary that
/// lands on them. Points on uncovered edges have empty preimage.
pub fn preimage(lp: &PLLoop, p: GraphPoint) -> Result<Vec<CirclePoint>, MetricGeometryError> {
    let m = lp.step_count() as i64;
    let mut points = match resolve(lp.graph(), p)? {
        ResolvedPoint::Vertex(v) => (0..lp.step_count())
            .filter(|&i| lp.boundary_vertex(i) == v)
            .map(|i| CirclePoint::new(Rat::new(i as i64, m)))
            .collect::<Vec<_>>(),
        ResolvedPoint::Interior(edge, offset) => {
            let length = lp.graph().edge(edge).length;
            let u = offset / length;
            lp.steps()
                .iter()
                .enumerate()
                .filter(|(_, s)| s.edge == edge)
                .map(|(i, s)| {
                    let local = if s.forward { u } else { Rat::one() - u };
                    CirclePoint::new((Rat::from_integer(i as i64) + local) / Rat::from_integer(m))
                })
                .collect()
        }
    };
    points.sort_unstable();
    Ok(points)
}

/// True iff every edge is stepped on and every vertex is visited.
pub fn is_surjective(lp: &PLLoop) -> bool {
    let covered: BTreeSet<EdgeId> = lp.steps().iter().map(|s| s.edge).collect();
    if covered.len() != lp.graph().edge_count() {
        return false;
    }
    let visited: BTreeSet<VertexId> = (0..lp.step_count()).map(|i| lp.boundary_vertex(i)).collect();
    visited.len() == lp.graph().vertex_count()
}

/// Supremum over all graph points of the arc diameter of their preimage,
/// computed exactly.
///
/// Preimage points of one edge move affinely as the point slides along the
/// edge, so each pairwise arc distance is piecewise affine in the edge
/// parameter with kinks only where a raw gap equals half the circle. The
/// supremum is therefore attained at a parameter endpoint or at one of
/// those kinks; endpoints resolve to vertices, whose full boundary
/// preimages are scanned separately.
pub fn epsilon(lp: &PLLoop) -> Rat {
    let m = lp.step_count() as i64;
    let mut best = Rat::zero();

    // Vertex preimages.
    let mut by_vertex: BTreeMap<VertexId, Vec<CirclePoint>> = BTreeMap::new();
    for i in 0..lp.step_count() {
        by_vertex
            .entry(lp.boundary_vertex(i))
            .or_default()
            .push(CirclePoint::new(Rat::new(i as i64, m)));
    }
    for points in by_vertex.values() {
        best = best.max(arc_diameter(points));
    }

    // Interior suprema per covered edge. Branch i sits at (a_i + s_i*u)/m
    // for u in [0,1], with a = step index and s = +1 forward, a = index+1
    // and s = -1 backwards.
    let mut by_edge: BTreeMap<EdgeId, Vec<(i64, i64)>> = BTreeMap::new();
    for (i, s) in lp.steps().iter().enumerate() {
        let param = if s.forward { (i as i64, 1) } else { (i as i64 + 1, -1) };
        by_edge.entry(s.edge).or_default().push(param);
    }
    for branches in by_edge.values() {
        let mut candidates: Vec<Rat> = vec![Rat::zero(), Rat::one()];
        for (i, &(a1, s1)) in branches.iter().enumerate() {
            for &(a2, s2) in &branches[i + 1..] {
                let slope = s1 - s2;
                if slope == 0 {
                    continue;
                }
                // Solve (a1 - a2) + slope*u = ±m/2.
                for target in [Rat::new(m, 2), Rat::new(-m, 2)] {
                    let u = (target - Rat::from_integer(a1 - a2)) / Rat::from_integer(slope);
                    if u > Rat::zero() && u < Rat::one() {
                        candidates.push(u);
                    }
                }
            }
        }
        for &u in &candidates {
            let points: Vec<CirclePoint> = branches
                .iter()
                .map(|&(a, s)| {
                    CirclePoint::new(
                        (Rat::from_integer(a) + Rat::from_integer(s) * u) / Rat::from_integer(m),
                    )
                })
                .collect();
            best = best.max(arc_diameter(&points));
        }
    }
    best
}

/// True iff the loop is surjective and every point preimage has arc
/// diameter strictly below `eps` (in units of the full circle).
pub fn is_eps_map(lp: &PLLoop, eps: Rat) -> bool {
    is_surjective(lp) && epsilon(lp) < eps
}

/// Least `k` with `epsilon(f_k) < eps`; exists because
/// `epsilon(f_k) <= 1/k`.
pub fn find_k_for_epsilon(eps: Rat) -> Result<usize, MetricGeometryError> {
    if eps <= Rat::zero() {
        return Err(MetricGeometryError::InvalidEpsilon);
    }
    let bound = (Rat::one() / eps).ceil().to_integer().max(0) as usize + 1;
    for k in 1..=bound {
        let lp = build_fk(k)?;
        if epsilon(&lp) < eps {
            return Ok(k);
        }
    }
    unreachable!("epsilon(f_k) <= 1/k yields a hit within the search bound");
}

/// A rooted spanning tree with one generator per non-tree edge. The label
/// pairs a generator index with the traversal direction that reads as the
/// positive generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    pub root: VertexId,
    pub tree_edges: BTreeSet<EdgeId>,
    pub labels: BTreeMap<EdgeId, (usize, bool)>,
}

impl SpanningTree {
    pub fn new(
        graph: &MetricGraph,
        root: VertexId,
        tree_edges: BTreeSet<EdgeId>,
        labels: BTreeMap<EdgeId, (usize, bool)>,
    ) -> Result<Self, MetricGeometryError> {
        let tree = SpanningTree { root, tree_edges, labels };
        tree.validate(graph)?;
        Ok(tree)
    }

    pub fn validate(&self, graph: &MetricGraph) -> Result<(), MetricGeometryError> {
        let n = graph.vertex_count();
        if self.root.0 >= n {
            return Err(MetricGeometryError::VertexOutOfRange);
        }
        if self.tree_edges.len() + 1 != n {
            return Err(MetricGeometryError::InvalidTree(format!(
                "{} tree edges cannot span {} vertices",
                self.tree_edges.len(),
                n
            )));
        }
        // Union-find: every tree edge must merge two components.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &e in &self.tree_edges {
            if e.0 >= graph.edge_count() {
                return Err(MetricGeometryError::EdgeOutOfRange(e.0));
            }
            let ends = graph.edge(e).ends;
            let (ru, rv) = (find(&mut parent, ends.0 .0), find(&mut parent, ends.1 .0));
            if ru == rv {
                return Err(MetricGeometryError::InvalidTree(format!(
                    "edge {} closes a cycle",
                    graph.edge(e).label
                )));
            }
            parent[ru] = rv;
        }
        for e in 0..graph.edge_count() {
            if !self.tree_edges.contains(&EdgeId(e)) && !self.labels.contains_key(&EdgeId(e)) {
                return Err(MetricGeometryError::InvalidTree(format!(
                    "non-tree edge {} has no generator label",
                    graph.edge(EdgeId(e)).label
                )));
            }
        }
        for e in self.labels.keys() {
            if e.0 >= graph.edge_count() {
                return Err(MetricGeometryError::EdgeOutOfRange(e.0));
            }
            if self.tree_edges.contains(e) {
                return Err(MetricGeometryError::InvalidTree(format!(
                    "edge {} is both a tree edge and labeled",
                    graph.edge(*e).label
                )));
            }
        }
        Ok(())
    }
}

/// The standard tree for `G_k`: arcs `e_1..e_(2k-1)` (the clockwise paths
/// from `y_1`), with loops `a_i` labeled by generators `0..2k-1` and the
/// remaining arc `e_2k` labeled by generator `2k`, positive clockwise.
pub fn gk_canonical_tree(graph: &MetricGraph, k: usize) -> Result<SpanningTree, MetricGeometryError> {
    let n = 2 * k;
    let tree_edges: BTreeSet<EdgeId> = (1..n).map(|i| gk_arc_edge(k, i)).collect();
    let mut labels = BTreeMap::new();
    for i in 1..=n {
        labels.insert(gk_loop_edge(k, i), (i - 1, true));
    }
    labels.insert(gk_arc_edge(k, n), (n, true));
    SpanningTree::new(graph, VertexId(0), tree_edges, labels)
}

/// Read the fundamental-group word of an edge loop: each non-tree step
/// emits its generator, signed by traversal direction; tree steps emit
/// nothing. The result is freely reduced.
pub fn trace_word(
    lp: &PLLoop,
    tree: &SpanningTree,
    alphabet: &Alphabet,
) -> Result<Word, MetricGeometryError> {
    tree.validate(lp.graph())?;
    if lp.start() != tree.root {
        return Err(MetricGeometryError::NotBasedAtRoot {
            start: lp.start().0,
            root: tree.root.0,
        });
    }
    let mut letters = Vec::new();
    for s in lp.steps() {
        if tree.tree_edges.contains(&s.edge) {
            continue;
        }
        let &(gen, positive_forward) = tree.labels.get(&s.edge).expect("validated labels");
        if gen >= alphabet.rank() {
            return Err(MetricGeometryError::GeneratorOutOfRange { gen, rank: alphabet.rank() });
        }
        let sign = if s.forward == positive_forward { Sign::Plus } else { Sign::Minus };
        letters.push(Letter { gen, sign });
    }
    Ok(free_reduce(letters))
}

/// Epsilon in serializable form: exact fraction of the full circle plus a
/// decimal in radians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub num: i64,
    pub den: i64,
    pub unit: String,
    pub decimal: f64,
}

impl EpsilonReport {
    pub fn from_fraction(eps: Rat) -> EpsilonReport {
        EpsilonReport {
            num: *eps.numer(),
            den: *eps.denom(),
            unit: "2pi".to_string(),
            decimal: fraction_to_radians(eps),
        }
    }
}

pub fn fraction_to_radians(eps: Rat) -> f64 {
    (*eps.numer() as f64) / (*eps.denom() as f64) * std::f64::consts::TAU
}

/// Chord-metric image of an arc distance given in units of the full
/// circle: `2*sin(pi * d)`.
pub fn fraction_to_chord(eps: Rat) -> f64 {
    2.0 * (std::f64::consts::PI * (*eps.numer() as f64) / (*eps.denom() as f64)).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::parse_word;

    fn rat(num: i64, den: i64) -> Rat {
        Rat::new(num, den)
    }

    #[test]
    fn g1_shape() {
        let g = build_gk(1).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 4);
        for e in g.edges() {
            assert_eq!(e.length, rat(1, 12));
        }
        assert_eq!(g.edge_by_label("a1"), Some(EdgeId(0)));
        assert_eq!(g.edge_by_label("e2"), Some(EdgeId(3)));
        assert!(build_gk(0).is_err());
    }

    #[test]
    fn gk_total_length_is_third_of_circle() {
        for k in 1..=8 {
            let g = build_gk(k).unwrap();
            assert_eq!(g.edge_count(), 4 * k);
            assert_eq!(g.total_length(), rat(1, 3));
        }
    }

    #[test]
    fn f1_schedule_is_frozen() {
        let lp = build_fk(1).unwrap();
        let schedule: Vec<(&str, i64)> = lp
            .steps()
            .iter()
            .map(|s| (lp.graph().edge(s.edge).label.as_str(), s.direction()))
            .collect();
        assert_eq!(
            schedule,
            vec![
                ("a1", 1),
                ("e1", 1),
                ("a2", 1),
                ("e1", -1),
                ("a1", 1),
                ("e1", 1),
                ("a2", 1),
                ("e2", 1),
                ("a1", 1),
                ("e2", -1),
                ("a2", 1),
                ("e2", 1),
            ]
        );
    }

    #[test]
    fn fk_covers_every_edge_three_times() {
        for k in 1..=12 {
            let lp = build_fk(k).unwrap();
            assert_eq!(lp.step_count(), 12 * k);
            let mut counts = vec![0usize; lp.graph().edge_count()];
            for s in lp.steps() {
                counts[s.edge.0] += 1;
            }
            assert!(counts.iter().all(|&c| c == 3));
            assert!(is_surjective(&lp));
        }
    }

    #[test]
    fn loop_validation_errors() {
        let g = build_gk(1).unwrap();
        assert!(matches!(
            PLLoop::new(g.clone(), VertexId(0), vec![]),
            Err(MetricGeometryError::EmptyLoop)
        ));
        // One step cannot have length 1/1 = the whole circle.
        assert!(matches!(
            PLLoop::new(g.clone(), VertexId(0), vec![PLStep { edge: EdgeId(0), forward: true }]),
            Err(MetricGeometryError::StepLengthMismatch { .. })
        ));
        // Discontinuity: a2 is based at y2, not y1.
        let bad: Vec<PLStep> = (0..12)
            .map(|_| PLStep { edge: EdgeId(1), forward: true })
            .collect();
        assert!(matches!(
            PLLoop::new(g, VertexId(0), bad),
            Err(MetricGeometryError::Discontinuous { .. })
        ));
    }

    #[test]
    fn evaluate_examples() {
        let lp = build_fk(1).unwrap();
        let g = lp.graph().clone();

        let p = evaluate(&lp, CirclePoint::new(rat(0, 1)));
        assert_eq!(resolve(&g, p).unwrap(), ResolvedPoint::Vertex(VertexId(0)));

        let p = evaluate(&lp, CirclePoint::new(rat(1, 24)));
        assert_eq!(p, GraphPoint { edge: EdgeId(0), offset: rat(1, 24) });

        let p = evaluate(&lp, CirclePoint::new(rat(1, 12)));
        assert_eq!(resolve(&g, p).unwrap(), ResolvedPoint::Vertex(VertexId(0)));
    }

    #[test]
    fn preimage_of_a1_midpoint() {
        let lp = build_fk(1).unwrap();
        let mid = GraphPoint { edge: EdgeId(0), offset: rat(1, 24) };
        let pts = preimage(&lp, mid).unwrap();
        let expected: Vec<CirclePoint> = [rat(1, 24), rat(9, 24), rat(17, 24)]
            .into_iter()
            .map(CirclePoint::new)
            .collect();
        assert_eq!(pts, expected);
        // The three preimages are mutually 1/3 of a circle apart.
        assert_eq!(arc_diameter(&pts), rat(1, 3));
    }

    #[test]
    fn preimage_of_base_vertex() {
        let lp = build_fk(1).unwrap();
        let base = GraphPoint { edge: EdgeId(0), offset: rat(0, 1) };
        let pts = preimage(&lp, base).unwrap();
        let expected: Vec<CirclePoint> =
            [rat(0, 1), rat(1, 12), rat(4, 12), rat(5, 12), rat(8, 12), rat(9, 12)]
                .into_iter()
                .map(CirclePoint::new)
                .collect();
        assert_eq!(pts, expected);
    }

    #[test]
    fn preimage_locality_on_arcs() {
        for k in 2..=6 {
            let lp = build_fk(k).unwrap();
            for i in 1..2 * k {
                let edge = gk_arc_edge(k, i);
                let p = GraphPoint { edge, offset: lp.graph().edge(edge).length / rat(3, 1) };
                let pts = preimage(&lp, p).unwrap();
                assert_eq!(pts.len(), 3);
                assert!(arc_diameter(&pts) <= rat(4, 12 * k as i64));
            }
        }
    }

    #[test]
    fn preimage_of_uncovered_edge_is_empty() {
        let g = build_gk(1).unwrap();
        // Walk a1, e1, a2, e1 back, repeated 3x: never touches e2.
        let mut steps = Vec::new();
        for _ in 0..3 {
            steps.push(PLStep { edge: EdgeId(0), forward: true });
            steps.push(PLStep { edge: EdgeId(2), forward: true });
            steps.push(PLStep { edge: EdgeId(1), forward: true });
            steps.push(PLStep { edge: EdgeId(2), forward: false });
        }
        let lp = PLLoop::new(g, VertexId(0), steps).unwrap();
        assert!(!is_surjective(&lp));
        let p = GraphPoint { edge: EdgeId(3), offset: rat(1, 24) };
        assert_eq!(preimage(&lp, p).unwrap(), vec![]);
    }

    #[test]
    fn evaluate_inverts_preimage_exactly() {
        for k in [1usize, 2, 3] {
            let lp = build_fk(k).unwrap();
            let graph = lp.graph().clone();
            for e in 0..graph.edge_count() {
                let length = graph.edge(EdgeId(e)).length;
                for j in [0i64, 1, 7, 500, 999, 1000] {
                    let p = GraphPoint { edge: EdgeId(e), offset: length * rat(j, 1000) };
                    let want = resolve(&graph, p).unwrap();
                    for theta in preimage(&lp, p).unwrap() {
                        let got = resolve(&graph, evaluate(&lp, theta)).unwrap();
                        assert_eq!(got, want);
                    }
                }
            }
        }
    }

    /// Sampling oracle: max preimage diameter over 1000 probe offsets per
    /// edge (endpoints included, so vertex preimages are scanned too).
    fn sampled_epsilon(lp: &PLLoop, probes: i64) -> Rat {
        let mut best = Rat::zero();
        for e in 0..lp.graph().edge_count() {
            let length = lp.graph().edge(EdgeId(e)).length;
            for j in 0..=probes {
                let p = GraphPoint { edge: EdgeId(e), offset: length * rat(j, probes) };
                let pts = preimage(lp, p).unwrap();
                best = best.max(arc_diameter(&pts));
            }
        }
        best
    }

    #[test]
    fn epsilon_f1_exact_value() {
        let lp = build_fk(1).unwrap();
        let eps = epsilon(&lp);
        // Diameter of the base-vertex preimage {0,1,4,5,8,9}/12.
        assert_eq!(eps, rat(5, 12));
        assert!(eps >= rat(1, 3));
        assert_eq!(sampled_epsilon(&lp, 1000), eps);
    }

    #[test]
    fn epsilon_f2_exact_value() {
        let lp = build_fk(2).unwrap();
        assert_eq!(epsilon(&lp), rat(3, 8));
    }

    #[test]
    fn epsilon_matches_sampler_with_slack() {
        for k in 1..=4 {
            let lp = build_fk(k).unwrap();
            let exact = epsilon(&lp);
            let sampled = sampled_epsilon(&lp, 1000);
            let slack = rat(2, 1000) * lp.graph().edge(EdgeId(0)).length;
            assert!(exact >= sampled, "exact below sampled at k={k}");
            assert!(exact - sampled <= slack, "slack exceeded at k={k}");
        }
    }

    #[test]
    fn epsilon_bound_and_monotonicity() {
        let mut prev: Option<Rat> = None;
        for k in 1..=12 {
            let eps = epsilon(&build_fk(k).unwrap());
            assert!(eps <= rat(1, k as i64));
            assert!(eps <= rat(1, 2), "arc diameter of the circle is the hard cap");
            if let Some(p) = prev {
                assert!(eps <= p);
            }
            prev = Some(eps);
        }
    }

    #[test]
    fn eps_map_examples() {
        let lp = build_fk(1).unwrap();
        assert!(is_eps_map(&lp, rat(1, 2)));
        assert!(!is_eps_map(&lp, rat(1, 10)));
        for k in 1..=8 {
            let lp = build_fk(k).unwrap();
            assert!(is_eps_map(&lp, rat(1, k as i64) + rat(1, 1000)));
        }
    }

    #[test]
    fn find_k_table() {
        assert_eq!(find_k_for_epsilon(rat(1, 1)).unwrap(), 1);
        assert_eq!(find_k_for_epsilon(rat(1, 2)).unwrap(), 1);
        assert_eq!(find_k_for_epsilon(rat(1, 10)).unwrap(), 8);
        assert_eq!(find_k_for_epsilon(rat(1, 100)).unwrap(), 76);
        assert!(find_k_for_epsilon(rat(0, 1)).is_err());
    }

    #[test]
    fn trace_f1_reads_w1() {
        let alphabet = Alphabet::new(["a1", "a2", "g"]).unwrap();
        let lp = build_fk(1).unwrap();
        let tree = gk_canonical_tree(lp.graph(), 1).unwrap();
        let word = trace_word(&lp, &tree, &alphabet).unwrap();
        assert_eq!(word, parse_word("a1 a2 a1 a2 g a1 g^-1 a2 g", &alphabet).unwrap());
    }

    #[test]
    fn tree_only_loop_traces_to_identity() {
        let g = build_gk(2).unwrap();
        let tree = gk_canonical_tree(&g, 2).unwrap();
        // Out along e1 e2 e3 and straight back: stays inside the tree.
        let mut steps = Vec::new();
        for i in 1..=3 {
            steps.push(PLStep { edge: gk_arc_edge(2, i), forward: true });
        }
        for i in (1..=3).rev() {
            steps.push(PLStep { edge: gk_arc_edge(2, i), forward: false });
        }
        // Pad to 24 steps of length 1/24 by bouncing on e1.
        for _ in 0..9 {
            steps.push(PLStep { edge: gk_arc_edge(2, 1), forward: true });
            steps.push(PLStep { edge: gk_arc_edge(2, 1), forward: false });
        }
        let lp = PLLoop::new(g, VertexId(0), steps).unwrap();
        let alphabet = Alphabet::new(["a1", "a2", "a3", "a4", "g"]).unwrap();
        let word = trace_word(&lp, &tree, &alphabet).unwrap();
        assert!(word.is_empty());
    }

    #[test]
    fn trace_rejects_wrong_base() {
        let lp = build_fk(1).unwrap();
        let mut tree = gk_canonical_tree(lp.graph(), 1).unwrap();
        tree.root = VertexId(1);
        let alphabet = Alphabet::new(["a1", "a2", "g"]).unwrap();
        assert!(matches!(
            trace_word(&lp, &tree, &alphabet),
            Err(MetricGeometryError::NotBasedAtRoot { .. })
        ));
    }

    #[test]
    fn tree_validation_rejects_cycles_and_gaps() {
        let g = build_gk(1).unwrap();
        // Arc e1 alone spans y1, y2.
        let ok = SpanningTree::new(
            &g,
            VertexId(0),
            BTreeSet::from([EdgeId(2)]),
            BTreeMap::from([(EdgeId(0), (0, true)), (EdgeId(1), (1, true)), (EdgeId(3), (2, true))]),
        );
        assert!(ok.is_ok());
        // A loop edge in the tree closes a cycle.
        let cyclic = SpanningTree::new(
            &g,
            VertexId(0),
            BTreeSet::from([EdgeId(0)]),
            BTreeMap::new(),
        );
        assert!(cyclic.is_err());
        // Missing label for a non-tree edge.
        let unlabeled = SpanningTree::new(
            &g,
            VertexId(0),
            BTreeSet::from([EdgeId(2)]),
            BTreeMap::from([(EdgeId(0), (0, true))]),
        );
        assert!(unlabeled.is_err());
    }

    #[test]
    fn json_exports() {
        let g = build_gk(1).unwrap();
        let json = g.to_json();
        assert_eq!(json["edges"][0]["length"]["num"], 1);
        assert_eq!(json["edges"][0]["length"]["den"], 6);
        assert_eq!(json["edges"][0]["length"]["unit"], "pi");

        let lp = build_fk(1).unwrap();
        let json = lp.to_json();
        assert_eq!(json["steps"][0]["edge"], "a1");
        assert_eq!(json["steps"][0]["dir"], 1);
        assert_eq!(json["steps"][3]["dir"], -1);
    }
}
