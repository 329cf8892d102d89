//! Words in finite-rank free groups, Whitehead graphs, primitivity
//! certificates, and exact epsilon-map geometry for loops on metric graphs.
//!
//! The library is organized around one pipeline: generate a word `w_k`,
//! decide whether it is a generator in some free basis (it is not), and
//! realize it as a piecewise-isometric loop on a metric graph whose point
//! preimages all have small diameter. Everything is exact: words are
//! integer sequences, graph classification is combinatorial, and all
//! lengths and circle positions are rationals.

pub mod cli;
pub mod free_group;
pub mod metric_geometry;
pub mod pipeline;
pub mod whitehead_decision;
pub mod whitehead_graph;

pub use free_group::{Alphabet, CyclicWord, Letter, Sign, WhiteheadAut, Word};
pub use metric_geometry::{CirclePoint, GraphPoint, MetricGraph, PLLoop, SpanningTree};
pub use pipeline::{gen_wk, verify, VerificationReport};
pub use whitehead_decision::{DescentTrace, PrimitivityCertificate, PrimitivityOutcome};
pub use whitehead_graph::{Connectivity, ConnectivityStatus, WhiteheadGraph};
