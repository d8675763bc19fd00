//! Budget-constrained intervention design on tree-shaped causal skeletons.
//!
//! The designer ([`probal()`]) repeatedly splits the tree at the vertex that
//! best balances the root probability mass, and intervenes there. Exact
//! brute-force baselines, closed-form and oracle loss evaluation, bounds,
//! generators and a benchmark harness sit around it.

pub mod bench;
pub mod chordal;
pub mod error;
pub mod exact;
pub mod graph;
pub mod loss;
pub mod prior;
pub mod probal;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use exact::Mode;
pub use graph::{Skeleton, Vertex};
pub use loss::InterventionSet;
pub use prior::{PriorKind, PriorSpec, RootPrior};
pub use probal::{probal, probal_minimax};
