use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop on vertex {0}")]
    SelfLoop(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("graph is not connected: {0}")]
    NotConnected(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("empty graph: no edges and no vertices supplied")]
    EmptyGraph,
    #[error("contraction of cysts does not yield a tree: {0}")]
    ContractionNotTree(String),

    #[error("degree prior needs at least two vertices")]
    SingleVertex,
    #[error("prior is missing vertex {0}")]
    MissingVertex(String),
    #[error("non-positive prior mass {mass} on vertex {vertex}")]
    NonPositiveMass { vertex: String, mass: f64 },
    #[error("prior masses sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("segment carries no probability mass")]
    AllZeroSegment,

    #[error("intervention set is empty")]
    EmptyIntervention,
    #[error("vertex {0} appears twice in the intervention set")]
    DuplicateIntervention(String),

    #[error("round cap exceeded after {rounds} rounds on a graph of order {order}")]
    RoundCapExceeded { rounds: usize, order: usize },

    #[error("search space of {evaluations} subsets exceeds the cap of {cap}")]
    SearchSpaceTooLarge { evaluations: u128, cap: u128 },
    #[error("budget {budget} exceeds graph order {order}")]
    BudgetExceedsOrder { budget: usize, order: usize },
    #[error("degenerate bound: max degree times budget is {0}, needs to exceed 1")]
    DegenerateBound(usize),
    #[error("budget fraction {0} must be below 1")]
    BudgetFractionTooLarge(f64),

    #[error("generation stalled after {0} restarts")]
    GenerationStalled(usize),
    #[error("invalid generator parameters: {0}")]
    InvalidGenSpec(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{path}:{line}: {msg}")]
    FileFormat {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that signal a broken algorithm invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::AllZeroSegment | Error::RoundCapExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
