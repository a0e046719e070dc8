use thiserror::Error;

use crate::graph::NodeIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate node label ({module_id}, {timestamp})")]
    DuplicateNode { module_id: String, timestamp: i64 },

    #[error("edge ({tester}, {tested}) references a node outside 0..{node_count}")]
    DanglingEdge {
        tester: NodeIndex,
        tested: NodeIndex,
        node_count: usize,
    },

    #[error("self-loop on node {0}")]
    SelfLoop(NodeIndex),

    #[error("duplicate edge ({tester}, {tested})")]
    DuplicateEdge { tester: NodeIndex, tested: NodeIndex },

    #[error("node index {index} out of range (graph has {node_count} nodes)")]
    NodeOutOfRange { index: NodeIndex, node_count: usize },

    #[error("operation requires a non-empty graph")]
    EmptyGraph,

    #[error("syndrome does not match graph: {0}")]
    SyndromeMismatch(String),

    #[error("graph has {nodes} nodes, above the enumeration guard of {guard}")]
    SizeGuard { nodes: usize, guard: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("frame mismatch: expected `{expected}`, found `{found}`")]
    FrameMismatch { expected: String, found: String },

    #[error("no graph accepted after {attempts} draws")]
    RetryBudgetExhausted { attempts: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
