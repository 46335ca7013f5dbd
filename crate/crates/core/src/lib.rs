//! PageRank, CheiRank and reduced Google matrix analysis for sparse
//! directed networks.
//!
//! The crate computes global rankings by power iteration, reduces the Google
//! matrix onto a small subset of nodes with a projector-deflated series for
//! the scattering block, splits the result into direct, projector and
//! hidden-link components, and extracts friends/followers graphs from the
//! reduced matrices. [`oracle`] holds dense brute-force reference routines
//! used to validate the sparse paths on small networks.

pub mod error;
pub mod graph;
pub mod interaction;
pub mod matrix;
pub mod oracle;
pub mod rank;
pub mod reduced;

pub use error::{Error, Result};
pub use graph::{
    apply_transition, parse_edge_list, DirectedGraph, GoogleOperator, LabelTable, NodeId,
    SubsetSelection,
};
pub use interaction::{
    build_interaction_graph, cross_source_consensus, top_followers, top_friends, EdgeLevel,
    InteractionEdge, InteractionGraph, Mode, SourceMatrix,
};
pub use matrix::SquareMatrix;
pub use rank::{
    cheirank, local_index, local_indices, nondominated_front, pagerank, LocalIndices, PowerConfig,
    RankKind, RankVector,
};
pub use reduced::{
    assemble, compute_gpr, compute_gqr, leading_eigentriple, partition, reduce,
    reduced_pagerank_residual, BlockPartition, DeflationData, LinearOperator, ReduceConfig,
    ReducedDecomposition, SeriesConfig, SeriesOutcome, Weights,
};

/// Damping factor used throughout unless configured otherwise.
pub const DEFAULT_ALPHA: f64 = 0.85;
