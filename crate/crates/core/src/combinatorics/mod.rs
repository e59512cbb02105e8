//! Exact enumeration and counting: restricted compositions, canonical plane
//! trees and the labelled tree counts built from them.
//!
//! All counts are arbitrary precision.

mod compositions;
mod trees;

pub use compositions::{
    binomial, count_restricted_compositions, enumerate_restricted_compositions, Compositions,
};
pub use trees::{
    catalan, count_ordered_trees, enumerate_canonical_trees, falling_factorial, narayana_count,
    CanonicalTrees, DegreeProfile, Line, PlaneTree, TreeRecord, Vertex, WalkError,
};

/// Exact nonnegative integer count.
pub type BigCount = num_bigint::BigUint;

/// Enumeration caps. Exceeding one is an error, never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest edge count accepted by tree enumeration.
    pub max_tree_edges: u32,
    /// Largest `k * m` accepted by composition enumeration.
    pub max_composition_work: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_tree_edges: 14,
            max_composition_work: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CombinatoricsError {
    #[error("composition enumeration budget exceeded: k*m = {requested} > {cap}")]
    BudgetExceeded { requested: u64, cap: u64 },
    #[error("tree enumeration cap exceeded: l = {requested} > {cap}")]
    TreeCapExceeded { requested: u32, cap: u32 },
    #[error("trees must have at least one edge")]
    ZeroEdges,
}
