//! Canonical bipartite plane trees and their closed walks.
//!
//! A plane tree with `l` edges is stored as its child-count sequence in
//! depth-first (preorder) order. Vertices at even depth live on the I-line
//! (matrix rows), vertices at odd depth on the K-line (samples). The root is
//! always on the I-line.
//!
//! The canonical walk visits the tree clockwise, crossing every edge once in
//! each direction, and labels vertices on each line in order of first visit.
//! Enumeration walks Dyck words of semilength `l` in lexicographic order, so
//! every isomorphy class is produced exactly once by its canonical
//! representative.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::compositions::binomial;
use super::{CombinatoricsError, Limits};

/// Which part of the bipartite vertex set a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Line {
    I,
    K,
}

impl Line {
    fn at_depth(depth: usize) -> Self {
        if depth.is_multiple_of(2) {
            Line::I
        } else {
            Line::K
        }
    }
}

/// A labelled walk vertex, e.g. `i3` or `k1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub line: Line,
    pub label: u32,
}

impl Vertex {
    pub const fn i(label: u32) -> Self {
        Self {
            line: Line::I,
            label,
        }
    }

    pub const fn k(label: u32) -> Self {
        Self {
            line: Line::K,
            label,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Line::I => write!(f, "i{}", self.label),
            Line::K => write!(f, "k{}", self.label),
        }
    }
}

/// Errors from decoding a closed walk into a tree.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WalkError {
    #[error("walk has {0} vertices; a closed walk needs an odd length of at least 3")]
    BadLength(usize),
    #[error("walk does not return to its start vertex")]
    NotClosed,
    #[error(
        "vertex at position {position} is on the wrong line (walk must alternate I, K, I, ...)"
    )]
    Parity { position: usize },
    #[error(
        "step into position {position} revisits a vertex that is not the parent: not a tree walk"
    )]
    NotATree { position: usize },
    #[error("invalid child-count sequence")]
    BadChildCounts,
}

/// Multiset of K-line vertex degrees, kept sorted in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DegreeProfile(Vec<u32>);

impl DegreeProfile {
    pub fn new(mut degrees: Vec<u32>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        Self(degrees)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    /// Sum of the degrees, i.e. the edge count of the tree.
    pub fn edge_count(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DegreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (t, d) in self.0.iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "}}")
    }
}

/// Canonical bipartite ordered tree with its root on the I-line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneTree {
    child_counts: Vec<u32>,
    i_vertex_count: u32,
    k_vertex_count: u32,
}

impl PlaneTree {
    /// Builds a tree from a preorder child-count sequence.
    pub fn from_child_counts(child_counts: Vec<u32>) -> Result<Self, WalkError> {
        if child_counts.is_empty() {
            return Err(WalkError::BadChildCounts);
        }
        // Preorder validity: the number of still-open child slots never hits
        // zero before the last vertex.
        let mut open: i64 = 1;
        let mut counts = [0u32; 2];
        let mut stack: Vec<u32> = Vec::new();
        for (t, &c) in child_counts.iter().enumerate() {
            if open <= 0 {
                return Err(WalkError::BadChildCounts);
            }
            open += i64::from(c) - 1;
            let depth = stack.len();
            counts[depth % 2] += 1;
            if let Some(top) = stack.last_mut() {
                *top -= 1;
            }
            stack.push(c);
            while stack.last() == Some(&0) {
                stack.pop();
            }
            if open == 0 && t + 1 != child_counts.len() {
                return Err(WalkError::BadChildCounts);
            }
        }
        if open != 0 || child_counts.len() < 2 {
            return Err(WalkError::BadChildCounts);
        }
        Ok(Self {
            child_counts,
            i_vertex_count: counts[0],
            k_vertex_count: counts[1],
        })
    }

    pub fn child_counts(&self) -> &[u32] {
        &self.child_counts
    }

    pub fn edge_count(&self) -> u32 {
        self.child_counts.len() as u32 - 1
    }

    pub fn i_vertex_count(&self) -> u32 {
        self.i_vertex_count
    }

    pub fn k_vertex_count(&self) -> u32 {
        self.k_vertex_count
    }

    /// `r`, one less than the number of I-line vertices.
    pub fn r(&self) -> u32 {
        self.i_vertex_count - 1
    }

    /// Preorder depths of all vertices.
    pub fn depths(&self) -> Vec<usize> {
        let mut depths = Vec::with_capacity(self.child_counts.len());
        let mut stack: Vec<u32> = Vec::new();
        for &c in &self.child_counts {
            depths.push(stack.len());
            if let Some(top) = stack.last_mut() {
                *top -= 1;
            }
            stack.push(c);
            while stack.last() == Some(&0) {
                stack.pop();
            }
        }
        depths
    }

    /// Degrees of the K-line vertices (children plus the parent edge).
    pub fn degree_profile(&self) -> DegreeProfile {
        let degrees = self
            .child_counts
            .iter()
            .zip(self.depths())
            .filter(|(_, depth)| depth % 2 == 1)
            .map(|(&c, _)| c + 1)
            .collect();
        DegreeProfile::new(degrees)
    }

    /// The closed walk `i1, k1, ..., i1` of length `2l + 1`, labelled in
    /// first-visit order on each line.
    pub fn canonical_walk(&self) -> Vec<Vertex> {
        let l = self.edge_count() as usize;
        let mut walk = Vec::with_capacity(2 * l + 1);
        let mut labels = vec![Vertex::i(1); self.child_counts.len()];
        let mut next_label = [2u32, 1u32];
        let mut cursor = 1usize;
        let mut stack = vec![(0usize, self.child_counts[0])];
        walk.push(labels[0]);
        while let Some(top) = stack.last_mut() {
            if top.1 > 0 {
                top.1 -= 1;
                let v = cursor;
                cursor += 1;
                let line = Line::at_depth(stack.len());
                let slot = &mut next_label[line as usize];
                labels[v] = Vertex { line, label: *slot };
                *slot += 1;
                walk.push(labels[v]);
                stack.push((v, self.child_counts[v]));
            } else {
                stack.pop();
                if let Some(&(parent, _)) = stack.last() {
                    walk.push(labels[parent]);
                }
            }
        }
        walk
    }

    /// Decodes a closed walk (first vertex repeated at the end) into the
    /// canonical tree it traverses. Labels may be arbitrary; only the
    /// first-visit pattern matters.
    pub fn from_walk(walk: &[Vertex]) -> Result<Self, WalkError> {
        if walk.len() < 3 || walk.len().is_multiple_of(2) {
            return Err(WalkError::BadLength(walk.len()));
        }
        for (position, v) in walk.iter().enumerate() {
            if v.line != Line::at_depth(position) {
                return Err(WalkError::Parity { position });
            }
        }
        if walk[0] != walk[walk.len() - 1] {
            return Err(WalkError::NotClosed);
        }
        let mut visited: HashSet<Vertex> = HashSet::from([walk[0]]);
        let mut child_counts = vec![0u32];
        // (vertex, preorder index)
        let mut stack = vec![(walk[0], 0usize)];
        for (position, &v) in walk.iter().enumerate().skip(1) {
            if stack.len() >= 2 && stack[stack.len() - 2].0 == v {
                stack.pop();
            } else if visited.insert(v) {
                let parent = stack.last().map(|s| s.1).unwrap_or(0);
                child_counts[parent] += 1;
                child_counts.push(0);
                stack.push((v, child_counts.len() - 1));
            } else {
                return Err(WalkError::NotATree { position });
            }
        }
        Self::from_child_counts(child_counts)
    }

    /// JSON-lines record: `{"child_counts":[...],"r":...,"profile":[...]}`.
    pub fn to_record(&self) -> TreeRecord {
        TreeRecord {
            child_counts: self.child_counts.clone(),
            r: self.r(),
            profile: self.degree_profile().0,
        }
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, v) in self.canonical_walk().iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Serialized form of a tree in the JSON-lines stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub child_counts: Vec<u32>,
    pub r: u32,
    pub profile: Vec<u32>,
}

/// Lexicographic stream of Dyck words of a fixed semilength, decoded into trees.
#[derive(Debug, Clone)]
pub struct CanonicalTrees {
    // true = step down to a new child, false = step back up
    word: Option<Vec<bool>>,
}

impl CanonicalTrees {
    fn new(l: usize) -> Self {
        let mut word = vec![true; l];
        word.extend(std::iter::repeat_n(false, l));
        Self { word: Some(word) }
    }

    fn advance(word: &mut [bool]) -> bool {
        let len = word.len();
        let semilength = len / 2;
        let mut balance = vec![0i64; len + 1];
        for (t, &up) in word.iter().enumerate() {
            balance[t + 1] = balance[t] + if up { 1 } else { -1 };
        }
        for t in (1..len).rev() {
            if word[t] && balance[t] >= 1 {
                word[t] = false;
                let opens = word[..t].iter().filter(|&&u| u).count();
                let remaining = semilength - opens;
                for (s, step) in word[t + 1..].iter_mut().enumerate() {
                    *step = s < remaining;
                }
                return true;
            }
        }
        false
    }

    fn decode(word: &[bool]) -> PlaneTree {
        let mut child_counts = vec![0u32];
        let mut stack = vec![0usize];
        for &up in word {
            if up {
                let parent = *stack.last().expect("Dyck word stays above zero");
                child_counts[parent] += 1;
                child_counts.push(0);
                stack.push(child_counts.len() - 1);
            } else {
                stack.pop();
            }
        }
        PlaneTree::from_child_counts(child_counts).expect("Dyck words encode trees")
    }
}

impl Iterator for CanonicalTrees {
    type Item = PlaneTree;

    fn next(&mut self) -> Option<PlaneTree> {
        let word = self.word.as_mut()?;
        let tree = Self::decode(word);
        if !Self::advance(word) {
            self.word = None;
        }
        Some(tree)
    }
}

/// Streams the `Catalan(l)` canonical ordered trees with `l` edges.
pub fn enumerate_canonical_trees(
    l: u32,
    limits: &Limits,
) -> Result<CanonicalTrees, CombinatoricsError> {
    if l == 0 {
        return Err(CombinatoricsError::ZeroEdges);
    }
    if l > limits.max_tree_edges {
        return Err(CombinatoricsError::TreeCapExceeded {
            requested: l,
            cap: limits.max_tree_edges,
        });
    }
    Ok(CanonicalTrees::new(l as usize))
}

pub fn catalan(l: u32) -> BigUint {
    let l = i64::from(l);
    binomial(2 * l, l) / BigUint::from((l + 1) as u64)
}

/// Number of canonical trees with `l` edges and `r + 1` I-line vertices:
/// `C(l, r) C(l - 1, r) / (r + 1)`.
pub fn narayana_count(l: u32, r: u32) -> BigUint {
    if l == 0 || r >= l {
        return BigUint::zero();
    }
    let (l, r) = (i64::from(l), i64::from(r));
    binomial(l, r) * binomial(l - 1, r) / BigUint::from((r + 1) as u64)
}

/// `x (x - 1) ... (x - len + 1)`, zero once a factor would be non-positive.
pub fn falling_factorial(x: u64, len: u64) -> BigUint {
    if len > x {
        return BigUint::zero();
    }
    (0..len).fold(BigUint::one(), |acc, t| acc * (x - t))
}

/// Number of labelled ordered trees with `l` edges, root part on the I-line,
/// I-labels from `[p]` and K-labels from `[n]`.
pub fn count_ordered_trees(p: u64, n: u64, l: u32) -> BigUint {
    (0..l)
        .map(|r| {
            narayana_count(l, r)
                * falling_factorial(p, u64::from(r) + 1)
                * falling_factorial(n, u64::from(l - r))
        })
        .sum()
}
