use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GraphError, VertexId};

/// A partition of a vertex subset into nonempty disjoint blocks.
///
/// Stored canonically: each block sorted, blocks ordered by their smallest
/// element. Two partitions are equal iff they have the same blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexSubsetPartition {
    blocks: Vec<Vec<VertexId>>,
}

impl VertexSubsetPartition {
    pub fn new(blocks: Vec<Vec<VertexId>>) -> Result<Self, GraphError> {
        let mut blocks = blocks;
        for b in &mut blocks {
            if b.is_empty() {
                return Err(GraphError::InvalidPartition("empty block".into()));
            }
            b.sort_unstable();
            if b.windows(2).any(|w| w[0] == w[1]) {
                return Err(GraphError::InvalidPartition(format!(
                    "vertex repeated in block {b:?}"
                )));
            }
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut all: Vec<VertexId> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::InvalidPartition(format!(
                "vertex {} appears in two blocks",
                w[0]
            )));
        }
        Ok(Self { blocks })
    }

    /// The partition with a single block `{v}`.
    pub fn singleton(v: VertexId) -> Self {
        Self {
            blocks: vec![vec![v]],
        }
    }

    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.blocks.iter().flatten().copied()
    }

    pub(crate) fn check_within(&self, vertex_count: usize) -> Result<(), GraphError> {
        match self.vertices().find(|&v| v >= vertex_count) {
            Some(v) => Err(GraphError::InvalidVertex {
                vertex: v,
                vertex_count,
            }),
            None => Ok(()),
        }
    }

    /// Block index of every vertex in `0..vertex_count`, `None` if unmarked.
    pub fn labels(&self, vertex_count: usize) -> Vec<Option<u32>> {
        let mut labels = vec![None; vertex_count];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                labels[v] = Some(i as u32);
            }
        }
        labels
    }
}

impl fmt::Display for VertexSubsetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, v) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}
