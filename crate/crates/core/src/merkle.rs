//! Binary merkle commitment over document digests.
//!
//! Internal nodes hash `left || right` in index order. When a level has an
//! odd number of nodes the trailing node is promoted to the next level
//! unchanged, so a single-leaf tree has `root == leaf`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::{sha256_concat, Hash32};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MerkleError {
    #[error("merkle tree needs at least one leaf")]
    EmptyLeaves,
    #[error("leaf index {index} out of range for {len} leaves")]
    IndexOutOfRange { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub digest: Hash32,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MerkleProof {
    pub leaf_index: usize,
    pub siblings: Vec<ProofStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    /// `levels[0]` are the leaves, the last level holds only the root.
    levels: Vec<Vec<Hash32>>,
}

pub fn hash_pair(left: &Hash32, right: &Hash32) -> Hash32 {
    sha256_concat(&[left.as_bytes(), right.as_bytes()])
}

impl MerkleTree {
    pub fn build(leaves: Vec<Hash32>) -> Result<Self, MerkleError> {
        if leaves.is_empty() {
            return Err(MerkleError::EmptyLeaves);
        }
        let mut levels = vec![leaves];
        while levels.last().map_or(0, Vec::len) > 1 {
            let prev = levels.last().expect("non-empty");
            let next = prev
                .chunks(2)
                .map(|pair| match pair {
                    [l, r] => hash_pair(l, r),
                    [single] => *single,
                    _ => unreachable!(),
                })
                .collect();
            levels.push(next);
        }
        Ok(MerkleTree { levels })
    }

    pub fn root(&self) -> Hash32 {
        self.levels.last().expect("tree has a root level")[0]
    }

    pub fn leaves(&self) -> &[Hash32] {
        &self.levels[0]
    }

    pub fn levels(&self) -> &[Vec<Hash32>] {
        &self.levels
    }

    pub fn proof(&self, index: usize) -> Result<MerkleProof, MerkleError> {
        let len = self.levels[0].len();
        if index >= len {
            return Err(MerkleError::IndexOutOfRange { index, len });
        }
        let mut siblings = Vec::new();
        let mut pos = index;
        for level in &self.levels[..self.levels.len() - 1] {
            let sibling = pos ^ 1;
            if sibling < level.len() {
                let side = if sibling < pos { Side::Left } else { Side::Right };
                siblings.push(ProofStep { digest: level[sibling], side });
            }
            pos /= 2;
        }
        Ok(MerkleProof { leaf_index: index, siblings })
    }
}

/// Root over `leaves`; shorthand for `MerkleTree::build(..)?.root()`.
pub fn merkle_root(leaves: &[Hash32]) -> Result<Hash32, MerkleError> {
    Ok(MerkleTree::build(leaves.to_vec())?.root())
}

/// Folds `leaf` through the proof's siblings and compares with `root`.
pub fn verify_proof(root: &Hash32, leaf: &Hash32, proof: &MerkleProof) -> bool {
    let folded = proof.siblings.iter().fold(*leaf, |acc, step| match step.side {
        Side::Left => hash_pair(&step.digest, &acc),
        Side::Right => hash_pair(&acc, &step.digest),
    });
    folded == *root
}
