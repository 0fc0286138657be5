//! Deterministic node-description embeddings.
//!
//! The default provider hashes the normalized token multiset of a description
//! into a fixed-dimension signed-count vector and L2-normalizes it. Identical
//! text yields a bitwise-identical vector, which keeps every retrieval test
//! reproducible without a model server. Live embedding backends can be
//! plugged in through [`EmbeddingProvider`].

use crate::ontology::normalize_description;

pub const DEFAULT_DIMENSION: usize = 256;

/// Fixed-dimension real vector, unit-normalized unless all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(pub Vec<f32>);

impl EmbeddingVector {
    pub fn zero(dim: usize) -> Self {
        EmbeddingVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> f32 {
        cosine(&self.0, &other.0)
    }
}

/// Cosine similarity; 0.0 when either vector is all-zero.
pub fn cosine(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        dot += f64::from(*x) * f64::from(*y);
        na += f64::from(*x) * f64::from(*x);
        nb += f64::from(*y) * f64::from(*y);
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())) as f32
}

pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> EmbeddingVector;
}

/// Hashed token-multiset projection.
#[derive(Debug, Clone)]
pub struct HashedEmbedding {
    dim: usize,
}

impl HashedEmbedding {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashedEmbedding { dim }
    }
}

impl Default for HashedEmbedding {
    fn default() -> Self {
        HashedEmbedding::new(DEFAULT_DIMENSION)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

impl EmbeddingProvider for HashedEmbedding {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> EmbeddingVector {
        let mut v = vec![0.0f32; self.dim];
        let normalized = normalize_description(text);
        for token in normalized.split(' ').filter(|t| !t.is_empty()) {
            let h = fnv1a(token.as_bytes());
            v[(h % self.dim as u64) as usize] += 1.0;
        }
        let norm: f64 = v.iter().map(|x| f64::from(*x) * f64::from(*x)).sum();
        if norm > 0.0 {
            let norm = norm.sqrt() as f32;
            for x in &mut v {
                *x /= norm;
            }
        }
        EmbeddingVector(v)
    }
}
