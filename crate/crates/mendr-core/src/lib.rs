//! Wavelet-packet EEG decomposition, SPD-manifold embeddings, manifold
//! attention with Stiefel-constrained weights and hand-derived gradients,
//! and the self-supervised objectives that train them.

pub mod error;
pub mod spd;

pub use error::{MendrError, Result};
