//! Word alignment for low-resource language pairs.
//!
//! The crate trains statistical aligners (IBM Model 1 and the diagonal
//! reparameterization of Model 2), extracts alignments from exported
//! contextual embeddings, symmetrizes directional alignments, scores them
//! against gold data and projects POS/NER annotations across the links.

pub mod analysis;
pub mod corpus;
pub mod embed;
mod error;
pub mod eval;
pub mod ibm;
pub mod projection;
pub mod symmetrize;

pub use error::{Error, Result};
