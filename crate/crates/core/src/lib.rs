//! Compositional distributional semantics with verb tensors.
//!
//! The crate covers the whole pipeline from a tokenized corpus to sentence
//! similarity scores:
//!
//! - [`pregroup`]: pregroup types, planar reductions and contraction plans.
//! - [`semspace`]: co-occurrence counting, LMI weighting and SVD projection.
//! - [`tensors`]: relational, separable and regression-trained verb
//!   matrices, rank-1 approximation and entanglement scores.
//! - [`compose`]: Frobenius operators, the sentence composition models and a
//!   dense contraction-plan executor.
//! - [`eval`]: cosine/Euclidean scoring, Spearman's ρ and task runs.
//!
//! ```
//! use compdist::compose::{compose_frobenius, FrobeniusMode};
//! use compdist::tensors::{build_relational, entanglement_score, ArgumentPairs};
//! use nalgebra::DVector;
//!
//! let e1 = DVector::from_vec(vec![1.0, 0.0]);
//! let e2 = DVector::from_vec(vec![0.0, 1.0]);
//! let args = ArgumentPairs::from_vectors("swap", vec![(e1.clone(), e2.clone()), (e2.clone(), e1.clone())]);
//! let verb = build_relational(&args)?;
//! assert!((entanglement_score(&verb)? - 0.5f64.sqrt()).abs() < 1e-10);
//!
//! let sentence = compose_frobenius(&e1, &verb, &e2, FrobeniusMode::Additive)?;
//! assert_eq!(sentence.as_vector().unwrap().len(), 2);
//! # Ok::<(), compdist::Error>(())
//! ```

pub mod cli;
pub mod compose;
pub mod error;
pub mod eval;
mod linalg;
pub mod pregroup;
pub mod semspace;
pub mod tensors;

pub use error::{Error, Result};
pub use linalg::{rank1 as rank1_matrix, svd, Svd};
