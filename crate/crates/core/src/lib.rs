//! Higher-order factorization machines (HOFMs) for sparse data.
//!
//! The crate is organised around the ANOVA kernel as the computational unit:
//!
//! - [`kernels`]: linear-time evaluation and gradients of the ANOVA and
//!   all-subsets kernels over sparse vectors.
//! - [`model`]: the HOFM model family, prediction, dummy-feature augmentation
//!   and the text model format.
//! - [`solvers`]: coordinate descent and AdaGrad training.
//! - [`data`]: svmlight ingestion and link-prediction dataset construction.
//! - [`eval`]: AUC, RMSE and the solver comparison runner.
//! - [`cli`]: the `hofm` command-line front end.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod kernels;
pub mod model;
pub mod solvers;

pub use error::{HofmError, Result};
pub use kernels::{SparseRef, SparseVector};
pub use model::{HofmModel, Variant};
