//! Native tensor contraction without transposition.
//!
//! Tensors are mapped onto 2-D matrix views through scatter and block-scatter
//! vectors and fed through a blocked, packed matrix-multiplication pipeline,
//! so arbitrary strided operands multiply in place with no transposed copies.
//! A transpose-multiply-transpose reference path and a naive loop oracle are
//! provided for comparison and verification.
//!
//! ```
//! use tcontract::{contract_bsmtc, DenseTensor, GemmConfig, LabelSet};
//!
//! // C_abcde := A_cfbd * B_fea
//! let a = DenseTensor::<f64>::column_major_with(&[2, 4, 3, 3], |i| i as f64)?;
//! let b = DenseTensor::<f64>::column_major_with(&[4, 4, 6], |i| 0.5 * i as f64)?;
//! let mut c = DenseTensor::<f64>::new_column_major(&[6, 3, 2, 3, 4])?;
//!
//! contract_bsmtc(
//!     1.0,
//!     &a, &LabelSet::parse("cfbd")?,
//!     &b, &LabelSet::parse("fea")?,
//!     0.0,
//!     &mut c, &LabelSet::parse("abcde")?,
//!     &GemmConfig::default(),
//!     Some(1),
//! )?;
//! assert_ne!(*c.get(&[0, 0, 0, 0, 0])?, 0.0);
//! # Ok::<(), tcontract::Error>(())
//! ```

pub mod config;
pub mod contract;
pub mod error;
pub mod gemm;
pub mod kernels;
pub mod layout;
pub mod parallel;
pub mod plan;
pub mod scalar;
pub mod tensor;

pub use config::GemmConfig;
pub use contract::{contract_bsmtc, contract_naive, contract_ttdt};
pub use error::{Error, Result};
pub use plan::{derive_plan, fold_and_reorder, ContractionPlan, SwapPolicy};
pub use scalar::Scalar;
pub use tensor::{DenseTensor, Label, LabelSet};
