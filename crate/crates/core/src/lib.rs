//! Numerical laboratory for sequential regular variation.
//!
//! The crate is organised around the objects of the theory:
//!
//! - [`popa`]: Popa circle groups for `η_ρ(t) = 1 + ρt`, `ρ ∈ [0, ∞]`;
//! - [`kernel`]: closed-form Beurling–Goldie kernels and residual checks;
//! - [`sequences`]: admissible sequences, Croftian hitting, φ-dilations;
//! - [`phi`]: self-equivarying auxiliary functions;
//! - [`esslim`]: essential limits with an exceptional-set budget;
//! - [`kendall`]: Kendall-type recovery of the kernel and its index.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod esslim;
pub mod function;
pub mod kendall;
pub mod kernel;
pub mod numeric;
pub mod phi;
pub mod popa;
pub mod rational;
pub mod sequences;

pub use error::{Error, Result};
pub use function::{FunctionSpec, SlowVarying, Tabulated};
pub use kernel::{EquationClass, KernelSpec};
pub use popa::{GroupElement, PopaParam};
