//! Exact-arithmetic workbench for the inductive construction of integral
//! elements over a mixed-characteristic ring of dimension three.
//!
//! - [`padic`]: digit sums, `tau`, Legendre/Kummer valuations.
//! - [`homotaylor`]: homogeneous polynomials, `Int_n`, Taylor identities and
//!   the root-transfer pipeline.
//! - [`linalg`]: Howell forms over `Z/p^M`.
//! - [`ringmodel`]: finite precision models of the base ring.
//! - [`construction`]: the step-by-step simulator with condition checking.
//! - [`sweep`]: the exhaustive identity sweeps driven by the CLI.

pub mod construction;
pub mod error;
pub mod homotaylor;
pub mod linalg;
#[doc(hidden)]
pub mod mutation;
pub mod padic;
pub mod rational;
pub mod ringmodel;
pub mod sweep;

pub use error::{Error, Result};
