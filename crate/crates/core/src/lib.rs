//! Exact finite experiments on rigidity over F_2 and its data-structure
//! counterparts.
//!
//! * [`gf2`]: packed vectors, matrices, canonical subspaces, subspace
//!   enumeration and exact point-to-subspace distance.
//! * [`rigidity`]: `RIG(Q, r)`, folding, far points and the rank-one far point.
//! * [`querysets`]: the rank-one query set Υ, prefix and random sets, file IO.
//! * [`sysds`]: systematic linear data structures, their optimal time, the
//!   adversary argument and the conversion to the linear model.
//! * [`commsim`]: toy cell-probe machines for `uᵀMv`, cell sampling, the
//!   one-way protocol and the discrepancy bookkeeping.

pub mod caps;
pub mod commsim;
pub mod error;
pub mod gf2;
pub mod querysets;
pub mod rational;
pub mod rigidity;
pub mod sysds;

pub use caps::Caps;
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector, Subspace};
pub use querysets::QuerySet;
