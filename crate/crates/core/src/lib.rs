//! Spectral theory and the Schrodinger propagator of the planar
//! Aharonov-Bohm Hamiltonian in a uniform magnetic field.
//!
//! ```
//! use abprop::model::FieldParams;
//! use abprop::spectrum::{eigenvalue, ModeIndex};
//!
//! let p = FieldParams::new(0.5, 1.0).unwrap();
//! assert_eq!(eigenvalue(ModeIndex::new(0, 0), &p), 2.0);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod model;
pub mod numerics;
pub mod propagator;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
