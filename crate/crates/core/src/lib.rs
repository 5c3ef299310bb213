//! Fractional-order pseudodifferential operators on periodic grids.
//!
//! The crate is organized bottom-up:
//!
//! * [`symbols`]: classical symbols, parity, ellipticity and μ-transmission
//!   checks;
//! * [`grid`]: torus grids, transforms, discrete Sobolev and Hölder norms,
//!   domain masks;
//! * [`quantize`]: x-form and (x,y)-form quantization, Taylor reduction of
//!   amplitudes, dyadic kernels, Poisson operators, commutators;
//! * [`order_reduce`]: the order-reducing multipliers `(⟨ξ'⟩ ± iξₙ)^t` and
//!   the associated transmission spaces;
//! * [`geometry`]: coordinate changes, boundary rescaling, distance
//!   functions and boundary charts;
//! * [`dirichlet`]: the homogeneous Dirichlet problem `r⁺Pu = f`,
//!   `supp u ⊂ Ω̄`, and its boundary regularity diagnostics;
//! * [`report`]: `check,value,threshold,verdict` reports shared by the
//!   tests and the command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoff;
pub mod dirichlet;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod grid;
pub mod jet;
pub mod multi;
pub mod order_reduce;
pub mod quadrature;
pub mod quantize;
pub mod report;
pub mod symbols;

pub use error::{Error, Result};
