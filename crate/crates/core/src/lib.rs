//! Numerical toolkit for locating concentration points of spike solutions
//! of a two-component Hamiltonian elliptic system with variable coefficients.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod check;
pub mod cli;
pub mod config;
pub mod dual;
pub mod error;
pub mod exprfield;
pub mod groundstate;
pub mod landscape;
pub mod linalg;
pub mod model;
pub mod newton;
pub mod output;
pub mod perturb;
pub mod radial;
