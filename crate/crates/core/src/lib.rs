//! Weighted oscillatory-functional norms on `R^n` and a verification harness
//! for the identities and inequalities they satisfy.

pub mod cli;
pub mod indexing;
pub mod jones_kernel;
pub mod quadrature;
pub mod sd_space;
pub mod verifier;
