//! Simulation and verification toolkit for the anisotropic p-Laplace
//! evolution equation
//!
//! ```text
//! u_t = Σ_i (|u_{x_i}|^{p_i-2} u_{x_i})_{x_i},   p_i > 2,
//! ```
//!
//! covering closed-form source solutions, an explicit conservative solver for
//! point-mass data, the self-similar (Fokker–Planck) rescaling, and checks of
//! the decay, propagation and Harnack estimates against computed solutions.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod error;
pub mod exact_solutions;
pub mod fokker_planck;
pub mod grid;
pub mod pde_solver;
pub mod quadrature;
pub mod scaling_laws;
mod stencil;
pub mod verification;

pub use error::{Error, Result};
pub use grid::{Grid, GridField, SupportBox};
pub use pde_solver::{InitialDatum, SimConfig, Trajectory};
pub use scaling_laws::ExponentSet;
