//! Axisymmetric relativistic Vlasov-Maxwell equilibria and their spectral
//! stability.
//!
//! The crate builds equilibria of the form f±(x,v) = μ±(e±, p±) confined to a
//! solid of revolution with a perfectly conducting, specularly reflecting
//! boundary, and decides spectral stability by discretizing the reduced
//! self-adjoint operator L^λ = A^λ₂ − B^λ (A^λ₁)⁻¹ (B^λ)* on a spectral basis
//! and inspecting its smallest eigenvalue κ^λ.
//!
//! Module layout:
//! - [`geometry`]: generatrix curve, boundary frames, containment, specular
//!   reflection, domain extents and the Poincaré bound.
//! - [`grid`], [`elliptic`]: masked meridian grid, axisymmetric elliptic
//!   solvers (Poisson and the m=1 Helmholtz form) and the banded eigensolver.
//! - [`quadrature`]: Gauss-Legendre velocity quadrature and radial moments.
//! - [`ansatz`], [`equilibrium`]: the μ±(e,p) families, field evaluation and
//!   the Picard fixed-point solve of the coupled elliptic system.
//! - [`trajectories`]: characteristic integration with specular reflection,
//!   invariant-drift monitoring and collision statistics.
//! - [`operators`]: Galerkin assembly of A₁, A₂, B, the Schur complement L
//!   and its spectrum, plus the λ-continuation scan.
//! - [`criteria`]: the closed-form stability/instability tests with their
//!   explicit constants.
//! - [`config`], [`cli`], [`report`]: the configuration-driven front end.

pub mod ansatz;
pub mod cli;
pub mod config;
pub mod criteria;
pub mod elliptic;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod trajectories;

pub use error::{Error, Result};
