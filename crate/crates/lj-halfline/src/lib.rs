//! Numerics for the half-line Schrodinger operator with a 12-6 potential,
//! `-d^2/dx^2 + alpha/x^12 - beta/x^6` on `(0, infinity)`.
//!
//! The hard core makes the origin a natural Dirichlet wall: every solution
//! decays like `exp(-sqrt(alpha)/(5 x^5))`, so truncating at a small
//! `eps > 0` loses nothing measurable. On that footing the crate offers:
//!
//! * [`potential`]: parameter validation, well landmarks, the Bargmann
//!   moment of the negative part, and the strict absence criterion
//!   `beta^(5/3) < 4 alpha^(2/3)`.
//! * [`grid`] and [`operator`]: quadrature-weighted finite-difference
//!   discretizations whose kinetic part is positive semidefinite, so the
//!   discrete spectrum respects the well-depth lower bound.
//! * [`spectrum`]: Sturm-count bisection plus inverse iteration for the
//!   negative eigenvalues, a shooting cross-check, refinement protocols,
//!   and probes of the essential spectrum and boundary decay.
//! * [`scattering`]: phase shifts by matched integration, S-matrix
//!   samples, and a Levinson-theorem consistency check against the
//!   bound-state count.
//! * [`dynamics`]: Crank-Nicolson time evolution (exactly unitary),
//!   trajectory records, the Radin-Simon moment inequality, and an affine
//!   spreading certificate.
//! * [`cli`]: the `ljhl` binary driving all of the above from a TOML
//!   config, with deterministic CSV/JSON outputs.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod ode;
pub mod operator;
pub mod potential;
pub mod report;
pub mod scattering;
pub mod spectrum;

pub use error::{Error, Result};
