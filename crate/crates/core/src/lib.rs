//! Exact evolution operators for the Tavis–Cummings model with 1, 2, or 3
//! atoms: a single radiation mode coupled to n two-level atoms under the
//! rotating-wave approximation.
//!
//! Two independent routes compute the same dynamics:
//!
//! * [`closedform`] — the explicit operator-valued exponentials
//!   (`e^{-itgA_n}` entry by entry, assembled from irreducible spin blocks
//!   through constant orthogonal reduction matrices) composed with the free
//!   phase layer; valid on resonance (Δ = ω).
//! * [`oracle`] — eigendecomposition of the Hamiltonian restricted to
//!   excitation sectors, valid for any detuning.
//!
//! States live in [`state`] as finite amplitude maps over the joint
//! atomic ⊗ Fock basis; the interaction conserves total excitation, so every
//! sector is at most 2ⁿ-dimensional and no Fock cutoff exists anywhere.
//!
//! Everything is generic over the scalar via [`scalar::Float`] (`f32` or
//! `f64`); the `*64` aliases below pick the double-precision lane the
//! command-line tool uses.
//!
//! ```
//! use tc_core::closedform::evolve_closed;
//! use tc_core::oracle::evolve_oracle;
//! use tc_core::{JointState64, ModelParams64};
//!
//! let params = ModelParams64::new(3, 1.0, 1.0, 2.7)?;
//! let psi = JointState64::basis_from("eee", 0)?;
//! let closed = evolve_closed(&params, 1.5, &psi)?;
//! let spectral = evolve_oracle(&params, 1.5, &psi)?;
//! assert!(closed.max_deviation(&spectral) < 1e-10);
//! # Ok::<(), tc_core::Error>(())
//! ```

pub mod closedform;
pub mod error;
pub mod kernels;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Float;

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Single-precision complex scalar.
pub type C32 = num_complex::Complex<f32>;

pub type JointState64 = state::JointState<f64>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type ClosedFormMatrix64 = closedform::ClosedFormMatrix<f64>;
pub type ReductionMatrix64 = closedform::ReductionMatrix<f64>;
pub type SectorUnitary64 = oracle::SectorUnitary<f64>;
pub type IdentityReport64 = oracle::IdentityReport<f64>;
