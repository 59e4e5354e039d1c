//! Separability analysis of interaction Hamiltonians on composite quantum
//! systems.
//!
//! An interaction is separable when some product basis diagonalizes it.
//! The decision is made on the operator Schmidt form H = Σ w_k C_k ⊗ D_k:
//! H is separable exactly when the C_k commute pairwise and the D_k commute
//! pairwise. On top of that verdict the crate extracts pointer bases and
//! the projector-sum spectral form, simulates the reduced dynamics, and
//! searches for changes of system/environment split that make a given
//! Hamiltonian separable.

pub mod dynamics;
pub mod error;
pub mod format;
pub mod jointdiag;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod schmidt;
pub mod search;

pub use error::{Result, SepError};
pub use operator::{BipartiteOperator, FactorSpace, ToleranceProfile};
pub use schmidt::{
    analyze, operator_schmidt, pointer_bases, product_eigenbasis_oracle, separability_verdict,
    spectral_form, OracleVerdict, PointerBases, SchmidtDecomposition, SeparabilityReport,
    SpectralForm, Verdict,
};
