//! Period interpretation: Ω, Anderson–Thakur polynomials, the matrices Φ and
//! Ψ, and the identities tying them to AMZVs.
//!
//! Inverse twists are never formed. Ψ^{(−1)} = ΦΨ is checked as
//! Ψ = Φ^{(1)}Ψ^{(1)}, which is equivalent because twisting is injective.

pub mod anderson_thakur;
pub mod checks;
pub mod evaluate;
pub mod matrices;
pub mod omega;
pub mod tseries;

pub use anderson_thakur::{check_interpolation, AtCheck, AtPoly, AtSolver};
pub use checks::{
    check_difference_eq, check_period, check_specialization, DiffEqReport, PeriodReport,
    SpecializationReport,
};
pub use matrices::{MotiveContext, MotiveMatrices, MotiveParams, PhiMatrix};
pub use omega::{omega, omega_at, pi_tilde};
pub use tseries::TSeries;

/// Relative precision of the period checks, in θ-digits.
pub const THETA_DIGITS: i64 = 60;
