//! Numerical tolerances shared across the crate.

/// Entrywise Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace-one and eigenvalue-floor tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue below which a state counts as singular.
pub const SINGULAR_STATE_TOL: f64 = 1e-10;
/// Completeness defect accepted for ground-truth channels.
pub const CHANNEL_TOL: f64 = 1e-10;
/// Smallest singular value of an invertible equal-time covariance (exact data).
pub const INVERTIBILITY_TOL: f64 = 1e-8;
/// Negative Gram eigenvalues above `-EXACT_CLAMP_TOL` are clamped to zero.
pub const EXACT_CLAMP_TOL: f64 = 1e-8;

/// Bundle of tolerances that callers may override as a unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub state: f64,
    pub singular_state: f64,
    pub channel: f64,
    pub invertibility: f64,
    pub clamp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN_TOL,
            state: STATE_TOL,
            singular_state: SINGULAR_STATE_TOL,
            channel: CHANNEL_TOL,
            invertibility: INVERTIBILITY_TOL,
            clamp: EXACT_CLAMP_TOL,
        }
    }
}
