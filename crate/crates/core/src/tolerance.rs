use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by validation and verification code.
///
/// Defaults are sized for double precision at dimension ≤ 64.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity check, max |m - m†| entry.
    pub herm: f64,
    /// Trace checks.
    pub tr: f64,
    /// Allowed negative eigenvalue before a matrix is rejected as not PSD.
    pub psd: f64,
    /// Eigen-decomposition and generic matrix-identity residuals.
    pub eig: f64,
    /// Optimizer agreement.
    pub opt: f64,
    /// Trade-off region boundary detection.
    pub region: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            tr: 1e-10,
            psd: 1e-9,
            eig: 1e-9,
            opt: 1e-6,
            region: 1e-9,
        }
    }
}
