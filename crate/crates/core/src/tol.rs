//! Centralized tolerance policy.
//!
//! Theorem margins can be exactly zero (equality cases), so every check
//! accepts `margin >= -tol` with a tolerance that scales with the spectral
//! norms of the participating matrices.

/// Default check tolerance: `1e-9 * (1 + sum of spectral norms)`.
pub fn check_tol(norms: &[f64]) -> f64 {
    1e-9 * (1.0 + norms.iter().sum::<f64>())
}

/// Acceptance band for a semidefiniteness certificate.
pub fn psd_tol(norm: f64) -> f64 {
    1e-10 * (1.0 + norm)
}

/// Strict-positivity threshold for a definiteness certificate.
pub fn pd_tol(norm: f64) -> f64 {
    1e-12 * (1.0 + norm)
}

/// Residual bound for projection/constraint identities that are degree four
/// in the inputs (e.g. `B1 A^2 B1` against its range projection).
pub fn proj_tol(n: usize, norm_a: f64, norm_b: f64) -> f64 {
    1e-8 * (n as f64).sqrt() * (1.0 + norm_a + norm_b).powi(2)
}

/// Numerical-rank cutoff relative to the largest eigenvalue.
pub fn rank_cutoff(lambda_max: f64) -> f64 {
    1e-8 * lambda_max
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_with_norms() {
        assert_eq!(check_tol(&[]), 1e-9);
        assert_eq!(check_tol(&[1.0, 2.0]), 4e-9);
        assert!(proj_tol(4, 1.0, 1.0) > proj_tol(1, 1.0, 1.0));
    }
}
