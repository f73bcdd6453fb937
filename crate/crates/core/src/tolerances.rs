//! Every numeric threshold used across the crate, in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Cap on QR sweeps per eigenvalue in the Hessenberg iteration.
    pub eig_max_sweeps: usize,
    /// Relative gap below which two eigenvalues count as repeated.
    pub eig_simple_gap: f64,
    /// Endpoint classified real when every |Im k_i| is at most this.
    pub real_imag: f64,
    /// Solutions closer than this in the infinity norm are merged.
    pub dedup: f64,
    /// Paths whose infinity norm exceeds this are counted as diverged.
    pub divergence_norm: f64,
    /// Target for the normalized residual after Newton polishing.
    pub polish_residual: f64,
    /// Maximum Newton iterations in `refine`.
    pub newton_max_iter: usize,
    /// Spectral assignment error accepted by `validate`.
    pub eig_error: f64,
    /// Agreement between sigma(BF) and sigma(sqrt(F) B sqrt(F)).
    pub symmetric_agreement: f64,
    /// Maximum deviation from the predicted modal structure of A0.
    pub modal: f64,
    /// Endpoint residual accepted by `verify_transfer`.
    pub transfer_endpoint: f64,
    /// Relative energy drift accepted by `verify_transfer`.
    pub energy_drift: f64,
    /// Slack on the convexity constraints g_j >= 0.
    pub convexity: f64,
    /// Objective values within this are treated as tied.
    pub objective_tie: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_max_sweeps: 60,
            eig_simple_gap: 1e-8,
            real_imag: 1e-8,
            dedup: 1e-6,
            divergence_norm: 1e8,
            polish_residual: 1e-12,
            newton_max_iter: 100,
            eig_error: 1e-6,
            symmetric_agreement: 1e-8,
            modal: 1e-6,
            transfer_endpoint: 1e-5,
            energy_drift: 1e-8,
            convexity: 1e-9,
            objective_tie: 1e-9,
        }
    }
}
