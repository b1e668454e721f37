//! Sweepouts, their regularization and tightening, and width estimation.

mod conformal;
mod degree;
mod families;
mod improve;
mod mollify;
mod sweepout;
mod tighten;
mod width;

#[cfg(test)]
mod tests;

pub use conformal::{compose, conformal_reparametrize, reparametrize_map, DiskDiffeo, GapReport};
pub(crate) use degree::boundary_cycle;
pub use degree::boundary_degree;
pub use families::{sphere_fold, Family};
pub use improve::{
    build_interval_cover, is_locally_harmonic, maximal_improvement, maximal_improvement_at, CoverPiece, IntervalCover,
    MaximalImprovement,
};
pub use mollify::{mollify_map, mollify_sweepout};
pub use sweepout::{sha256_hex, Continuity, EndpointMode, HomotopyMove, MoveKind, Sweepout};
pub use tighten::{collapse_small_disk, threshold, tighten, TightenReport, WidthRow};
pub use width::{width, Certificate, WidthEstimate, WidthOutcome, WidthStatus};

use serde::{Deserialize, Serialize};

/// Parameters of the tightening pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinmaxConfig {
    /// Energy bound ε for ball collections.
    pub epsilon: f64,
    /// Collections tried per maximal-improvement search.
    pub ball_budget: usize,
    /// Free-homotopy threshold as a fraction of the current maximal energy.
    pub threshold_fraction: f64,
    /// Fixed-boundary threshold divisor λ.
    pub lambda: f64,
    /// Bound on adjacent-slice `C⁰ ∩ W^{1,2}` distance.
    pub continuity_budget: f64,
    pub mollify_scale: f64,
    pub mollify_bound: f64,
    pub eps_metric: f64,
    /// Objective evaluations per slice in the reparametrization search; 0 disables it.
    pub reparam_evals: usize,
    pub stall_tol: f64,
    pub iteration_budget: usize,
    pub perturb_harmonic: bool,
    pub jobs: usize,
    pub seed: u64,
}

impl Default for MinmaxConfig {
    fn default() -> Self {
        MinmaxConfig {
            epsilon: 0.1,
            ball_budget: 8,
            threshold_fraction: 0.5,
            lambda: 2.0,
            continuity_budget: 10.0,
            mollify_scale: 0.05,
            mollify_bound: 1.0,
            eps_metric: 0.01,
            reparam_evals: 150,
            stall_tol: 1e-3,
            iteration_budget: 20,
            perturb_harmonic: false,
            jobs: 1,
            seed: 0,
        }
    }
}

impl MinmaxConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |key: &str, reason: &str| Err(crate::Error::Config { key: key.into(), reason: reason.into() });
        if !(self.epsilon > 0.0) {
            return bad("epsilon", "must be positive");
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return bad("threshold_fraction", "must lie in (0, 1)");
        }
        if !(self.lambda > 1.0) {
            return bad("lambda", "must exceed 1");
        }
        if !(self.mollify_scale >= 0.0 && self.mollify_scale <= 0.5) {
            return bad("mollify_scale", "must lie in [0, 0.5]");
        }
        if !(self.stall_tol > 0.0) {
            return bad("stall_tol", "must be positive");
        }
        if self.ball_budget == 0 {
            return bad("ball_budget", "must be at least 1");
        }
        Ok(())
    }
}
