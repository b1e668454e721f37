//! Concentration points, blow-ups, necks, energy identity, boundary degrees and varifold
//! distance for sequences of maps.

mod blowup;
mod concentration;
mod frame;
mod neck;
pub mod sequences;
mod tree;
mod varifold;

#[cfg(test)]
mod tests;

pub use blowup::{blowup_extract, Blowup};
pub use concentration::{detect_concentration, Concentration};
pub use frame::{ball_masses, has_full_boundary, EnergyField, Frame};
pub use neck::{neck_report, ode_comparison_check, NeckGeometry, NeckReport, OdeBranch, OdeVerdict};
pub use tree::{
    boundary_bubble_degree_audit, energy_identity_check, extract_tree, Bubble, BubbleKind, BubbleRow, BubbleTree,
    IdentityCheck, NeckEntry, PointRow, TreeReport,
};
pub use varifold::{varifold_distance, TestDictionary, TestFunction, VarifoldMeasure};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BubblesConfig {
    /// Minimal mass of a concentration point.
    pub epsilon1: f64,
    /// Energy bound for necks.
    pub epsilon2: f64,
    /// Outer-annulus energy that fixes the bubble scale.
    pub epsilon3: f64,
    pub delta: f64,
    /// Necks pass when the middle angular ratio is below `delta_safety · delta`.
    pub delta_safety: f64,
    /// Block length of the neck windows.
    pub l: f64,
    pub identity_tol: f64,
    /// Slack in `area ≤ (8/9 + lemma_tol) E`.
    pub lemma_tol: f64,
    /// Radius of the balls `B_ρ(x_i)` around concentration points.
    pub rho: f64,
    /// Radius `r*` of the detection balls.
    pub detect_radius: f64,
    /// Window factor `K`: bubbles are read on `B_{Kr}(y)`.
    pub window: f64,
    /// Number of trailing elements that stand for the limit.
    pub tail: usize,
    /// Mass in `B_{σr}` counts as a nested concentration.
    pub nested_ratio: f64,
    pub min_triangles: usize,
    /// Resolution of the reference meshes bubbles are dilated onto.
    pub reference_h: f64,
}

impl Default for BubblesConfig {
    fn default() -> Self {
        BubblesConfig {
            epsilon1: 0.15,
            epsilon2: 0.1,
            epsilon3: 0.0375,
            delta: 1.0 / 63.0,
            delta_safety: 3.0,
            l: 4.0,
            identity_tol: 0.05,
            lemma_tol: 0.02,
            rho: 0.25,
            detect_radius: 0.05,
            window: 4.0,
            tail: 5,
            nested_ratio: 1.0 / 64.0,
            min_triangles: 20,
            reference_h: 0.04,
        }
    }
}

impl BubblesConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Err(Error::Config { key: format!("bubbles.{key}"), reason: reason.into() });
        for (k, v) in [
            ("epsilon1", self.epsilon1),
            ("epsilon2", self.epsilon2),
            ("epsilon3", self.epsilon3),
            ("delta", self.delta),
            ("delta_safety", self.delta_safety),
            ("l", self.l),
            ("identity_tol", self.identity_tol),
            ("lemma_tol", self.lemma_tol),
            ("rho", self.rho),
            ("detect_radius", self.detect_radius),
            ("window", self.window),
            ("nested_ratio", self.nested_ratio),
            ("reference_h", self.reference_h),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(k, "must be positive and finite");
            }
        }
        if self.epsilon3 > (0.5 * self.epsilon1).min(self.epsilon2) {
            return bad("epsilon3", "must be at most min(epsilon1/2, epsilon2)");
        }
        if self.rho > 0.5 {
            return bad("rho", "must be at most 1/2");
        }
        if self.detect_radius > self.rho {
            return bad("detect_radius", "must be at most rho");
        }
        if self.window < 1.0 {
            return bad("window", "must be at least 1");
        }
        if self.nested_ratio >= 1.0 {
            return bad("nested_ratio", "must be below 1");
        }
        if self.tail == 0 {
            return bad("tail", "must be at least 1");
        }
        if self.reference_h >= 0.5 {
            return bad("reference_h", "must be below 1/2");
        }
        Ok(())
    }

    /// Threshold on the middle angular ratio of a neck.
    pub fn angular_threshold(&self) -> f64 {
        self.delta_safety * self.delta
    }
}
