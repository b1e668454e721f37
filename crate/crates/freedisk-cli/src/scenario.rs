//! Scenario configs: target, domain, sweepout family, thresholds and budgets.

use freedisk::bubbles::BubblesConfig;
use freedisk::domain::{build_mesh, DiskMesh, MeshDomain};
use freedisk::manifold::{ConstraintSubmanifold, EmbeddedManifold, FourierCurve};
use freedisk::minmax::{Family, MinmaxConfig};
use freedisk::solver::{BoundaryMode, SolverConfig};
use freedisk::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Sphere { radius: f64 },
    FlatTorus { lattice: Vec<f64> },
    Ellipsoid { axes: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Equator,
    Latitude { latitude: f64 },
    /// Span of the first `k` axes through the origin (flat targets).
    CoordinateSubtorus { k: usize },
    LinearSubtorus { origin: Vec<f64>, directions: Vec<Vec<f64>> },
    /// Circle of the given radius in the plane of the first two axes (flat targets).
    Circle { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FreeHomotopy,
    FixedBoundary,
}

/// Threshold constants shared by the solver, the tightening and the bubble analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub epsilon0: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub epsilon3: f64,
    pub delta: f64,
    pub lambda: f64,
    /// Fermi radius of Γ; the constraint's own default when absent.
    pub kappa: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        let b = BubblesConfig::default();
        Thresholds {
            epsilon0: SolverConfig::default().epsilon0,
            epsilon1: b.epsilon1,
            epsilon2: b.epsilon2,
            epsilon3: b.epsilon3,
            delta: b.delta,
            lambda: MinmaxConfig::default().lambda,
            kappa: None,
        }
    }
}

/// Constructed concentrating sequence analysed by `bubbles` when no archive is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sequence", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    Hemisphere { lambdas: Vec<f64>, angle: f64 },
    TwoBubble { lambdas: Vec<f64>, angle: f64 },
    ConformalNeck { lengths: Vec<f64>, neck_energy: f64, tau_min: f64, n_theta: usize },
    TwoDisk { lambdas: Vec<f64>, amplitude: f64, angle: f64 },
}

/// Options of the `verify` suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random cases per randomized check.
    pub cases: usize,
    /// Mesh size of the randomized checks.
    pub h: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { cases: 20, h: 0.08 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: u32,
    pub manifold: ManifoldSpec,
    pub constraint: ConstraintSpec,
    #[serde(default = "default_domain")]
    pub domain: MeshDomain,
    pub h: f64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Initial sweepout; needed by `solve`, `replace`, `tighten` and `width`.
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default = "default_slices")]
    pub slices: usize,
    /// Time of the family slice used by `solve` and `replace`.
    #[serde(default = "default_slice_time")]
    pub slice_time: f64,
    /// Balls for `replace`.
    #[serde(default)]
    pub balls: Vec<freedisk::domain::GeneralizedBall>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub minmax: MinmaxConfig,
    #[serde(default)]
    pub bubbles: BubblesConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sequence: Option<SequenceSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_domain() -> MeshDomain {
    MeshDomain::Disk
}
fn default_mode() -> Mode {
    Mode::FreeHomotopy
}
fn default_slices() -> usize {
    9
}
fn default_slice_time() -> f64 {
    0.5
}
fn default_rho() -> f64 {
    0.5
}

fn bad<T>(key: &str, reason: impl Into<String>) -> Result<T> {
    Err(Error::Config { key: key.into(), reason: reason.into() })
}

/// Dotted path of the first unknown or ill-typed key in a serde error message, if any.
fn key_of(msg: &str) -> String {
    if let Some(i) = msg.find("unknown field `") {
        let rest = &msg[i + 15..];
        if let Some(j) = rest.find('`') {
            return rest[..j].to_string();
        }
    }
    if let Some(i) = msg.find("missing field `") {
        let rest = &msg[i + 15..];
        if let Some(j) = rest.find('`') {
            return rest[..j].to_string();
        }
    }
    "config".to_string()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            Error::Config { key: key_of(&msg), reason: msg }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config { key: "--config".into(), reason: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != 1 {
            return bad("format", "must be 1");
        }
        let t = &self.thresholds;
        for (k, v) in [
            ("thresholds.epsilon0", t.epsilon0),
            ("thresholds.epsilon1", t.epsilon1),
            ("thresholds.epsilon2", t.epsilon2),
            ("thresholds.epsilon3", t.epsilon3),
            ("thresholds.delta", t.delta),
            ("thresholds.lambda", t.lambda),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(k, "must be positive and finite");
            }
        }
        if let Some(k) = t.kappa {
            if !(k.is_finite() && k > 0.0) {
                return bad("thresholds.kappa", "must be positive and finite");
            }
        }
        if t.epsilon1 > 0.5 * t.epsilon0 {
            return bad("thresholds.epsilon1", "must be at most epsilon0/2");
        }
        if t.epsilon3 > (0.5 * t.epsilon1).min(t.epsilon2) {
            return bad("thresholds.epsilon3", "must be at most min(epsilon1/2, epsilon2)");
        }
        if !(self.h > 0.0 && self.h < 0.5) {
            return bad("h", "must lie in (0, 1/2)");
        }
        if self.slices < 2 {
            return bad("slices", "must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.slice_time) {
            return bad("slice_time", "must lie in [0, 1]");
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad("rho", "must lie in (0, 1]");
        }
        self.manifold()?;
        self.target()?;
        if let Some(family) = &self.family {
            let fixed = matches!(family, Family::FixedDiskBulge { .. });
            if fixed != (self.mode == Mode::FixedBoundary) {
                return bad("mode", format!("family {family:?} does not run in {:?} mode", self.mode));
            }
            let natural = family.target();
            let g = self.target()?;
            if natural.parent.name() != g.parent.name() || natural.name() != g.name() {
                return bad(
                    "family",
                    format!("family runs on {} / {}, not {} / {}", natural.parent.name(), natural.name(), g.parent.name(), g.name()),
                );
            }
        }
        self.solver_config().validate().map_err(prefix("solver"))?;
        self.minmax_config().validate().map_err(prefix("minmax"))?;
        self.bubbles_config().validate()?;
        if self.verify.cases == 0 {
            return bad("verify.cases", "must be at least 1");
        }
        if !(self.verify.h > 0.0 && self.verify.h < 0.5) {
            return bad("verify.h", "must lie in (0, 1/2)");
        }
        Ok(())
    }

    pub fn manifold(&self) -> Result<EmbeddedManifold> {
        Ok(match &self.manifold {
            ManifoldSpec::Sphere { radius } => {
                if !(*radius > 0.0) {
                    return bad("manifold.radius", "must be positive");
                }
                EmbeddedManifold::sphere(*radius)
            }
            ManifoldSpec::FlatTorus { lattice } => {
                if lattice.is_empty() || lattice.iter().any(|l| !(*l > 0.0)) {
                    return bad("manifold.lattice", "must be a non-empty list of positive periods");
                }
                EmbeddedManifold::flat_torus_with_lattice(lattice.clone())
            }
            ManifoldSpec::Ellipsoid { axes } => {
                if axes.len() < 2 || axes.iter().any(|a| !(*a > 0.0)) {
                    return bad("manifold.axes", "must list at least two positive semi-axes");
                }
                EmbeddedManifold::ellipsoid(axes.clone())
            }
        })
    }

    pub fn target(&self) -> Result<ConstraintSubmanifold> {
        let n = self.manifold()?;
        let flat = n.is_flat();
        let sphere = matches!(self.manifold, ManifoldSpec::Sphere { .. });
        let dim = n.ambient_dim;
        let g = match &self.constraint {
            ConstraintSpec::Circle { radius } if matches!(&self.manifold, ManifoldSpec::Ellipsoid { axes } if axes.len() == 3 && axes[0] == *radius && axes[1] == *radius) => {
                ConstraintSubmanifold::curve(n, FourierCurve::circle(dim, *radius))
            }
            ConstraintSpec::Equator | ConstraintSpec::Latitude { .. } if !sphere => {
                return bad("constraint.kind", "a latitude circle needs a sphere target")
            }
            ConstraintSpec::Equator => ConstraintSubmanifold::equator(n),
            ConstraintSpec::Latitude { latitude } => {
                if !(latitude.abs() < std::f64::consts::FRAC_PI_2) {
                    return bad("constraint.latitude", "must lie in (-pi/2, pi/2)");
                }
                ConstraintSubmanifold::latitude(n, *latitude)
            }
            _ if !flat => return bad("constraint.kind", "this constraint needs a flat target"),
            ConstraintSpec::CoordinateSubtorus { k } => {
                if *k == 0 || *k >= dim {
                    return bad("constraint.k", "must lie in 1..dim");
                }
                ConstraintSubmanifold::coordinate_subtorus(n, *k)
            }
            ConstraintSpec::LinearSubtorus { origin, directions } => {
                if origin.len() != dim || directions.is_empty() || directions.iter().any(|d| d.len() != dim) {
                    return bad("constraint.directions", "origin and directions must match the ambient dimension");
                }
                ConstraintSubmanifold::linear_subtorus(n, origin.clone(), directions.clone())
            }
            ConstraintSpec::Circle { radius } => {
                if !(*radius > 0.0) || dim < 2 {
                    return bad("constraint.radius", "must be positive");
                }
                ConstraintSubmanifold::curve(n, FourierCurve::circle(dim, *radius))
            }
        };
        Ok(match self.thresholds.kappa {
            Some(k) => g.with_fermi_radius(k),
            None => g,
        })
    }

    pub fn family(&self) -> Result<&Family> {
        self.family.as_ref().ok_or_else(|| Error::Config { key: "family".into(), reason: "this command needs an initial family".into() })
    }

    pub fn mesh(&self) -> Result<DiskMesh> {
        build_mesh(self.domain, self.h)
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        match self.mode {
            Mode::FreeHomotopy => BoundaryMode::Free,
            Mode::FixedBoundary => BoundaryMode::Fixed,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { epsilon0: self.thresholds.epsilon0, seed: self.seed, ..self.solver.clone() }
    }

    pub fn minmax_config(&self) -> MinmaxConfig {
        MinmaxConfig { lambda: self.thresholds.lambda, seed: self.seed, ..self.minmax.clone() }
    }

    pub fn bubbles_config(&self) -> BubblesConfig {
        let t = &self.thresholds;
        BubblesConfig { epsilon1: t.epsilon1, epsilon2: t.epsilon2, epsilon3: t.epsilon3, delta: t.delta, ..self.bubbles.clone() }
    }
}

fn prefix(section: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config { key, reason } => Error::Config { key: format!("{section}.{key}"), reason },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> &'static str {
        r#"{ "format": 1, "manifold": { "kind": "sphere", "radius": 1.0 }, "constraint": { "kind": "equator" }, "h": 0.1 }"#
    }

    #[test]
    fn round_trip_and_defaults() {
        let s = Scenario::from_json(base()).unwrap();
        assert_eq!(s.thresholds, Thresholds::default());
        assert_eq!(s.mode, Mode::FreeHomotopy);
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn thresholds_reach_the_stage_configs() {
        let mut s = Scenario::from_json(base()).unwrap();
        s.thresholds.epsilon0 = 0.5;
        s.thresholds.epsilon3 = 0.01;
        s.thresholds.lambda = 3.0;
        s.seed = 9;
        assert_eq!(s.solver_config().epsilon0, 0.5);
        assert_eq!(s.solver_config().seed, 9);
        assert_eq!(s.bubbles_config().epsilon3, 0.01);
        assert_eq!(s.minmax_config().lambda, 3.0);
        s.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = base().replace("\"h\": 0.1", "\"h\": 0.1, \"mesh_size\": 2");
        match Scenario::from_json(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "mesh_size"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constraint_must_fit_the_manifold() {
        let text = base().replace("\"equator\"", "\"coordinate_subtorus\", \"k\": 1");
        assert!(matches!(Scenario::from_json(&text), Err(Error::Config { key, .. }) if key == "constraint.kind"));
    }
}
