use super::fermi::{ChartKind, FermiChart};
use super::{EmbeddedManifold, ManifoldKind};
use crate::error::{Error, Result};
use crate::vec::{complete_basis, dist, dot, gram_schmidt, norm};
use std::f64::consts::TAU;
use std::sync::Arc;

/// Closed curve `c(φ) = center + Σ_k cos_k cos(kφ) + sin_k sin(kφ)` in R^n with a
/// cumulative arclength table.
#[derive(Debug, Clone)]
pub struct FourierCurve {
    pub center: Vec<f64>,
    pub cos: Vec<Vec<f64>>,
    pub sin: Vec<Vec<f64>>,
    table_phi: Vec<f64>,
    table_s: Vec<f64>,
}

const TABLE: usize = 4096;

impl FourierCurve {
    pub fn new(center: Vec<f64>, cos: Vec<Vec<f64>>, sin: Vec<Vec<f64>>) -> Self {
        let mut c = FourierCurve { center, cos, sin, table_phi: Vec::new(), table_s: Vec::new() };
        let mut phi = Vec::with_capacity(TABLE + 1);
        let mut s = Vec::with_capacity(TABLE + 1);
        let mut acc = 0.0;
        let dphi = TAU / TABLE as f64;
        for i in 0..=TABLE {
            let p = i as f64 * dphi;
            if i > 0 {
                // Simpson on each table cell.
                let a = norm(&c.derivative(p - dphi));
                let m = norm(&c.derivative(p - 0.5 * dphi));
                let b = norm(&c.derivative(p));
                acc += dphi / 6.0 * (a + 4.0 * m + b);
            }
            phi.push(p);
            s.push(acc);
        }
        c.table_phi = phi;
        c.table_s = s;
        c
    }

    /// Circle of radius `r` in the plane spanned by the first two axes of R^n.
    pub fn circle(n: usize, r: f64) -> Self {
        let mut e1 = vec![0.0; n];
        let mut e2 = vec![0.0; n];
        e1[0] = r;
        e2[1] = r;
        FourierCurve::new(vec![0.0; n], vec![e1], vec![e2])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn eval(&self, phi: f64) -> Vec<f64> {
        let mut p = self.center.clone();
        for (k, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kk = (k + 1) as f64;
            let (sn, cs) = (kk * phi).sin_cos();
            for i in 0..p.len() {
                p[i] += c[i] * cs + s[i] * sn;
            }
        }
        p
    }

    pub fn derivative(&self, phi: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.center.len()];
        for (k, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kk = (k + 1) as f64;
            let (sn, cs) = (kk * phi).sin_cos();
            for i in 0..p.len() {
                p[i] += kk * (-c[i] * sn + s[i] * cs);
            }
        }
        p
    }

    fn second_derivative(&self, phi: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.center.len()];
        for (k, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kk = (k + 1) as f64;
            let (sn, cs) = (kk * phi).sin_cos();
            for i in 0..p.len() {
                p[i] -= kk * kk * (c[i] * cs + s[i] * sn);
            }
        }
        p
    }

    pub fn length(&self) -> f64 {
        *self.table_s.last().unwrap()
    }

    /// Arclength from φ = 0, for φ in [0, 2π).
    pub fn arclength(&self, phi: f64) -> f64 {
        let phi = phi.rem_euclid(TAU);
        let x = phi / TAU * TABLE as f64;
        let i = (x.floor() as usize).min(TABLE - 1);
        let f = x - i as f64;
        self.table_s[i] * (1.0 - f) + self.table_s[i + 1] * f
    }

    pub fn phi_of_arclength(&self, s: f64) -> f64 {
        let l = self.length();
        let s = s.rem_euclid(l);
        let i = match self.table_s.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(TABLE - 1),
            Err(i) => i.saturating_sub(1).min(TABLE - 1),
        };
        let (s0, s1) = (self.table_s[i], self.table_s[i + 1]);
        let f = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        self.table_phi[i] + f * (self.table_phi[i + 1] - self.table_phi[i])
    }

    /// Parameter of the closest curve point (dense table search, then Newton).
    pub fn closest_phi(&self, p: &[f64]) -> f64 {
        let m = 512;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..m {
            let phi = TAU * i as f64 / m as f64;
            let d = crate::vec::dist2(&self.eval(phi), p);
            if d < best.0 {
                best = (d, phi);
            }
        }
        self.refine_phi(p, best.1)
    }

    /// Newton on `⟨c(φ) - p, c'(φ)⟩ = 0` starting at `phi`.
    pub fn refine_phi(&self, p: &[f64], mut phi: f64) -> f64 {
        let h = TAU / 512.0;
        let (lo, hi) = (phi - h, phi + h);
        for _ in 0..30 {
            let c = self.eval(phi);
            let d1 = self.derivative(phi);
            let d2 = self.second_derivative(phi);
            let diff: Vec<f64> = c.iter().zip(p).map(|(a, b)| a - b).collect();
            let g = dot(&diff, &d1);
            let gp = dot(&d1, &d1) + dot(&diff, &d2);
            if gp <= 0.0 {
                break;
            }
            let step = g / gp;
            phi = (phi - step).clamp(lo, hi);
            if step.abs() < 1e-15 {
                break;
            }
        }
        phi.rem_euclid(TAU)
    }
}

#[derive(Debug, Clone)]
pub enum GammaKind {
    /// `origin + span(directions)` inside a flat torus; directions are orthonormal.
    LinearSubtorus { origin: Vec<f64>, directions: Vec<Vec<f64>> },
    /// The circle at the given latitude (radians) of a round sphere; 0 is the equator.
    Latitude { latitude: f64 },
    /// A closed curve in a flat target.
    ParametricCurve(Arc<FourierCurve>),
}

/// Γ ⊂ N with its own closest-point projection and Fermi charts.
#[derive(Debug, Clone)]
pub struct ConstraintSubmanifold {
    pub parent: EmbeddedManifold,
    pub kind: GammaKind,
    pub fermi_radius: f64,
    pub codim_in_n: usize,
}

impl ConstraintSubmanifold {
    pub fn linear_subtorus(parent: EmbeddedManifold, origin: Vec<f64>, directions: Vec<Vec<f64>>) -> Self {
        assert!(parent.is_flat(), "a linear subtorus needs a flat target");
        let directions = gram_schmidt(&directions);
        let codim = parent.dim() - directions.len();
        ConstraintSubmanifold {
            fermi_radius: 0.2 * parent_scale(&parent),
            parent,
            kind: GammaKind::LinearSubtorus { origin, directions },
            codim_in_n: codim,
        }
    }

    /// The coordinate subtorus spanned by the first `k` axes through the origin.
    pub fn coordinate_subtorus(parent: EmbeddedManifold, k: usize) -> Self {
        let n = parent.ambient_dim;
        let dirs = (0..k)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::linear_subtorus(parent, vec![0.0; n], dirs)
    }

    pub fn latitude(parent: EmbeddedManifold, latitude: f64) -> Self {
        let r = match parent.kind {
            ManifoldKind::RoundSphere { radius } => radius,
            _ => panic!("a latitude circle needs a round sphere"),
        };
        let geodesic_radius = if latitude.abs() < 1e-12 { f64::INFINITY } else { r / latitude.tan().abs() };
        ConstraintSubmanifold {
            fermi_radius: 0.2 * r.min(geodesic_radius),
            parent,
            kind: GammaKind::Latitude { latitude },
            codim_in_n: 1,
        }
    }

    pub fn equator(parent: EmbeddedManifold) -> Self {
        Self::latitude(parent, 0.0)
    }

    pub fn curve(parent: EmbeddedManifold, curve: FourierCurve) -> Self {
        assert!(parent.is_flat(), "a parametric curve needs a flat target");
        assert_eq!(parent.ambient_dim, curve.dim());
        let m = 256;
        let mut rmin = f64::INFINITY;
        for i in 0..m {
            let phi = TAU * i as f64 / m as f64;
            let d1 = curve.derivative(phi);
            let d2 = curve.second_derivative(phi);
            let s2 = dot(&d1, &d1);
            let perp: Vec<f64> = d2.iter().zip(&d1).map(|(a, b)| a - dot(&d2, &d1) / s2 * b).collect();
            let k = norm(&perp) / s2;
            if k > 1e-14 {
                rmin = rmin.min(1.0 / k);
            }
        }
        ConstraintSubmanifold {
            fermi_radius: 0.2 * rmin.min(parent_scale(&parent)),
            codim_in_n: parent.dim() - 1,
            parent,
            kind: GammaKind::ParametricCurve(Arc::new(curve)),
        }
    }

    pub fn with_fermi_radius(mut self, kappa: f64) -> Self {
        self.fermi_radius = kappa;
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.parent.ambient_dim
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            GammaKind::LinearSubtorus { directions, .. } => directions.len(),
            _ => 1,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GammaKind::LinearSubtorus { directions, .. } => format!("subtorus(dim {})", directions.len()),
            GammaKind::Latitude { latitude } => format!("latitude({latitude})"),
            GammaKind::ParametricCurve(c) => format!("curve(length {:.4})", c.length()),
        }
    }

    fn sphere_radius(&self) -> f64 {
        match self.parent.kind {
            ManifoldKind::RoundSphere { radius } => radius,
            _ => unreachable!(),
        }
    }

    /// Closest point of Γ.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        self.project_into(p, &mut out);
        out
    }

    pub fn project_into(&self, p: &[f64], out: &mut [f64]) {
        match &self.kind {
            GammaKind::LinearSubtorus { origin, directions } => {
                out.copy_from_slice(origin);
                for d in directions {
                    let c: f64 = p.iter().zip(origin).zip(d).map(|((a, o), e)| (a - o) * e).sum();
                    for (o, e) in out.iter_mut().zip(d) {
                        *o += c * e;
                    }
                }
            }
            GammaKind::Latitude { latitude } => {
                let r = self.sphere_radius();
                let lon = p[1].atan2(p[0]);
                let rho = r * latitude.cos();
                out[0] = rho * lon.cos();
                out[1] = rho * lon.sin();
                out[2] = r * latitude.sin();
            }
            GammaKind::ParametricCurve(c) => {
                let phi = c.closest_phi(p);
                out.copy_from_slice(&c.eval(phi));
            }
        }
    }

    /// Distance from `x` to Γ.
    pub fn distance(&self, x: &[f64]) -> f64 {
        dist(&self.project(x), x)
    }

    /// Orthonormal ambient basis of T_xΓ.
    pub fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.kind {
            GammaKind::LinearSubtorus { directions, .. } => directions.clone(),
            GammaKind::Latitude { .. } => {
                let l = x[0].hypot(x[1]);
                vec![vec![-x[1] / l, x[0] / l, 0.0]]
            }
            GammaKind::ParametricCurve(c) => {
                let phi = c.closest_phi(x);
                let d = c.derivative(phi);
                let n = norm(&d);
                vec![d.iter().map(|v| v / n).collect()]
            }
        }
    }

    /// Component of `v` tangent to Γ at `x`.
    pub fn tangent_project(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for e in self.tangent_basis(x) {
            let c = dot(v, &e);
            for (o, ei) in out.iter_mut().zip(&e) {
                *o += c * ei;
            }
        }
        out
    }

    /// `|P_{T_xΓ} v|`; zero iff `v ⊥ T_xΓ`.
    pub fn orthogonality_defect(&self, x: &[f64], v: &[f64]) -> f64 {
        norm(&self.tangent_project(x, v))
    }

    /// Angle parameter of a point of a closed curve Γ, used for winding numbers.
    pub fn loop_parameter(&self, x: &[f64]) -> Option<f64> {
        match &self.kind {
            GammaKind::LinearSubtorus { .. } => None,
            GammaKind::Latitude { .. } => Some(x[1].atan2(x[0])),
            GammaKind::ParametricCurve(c) => Some(c.closest_phi(x)),
        }
    }

    /// Point of a closed curve Γ at angle parameter `phi`.
    pub fn loop_point(&self, phi: f64) -> Option<Vec<f64>> {
        match &self.kind {
            GammaKind::LinearSubtorus { .. } => None,
            GammaKind::Latitude { latitude } => {
                let r = self.sphere_radius();
                let rho = r * latitude.cos();
                Some(vec![rho * phi.cos(), rho * phi.sin(), r * latitude.sin()])
            }
            GammaKind::ParametricCurve(c) => Some(c.eval(phi)),
        }
    }

    /// Fermi chart centred at `x ∈ Γ` on a ball of the given radius.
    pub fn fermi_chart(&self, x: &[f64], radius: f64) -> Result<FermiChart> {
        if radius > self.fermi_radius * (1.0 + 1e-12) {
            return Err(Error::RadiusTooLarge { radius, fermi_radius: self.fermi_radius });
        }
        let center = self.project(x);
        let kind = match &self.kind {
            GammaKind::LinearSubtorus { directions, .. } => ChartKind::Affine {
                basis: complete_basis(directions, self.ambient_dim()),
            },
            GammaKind::Latitude { latitude } => ChartKind::Latitude {
                radius: self.sphere_radius(),
                lat0: *latitude,
                lon0: center[1].atan2(center[0]),
            },
            GammaKind::ParametricCurve(c) => {
                let phi0 = c.closest_phi(&center);
                let t = c.derivative(phi0);
                let normals = complete_basis(&gram_schmidt(&[t]), c.dim())[1..].to_vec();
                ChartKind::Curve { curve: c.clone(), s0: c.arclength(phi0), normals }
            }
        };
        Ok(FermiChart {
            center,
            radius,
            dim: self.parent.dim(),
            gamma_dim: self.dim(),
            kind,
        })
    }
}

fn parent_scale(parent: &EmbeddedManifold) -> f64 {
    match &parent.kind {
        ManifoldKind::FlatTorus { lattice, .. } => 0.5 * lattice.iter().cloned().fold(f64::INFINITY, f64::min),
        _ => parent.min_curvature_radius(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equator_projection_is_idempotent() {
        let g = ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0));
        let p = g.project(&[0.3, 0.4, 0.9]);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15 && p[2] == 0.0);
        assert_eq!(g.project(&p), p);
    }

    #[test]
    fn defect_of_tangent_and_normal_vectors() {
        let g = ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0));
        let x = [1.0, 0.0, 0.0];
        assert_eq!(g.orthogonality_defect(&x, &[0.0, 0.0, 1.0]), 0.0);
        assert!((g.orthogonality_defect(&x, &[0.0, 1.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_curve_length_and_projection() {
        let c = FourierCurve::circle(3, 2.0);
        assert!((c.length() - 2.0 * TAU).abs() < 1e-9);
        let g = ConstraintSubmanifold::curve(EmbeddedManifold::flat_torus(3), c);
        let p = g.project(&[0.0, 3.0, 1.0]);
        assert!((p[0]).abs() < 1e-10 && (p[1] - 2.0).abs() < 1e-10 && p[2].abs() < 1e-12);
    }
}
