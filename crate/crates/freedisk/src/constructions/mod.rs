//! Comparison maps with explicit energy bounds: the cone over a short free-boundary arc,
//! the interpolation band, the modified band and the Fermi-chart interpolation.
//!
//! Every construction returns the mesh map together with its measured energy and the
//! empirical constant `C_emp` of its bound; the constants are reported, never asserted.

mod band;
mod trace;

pub use band::{band_mesh, ModifiedBand};
pub use trace::{wirtinger_check, BoundaryTrace};

use crate::domain::{build_mesh, MeshDomain};
use crate::energy::{dirichlet_energy, MapOnMesh};
use crate::error::{Error, Result};
use crate::manifold::{ConstraintSubmanifold, FermiChart};
use crate::vec::{dist, dist2, lerp};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct Construction {
    pub map: MapOnMesh,
    /// Band width (1 for the cone).
    pub rho: f64,
    pub energy: f64,
    pub c_emp: f64,
    /// Modified band only: `∫|dv/dφ|² dφ` over both removed arcs.
    pub arc_energy: Option<f64>,
}

/// Summary line of a construction, as written to reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub rho: f64,
    pub energy: f64,
    pub c_emp: f64,
    pub arc_energy: Option<f64>,
}

impl Construction {
    pub fn summary(&self) -> ConstructionSummary {
        ConstructionSummary { rho: self.rho, energy: self.energy, c_emp: self.c_emp, arc_energy: self.arc_energy }
    }
}

fn chart_coords(chart: &FermiChart, f: &BoundaryTrace) -> Result<Vec<Vec<f64>>> {
    f.samples
        .iter()
        .map(|p| {
            let y = chart.inverse(p);
            if crate::vec::norm(&y) > chart.radius || dist(&chart.forward(&y), p) > 1e-6 * chart.radius.max(1e-300) + 1e-12 {
                Err(Error::OutsideFermiChart)
            } else {
                Ok(y)
            }
        })
        .collect()
}

fn eval_samples(samples: &[Vec<f64>], step: f64, theta: f64) -> Vec<f64> {
    let n = samples.len() - 1;
    let x = (theta / step).clamp(0.0, n as f64);
    let k = (x.floor() as usize).min(n - 1);
    lerp(&samples[k], &samples[k + 1], x - k as f64)
}

fn polar_coords(p: [f64; 2]) -> (f64, f64) {
    let th = p[1].max(0.0).atan2(p[0]);
    (p[0].hypot(p[1]), th.clamp(0.0, PI))
}

/// Puts every Γ-labelled vertex exactly on Γ.
fn snap_gamma(u: &mut MapOnMesh) {
    for i in 0..u.n_vertices() {
        if u.on_gamma(i) {
            let p = u.target.project(u.value(i));
            u.value_mut(i).copy_from_slice(&p);
        }
    }
}

/// The cone `v(r, θ) = r·f(θ)` in a Fermi chart centred at `f(0)`, on D⁺ meshed at size `h`.
///
/// `delta` bounds `∫|f'|`; `C_emp = E(v)/δ²` with δ the measured length.
pub fn cone_extension(f: &BoundaryTrace, delta: f64, gamma: &Arc<ConstraintSubmanifold>, h: f64) -> Result<Construction> {
    if !f.endpoints_on_gamma {
        let f2 = f.clone().with_endpoints_on(gamma, 1e-8)?;
        return cone_extension(&f2, delta, gamma, h);
    }
    let len = f.length();
    if len > delta * (1.0 + 1e-12) {
        return Err(Error::TraceTooLong { length: len, bound: delta });
    }
    let chart = gamma.fermi_chart(&f.samples[0], gamma.fermi_radius)?;
    let ys = chart_coords(&chart, f)?;
    let step = f.step();
    let mesh = Arc::new(build_mesh(MeshDomain::HalfDisk, h)?);
    let mut map = MapOnMesh::from_fn(mesh, gamma.clone(), |p| {
        let (r, th) = polar_coords(p);
        let y: Vec<f64> = eval_samples(&ys, step, th).iter().map(|c| r.min(1.0) * c).collect();
        chart.forward(&y)
    });
    snap_gamma(&mut map);
    let energy = dirichlet_energy(&map);
    let c_emp = if len > 0.0 { energy / (len * len) } else { 0.0 };
    Ok(Construction { map, rho: 1.0, energy, c_emp, arc_energy: None })
}

fn band_inputs(f: &BoundaryTrace, g: &BoundaryTrace, gamma: &ConstraintSubmanifold, delta: f64) -> Result<(f64, f64)> {
    let sup = f.sup_distance(g);
    if sup > delta * (1.0 + 1e-12) || sup >= gamma.parent.tubular_radius {
        return Err(Error::TracesTooFar(sup));
    }
    Ok((sup, f.dirichlet().max(g.dirichlet())))
}

/// Band width realizing `E ≲ δ^{1/2} δ'^{1/2}`.
pub fn band_rho(delta: f64, delta_prime: f64) -> f64 {
    if delta_prime <= 0.0 {
        return 0.5;
    }
    (delta / delta_prime).sqrt().min(0.5)
}

fn band_value(gamma: &ConstraintSubmanifold, f: &BoundaryTrace, g: &BoundaryTrace, a: f64, rho: f64, r: f64, th: f64) -> Vec<f64> {
    let s = ((r - a) / rho).clamp(0.0, 1.0);
    let p = lerp(&f.eval(th), &g.eval(th), s);
    gamma.parent.project(&p).unwrap_or(p)
}

/// Interpolation on `D⁺ \ D⁺_{1-ρ}`: ambient linear interpolation from `f` (inner arc) to
/// `g` (outer arc), projected to N. `delta` bounds `|f - g|`; `δ'` is measured.
pub fn band_interpolation(
    f: &BoundaryTrace,
    g: &BoundaryTrace,
    delta: f64,
    gamma: &Arc<ConstraintSubmanifold>,
    h: f64,
) -> Result<Construction> {
    let (sup, dp) = band_inputs(f, g, gamma, delta)?;
    let rho = band_rho(delta, dp);
    let a = 1.0 - rho;
    let mut mesh = band_mesh(a, 1.0, h.min(rho / 4.0));
    for r in mesh.roles.iter_mut() {
        if r.is_boundary() {
            *r = crate::domain::Role::DirichletArc;
        }
    }
    let mesh = Arc::new(mesh);
    let map = MapOnMesh::from_fn(mesh, gamma.clone(), |p| {
        let (r, th) = polar_coords(p);
        band_value(gamma, f, g, a, rho, r, th)
    });
    let energy = dirichlet_energy(&map);
    let scale = (sup * dp).sqrt();
    let c_emp = if scale > 0.0 { energy / scale } else { 0.0 };
    Ok(Construction { map, rho, energy, c_emp, arc_energy: None })
}

/// Energy `∫_0^π |dv/dφ|² dφ` of a curve sampled uniformly in φ.
fn arc_dirichlet(samples: &[Vec<f64>]) -> f64 {
    let dphi = PI / (samples.len() - 1) as f64;
    samples.windows(2).map(|w| dist2(&w[0], &w[1])).sum::<f64>() / dphi
}

/// The band interpolation pulled onto `MB_{1-ρ,1}` by the change of variables, with the
/// energy of its trace along the two removed half-disk arcs.
pub fn modified_band_interpolation(
    f: &BoundaryTrace,
    g: &BoundaryTrace,
    delta: f64,
    gamma: &Arc<ConstraintSubmanifold>,
    h: f64,
) -> Result<Construction> {
    let (sup, dp) = band_inputs(f, g, gamma, delta)?;
    let rho = band_rho(delta, dp);
    let a = 1.0 - rho;
    let mb = ModifiedBand::new(a, 1.0);
    let (mesh, coords) = mb.mesh(h.min(rho / 4.0));
    let values: Vec<f64> = coords.iter().flat_map(|&(r, th)| band_value(gamma, f, g, a, rho, r, th)).collect();
    let map = MapOnMesh::new(Arc::new(mesh), gamma.clone(), values);
    let energy = dirichlet_energy(&map);
    // On a removed arc θ' = θ₀(r), which the change of variables sends back to θ = 0 (or π).
    let n = 720;
    let mut arc_energy = 0.0;
    for side in 0..2 {
        let samples: Vec<Vec<f64>> = (0..=n)
            .map(|k| {
                let (r, tp) = mb.arc_point(side, PI * k as f64 / n as f64);
                band_value(gamma, f, g, a, rho, r, mb.unsqueeze(r, tp).clamp(0.0, PI))
            })
            .collect();
        arc_energy += arc_dirichlet(&samples);
    }
    let scale = (sup * dp).sqrt();
    let c_emp = if scale > 0.0 { energy / scale } else { 0.0 };
    Ok(Construction { map, rho, energy, c_emp, arc_energy: Some(arc_energy) })
}

/// Band width used by the Fermi interpolation, `ρ² = (∫|f'-g'|²)^{1/2} / (∫|f'|²+|g'|²)^{1/2}`,
/// clamped to `[rho_min, R/2]`.
pub fn fermi_rho(gap: f64, total: f64, radius: f64, rho_min: f64) -> f64 {
    let rho = if total > 0.0 { (gap.sqrt() / total.sqrt()).sqrt() * radius } else { 0.0 };
    rho.clamp(rho_min, 0.5 * radius)
}

/// Linear interpolation in a Fermi chart of Γ on `D⁺_R \ D⁺_{R-ρ}`, `f` on the inner and `g`
/// on the outer arc; the chord strips land on Γ.
///
/// Gates: the traces agree at a sample, `|f(θ) - f(0)| ≤ κ/3`, and the derivative gap
/// `∫|f'-g'|² dθ` (which equals `R∫|f'-g'|² ds` on `∂^A_R`) is at most `(κ/3π)²`.
/// `C_emp = ∫|∇w|² / ((∫|f'|²+|g'|²)(∫|f'-g'|²))^{1/2}`.
pub fn fermi_interpolation(
    f: &BoundaryTrace,
    g: &BoundaryTrace,
    radius: f64,
    gamma: &Arc<ConstraintSubmanifold>,
    h: f64,
) -> Result<Construction> {
    let kappa = gamma.fermi_radius;
    let (_, common) = f.closest_common_point(g);
    let scale = f.samples.iter().chain(&g.samples).map(|p| crate::vec::norm(p)).fold(1.0, f64::max);
    if common > 1e-9 * scale {
        return Err(Error::GateViolation(format!("no common point: traces are at least {common:.3e} apart")));
    }
    let osc = f.samples.iter().map(|p| dist(p, &f.samples[0])).fold(0.0, f64::max);
    if osc > kappa / 3.0 {
        return Err(Error::GateViolation(format!("oscillation {osc:.4e} exceeds kappa/3 = {:.4e}", kappa / 3.0)));
    }
    let gap = f.derivative_gap(g);
    let tau = kappa / (3.0 * PI);
    if gap > tau * tau {
        return Err(Error::GateViolation(format!("derivative gap {gap:.4e} exceeds tau^2 = {:.4e}", tau * tau)));
    }
    let chart = gamma.fermi_chart(&f.samples[0], kappa)?;
    let yf = chart_coords(&chart, f).map_err(|_| Error::GateViolation("f leaves the Fermi chart".into()))?;
    let yg = chart_coords(&chart, g).map_err(|_| Error::GateViolation("g leaves the Fermi chart".into()))?;
    let total = f.dirichlet() + g.dirichlet();
    let rho = fermi_rho(gap, total, radius, 0.01 * radius);
    let a = radius - rho;
    let mesh = Arc::new(band_mesh(a, radius, h.min(rho / 4.0)));
    let step = f.step();
    let mut map = MapOnMesh::from_fn(mesh, gamma.clone(), |p| {
        let (r, th) = polar_coords(p);
        let s = ((r - a) / rho).clamp(0.0, 1.0);
        chart.forward(&lerp(&eval_samples(&yf, step, th), &eval_samples(&yg, step, th), s))
    });
    snap_gamma(&mut map);
    let energy = dirichlet_energy(&map);
    let bound = (total * gap).sqrt();
    let c_emp = if bound > 0.0 { 2.0 * energy / bound } else { 0.0 };
    Ok(Construction { map, rho, energy, c_emp, arc_energy: None })
}

/// Largest distance from Γ over the Γ-labelled vertices of a constructed map.
pub fn gamma_defect(u: &MapOnMesh) -> f64 {
    (0..u.n_vertices()).filter(|&i| u.on_gamma(i)).map(|i| u.target.distance(u.value(i))).fold(0.0, f64::max)
}


#[cfg(test)]
mod tests;
