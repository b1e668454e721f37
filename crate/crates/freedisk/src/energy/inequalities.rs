use super::{dirichlet_energy, free_boundary_residual, tension_residual, MapOnMesh};
use crate::domain::{DiskMesh, Role};
use crate::error::{Error, Result};
use crate::vec::{dist, dot};

/// First zero of the Bessel function J₀.
pub const BESSEL_J0_ZERO: f64 = 2.404_825_557_695_773;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InequalityRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Exact `∫ f²` of a piecewise-linear scalar field.
pub fn p1_l2_squared(mesh: &DiskMesh, f: &[f64]) -> f64 {
    mesh.triangles
        .iter()
        .zip(&mesh.geometry.area)
        .map(|(t, a)| {
            let (x, y, z) = (f[t[0]], f[t[1]], f[t[2]]);
            a / 6.0 * (x * x + y * y + z * z + x * y + y * z + x * z)
        })
        .sum()
}

fn p1_dirichlet(mesh: &DiskMesh, f: &[f64]) -> f64 {
    mesh.triangles
        .iter()
        .zip(&mesh.geometry.grad)
        .zip(&mesh.geometry.area)
        .map(|((t, g), a)| {
            let gx: f64 = (0..3).map(|k| f[t[k]] * g[k][0]).sum();
            let gy: f64 = (0..3).map(|k| f[t[k]] * g[k][1]).sum();
            (gx * gx + gy * gy) * a
        })
        .sum()
}

fn check_traces(u: &MapOnMesh, v: &MapOnMesh) -> Result<()> {
    let mut worst: f64 = 0.0;
    for i in 0..u.n_vertices() {
        if matches!(u.mesh.roles[i], Role::DirichletArc | Role::Corner) {
            worst = worst.max(dist(u.value(i), v.value(i)));
        }
    }
    if worst > 1e-12 {
        return Err(Error::TraceMismatch(worst));
    }
    Ok(())
}

/// `∫ |v-u|²/(1-|x|)²` against `4 ∫ |∇(v-u)|²`. The weighted integral skips triangles whose
/// centroid lies within `h` of the unit circle and uses the edge-midpoint rule elsewhere.
pub fn hardy_check(u: &MapOnMesh, v: &MapOnMesh) -> Result<InequalityRatio> {
    check_traces(u, v)?;
    let mesh = &u.mesh;
    let d = u.dim;
    let h = mesh.h;
    let diff = v.difference(u);
    let mut lhs = 0.0;
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let c = mesh.centroid(ti);
        if 1.0 - c[0].hypot(c[1]) < h {
            continue;
        }
        let mut s = 0.0;
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let pa = mesh.vertices[a];
            let pb = mesh.vertices[b];
            let m = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            let w = 1.0 / (1.0 - m[0].hypot(m[1])).powi(2);
            let mid: Vec<f64> = (0..d).map(|i| 0.5 * (diff.value(a)[i] + diff.value(b)[i])).collect();
            s += w * dot(&mid, &mid);
        }
        lhs += s / 3.0 * mesh.geometry.area[ti];
    }
    let rhs = 4.0 * 2.0 * dirichlet_energy(&diff);
    Ok(InequalityRatio { lhs, rhs, ratio: ratio(lhs, rhs) })
}

/// Classical Dirichlet Poincaré constant of the disk of radius `r`: `r² / j₀₁²`.
pub fn poincare_constant(r: f64) -> f64 {
    (r / BESSEL_J0_ZERO).powi(2)
}

/// `(∫f², C(r)∫|∇f|², ∫f²/∫|∇f|²)` for a field vanishing on the arc of a half disk of
/// radius `r` (read off the mesh). The ratio is bounded by `C(r)`.
pub fn poincare_half_disk_check(mesh: &DiskMesh, f: &[f64]) -> (InequalityRatio, f64) {
    let r = mesh.vertices.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let c = poincare_constant(r);
    let l2 = p1_l2_squared(mesh, f);
    let g = p1_dirichlet(mesh, f);
    (InequalityRatio { lhs: l2, rhs: c * g, ratio: ratio(l2, g) }, c)
}

/// Empirical constant `sup_x |∇u|(x)(1-|x|)/√E(u)` for an almost free-boundary-harmonic map.
pub fn gradient_estimate_check(u: &MapOnMesh, epsilon0: f64, tol: f64) -> Result<f64> {
    let e = dirichlet_energy(u);
    if e == 0.0 {
        return Ok(0.0);
    }
    let res = tension_residual(u).norm + free_boundary_residual(u).norm;
    if res > tol {
        return Err(Error::NotApproxHarmonic(res));
    }
    if e > epsilon0 {
        return Err(Error::EnergyGateExceeded { energy: e, gate: epsilon0 });
    }
    let mut best: f64 = 0.0;
    for t in 0..u.mesh.n_triangles() {
        let (ux, uy) = u.gradient(t);
        let c = u.mesh.centroid(t);
        let g = (dot(&ux, &ux) + dot(&uy, &uy)).sqrt();
        best = best.max(g * (1.0 - c[0].hypot(c[1])));
    }
    Ok(best / e.sqrt())
}
