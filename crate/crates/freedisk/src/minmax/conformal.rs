use super::sweepout::{HomotopyMove, MoveKind, Sweepout};
use crate::domain::{DiskMesh, Locator, Role};
use crate::energy::{area_functional, dirichlet_energy, MapOnMesh};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};

type C = Complex<f64>;

const N_PARAMS: usize = 14;

/// Low-order diffeomorphism of the closed disk: an interior perturbation vanishing on ∂D,
/// a boundary angular reparametrization and a Möbius automorphism, applied in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskDiffeo {
    pub p: [f64; N_PARAMS],
}

impl DiskDiffeo {
    pub fn identity() -> Self {
        DiskDiffeo { p: [0.0; N_PARAMS] }
    }

    pub fn apply(&self, q: [f64; 2]) -> [f64; 2] {
        let p = &self.p;
        let z = C::new(q[0], q[1]);
        let damp = (1.0 - z.norm_sqr()).max(0.0);
        let z1 = z + (C::new(p[0], p[1]) + C::new(p[2], p[3]) * z + C::new(p[4], p[5]) * z.conj()) * damp;
        let (r, th) = (z1.norm(), z1.arg());
        let mut shift = 0.0;
        for k in 0..3 {
            let kt = (k + 1) as f64 * th;
            shift += p[6 + 2 * k] * kt.cos() + p[7 + 2 * k] * kt.sin();
        }
        let z2 = C::from_polar(r.min(1.0), th + r * r * shift);
        let a = C::new(p[12], p[13]);
        let z3 = (z2 - a) / (C::new(1.0, 0.0) - a.conj() * z2);
        [z3.re, z3.im]
    }

    /// Whether the map is an orientation-preserving embedding on `mesh` (no flipped
    /// triangle, image inside the closed disk).
    pub fn is_valid_on(&self, mesh: &DiskMesh) -> bool {
        if self.p[12].hypot(self.p[13]) >= 0.9 {
            return false;
        }
        let img: Vec<[f64; 2]> = mesh.vertices.iter().map(|&v| self.apply(v)).collect();
        if img.iter().any(|q| q[0].hypot(q[1]) > 1.0 + 1e-9) {
            return false;
        }
        mesh.triangles.iter().all(|t| {
            let (a, b, c) = (img[t[0]], img[t[1]], img[t[2]]);
            (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]) > 0.0
        })
    }

    /// `½∫|∇h|²` of the piecewise-linear interpolant.
    pub fn energy_on(&self, mesh: &DiskMesh) -> f64 {
        let img: Vec<[f64; 2]> = mesh.vertices.iter().map(|&v| self.apply(v)).collect();
        let mut e = 0.0;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let g = &mesh.geometry.grad[t];
            for c in 0..2 {
                let (mut gx, mut gy) = (0.0, 0.0);
                for k in 0..3 {
                    gx += g[k][0] * img[tri[k]][c];
                    gy += g[k][1] * img[tri[k]][c];
                }
                e += 0.5 * (gx * gx + gy * gy) * mesh.geometry.area[t];
            }
        }
        e
    }
}

/// `u ∘ h` on the mesh of `u`, using a prebuilt locator.
pub fn compose(u: &MapOnMesh, locator: &Locator, h: &DiskDiffeo) -> MapOnMesh {
    let mut values = Vec::with_capacity(u.values.len());
    for (p, role) in u.mesh.vertices.iter().zip(&u.mesh.roles) {
        let raw = u.eval(locator, h.apply(*p));
        let mut q = u.target.parent.project(&raw).unwrap_or(raw);
        if matches!(role, Role::FreeChord | Role::FullBoundary | Role::Corner) {
            q = u.target.project(&q);
        }
        values.extend(q);
    }
    MapOnMesh::new(u.mesh.clone(), u.target.clone(), values)
}

/// Outcome for one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap_in: f64,
    pub gap_out: f64,
    pub accepted: bool,
    pub evaluations: usize,
}

/// Pattern search over [`DiskDiffeo`] parameters minimizing `E(u∘h) + ε(E(h) − π)`.
/// The result is accepted only if it lowers both the energy and the gap `E − area`.
pub fn reparametrize_map(u: &MapOnMesh, eps_metric: f64, max_evals: usize) -> (MapOnMesh, GapReport) {
    let e0 = dirichlet_energy(u);
    let gap_in = e0 - area_functional(u);
    let locator = Locator::new(&u.mesh);
    let pi = std::f64::consts::PI;
    let objective = |h: &DiskDiffeo| -> Option<(f64, MapOnMesh)> {
        if !h.is_valid_on(&u.mesh) {
            return None;
        }
        let v = compose(u, &locator, h);
        let j = dirichlet_energy(&v) + eps_metric * (h.energy_on(&u.mesh) - pi);
        Some((j, v))
    };
    let mut best = DiskDiffeo::identity();
    let mut best_j = e0;
    let mut best_map: Option<MapOnMesh> = None;
    let mut step = 0.05;
    let mut evals = 0;
    while step >= 1e-3 && evals < max_evals {
        let mut improved = false;
        for k in 0..N_PARAMS {
            for sign in [1.0, -1.0] {
                if evals >= max_evals {
                    break;
                }
                let mut cand = best;
                cand.p[k] += sign * step;
                evals += 1;
                if let Some((j, v)) = objective(&cand) {
                    if j < best_j - 1e-13 {
                        best = cand;
                        best_j = j;
                        best_map = Some(v);
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    match best_map {
        Some(v) => {
            let e1 = dirichlet_energy(&v);
            let gap_out = e1 - area_functional(&v);
            if e1 <= e0 && gap_out < gap_in {
                (v, GapReport { gap_in, gap_out, accepted: true, evaluations: evals })
            } else {
                (u.clone(), GapReport { gap_in, gap_out: gap_in, accepted: false, evaluations: evals })
            }
        }
        None => (u.clone(), GapReport { gap_in, gap_out: gap_in, accepted: false, evaluations: evals }),
    }
}

/// Reparametrizes every slice (end slices of a fixed-boundary sweepout stay untouched),
/// logging accepted moves. Zero improvement is a legal outcome.
pub fn conformal_reparametrize(g: &Sweepout, eps_metric: f64, max_evals: usize, iteration: usize) -> (Sweepout, Vec<GapReport>) {
    let n = g.len();
    let fixed = g.endpoint_mode.is_fixed();
    let mut out = g.clone();
    let mut reports = Vec::with_capacity(n);
    for k in 0..n {
        let u = &g.slices[k];
        if (fixed && (k == 0 || k == n - 1)) || dirichlet_energy(u) < 1e-14 {
            let gap = dirichlet_energy(u) - area_functional(u);
            reports.push(GapReport { gap_in: gap, gap_out: gap, accepted: false, evaluations: 0 });
            continue;
        }
        let (v, rep) = reparametrize_map(u, eps_metric, max_evals);
        if rep.accepted {
            out.log(HomotopyMove {
                iteration,
                kind: MoveKind::Reparametrize,
                slice: k,
                energy_before: dirichlet_energy(u),
                energy_after: dirichlet_energy(&v),
                detail: format!("gap {:.6e} -> {:.6e}", rep.gap_in, rep.gap_out),
            });
            out.slices[k] = v;
        }
        reports.push(rep);
    }
    (out, reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_mesh, MeshDomain};
    use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold, FourierCurve};
    use std::sync::Arc;

    #[test]
    fn random_parameters_stay_on_the_disk() {
        let mesh = build_mesh(MeshDomain::Disk, 0.1).unwrap();
        let mut h = DiskDiffeo::identity();
        h.p = [0.05, -0.02, 0.03, 0.0, -0.04, 0.02, 0.1, -0.05, 0.02, 0.0, 0.01, 0.03, 0.2, -0.1];
        assert!(h.is_valid_on(&mesh));
        for k in 0..360 {
            let a = (k as f64).to_radians();
            let q = h.apply([a.cos(), a.sin()]);
            assert!((q[0].hypot(q[1]) - 1.0).abs() < 1e-12);
        }
        assert!((DiskDiffeo::identity().energy_on(&mesh) - std::f64::consts::PI).abs() < 1e-2);
    }

    // The stretched map (2x, y) has gap E − area = π/2; the conformal parametrization of the
    // ellipse has gap 0.
    #[test]
    fn stretched_slice_gap_halves() {
        let mesh = Arc::new(build_mesh(MeshDomain::Disk, 0.05).unwrap());
        let ellipse = FourierCurve::new(vec![0.0; 3], vec![vec![2.0, 0.0, 0.0]], vec![vec![0.0, 1.0, 0.0]]);
        let g = Arc::new(ConstraintSubmanifold::curve(EmbeddedManifold::flat_torus_with_lattice(vec![64.0; 3]), ellipse));
        let u = MapOnMesh::from_fn(mesh, g, |p| vec![2.0 * p[0], p[1], 0.0]);
        let (_, rep) = reparametrize_map(&u, 0.0, 600);
        assert!((rep.gap_in - std::f64::consts::FRAC_PI_2).abs() < 0.02, "{}", rep.gap_in);
        assert!(rep.accepted);
        assert!(rep.gap_out <= 0.5 * rep.gap_in, "{} -> {}", rep.gap_in, rep.gap_out);
    }

    #[test]
    fn conformal_slice_is_left_alone() {
        let mesh = Arc::new(build_mesh(MeshDomain::Disk, 0.1).unwrap());
        let g = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 2));
        let u = MapOnMesh::from_fn(mesh, g, |p| vec![0.3 * p[0], 0.3 * p[1], 0.0]);
        let (_, rep) = reparametrize_map(&u, 0.0, 200);
        assert!(rep.gap_out.abs() < 1e-3, "{rep:?}");
    }
}
