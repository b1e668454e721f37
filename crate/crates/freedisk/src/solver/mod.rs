//! Projected nonlinear Gauss-Seidel for constrained harmonic maps, harmonic replacement on
//! generalized balls, and the convexity / continuity / improvement checks.
//!
//! A vertex update minimizes the vertex-local energy `½W|x - a|² + c` over N (interior
//! vertices) or Γ (free vertices), where `a = Σ w_ij u_j / W`. The exact minimizer is the
//! closest point of `a`, so every update is monotone in energy.

mod checks;
mod replace;

pub use checks::{
    convexity_check, improvement_inequality_check, perturb, replacement_continuity_probe, ContinuityRow, ConvexityMargin,
    Improvement, SecondFormula,
};
pub use replace::{energy_on_balls, harmonic_replace, Replacement};

use crate::domain::Role;
use crate::energy::{dirichlet_energy, MapOnMesh};
use crate::error::Error;
use crate::vec::{dist2, dot};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Plain projected Gauss-Seidel.
    FixedStep,
    /// Over-relaxed step accepted only when the local energy does not increase, else the
    /// exact closest-point step.
    ArmijoBacktracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol_grad: f64,
    pub max_iters: usize,
    pub step_rule: StepRule,
    pub seed: u64,
    pub epsilon0: f64,
    /// Over-relaxation factor for `ArmijoBacktracking`; chosen from the mesh size when absent.
    pub omega: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_grad: 1e-8,
            max_iters: 50_000,
            step_rule: StepRule::ArmijoBacktracking,
            seed: 0,
            epsilon0: 0.3,
            omega: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |k: &str, r: &str| Err(Error::Config { key: k.into(), reason: r.into() });
        if !(self.tol_grad > 0.0) {
            return bad("tol_grad", "must be positive");
        }
        if !(self.epsilon0 > 0.0) {
            return bad("epsilon0", "must be positive");
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w < 2.0) {
                return bad("omega", "must lie in (0, 2)");
            }
        }
        Ok(())
    }
}

/// What a vertex is allowed to do during a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Fixed,
    /// Free, constrained to N.
    Manifold,
    /// Free, constrained to Γ.
    Gamma,
}

/// Whether ∂D of a full disk is free on Γ or clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Free,
    Fixed,
}

/// Default vertex kinds for a full solve: arc and corners fixed, chord (and ∂D in free
/// mode) on Γ, interior on N.
pub fn vertex_kinds(u: &MapOnMesh, mode: BoundaryMode) -> Vec<VertexKind> {
    u.mesh
        .roles
        .iter()
        .map(|r| match r {
            Role::Interior => VertexKind::Manifold,
            Role::DirichletArc | Role::Corner => VertexKind::Fixed,
            Role::FreeChord => VertexKind::Gamma,
            Role::FullBoundary => match mode {
                BoundaryMode::Free => VertexKind::Gamma,
                BoundaryMode::Fixed => VertexKind::Fixed,
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub format: u32,
    pub iterations: usize,
    pub converged: bool,
    /// Projected-gradient norm over the active vertices at exit.
    pub grad_norm: f64,
    pub tension_residual: f64,
    pub boundary_residual: f64,
    /// Energy every ten sweeps, then at exit.
    pub energy_trace: Vec<f64>,
    pub gate_flags: Vec<String>,
    pub omega: f64,
}

/// Result of a solve; the map is the best iterate even when the solve did not converge.
#[derive(Debug, Clone)]
pub struct Solution {
    pub map: MapOnMesh,
    pub telemetry: Telemetry,
}

impl Solution {
    pub fn error(&self) -> Option<Error> {
        (!self.telemetry.converged).then(|| Error::NonConvergence {
            iterations: self.telemetry.iterations,
            residual: self.telemetry.grad_norm,
        })
    }

    pub fn into_result(self) -> crate::Result<MapOnMesh> {
        match self.error() {
            Some(e) => Err(e),
            None => Ok(self.map),
        }
    }
}

fn auto_omega(h: f64, n_active: usize) -> f64 {
    // Relaxation close to the optimum for the model problem on a unit-size domain.
    let hh = if n_active > 0 { h.max(1.0 / (n_active as f64).sqrt()) } else { h };
    (2.0 / (1.0 + 2.2 * hh)).min(1.97)
}

struct Workspace {
    a: Vec<f64>,
    cand: Vec<f64>,
    step: Vec<f64>,
    tan: Vec<f64>,
}

/// Exact local minimizer target for vertex `i`: closest point of `a` on N or Γ.
fn local_target(u: &MapOnMesh, i: usize, kind: VertexKind, a: &[f64], out: &mut [f64]) -> bool {
    match kind {
        VertexKind::Fixed => false,
        VertexKind::Manifold => u.target.parent.project_into(a, out).is_ok(),
        VertexKind::Gamma => {
            let _ = i;
            u.target.project_into(a, out);
            true
        }
    }
}

/// `a_i = Σ w_ij u_j / W_i`; returns `W_i`.
#[inline]
fn neighbour_average(u: &MapOnMesh, i: usize, a: &mut [f64]) -> f64 {
    let mut wsum = 0.0;
    for k in a.iter_mut() {
        *k = 0.0;
    }
    for (&j, &w) in u.mesh.neighbors(i).iter().zip(u.mesh.weights(i)) {
        wsum += w;
        for (ak, uj) in a.iter_mut().zip(u.value(j)) {
            *ak += w * uj;
        }
    }
    for ak in a.iter_mut() {
        *ak /= wsum;
    }
    wsum
}

/// Mass-weighted projected gradient norm over `active`.
pub fn projected_gradient_norm(u: &MapOnMesh, kinds: &[VertexKind], active: &[usize]) -> f64 {
    let d = u.dim;
    let mut a = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut t = vec![0.0; d];
    let mut sum = 0.0;
    for &i in active {
        let w = neighbour_average(u, i, &mut a);
        let x = u.value(i);
        for k in 0..d {
            g[k] = w * (x[k] - a[k]);
        }
        match kinds[i] {
            VertexKind::Fixed => continue,
            VertexKind::Manifold => {
                u.target.parent.tangent_project_into(x, &g, &mut t);
                let m = u.mesh.geometry.mass[i];
                sum += dot(&t, &t) / m;
            }
            VertexKind::Gamma => {
                let tp = u.target.tangent_project(x, &g);
                let l = u.mesh.geometry.boundary_length[i];
                let m = if l > 0.0 { l } else { u.mesh.geometry.mass[i] };
                sum += dot(&tp, &tp) / m;
            }
        }
    }
    sum.sqrt()
}

/// Runs Gauss-Seidel sweeps over `active` (in the given order) until the projected
/// gradient norm drops below `tol_grad` or `max_iters` sweeps have run.
pub fn relax(u: &mut MapOnMesh, kinds: &[VertexKind], active: &[usize], cfg: &SolverConfig) -> Telemetry {
    let d = u.dim;
    let omega = match cfg.step_rule {
        StepRule::FixedStep => 1.0,
        StepRule::ArmijoBacktracking => cfg.omega.unwrap_or_else(|| auto_omega(u.mesh.h, active.len())),
    };
    let mut ws = Workspace { a: vec![0.0; d], cand: vec![0.0; d], step: vec![0.0; d], tan: vec![0.0; d] };
    let mut trace = vec![dirichlet_energy(u)];
    let mut grad = projected_gradient_norm(u, kinds, active);
    let mut iterations = 0;
    while grad > cfg.tol_grad && iterations < cfg.max_iters {
        for &i in active {
            let kind = kinds[i];
            if kind == VertexKind::Fixed {
                continue;
            }
            neighbour_average(u, i, &mut ws.a);
            if !local_target(u, i, kind, &ws.a, &mut ws.step) {
                continue;
            }
            let x = u.value(i);
            if omega != 1.0 {
                let old = dist2(x, &ws.a);
                for k in 0..d {
                    ws.tan[k] = x[k] + omega * (ws.step[k] - x[k]);
                }
                let ok = match kind {
                    VertexKind::Manifold => u.target.parent.project_into(&ws.tan, &mut ws.cand).is_ok(),
                    _ => {
                        u.target.project_into(&ws.tan, &mut ws.cand);
                        true
                    }
                };
                if ok && dist2(&ws.cand, &ws.a) <= old {
                    u.value_mut(i).copy_from_slice(&ws.cand);
                    continue;
                }
            }
            u.value_mut(i).copy_from_slice(&ws.step);
        }
        iterations += 1;
        grad = projected_gradient_norm(u, kinds, active);
        if iterations % 10 == 0 {
            trace.push(dirichlet_energy(u));
        }
    }
    if iterations % 10 != 0 {
        trace.push(dirichlet_energy(u));
    }
    let tension = crate::energy::tension_residual(u).norm;
    let boundary = crate::energy::free_boundary_residual(u).norm;
    Telemetry {
        format: 1,
        iterations,
        converged: grad <= cfg.tol_grad,
        grad_norm: grad,
        tension_residual: tension,
        boundary_residual: boundary,
        energy_trace: trace,
        gate_flags: Vec::new(),
        omega,
    }
}

/// Minimizes the discrete energy over maps agreeing with `initial` on the fixed vertices,
/// with interior vertices on N and free-boundary vertices on Γ.
///
/// `initial` supplies the Dirichlet data on the arc and corners and the starting guess
/// elsewhere; free vertices are projected onto their constraint first.
pub fn solve_mixed_harmonic(initial: &MapOnMesh, mode: BoundaryMode, cfg: &SolverConfig) -> Solution {
    let mut u = initial.clone();
    let kinds = vertex_kinds(&u, mode);
    for i in 0..u.n_vertices() {
        match kinds[i] {
            VertexKind::Manifold => {
                if let Ok(p) = u.target.parent.project(u.value(i)) {
                    u.value_mut(i).copy_from_slice(&p);
                }
            }
            VertexKind::Gamma => {
                let p = u.target.project(u.value(i));
                u.value_mut(i).copy_from_slice(&p);
            }
            VertexKind::Fixed => {}
        }
    }
    let e0 = dirichlet_energy(&u);
    let active: Vec<usize> = (0..u.n_vertices()).filter(|&i| kinds[i] != VertexKind::Fixed).collect();
    let mut telemetry = relax(&mut u, &kinds, &active, cfg);
    if e0 > cfg.epsilon0 {
        telemetry.gate_flags.push(format!("EnergyGateExceeded: initial energy {e0:.4} > epsilon0 {:.4}", cfg.epsilon0));
    }
    Solution { map: u, telemetry }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_mesh, GeneralizedBall, MeshDomain};
    use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold};
    use std::sync::Arc;

    fn flat_setup(h: f64) -> (Arc<crate::domain::DiskMesh>, Arc<ConstraintSubmanifold>) {
        let mesh = Arc::new(build_mesh(MeshDomain::HalfDisk, h).unwrap());
        let gamma = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 1));
        (mesh, gamma)
    }

    // Reflection oracle: even extension of the Γ-tangential component, odd extension of the
    // normal ones, each harmonic in the full disk.
    fn oracle(p: [f64; 2]) -> Vec<f64> {
        let (r, t) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
        vec![
            0.1 * r * t.cos() + 0.05 * r * r * (2.0 * t).cos(),
            0.1 * r * t.sin() + 0.03 * r.powi(3) * (3.0 * t).sin(),
            -0.04 * r * r * (2.0 * t).sin(),
        ]
    }

    fn start_from_oracle(mesh: &Arc<crate::domain::DiskMesh>, gamma: &Arc<ConstraintSubmanifold>) -> MapOnMesh {
        MapOnMesh::from_fn(mesh.clone(), gamma.clone(), |p| {
            if p[0].hypot(p[1]) > 1.0 - 1e-9 {
                oracle(p)
            } else {
                vec![0.2 * p[1], 0.0, 0.0]
            }
        })
    }

    #[test]
    fn constant_data_gives_constant_map() {
        let (mesh, gamma) = flat_setup(0.1);
        let u0 = MapOnMesh::from_fn(mesh, gamma, |p| {
            if p[0].hypot(p[1]) > 1.0 - 1e-9 {
                vec![0.3, 0.0, 0.0]
            } else {
                vec![p[0], p[1], 0.1]
            }
        });
        let sol = solve_mixed_harmonic(&u0, BoundaryMode::Free, &SolverConfig::default());
        assert!(sol.telemetry.converged);
        assert!(dirichlet_energy(&sol.map) < 1e-14);
    }

    #[test]
    fn flat_target_matches_reflection_oracle() {
        let (mesh, gamma) = flat_setup(0.05);
        let u0 = start_from_oracle(&mesh, &gamma);
        let sol = solve_mixed_harmonic(&u0, BoundaryMode::Free, &SolverConfig { tol_grad: 1e-10, ..Default::default() });
        assert!(sol.telemetry.converged, "{:?}", sol.telemetry.iterations);
        let exact = MapOnMesh::from_fn(mesh.clone(), gamma.clone(), oracle);
        let err = sol.map.l2_distance(&exact);
        assert!(err < 1e-3, "L2 error {err}");
        let trace = sol.telemetry.energy_trace.clone();
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn sphere_solution_independent_of_start() {
        let mesh = Arc::new(build_mesh(MeshDomain::HalfDisk, 0.08).unwrap());
        let gamma = Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)));
        let unit = |v: [f64; 3]| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            vec![v[0] / n, v[1] / n, v[2] / n]
        };
        let mk = |bend: f64| {
            MapOnMesh::from_fn(mesh.clone(), gamma.clone(), move |p| {
                let r2 = p[0] * p[0] + p[1] * p[1];
                let w = if r2 > 1.0 - 1e-9 { 0.0 } else { bend * (1.0 - r2) };
                unit([1.0, 0.3 * p[0] + 0.1 * p[0] * p[0] + w * p[1], 0.3 * p[1] + 0.1 * p[0] * p[1] + w * p[1]])
            })
        };
        let cfg = SolverConfig { tol_grad: 1e-10, ..Default::default() };
        let a = solve_mixed_harmonic(&mk(0.0), BoundaryMode::Free, &cfg);
        let b = solve_mixed_harmonic(&mk(0.6), BoundaryMode::Free, &cfg);
        assert!(a.telemetry.converged && b.telemetry.converged, "{:?} {:?}", a.telemetry.grad_norm, b.telemetry.grad_norm);
        assert!(a.map.l2_distance(&b.map) < 1e-6);
        assert!(a.map.constraint_violation().0 < 1e-12);
    }

    #[test]
    fn replacement_is_local_monotone_and_trivial_on_empty_collection() {
        let (mesh, gamma) = flat_setup(0.05);
        let u = MapOnMesh::from_fn(mesh.clone(), gamma, |p| {
            let b = (-20.0 * ((p[0] - 0.3).powi(2) + (p[1] - 0.3).powi(2))).exp();
            vec![0.1 * p[0] + 0.05 * b, 0.1 * p[1] * b, 0.02 * b]
        });
        let cfg = SolverConfig { tol_grad: 1e-10, ..Default::default() };
        let empty = harmonic_replace(&u, &[], 0.5, BoundaryMode::Free, &cfg).unwrap();
        assert!(empty.map.bit_equal(&u));
        let balls = [GeneralizedBall::classical([0.3, 0.4], 0.25), GeneralizedBall::boundary(0.0, 0.3)];
        let r = harmonic_replace(&u, &balls, 0.5, BoundaryMode::Free, &cfg).unwrap();
        assert!(r.energy_after < r.energy_before);
        let active: std::collections::HashSet<_> = r.active.iter().copied().collect();
        for i in 0..u.n_vertices() {
            if !active.contains(&i) {
                assert_eq!(r.map.value(i), u.value(i));
            }
        }
        let again = harmonic_replace(&r.map, &balls, 0.5, BoundaryMode::Free, &cfg).unwrap();
        assert!(again.map.c0_distance(&r.map) < 1e-8);
    }
}
