use super::{harmonic_replace, projected_gradient_norm, vertex_kinds, BoundaryMode, SolverConfig, VertexKind};
use crate::domain::GeneralizedBall;
use crate::energy::{dirichlet_energy, MapOnMesh};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityMargin {
    /// `¼∫|∇v - ∇u|²`.
    pub lhs: f64,
    /// `E(v) - E(u)`.
    pub rhs: f64,
    pub margin: f64,
}

/// Convexity of the energy around a small free-boundary harmonic map `u`: with both sides
/// halved into the ½-convention, `¼∫|∇v - ∇u|² ≤ E(v) - E(u)` for every competitor `v`
/// with the same arc trace and chord values on Γ.
///
/// `harmonic_tol` bounds the projected gradient norm accepted for `u`.
pub fn convexity_check(u: &MapOnMesh, v: &MapOnMesh, epsilon0: f64, harmonic_tol: f64) -> Result<ConvexityMargin> {
    let mut mismatch: f64 = 0.0;
    for ((i, a), (_, b)) in u.dirichlet_trace().iter().zip(v.dirichlet_trace()) {
        let _ = i;
        mismatch = mismatch.max(crate::vec::dist(a, &b));
    }
    let gamma_defect = (0..v.n_vertices())
        .filter(|&i| v.on_gamma(i))
        .map(|i| v.target.distance(v.value(i)))
        .fold(0.0, f64::max);
    let mismatch = mismatch.max(gamma_defect);
    if mismatch > 1e-9 {
        return Err(Error::TraceMismatch(mismatch));
    }
    let kinds = vertex_kinds(u, BoundaryMode::Free);
    let active: Vec<usize> = (0..u.n_vertices()).filter(|&i| kinds[i] != VertexKind::Fixed).collect();
    let res = projected_gradient_norm(u, &kinds, &active);
    if res > harmonic_tol {
        return Err(Error::NotApproxHarmonic(res));
    }
    let eu = dirichlet_energy(u);
    if eu > epsilon0 {
        return Err(Error::EnergyGateExceeded { energy: eu, gate: epsilon0 });
    }
    let lhs = 0.5 * dirichlet_energy(&v.difference(u));
    let rhs = dirichlet_energy(v) - eu;
    Ok(ConvexityMargin { lhs, rhs, margin: rhs - lhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub s: f64,
    /// Distance of the perturbed input from `u` in W^{1,2}.
    pub input_w12: f64,
    pub c0: f64,
    pub w12: f64,
}

fn w12(a: &MapOnMesh, b: &MapOnMesh) -> f64 {
    (a.l2_distance(b).powi(2) + a.h1_seminorm_distance(b).powi(2)).sqrt()
}

/// Feasible perturbation `project(u + s·bump)`: Γ-vertices onto Γ, the rest onto N.
pub fn perturb(u: &MapOnMesh, bump: &[f64], s: f64) -> MapOnMesh {
    let mut out = u.clone();
    let d = u.dim;
    let mut x = vec![0.0; d];
    for i in 0..u.n_vertices() {
        for k in 0..d {
            x[k] = u.value(i)[k] + s * bump[i * d + k];
        }
        let p = if u.on_gamma(i) { u.target.project(&x) } else { u.target.parent.project(&x).unwrap_or_else(|_| u.value(i).to_vec()) };
        out.value_mut(i).copy_from_slice(&p);
    }
    out
}

/// Distances between `H(u_s, B)` and `H(u, B)` for each scale `s`.
pub fn replacement_continuity_probe(
    u: &MapOnMesh,
    balls: &[GeneralizedBall],
    rho: f64,
    bump: &[f64],
    scales: &[f64],
    mode: BoundaryMode,
    cfg: &SolverConfig,
) -> Result<Vec<ContinuityRow>> {
    let base = harmonic_replace(u, balls, rho, mode, cfg)?.map;
    scales
        .iter()
        .map(|&s| {
            let us = perturb(u, bump, s);
            let hs = harmonic_replace(&us, balls, rho, mode, cfg)?.map;
            Ok(ContinuityRow { s, input_w12: w12(&us, u), c0: hs.c0_distance(&base), w12: w12(&hs, &base) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondFormula {
    pub mu: f64,
    /// `(E(u) - E(H(u,B₁)))^{1/2}`.
    pub a: f64,
    /// `E(u) - E(H(u, 2μB₂))`.
    pub b: f64,
    /// `E(H(u,B₁)) - E(H(H(u,B₁), μB₂))`.
    pub c: f64,
    /// Largest `k` with `a/k + b ≥ c`; infinite when `b ≥ c`.
    pub k_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    /// `E(u) - E(H(H(u,B₁),B₂))`.
    pub lhs: f64,
    /// `E(u) - E(H(u,½B₂))`.
    pub rhs: f64,
    /// `lhs / rhs²`, absent when `rhs` vanishes.
    pub k_emp: Option<f64>,
    pub second: Vec<SecondFormula>,
}

/// Energy improvement from two successive replacements against a single replacement on the
/// halved second collection.
pub fn improvement_inequality_check(
    u: &MapOnMesh,
    b1: &[GeneralizedBall],
    b2: &[GeneralizedBall],
    mode: BoundaryMode,
    cfg: &SolverConfig,
) -> Result<Improvement> {
    let e = |m: &MapOnMesh| dirichlet_energy(m);
    let eu = e(u);
    let h1 = harmonic_replace(u, b1, 1.0, mode, cfg)?.map;
    let h12 = harmonic_replace(&h1, b2, 1.0, mode, cfg)?.map;
    let half = harmonic_replace(u, b2, 0.5, mode, cfg)?.map;
    let lhs = eu - e(&h12);
    let rhs = eu - e(&half);
    let k_emp = (rhs > 1e-14).then(|| lhs / (rhs * rhs));
    let a = (eu - e(&h1)).max(0.0).sqrt();
    let mut second = Vec::new();
    for mu in [0.125, 0.25, 0.5] {
        let b = eu - e(&harmonic_replace(u, b2, 2.0 * mu, mode, cfg)?.map);
        let c = e(&h1) - e(&harmonic_replace(&h1, b2, mu, mode, cfg)?.map);
        let k_max = if c > b { a / (c - b) } else { f64::INFINITY };
        second.push(SecondFormula { mu, a, b, c, k_max });
    }
    Ok(Improvement { lhs, rhs, k_emp, second })
}
