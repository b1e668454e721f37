use super::sweepout::Sweepout;
use crate::domain::{check_disjoint, GeneralizedBall};
use crate::energy::{dirichlet_energy, triangle_energies, MapOnMesh};
use crate::error::{Error, Result};
use crate::solver::{energy_on_balls, harmonic_replace, BoundaryMode, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const RADII: [f64; 4] = [0.1, 0.2, 0.3, 0.45];

/// Best improvement found and the collection achieving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalImprovement {
    pub improvement: f64,
    pub collection: Vec<GeneralizedBall>,
}

fn candidates(u: &MapOnMesh, seed: u64) -> Vec<GeneralizedBall> {
    let mesh = &u.mesh;
    let te = triangle_energies(u);
    let mut order: Vec<usize> = (0..te.len()).collect();
    order.sort_by(|&a, &b| (te[b] / mesh.geometry.area[b]).total_cmp(&(te[a] / mesh.geometry.area[a])).then(a.cmp(&b)));
    let mut centers: Vec<[f64; 2]> = order.iter().take(6).map(|&t| mesh.centroid(t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..6 {
        let (r, a): (f64, f64) = (rng.gen::<f64>().sqrt() * 0.9, rng.gen::<f64>() * TAU);
        centers.push([r * a.cos(), r * a.sin()]);
    }
    let mut out = Vec::new();
    for c in &centers {
        let rc = c[0].hypot(c[1]);
        for &r in &RADII {
            if rc + r < 0.98 {
                out.push(GeneralizedBall::classical(*c, r));
            } else if r < 0.5 && mesh.roles.iter().any(|r| r.is_boundary()) {
                out.push(GeneralizedBall::boundary(c[1].atan2(c[0]), r));
            }
        }
    }
    out.retain(|b| b.validate().is_ok());
    out
}

fn gate_cfg(cfg: &SolverConfig, eps: f64) -> SolverConfig {
    SolverConfig { epsilon0: cfg.epsilon0.max(3.0 * eps), ..cfg.clone() }
}

/// `E(u) − E(H(u, ρB))`, or `None` when the replacement is refused.
fn drop_for(u: &MapOnMesh, balls: &[GeneralizedBall], rho: f64, mode: BoundaryMode, cfg: &SolverConfig) -> Option<f64> {
    harmonic_replace(u, balls, rho, mode, cfg).ok().map(|r| (r.energy_before - r.energy_after).max(0.0))
}

/// Approximates `sup_B {E(u) − E(H(u, ρB))}` over disjoint collections with energy at
/// most `eps`, trying at most `budget` collections built greedily from single-ball gains.
pub fn maximal_improvement_at(
    u: &MapOnMesh,
    eps: f64,
    budget: usize,
    rho: f64,
    mode: BoundaryMode,
    cfg: &SolverConfig,
    seed: u64,
) -> MaximalImprovement {
    let cfg = gate_cfg(cfg, eps);
    let mut singles: Vec<(f64, f64, GeneralizedBall)> = Vec::new();
    for b in candidates(u, seed) {
        let e = energy_on_balls(u, &[b], 1.0);
        if e > eps {
            continue;
        }
        if let Some(d) = drop_for(u, &[b], rho, mode, &cfg) {
            singles.push((d, e, b));
        }
    }
    singles.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = MaximalImprovement { improvement: 0.0, collection: Vec::new() };
    for start in 0..singles.len().min(budget.max(1)) {
        let mut coll = vec![singles[start].2];
        let mut energy = singles[start].1;
        for (k, (_, e, b)) in singles.iter().enumerate() {
            if k == start || energy + e > eps {
                continue;
            }
            let mut trial = coll.clone();
            trial.push(*b);
            if check_disjoint(&trial, Some(&u.mesh)).is_ok() {
                coll = trial;
                energy += e;
            }
        }
        let d = if coll.len() == 1 { Some(singles[start].0) } else { drop_for(u, &coll, rho, mode, &cfg) };
        if let Some(d) = d {
            if d > best.improvement {
                best = MaximalImprovement { improvement: d, collection: coll };
            }
        }
    }
    best
}

/// `e_{σ,ε}(t)` for slice `k` with the ½-shrunk balls.
pub fn maximal_improvement(
    g: &Sweepout,
    k: usize,
    eps: f64,
    budget: usize,
    mode: BoundaryMode,
    cfg: &SolverConfig,
    seed: u64,
) -> MaximalImprovement {
    maximal_improvement_at(&g.slices[k], eps, budget, 0.5, mode, cfg, seed ^ k as u64)
}

/// One collection of the cover with its piecewise-linear radius function sampled at the
/// sweepout times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverPiece {
    pub balls: Vec<GeneralizedBall>,
    /// Slice indices where `r = 1`.
    pub interval: (usize, usize),
    /// `r_j` at every slice.
    pub radius: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCover {
    pub threshold: f64,
    pub pieces: Vec<CoverPiece>,
}

impl IntervalCover {
    pub fn m(&self) -> usize {
        self.pieces.len()
    }

    /// Largest number of positive radius functions at any slice.
    pub fn max_overlap(&self) -> usize {
        let n = self.pieces.first().map(|p| p.radius.len()).unwrap_or(0);
        (0..n).map(|k| self.pieces.iter().filter(|p| p.radius[k] > 0.0).count()).max().unwrap_or(0)
    }
}

/// Covers `{t : E ≥ threshold}` by consecutive index intervals, each carrying a collection
/// chosen at its highest slice and kept while its energy stays below the replacement gate.
/// The radius functions ramp linearly to zero over one extra slice on each side when the
/// gate allows it.
#[allow(clippy::too_many_arguments)]
pub fn build_interval_cover(
    g: &Sweepout,
    threshold: f64,
    eps: f64,
    budget: usize,
    continuity_budget: f64,
    mode: BoundaryMode,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<IntervalCover> {
    let cont = g.continuity();
    if cont.c0.max(cont.w12) > continuity_budget {
        return Err(Error::CoverFailure(format!(
            "adjacent slices differ by {:.3e} > continuity budget {continuity_budget:.3e}",
            cont.c0.max(cont.w12)
        )));
    }
    let n = g.len();
    let energies = g.energies();
    let gate = gate_cfg(cfg, eps).epsilon0 / 3.0;
    let mut pieces = Vec::new();
    let mut k = 0;
    while k < n {
        if energies[k] < threshold {
            k += 1;
            continue;
        }
        let mut b = k;
        while b + 1 < n && energies[b + 1] >= threshold {
            b += 1;
        }
        let mut pos = k;
        while pos <= b {
            let peak = (pos..=b).max_by(|&i, &j| energies[i].total_cmp(&energies[j]).then(j.cmp(&i))).unwrap();
            let fits = |balls: &[GeneralizedBall], i: usize| energy_on_balls(&g.slices[i], balls, 1.0) <= gate;
            let mut centre = peak;
            let mut mi = maximal_improvement(g, centre, eps, budget, mode, cfg, seed);
            let mut lo = centre;
            while lo > pos && fits(&mi.collection, lo - 1) {
                lo -= 1;
            }
            if lo > pos {
                centre = pos;
                mi = maximal_improvement(g, centre, eps, budget, mode, cfg, seed);
                lo = pos;
            }
            let mut hi = centre;
            while hi < b && fits(&mi.collection, hi + 1) {
                hi += 1;
            }
            let mut radius = vec![0.0; n];
            for r in &mut radius[lo..=hi] {
                *r = 1.0;
            }
            if !mi.collection.is_empty() {
                if lo > 0 && fits(&mi.collection, lo - 1) {
                    radius[lo - 1] = 0.5;
                }
                if hi + 1 < n && fits(&mi.collection, hi + 1) {
                    radius[hi + 1] = 0.5;
                }
                pieces.push(CoverPiece { balls: mi.collection, interval: (lo, hi), radius });
            }
            pos = hi + 1;
        }
        k = b + 1;
    }
    Ok(IntervalCover { threshold, pieces })
}

/// Whether `u` is harmonic up to `tol` in the sense that no collection improves it.
pub fn is_locally_harmonic(u: &MapOnMesh, eps: f64, mode: BoundaryMode, cfg: &SolverConfig, tol: f64) -> bool {
    dirichlet_energy(u) < tol || maximal_improvement_at(u, eps, 4, 0.5, mode, cfg, 0).improvement <= tol
}
