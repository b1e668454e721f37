use super::improve::{build_interval_cover, maximal_improvement_at, IntervalCover};
use super::sweepout::{argmax, EndpointMode, HomotopyMove, MoveKind, Sweepout};
use super::MinmaxConfig;
use crate::energy::{area_functional, dirichlet_energy, MapOnMesh};
use crate::error::{Error, Result};
use crate::solver::{harmonic_replace, BoundaryMode, SolverConfig};
use serde::{Deserialize, Serialize};

pub(crate) fn boundary_mode(g: &Sweepout) -> BoundaryMode {
    match g.endpoint_mode {
        EndpointMode::FreeHomotopy => BoundaryMode::Free,
        EndpointMode::FixedBoundary { .. } => BoundaryMode::Fixed,
    }
}

/// Applies `f` to every index, fanning out over `jobs` scoped threads. Results come back in
/// index order, so the outcome does not depend on `jobs`.
pub(crate) fn par_map<T: Send>(jobs: usize, n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let jobs = jobs.max(1).min(n.max(1));
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(jobs);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> =
            (0..jobs).map(|j| s.spawn(move || (j * chunk..((j + 1) * chunk).min(n)).map(f).collect::<Vec<T>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Tightening threshold: `W/2` for free homotopies, `W/λ` between fixed endpoints, where
/// `W` is the current maximal slice energy.
pub fn threshold(g: &Sweepout, cfg: &MinmaxConfig) -> Result<f64> {
    let (w, _) = g.max_energy();
    match &g.endpoint_mode {
        EndpointMode::FreeHomotopy => Ok(w * cfg.threshold_fraction),
        EndpointMode::FixedBoundary { v0, v1 } => {
            let t = w / cfg.lambda;
            let ends = area_functional(v0).max(area_functional(v1));
            if !(cfg.lambda > 1.0) || t <= ends {
                return Err(Error::Config {
                    key: "lambda".into(),
                    reason: format!("W/lambda = {t:.4} must exceed the endpoint areas {ends:.4}"),
                });
            }
            Ok(t)
        }
    }
}

/// One row of the width table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub iteration: usize,
    pub max_area: f64,
    pub max_energy: f64,
    pub argmax_t: f64,
}

impl WidthRow {
    pub fn of(g: &Sweepout, iteration: usize) -> Self {
        let (max_energy, k) = argmax(&g.energies());
        let (max_area, _) = argmax(&g.areas());
        WidthRow { iteration, max_area, max_energy, argmax_t: g.times[k] }
    }
}

/// Diagnostics of one tightening pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightenReport {
    pub row: WidthRow,
    pub threshold: f64,
    pub cover: IntervalCover,
    /// Slices skipped because a replacement gate refused them.
    pub flagged: Vec<usize>,
    /// Per slice above threshold: (index, tightening gain, fresh ⅛-replacement drop).
    pub phi_samples: Vec<(usize, f64, f64)>,
    /// Empirical constant of `Φ(x) = Cx + Cx^{1/2}`; `None` if some slice gained nothing
    /// while a fresh replacement still dropped energy.
    pub phi_c: Option<f64>,
}

/// Collapses `B_r(c)` to `c` and stretches `B_{2r}(c) \ B_r(c)` over `B_{2r}(c)`; a
/// homotopically trivial change that makes a harmonic slice non-harmonic.
pub fn collapse_small_disk(u: &MapOnMesh, c: [f64; 2], r: f64) -> MapOnMesh {
    u.pullback(u.mesh.clone(), |p| {
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        let s = dx.hypot(dy);
        if s >= 2.0 * r {
            p
        } else if s <= r {
            c
        } else {
            let f = 2.0 * (s - r) / s;
            [c[0] + f * dx, c[1] + f * dy]
        }
    })
}

/// One two-stage replacement pass: stage one applies `H(·, ½r_j(t)B_j)` along the interval
/// cover, stage two a fresh maximal collection `H(·, ½B')` on slices still above threshold.
/// Slice energies never increase.
pub fn tighten(g: &Sweepout, cfg: &MinmaxConfig, solver: &SolverConfig, iteration: usize) -> Result<(Sweepout, TightenReport)> {
    let mode = boundary_mode(g);
    let thr = threshold(g, cfg)?;
    let seed = cfg.seed.wrapping_add(iteration as u64 * 7919);
    let cover = build_interval_cover(g, thr, cfg.epsilon, cfg.ball_budget, cfg.continuity_budget, mode, solver, seed)?;
    let gate = SolverConfig { epsilon0: solver.epsilon0.max(3.0 * cfg.epsilon), ..solver.clone() };
    let n = g.len();
    let fixed_ends = g.endpoint_mode.is_fixed();
    let before = g.energies();
    let mut out = g.clone();
    let mut flagged = Vec::new();

    for (j, piece) in cover.pieces.iter().enumerate() {
        let results = par_map(cfg.jobs, n, |k| {
            let r = piece.radius[k];
            if r <= 0.0 || (fixed_ends && (k == 0 || k == n - 1)) {
                return None;
            }
            Some(harmonic_replace(&out.slices[k], &piece.balls, 0.5 * r, mode, &gate))
        });
        for (k, res) in results.into_iter().enumerate() {
            match res {
                Some(Ok(rep)) if rep.energy_after <= rep.energy_before => {
                    out.log(HomotopyMove {
                        iteration,
                        kind: MoveKind::Replace,
                        slice: k,
                        energy_before: rep.energy_before,
                        energy_after: rep.energy_after,
                        detail: format!("stage 1, collection {j}, r = {}", piece.radius[k]),
                    });
                    out.slices[k] = rep.map;
                }
                Some(Err(_)) => flagged.push(k),
                _ => {}
            }
        }
    }

    let above: Vec<usize> =
        (0..n).filter(|&k| !(fixed_ends && (k == 0 || k == n - 1)) && dirichlet_energy(&out.slices[k]) >= thr).collect();
    let stage2 = par_map(cfg.jobs, above.len(), |a| {
        let k = above[a];
        let u = &out.slices[k];
        let mi = maximal_improvement_at(u, cfg.epsilon, cfg.ball_budget, 0.5, mode, solver, seed ^ (k as u64) << 8);
        if mi.collection.is_empty() {
            return None;
        }
        harmonic_replace(u, &mi.collection, 0.5, mode, &gate).ok()
    });
    for (a, res) in stage2.into_iter().enumerate() {
        let k = above[a];
        if let Some(rep) = res {
            if rep.energy_after < rep.energy_before {
                out.log(HomotopyMove {
                    iteration,
                    kind: MoveKind::Replace,
                    slice: k,
                    energy_before: rep.energy_before,
                    energy_after: rep.energy_after,
                    detail: "stage 2, fresh collection".into(),
                });
                out.slices[k] = rep.map;
            }
        }
    }

    if cfg.perturb_harmonic {
        for &k in &above {
            let gain = before[k] - dirichlet_energy(&out.slices[k]);
            if gain <= solver.tol_grad {
                let u = &out.slices[k];
                let e0 = dirichlet_energy(u);
                let v = collapse_small_disk(u, [0.0, 0.0], 2.0 * u.mesh.h);
                out.log(HomotopyMove {
                    iteration,
                    kind: MoveKind::Perturb,
                    slice: k,
                    energy_before: e0,
                    energy_after: dirichlet_energy(&v),
                    detail: "collapsed a small disk at the origin".into(),
                });
                out.slices[k] = v;
            }
        }
    }

    let phi_samples: Vec<(usize, f64, f64)> = par_map(cfg.jobs, above.len(), |a| {
        let k = above[a];
        let u = &out.slices[k];
        let gain = (before[k] - dirichlet_energy(u)).max(0.0);
        let d = maximal_improvement_at(u, cfg.epsilon, cfg.ball_budget, 0.125, mode, solver, seed ^ 0x5eed ^ k as u64)
            .improvement;
        (k, gain, d)
    });
    let mut phi_c = Some(0.0f64);
    for &(_, gain, d) in &phi_samples {
        if d <= solver.tol_grad {
            continue;
        }
        phi_c = match (phi_c, gain > 0.0) {
            (Some(c), true) => Some(c.max(d / (gain + gain.sqrt()))),
            _ => None,
        };
    }
    let row = WidthRow::of(&out, iteration);
    Ok((out, TightenReport { row, threshold: thr, cover, flagged, phi_samples, phi_c }))
}
