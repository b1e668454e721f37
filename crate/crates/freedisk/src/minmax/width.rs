use super::conformal::conformal_reparametrize;
use super::mollify::mollify_sweepout;
use super::sweepout::Sweepout;
use super::tighten::{tighten, TightenReport, WidthRow};
use super::MinmaxConfig;
use crate::energy::{area_functional, dirichlet_energy, free_boundary_residual, hopf_differential, tension_residual, MapOnMesh};
use crate::error::{Error, Result};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};

/// Upper bound for the width with its per-iteration history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub w_upper: f64,
    pub energy_width: f64,
    pub per_iteration: Vec<WidthRow>,
}

impl WidthEstimate {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# format: 1\niteration,max_area,max_energy,argmax_t\n");
        for r in &self.per_iteration {
            s += &format!("{},{:.12e},{:.12e},{}\n", r.iteration, r.max_area, r.max_energy, r.argmax_t);
        }
        s
    }

    /// Whether the per-iteration maximal energy never increased.
    pub fn energy_monotone(&self) -> bool {
        self.per_iteration.windows(2).all(|w| w[1].max_energy <= w[0].max_energy + 1e-12)
    }
}

/// Harmonicity and conformality certificate of one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub t: f64,
    pub energy: f64,
    pub area: f64,
    pub tension: f64,
    pub boundary_residual: f64,
    pub hopf_norm: f64,
}

impl Certificate {
    pub fn of(u: &MapOnMesh, t: f64) -> Self {
        Certificate {
            t,
            energy: dirichlet_energy(u),
            area: area_functional(u),
            tension: tension_residual(u).norm,
            boundary_residual: free_boundary_residual(u).norm,
            hopf_norm: hopf_differential(u).1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthStatus {
    Stalled,
    BudgetExhausted,
}

/// Result of the width pipeline. On `BudgetExhausted` the fields hold the best so far.
#[derive(Debug, Clone)]
pub struct WidthOutcome {
    pub estimate: WidthEstimate,
    pub status: WidthStatus,
    pub sweepout: Sweepout,
    /// Highest-energy slice after each iteration: the min-max sequence.
    pub argmax_slices: Vec<MapOnMesh>,
    pub certificates: Vec<Certificate>,
    pub reports: Vec<TightenReport>,
}

impl WidthOutcome {
    pub fn error(&self) -> Option<Error> {
        (self.status == WidthStatus::BudgetExhausted).then_some(Error::BudgetExhausted)
    }
}

/// Iterates mollify, conformal reparametrization and tightening until the maximal area
/// stalls (relative change below `stall_tol` for three iterations) or the budget runs out.
pub fn width(initial: &Sweepout, cfg: &MinmaxConfig, solver: &SolverConfig, mut progress: impl FnMut(&WidthRow)) -> Result<WidthOutcome> {
    let mut g = initial.clone();
    let first = WidthRow::of(&g, 0);
    progress(&first);
    let mut rows = vec![first];
    let (_, k0) = g.max_energy();
    let mut argmax_slices = vec![g.slices[k0].clone()];
    let mut reports = Vec::new();
    let mut status = WidthStatus::BudgetExhausted;
    for it in 1..=cfg.iteration_budget {
        if cfg.mollify_scale > 0.0 {
            g = mollify_sweepout(&g, cfg.mollify_scale, cfg.mollify_bound, it)?;
        }
        if cfg.reparam_evals > 0 {
            g = conformal_reparametrize(&g, cfg.eps_metric, cfg.reparam_evals, it).0;
        }
        let (next, rep) = tighten(&g, cfg, solver, it)?;
        g = next;
        progress(&rep.row);
        rows.push(rep.row);
        let (_, k) = g.max_energy();
        argmax_slices.push(g.slices[k].clone());
        reports.push(rep);
        if rows.len() >= 4 {
            let tail = &rows[rows.len() - 4..];
            let stalled =
                tail.windows(2).all(|w| (w[0].max_area - w[1].max_area).abs() <= cfg.stall_tol * w[0].max_area.abs().max(1e-12));
            if stalled {
                status = WidthStatus::Stalled;
                break;
            }
        }
    }
    let w_upper = rows.iter().map(|r| r.max_area).fold(f64::INFINITY, f64::min);
    let energy_width = rows.iter().map(|r| r.max_energy).fold(f64::INFINITY, f64::min);
    let (_, k) = g.max_energy();
    let certificates = vec![Certificate::of(&g.slices[k], g.times[k])];
    Ok(WidthOutcome {
        estimate: WidthEstimate { w_upper, energy_width, per_iteration: rows },
        status,
        sweepout: g,
        argmax_slices,
        certificates,
        reports,
    })
}
