use super::{relax, vertex_kinds, BoundaryMode, SolverConfig, Telemetry, VertexKind};
use crate::domain::{check_disjoint, GeneralizedBall};
use crate::energy::{dirichlet_energy, energy_on, MapOnMesh};
use crate::error::{Error, Result};

/// Output of a harmonic replacement.
#[derive(Debug, Clone)]
pub struct Replacement {
    pub map: MapOnMesh,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Energy of the input on the union of the (unshrunk) balls, the quantity gated by ε₀/3.
    pub gate_energy: f64,
    /// Vertices that were free during the solve.
    pub active: Vec<usize>,
    pub telemetry: Telemetry,
}

/// Energy of `u` on the union of the discrete regions of `balls` at scale `rho`.
pub fn energy_on_balls(u: &MapOnMesh, balls: &[GeneralizedBall], rho: f64) -> f64 {
    let mut tris: Vec<usize> = balls.iter().flat_map(|b| b.region(&u.mesh, rho).triangles).collect();
    tris.sort_unstable();
    tris.dedup();
    energy_on(u, &tris)
}

/// `H(u, B)`: replaces `u` on each `ρB` by the constrained harmonic map with the same trace
/// on `∂(ρB) ∩ D`, leaving every other vertex bitwise unchanged.
///
/// Vertices of ρB lying on a free part of ∂D stay on Γ; vertices on a Dirichlet part of ∂D
/// stay fixed. In `BoundaryMode::Fixed` the whole of ∂D is clamped.
pub fn harmonic_replace(
    u: &MapOnMesh,
    balls: &[GeneralizedBall],
    rho: f64,
    mode: BoundaryMode,
    cfg: &SolverConfig,
) -> Result<Replacement> {
    for b in balls {
        b.validate()?;
    }
    check_disjoint(balls, Some(&u.mesh))?;
    let gate_energy = energy_on_balls(u, balls, 1.0);
    if gate_energy > cfg.epsilon0 / 3.0 {
        return Err(Error::EnergyGateExceeded { energy: gate_energy, gate: cfg.epsilon0 / 3.0 });
    }
    let base = vertex_kinds(u, mode);
    let mut inside = vec![false; u.n_vertices()];
    for b in balls {
        for v in b.region(&u.mesh, rho).vertices {
            inside[v] = true;
        }
    }
    let kinds: Vec<VertexKind> =
        base.iter().zip(&inside).map(|(&k, &inb)| if inb { k } else { VertexKind::Fixed }).collect();
    let active: Vec<usize> = (0..u.n_vertices()).filter(|&i| kinds[i] != VertexKind::Fixed).collect();
    let mut map = u.clone();
    let energy_before = dirichlet_energy(u);
    let telemetry = relax(&mut map, &kinds, &active, cfg);
    let energy_after = dirichlet_energy(&map);
    Ok(Replacement { map, energy_before, energy_after, gate_energy, active, telemetry })
}
