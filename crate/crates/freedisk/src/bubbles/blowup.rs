use super::frame::{EnergyField, Frame};
use super::BubblesConfig;
use crate::domain::{build_mesh, MeshDomain};
use crate::energy::MapOnMesh;
use crate::error::{Error, Result};
use std::sync::Arc;

/// Selected bubble scale and centre, the window radius and the rescaled map.
#[derive(Debug, Clone)]
pub struct Blowup {
    /// Frame centred at the selected `y`.
    pub frame: Frame,
    pub r: f64,
    /// Window radius `min(Kr, cap)` in the frame's local units.
    pub window: f64,
    /// Energy of `u` on the window (centroid rule).
    pub window_energy: f64,
    /// Energy of `u` on `B_ρ(x) \ B_r(y)`, equal to ε₃ up to one triangle.
    pub outer_energy: f64,
    /// `u` pulled back to the unit disk (interior) or unit half disk (boundary) by the
    /// window dilation.
    pub map: MapOnMesh,
}

fn candidate_frames(x: &Frame, rho: f64) -> Vec<Frame> {
    let mut v = vec![*x];
    match *x {
        Frame::Interior { center } => {
            let n = 8;
            let g = 0.5 * rho / n as f64;
            for i in -n..=n {
                for j in -n..=n {
                    if i == 0 && j == 0 || (i * i + j * j) > n * n {
                        continue;
                    }
                    let c = [center[0] + i as f64 * g, center[1] + j as f64 * g];
                    if c[0].hypot(c[1]) < 1.0 {
                        v.push(Frame::Interior { center: c });
                    }
                }
            }
        }
        Frame::Boundary { angle } => {
            for k in 1..=20 {
                let d = 0.5 * rho * k as f64 / 20.0;
                v.push(Frame::Boundary { angle: angle + d });
                v.push(Frame::Boundary { angle: angle - d });
            }
        }
    }
    v
}

/// Smallest `r` such that `inf_y ∫_{B_ρ(x) \ B_r(y)} |∇u|²/2 = ε₃`, searched over centres
/// `y` near `x`, with the dilated map on the window `B_{Kr}(y)`.
pub fn blowup_extract(u: &MapOnMesh, x: &Frame, cfg: &BubblesConfig) -> Result<Blowup> {
    let field = EnergyField::of(u);
    blowup_with_field(u, &field, x, cfg)
}

pub(crate) fn blowup_with_field(u: &MapOnMesh, field: &EnergyField, x: &Frame, cfg: &BubblesConfig) -> Result<Blowup> {
    let c = x.center();
    let in_ball = |p: [f64; 2]| (p[0] - c[0]).hypot(p[1] - c[1]) <= cfg.rho;
    let idx: Vec<usize> = (0..field.centroids.len()).filter(|&t| in_ball(field.centroids[t])).collect();
    let total: f64 = idx.iter().map(|&t| field.energies[t]).sum();
    // Nothing concentrates unless the detection ball holds more than the outer allowance.
    let core = field.energy_where(|p| x.radius(p) <= cfg.detect_radius * if x.is_boundary() { 0.5 } else { 1.0 });
    if total <= cfg.epsilon3 || core <= cfg.epsilon3 {
        return Err(Error::NoValidRadius);
    }
    let mut best: Option<(f64, Frame, usize)> = None;
    for f in candidate_frames(x, cfg.rho) {
        let mut prof: Vec<(f64, f64)> = idx.iter().map(|&t| (f.radius(field.centroids[t]), field.energies[t])).collect();
        prof.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum = 0.0;
        for (k, (r, e)) in prof.iter().enumerate() {
            cum += e;
            if total - cum <= cfg.epsilon3 {
                if best.map_or(true, |b| *r < b.0) {
                    best = Some((*r, f, k + 1));
                }
                break;
            }
        }
    }
    let (r, frame, count) = best.ok_or(Error::NoValidRadius)?;
    if count < cfg.min_triangles {
        return Err(Error::NoValidRadius);
    }
    let outer = total
        - idx.iter().filter(|&&t| frame.radius(field.centroids[t]) <= r).map(|&t| field.energies[t]).sum::<f64>();
    let cap = match frame {
        Frame::Interior { center } => cfg.rho - (center[0] - c[0]).hypot(center[1] - c[1]),
        Frame::Boundary { .. } => 0.5 * cfg.rho,
    };
    let window = (cfg.window * r).min(cap).max(r);
    let window_energy = field.energy_where(|p| in_ball(p) && frame.radius(p) <= window);
    let domain = if frame.is_boundary() { MeshDomain::HalfDisk } else { MeshDomain::Disk };
    let mesh = Arc::new(build_mesh(domain, cfg.reference_h)?);
    let map = u.resample(mesh, |q| frame.from_local([window * q[0], window * q[1]]), frame.is_boundary());
    Ok(Blowup { frame, r, window, window_energy, outer_energy: outer, map })
}
