use super::frame::{ball_masses, has_full_boundary, EnergyField, Frame};
use super::BubblesConfig;
use crate::energy::MapOnMesh;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A concentration point with its limiting mass `ν(B_ρ(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub frame: Frame,
    pub mass: f64,
    /// Tail median of `ν(B_{r*}(x))`, the detection statistic.
    pub core_mass: f64,
}

pub(crate) fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn tail<'a>(seq: &'a [MapOnMesh], cfg: &BubblesConfig) -> &'a [MapOnMesh] {
    &seq[seq.len().saturating_sub(cfg.tail.max(1))..]
}

fn candidates(r: f64, boundary: bool) -> Vec<[f64; 2]> {
    let g = 0.5 * r;
    let n = (1.0 / g).ceil() as i64;
    let mut c = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            let p = [i as f64 * g, j as f64 * g];
            if p[0].hypot(p[1]) < 1.0 {
                c.push(p);
            }
        }
    }
    if boundary {
        let m = (TAU / g).ceil() as usize;
        for k in 0..m {
            let a = TAU * k as f64 / m as f64;
            c.push([a.cos(), a.sin()]);
        }
    }
    c
}

/// Points where the tail median of the mass in `B_{r*}(x)` stays at least `ε₁`, taken
/// greedily by decreasing mass and at least `2ρ` apart. Points within `r*` of a free ∂D
/// are moved onto it and get boundary frames.
pub fn detect_concentration(seq: &[MapOnMesh], cfg: &BubblesConfig) -> Vec<Concentration> {
    let tail = tail(seq, cfg);
    if tail.is_empty() {
        return Vec::new();
    }
    let boundary = has_full_boundary(&tail[0].mesh);
    let cands = candidates(cfg.detect_radius, boundary);
    let fields: Vec<EnergyField> = tail.iter().map(EnergyField::of).collect();
    let per: Vec<Vec<f64>> = fields.iter().map(|f| ball_masses(f, &cands, cfg.detect_radius)).collect();
    let score: Vec<f64> = (0..cands.len()).map(|i| median(per.iter().map(|m| m[i]).collect())).collect();
    let mut order: Vec<usize> = (0..cands.len()).filter(|&i| score[i] >= cfg.epsilon1).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let mut out: Vec<Concentration> = Vec::new();
    for i in order {
        let p = cands[i];
        if out.iter().any(|c| {
            let q = c.frame.center();
            (p[0] - q[0]).hypot(p[1] - q[1]) < 2.0 * cfg.rho
        }) {
            continue;
        }
        let frame = if boundary && p[0].hypot(p[1]) > 1.0 - cfg.detect_radius {
            Frame::Boundary { angle: p[1].atan2(p[0]) }
        } else {
            Frame::Interior { center: p }
        };
        let c = frame.center();
        let mass = median(
            fields.iter().map(|f| f.energy_where(|q| (q[0] - c[0]).hypot(q[1] - c[1]) <= cfg.rho)).collect(),
        );
        out.push(Concentration { frame, mass, core_mass: score[i] });
    }
    out
}
