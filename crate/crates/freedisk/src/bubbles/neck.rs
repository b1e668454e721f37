use super::frame::Frame;
use crate::domain::DomainKind;
use crate::energy::MapOnMesh;
use crate::error::{Error, Result};
use crate::vec::dot;
use serde::{Deserialize, Serialize};

/// Where the neck lives: an annulus `inner ≤ |ζ| ≤ outer` in a frame of the disk, or the
/// whole of a (half-)cylinder mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NeckGeometry {
    Annulus { frame: Frame, inner: f64, outer: f64 },
    Cylinder,
}

/// Window integrals of a neck in cylinder coordinates `τ = log|ζ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckReport {
    /// Cylinder range `[a, b]` of the neck.
    pub tau: [f64; 2],
    pub l: f64,
    pub m: usize,
    /// Full window `[b - (m+6)l, b]`.
    pub full: [f64; 2],
    /// Middle window `[b - (m+3)l, b - 3l]`.
    pub middle: [f64; 2],
    /// `∫_mid |u_θ|²`.
    pub angular_middle: f64,
    /// `∫_full |∇u|²`.
    pub dirichlet_full: f64,
    /// `∫_{full \ mid} |∇u|²`.
    pub dirichlet_ends: f64,
    pub angular_ratio: f64,
    /// `E = ½ ∫_full |∇u|²`.
    pub energy: f64,
    pub area: f64,
    pub area_ratio: f64,
    /// `∫_mid |u_θ|² ≤ E/9` and `∫_ends |∇u|² ≤ E/9`.
    pub hypotheses: [bool; 2],
    /// `area ≤ 8/9 E + tol·E`, checked only when both hypotheses hold.
    pub lemma_holds: Option<bool>,
}

impl NeckReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses[0] && self.hypotheses[1]
    }
}

struct Sample {
    tau: f64,
    angular: f64,
    full: f64,
    area: f64,
}

fn samples(u: &MapOnMesh, geom: &NeckGeometry) -> Result<(Vec<Sample>, f64, f64)> {
    let mut ux = vec![0.0; u.dim];
    let mut uy = vec![0.0; u.dim];
    let (a, b) = match *geom {
        NeckGeometry::Cylinder => match u.mesh.domain {
            DomainKind::HalfCylinder { a, b } | DomainKind::Cylinder { a, b } => (a, b),
            _ => return Err(Error::GateViolation("neck_report: cylinder geometry needs a cylinder mesh".into())),
        },
        NeckGeometry::Annulus { inner, outer, .. } => {
            if !(inner > 0.0 && outer > inner) {
                return Err(Error::WindowTooShort { need: 0.0, have: 0.0 });
            }
            (inner.ln(), outer.ln())
        }
    };
    let mut out = Vec::new();
    for t in 0..u.mesh.n_triangles() {
        let c = u.mesh.centroid(t);
        // Unit vector of the angular direction of the frame at `c`; conformality makes
        // `|u_θ|² dτ dθ = ⟨∇u, e_θ⟩² dA`.
        let (tau, e) = match *geom {
            NeckGeometry::Cylinder => (c[0], [0.0, 1.0]),
            NeckGeometry::Annulus { frame, .. } => {
                let z = frame.to_local(c);
                let r = z[0].hypot(z[1]);
                if r <= 0.0 {
                    continue;
                }
                let s = 1e-6;
                let p1 = frame.from_local([z[0] * (1.0 + s), z[1] * (1.0 + s)]);
                let p0 = frame.from_local([z[0] * (1.0 - s), z[1] * (1.0 - s)]);
                let d = [p1[0] - p0[0], p1[1] - p0[1]];
                let n = d[0].hypot(d[1]);
                (r.ln(), [-d[1] / n, d[0] / n])
            }
        };
        if tau < a || tau > b {
            continue;
        }
        u.gradient_into(t, &mut ux, &mut uy);
        let area = u.mesh.geometry.area[t];
        let (xx, yy, xy) = (dot(&ux, &ux), dot(&uy, &uy), dot(&ux, &uy));
        let ang = e[0] * e[0] * xx + 2.0 * e[0] * e[1] * xy + e[1] * e[1] * yy;
        out.push(Sample { tau, angular: ang * area, full: (xx + yy) * area, area: (xx * yy - xy * xy).max(0.0).sqrt() * area });
    }
    Ok((out, a, b))
}

/// Angular ratio on the middle window and the area-versus-energy test on the full window
/// of a neck of length `T ≥ 7l`, with `m = ⌊T/l⌋ - 6` blocks in the middle.
pub fn neck_report(u: &MapOnMesh, geom: &NeckGeometry, l: f64, tol: f64) -> Result<NeckReport> {
    let (s, a, b) = samples(u, geom)?;
    let len = b - a;
    if !(l > 0.0) || len < 7.0 * l {
        return Err(Error::WindowTooShort { need: 7.0 * l, have: len });
    }
    let m = (len / l).floor() as usize - 6;
    let mf = m as f64;
    let full = [b - (mf + 6.0) * l, b];
    let middle = [b - (mf + 3.0) * l, b - 3.0 * l];
    let inside = |t: f64, w: [f64; 2]| t >= w[0] && t <= w[1];
    let (mut ang, mut dir, mut ends, mut area) = (0.0, 0.0, 0.0, 0.0);
    for x in &s {
        if !inside(x.tau, full) {
            continue;
        }
        dir += x.full;
        area += x.area;
        if inside(x.tau, middle) {
            ang += x.angular;
        } else {
            ends += x.full;
        }
    }
    let energy = 0.5 * dir;
    let hypotheses = [ang <= energy / 9.0, ends <= energy / 9.0];
    let lemma_holds = (hypotheses[0] && hypotheses[1]).then(|| area <= (8.0 / 9.0 + tol) * energy + 1e-14);
    Ok(NeckReport {
        tau: [a, b],
        l,
        m,
        full,
        middle,
        angular_middle: ang,
        dirichlet_full: dir,
        dirichlet_ends: ends,
        angular_ratio: if dir > 0.0 { ang / dir } else { 0.0 },
        energy,
        area,
        area_ratio: if energy > 0.0 { area / energy } else { 0.0 },
        hypotheses,
        lemma_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeBranch {
    /// `max_{[-l,l]} f ≥ 8Ca`: the integral over `[-2l, 2l]` is large.
    LargeMax,
    /// `max_{[-l,l]} f < 8Ca`.
    SmallMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeVerdict {
    /// Largest `f/(4C) - a - f''` over interior samples (non-positive when it holds exactly).
    pub violation: f64,
    pub inequality_holds: bool,
    pub max_middle: f64,
    pub branch: OdeBranch,
    /// Trapezoid integral over the samples.
    pub integral: f64,
    /// `8 C^{3/2} a sinh(l / (2√C))`, the comparison bound after rescaling to `g'' ≥ g - 4Ca`.
    pub bound: f64,
    /// `4 √(2C) a sinh(2√C l)` as printed; it fails on `8Ca cosh(t/√(4C))` once `C > 1/2`
    /// and `l` is large, so it is reported but not used for the verdict.
    pub printed_bound: f64,
    /// Whether `integral ≥ bound`; `None` on the small-max branch or when the inequality fails.
    pub bound_holds: Option<bool>,
}

/// Checks `f'' ≥ f/(4C) - a` on uniform samples `f(t_k)` covering `[-2l, 2l]` and, on the
/// large-max branch, the integral lower bound.
pub fn ode_comparison_check(t: &[f64], f: &[f64], c: f64, a: f64, l: f64) -> OdeVerdict {
    assert_eq!(t.len(), f.len());
    let n = t.len();
    let fmax = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut violation = f64::NEG_INFINITY;
    for k in 1..n.saturating_sub(1) {
        let h0 = t[k] - t[k - 1];
        let h1 = t[k + 1] - t[k];
        let d2 = 2.0 * (h0 * f[k + 1] - (h0 + h1) * f[k] + h1 * f[k - 1]) / (h0 * h1 * (h0 + h1));
        violation = violation.max(f[k] / (4.0 * c) - a - d2);
    }
    let slack = 1e-6 * (fmax / (4.0 * c) + a) + 1e-12;
    let inequality_holds = violation <= slack;
    let max_middle = t.iter().zip(f).filter(|(x, _)| x.abs() <= l + 1e-12).map(|(_, y)| *y).fold(f64::NEG_INFINITY, f64::max);
    let branch = if max_middle >= 8.0 * c * a { OdeBranch::LargeMax } else { OdeBranch::SmallMax };
    let integral = (1..n).map(|k| 0.5 * (f[k] + f[k - 1]) * (t[k] - t[k - 1])).sum();
    let bound = 8.0 * c.powf(1.5) * a * (l / (2.0 * c.sqrt())).sinh();
    let printed_bound = 4.0 * (2.0 * c).sqrt() * a * (2.0 * c.sqrt() * l).sinh();
    let bound_holds = (inequality_holds && branch == OdeBranch::LargeMax).then_some(integral >= bound);
    OdeVerdict { violation, inequality_holds, max_middle, branch, integral, bound, printed_bound, bound_holds }
}
