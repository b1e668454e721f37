use super::MapOnMesh;
use crate::domain::{barycentric, DomainKind, Locator};
use crate::error::{Error, Result};
use crate::vec::{dist, dist2, dot};
use std::f64::consts::{LN_2, TAU};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AngularEnergy {
    /// `∫ |u_θ|²` over the window.
    pub angular: f64,
    /// `∫ |∇u|²` over the window.
    pub total: f64,
    pub ratio: f64,
}

fn cylinder_range(u: &MapOnMesh) -> Result<(f64, f64)> {
    match u.mesh.domain {
        DomainKind::HalfCylinder { a, b } | DomainKind::Cylinder { a, b } => Ok((a, b)),
        _ => Err(Error::GateViolation("angular energy needs a cylinder domain".into())),
    }
}

/// Angular and full Dirichlet integrals over the triangles whose centroid has `t ∈ [lo, hi]`.
pub fn angular_energy(u: &MapOnMesh, lo: f64, hi: f64) -> Result<AngularEnergy> {
    let (a, b) = cylinder_range(u)?;
    let eps = 1e-9 * (b - a).abs().max(1.0);
    if lo < a - eps || hi > b + eps || lo > hi {
        return Err(Error::WindowOutOfRange { lo, hi, min: a, max: b });
    }
    let mut ux = vec![0.0; u.dim];
    let mut uy = vec![0.0; u.dim];
    let (mut ang, mut tot) = (0.0, 0.0);
    for t in 0..u.mesh.n_triangles() {
        let c = u.mesh.centroid(t);
        if c[0] < lo || c[0] > hi {
            continue;
        }
        u.gradient_into(t, &mut ux, &mut uy);
        let area = u.mesh.geometry.area[t];
        ang += dot(&uy, &uy) * area;
        tot += (dot(&ux, &ux) + dot(&uy, &uy)) * area;
    }
    Ok(AngularEnergy { angular: ang, total: tot, ratio: if tot > 0.0 { ang / tot } else { 0.0 } })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SliceProfile {
    pub t: Vec<f64>,
    /// `∫_{θ} |u_θ|²` on each ring.
    pub f: Vec<f64>,
}

/// `f(t) = ∫ |u_θ|² dθ` on every ring `t = const` of a cylinder mesh (midpoint differences).
pub fn slice_energy_profile(u: &MapOnMesh) -> Result<SliceProfile> {
    cylinder_range(u)?;
    let periodic = matches!(u.mesh.domain, DomainKind::Cylinder { .. });
    let mut rings: Vec<(f64, Vec<(f64, usize)>)> = Vec::new();
    let mut order: Vec<usize> = (0..u.n_vertices()).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (u.mesh.vertices[i], u.mesh.vertices[j]);
        p[0].partial_cmp(&q[0]).unwrap().then(p[1].partial_cmp(&q[1]).unwrap())
    });
    for i in order {
        let p = u.mesh.vertices[i];
        match rings.last_mut() {
            Some((t, ring)) if (p[0] - *t).abs() < 1e-10 => ring.push((p[1], i)),
            _ => rings.push((p[0], vec![(p[1], i)])),
        }
    }
    let mut t = Vec::with_capacity(rings.len());
    let mut f = Vec::with_capacity(rings.len());
    for (tr, ring) in rings {
        let n = ring.len();
        let mut s = 0.0;
        let segs = if periodic { n } else { n - 1 };
        for k in 0..segs {
            let (th0, i0) = ring[k];
            let (mut th1, i1) = ring[(k + 1) % n];
            if k + 1 == n {
                th1 += TAU;
            }
            s += dist2(u.value(i0), u.value(i1)) / (th1 - th0);
        }
        t.push(tr);
        f.push(s);
    }
    Ok(SliceProfile { t, f })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CourantLebesgue {
    /// Selected radius in `(l, 2l)`.
    pub l_prime: f64,
    /// `∫ |u_φ|² dφ` on the selected arc.
    pub arc_energy: f64,
    /// `(1/log 2) ∫_{window} |∇u|²`.
    pub bound: f64,
    pub window_dirichlet: f64,
    /// Measured `max |u(φ₁) - u(φ₂)|` along the selected arc.
    pub oscillation: f64,
    /// `(bound · |φ₁ - φ₂|)^{1/2}` over the arc's angular span.
    pub oscillation_bound: f64,
    pub scan: Vec<(f64, f64)>,
}

struct Arc {
    energy: f64,
    oscillation: f64,
    span: f64,
}

fn arc_energy(u: &MapOnMesh, loc: &Locator, center: [f64; 2], rho: f64, n_phi: usize) -> Arc {
    let dphi = TAU / n_phi as f64;
    let mut samples: Vec<Option<Vec<f64>>> = Vec::with_capacity(n_phi);
    for k in 0..n_phi {
        let phi = k as f64 * dphi;
        let p = [center[0] + rho * phi.cos(), center[1] + rho * phi.sin()];
        let (t, _) = loc.locate(&u.mesh, p);
        let bc = barycentric(&u.mesh.triangle_coords(t), p);
        if bc.iter().all(|c| *c >= -1e-9) {
            samples.push(Some(u.eval(loc, p)));
        } else {
            samples.push(None);
        }
    }
    let mut energy = 0.0;
    let mut oscillation: f64 = 0.0;
    let mut span: f64 = 0.0;
    // Walk contiguous runs, starting after a gap when there is one.
    let start = samples.iter().position(|s| s.is_none()).map(|g| (g + 1) % n_phi).unwrap_or(0);
    let mut run: Vec<&Vec<f64>> = Vec::new();
    let flush = |run: &mut Vec<&Vec<f64>>, osc: &mut f64, span: &mut f64| {
        for a in 0..run.len() {
            for b in (a + 1)..run.len() {
                *osc = osc.max(dist(run[a], run[b]));
            }
        }
        if run.len() > 1 {
            *span = span.max((run.len() - 1) as f64 * dphi);
        }
        run.clear();
    };
    for k in 0..n_phi {
        let idx = (start + k) % n_phi;
        match &samples[idx] {
            Some(v) => {
                if let Some(prev) = run.last() {
                    energy += dist2(prev, v) / dphi;
                }
                run.push(v);
            }
            None => flush(&mut run, &mut oscillation, &mut span),
        }
    }
    if samples.iter().all(|s| s.is_some()) {
        energy += dist2(samples[n_phi - 1].as_ref().unwrap(), samples[0].as_ref().unwrap()) / dphi;
    }
    flush(&mut run, &mut oscillation, &mut span);
    Arc { energy, oscillation, span }
}

/// Picks the radius in `(l, 2l)` around `center` whose arc carries the least angular energy
/// and compares it with the averaging bound `(1/log 2) ∫_{l<|x-center|<2l} |∇u|²`.
pub fn courant_lebesgue_slice(u: &MapOnMesh, center: [f64; 2], l: f64, n_radii: usize) -> Result<CourantLebesgue> {
    let loc = Locator::new(&u.mesh);
    let mut window = Vec::new();
    for t in 0..u.mesh.n_triangles() {
        let c = u.mesh.centroid(t);
        let r = (c[0] - center[0]).hypot(c[1] - center[1]);
        if r > l && r < 2.0 * l {
            window.push(t);
        }
    }
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let window_dirichlet = 2.0 * super::energy_on(u, &window);
    let bound = window_dirichlet / LN_2;
    let mut scan = Vec::with_capacity(n_radii);
    let mut best: Option<(f64, Arc)> = None;
    for k in 0..n_radii {
        let rho = l * (1.0 + (k as f64 + 0.5) / n_radii as f64);
        let arc = arc_energy(u, &loc, center, rho, 720);
        scan.push((rho, arc.energy));
        if best.as_ref().map_or(true, |(_, b)| arc.energy < b.energy) {
            best = Some((rho, arc));
        }
    }
    let (l_prime, arc) = best.ok_or(Error::EmptyWindow)?;
    Ok(CourantLebesgue {
        l_prime,
        arc_energy: arc.energy,
        bound,
        window_dirichlet,
        oscillation: arc.oscillation,
        oscillation_bound: (bound * arc.span).sqrt(),
        scan,
    })
}
