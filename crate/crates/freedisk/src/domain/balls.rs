use super::mesh::DiskMesh;
use crate::error::{Error, Result};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BallKind {
    /// Interior disk with closure inside D.
    Classical { center: [f64; 2], radius: f64 },
    /// Ball around the boundary point `(cos angle, sin angle)`.
    Boundary { angle: f64, radius: f64 },
}

/// Interior ball of D or boundary ball identified with D⁺ through `Π_B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedBall {
    pub kind: BallKind,
    /// Shrink factor ρ ∈ (0, 1]; the ball describes ρB.
    pub shrink: f64,
}

impl GeneralizedBall {
    pub fn classical(center: [f64; 2], radius: f64) -> Self {
        GeneralizedBall { kind: BallKind::Classical { center, radius }, shrink: 1.0 }
    }

    pub fn boundary(angle: f64, radius: f64) -> Self {
        GeneralizedBall { kind: BallKind::Boundary { angle, radius }, shrink: 1.0 }
    }

    pub fn scaled(&self, rho: f64) -> Self {
        GeneralizedBall { kind: self.kind, shrink: self.shrink * rho }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Error::GateViolation(format!("generalized ball: {m}"));
        if !(self.shrink > 0.0 && self.shrink <= 1.0) {
            return Err(bad("shrink must lie in (0, 1]"));
        }
        match self.kind {
            BallKind::Classical { center, radius } => {
                if !(radius > 0.0) || center[0].hypot(center[1]) + radius >= 1.0 {
                    return Err(bad("classical ball must have closure inside D"));
                }
            }
            BallKind::Boundary { radius, .. } => {
                if !(radius > 0.0 && radius < 0.5) {
                    return Err(bad("boundary ball radius must lie in (0, 1/2)"));
                }
            }
        }
        Ok(())
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.kind, BallKind::Boundary { .. })
    }

    /// The point of D̄ the ball is centred at.
    pub fn center(&self) -> [f64; 2] {
        match self.kind {
            BallKind::Classical { center, .. } => center,
            BallKind::Boundary { angle, .. } => [angle.cos(), angle.sin()],
        }
    }

    pub fn radius(&self) -> f64 {
        match self.kind {
            BallKind::Classical { radius, .. } | BallKind::Boundary { radius, .. } => radius,
        }
    }

    /// `Π_B`: the Möbius map of D onto the upper half plane with the centre going to 0
    /// and the two points of ∂D at distance `radius` from it going to ∓1.
    pub fn pi_b(&self, p: [f64; 2]) -> [f64; 2] {
        let (w, s) = self.boundary_frame(p);
        let z = C::i() * (C::new(1.0, 0.0) - w) / (C::new(1.0, 0.0) + w) / s;
        [z.re, z.im]
    }

    pub fn pi_b_inverse(&self, q: [f64; 2]) -> [f64; 2] {
        let BallKind::Boundary { angle, radius } = self.kind else { panic!("pi_b of a classical ball") };
        let s = (2.0 * (radius / 2.0).asin() / 2.0).tan();
        let zeta = C::new(q[0], q[1]) * s;
        let w = (C::i() - zeta) / (C::i() + zeta);
        let z = w * C::from_polar(1.0, angle);
        [z.re, z.im]
    }

    fn boundary_frame(&self, p: [f64; 2]) -> (C, f64) {
        let BallKind::Boundary { angle, radius } = self.kind else { panic!("pi_b of a classical ball") };
        let beta = 2.0 * (radius / 2.0).asin();
        (C::new(p[0], p[1]) * C::from_polar(1.0, -angle), (beta / 2.0).tan())
    }

    /// Membership in ρB (ρ = `shrink`), closed.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.contains_scaled(p, 1.0)
    }

    pub fn contains_scaled(&self, p: [f64; 2], rho: f64) -> bool {
        let f = self.shrink * rho;
        match self.kind {
            BallKind::Classical { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= f * radius,
            BallKind::Boundary { .. } => {
                if p[0].hypot(p[1]) > 1.0 + 1e-12 {
                    return false;
                }
                let q = self.pi_b(p);
                q[0].hypot(q[1]) <= f
            }
        }
    }

    /// Area of ρB by pullback quadrature through `Π_B^{-1}` (polar Gauss rule on D_ρ⁺).
    pub fn area_pullback(&self, rho: f64) -> f64 {
        let f = self.shrink * rho;
        match self.kind {
            BallKind::Classical { radius, .. } => PI * (f * radius).powi(2),
            BallKind::Boundary { radius, .. } => {
                let s = ((radius / 2.0).asin()).tan();
                // |d/dζ Π_B^{-1}|² for z = e^{iα}(i - sζ)/(i + sζ): |dz/dζ| = 2s / |i + sζ|².
                let (nodes, weights) = gauss_legendre(64);
                let mut total = 0.0;
                for (xr, wr) in nodes.iter().zip(&weights) {
                    let r = 0.5 * f * (xr + 1.0);
                    for (xt, wt) in nodes.iter().zip(&weights) {
                        let t = 0.5 * PI * (xt + 1.0);
                        let zeta = C::from_polar(r, t);
                        let d = 2.0 * s / (C::i() + zeta * s).norm_sqr();
                        total += wr * wt * d * d * r;
                    }
                }
                total * 0.5 * f * 0.5 * PI
            }
        }
    }

    /// Vertices and triangles of `mesh` in ρB: vertices inside, triangles by centroid.
    pub fn region(&self, mesh: &DiskMesh, rho: f64) -> BallRegion {
        let vertices = (0..mesh.n_vertices()).filter(|&i| self.contains_scaled(mesh.vertices[i], rho)).collect();
        let triangles = (0..mesh.n_triangles()).filter(|&t| self.contains_scaled(mesh.centroid(t), rho)).collect();
        BallRegion { vertices, triangles }
    }
}

/// Discrete approximation of a generalized ball on a mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallRegion {
    pub vertices: Vec<usize>,
    pub triangles: Vec<usize>,
}

impl BallRegion {
    pub fn area(&self, mesh: &DiskMesh) -> f64 {
        self.triangles.iter().map(|&t| mesh.geometry.area[t]).sum()
    }
}

/// `ball_region(B, ρ, mesh)`.
pub fn ball_region(ball: &GeneralizedBall, rho: f64, mesh: &DiskMesh) -> BallRegion {
    ball.region(mesh, rho)
}

/// Checks that the closed regions of a collection are pairwise disjoint, geometrically
/// (dense boundary sampling of each region against the other) and on the mesh (no vertex
/// of one region is in or adjacent to another).
pub fn check_disjoint(balls: &[GeneralizedBall], mesh: Option<&DiskMesh>) -> Result<()> {
    for i in 0..balls.len() {
        for j in (i + 1)..balls.len() {
            if balls_intersect(&balls[i], &balls[j]) {
                return Err(Error::BallsNotDisjoint(i, j));
            }
        }
    }
    if let Some(mesh) = mesh {
        let mut owner = vec![usize::MAX; mesh.n_vertices()];
        for (b, ball) in balls.iter().enumerate() {
            for v in ball.region(mesh, 1.0).vertices {
                owner[v] = b;
            }
        }
        for v in 0..mesh.n_vertices() {
            if owner[v] == usize::MAX {
                continue;
            }
            for &n in mesh.neighbors(v) {
                if owner[n] != usize::MAX && owner[n] != owner[v] {
                    return Err(Error::BallsNotDisjoint(owner[v].min(owner[n]), owner[v].max(owner[n])));
                }
            }
        }
    }
    Ok(())
}

fn boundary_samples(b: &GeneralizedBall, n: usize) -> Vec<[f64; 2]> {
    let f = b.shrink;
    match b.kind {
        BallKind::Classical { center, radius } => (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [center[0] + f * radius * t.cos(), center[1] + f * radius * t.sin()]
            })
            .collect(),
        BallKind::Boundary { .. } => {
            let mut pts = Vec::new();
            for k in 0..=n {
                let t = PI * k as f64 / n as f64;
                pts.push(b.pi_b_inverse([f * t.cos(), f * t.sin()]));
            }
            for k in 0..=n {
                let x = -f + 2.0 * f * k as f64 / n as f64;
                pts.push(b.pi_b_inverse([x, 0.0]));
            }
            pts
        }
    }
}

fn balls_intersect(a: &GeneralizedBall, b: &GeneralizedBall) -> bool {
    if let (BallKind::Classical { center: c1, radius: r1 }, BallKind::Classical { center: c2, radius: r2 }) = (a.kind, b.kind) {
        return (c1[0] - c2[0]).hypot(c1[1] - c2[1]) <= a.shrink * r1 + b.shrink * r2;
    }
    boundary_samples(a, 720).iter().any(|p| b.contains(*p)) || boundary_samples(b, 720).iter().any(|p| a.contains(*p))
}

/// The fixed Cayley-type map `Π̃(ζ) = (iζ + 1)/(ζ + i)` from the upper half plane onto D,
/// sending 0, 1, ∞ to -i, 1, i.
pub fn cayley(zeta: [f64; 2]) -> [f64; 2] {
    let z = C::new(zeta[0], zeta[1]);
    let w = (C::i() * z + 1.0) / (z + C::i());
    [w.re, w.im]
}

pub fn cayley_inverse(w: [f64; 2]) -> [f64; 2] {
    let w = C::new(w[0], w[1]);
    let z = (C::new(1.0, 0.0) - C::i() * w) / (w - C::i());
    [z.re, z.im]
}

/// Conformal dilation `Ψ_{r,x} = Π̃ ∘ Φ_{r,x} ∘ Π̃^{-1}` with `Φ(ζ) = (ζ - Π̃^{-1}(x)) / r`.
/// It maps `Π̃(D_r⁺(Π̃^{-1}(x)))` onto the reference region `D⁻ = Π̃(D_1⁺)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalDilation {
    pub r: f64,
    /// `Π̃^{-1}(x)`, real.
    pub xi: f64,
}

impl ConformalDilation {
    /// `x` must be a point of ∂D other than `i`.
    pub fn new(x: [f64; 2], r: f64) -> Self {
        let z = cayley_inverse(x);
        ConformalDilation { r, xi: z[0] }
    }

    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        let z = cayley_inverse(p);
        cayley([(z[0] - self.xi) / self.r, z[1] / self.r])
    }

    pub fn inverse(&self, q: [f64; 2]) -> [f64; 2] {
        let z = cayley_inverse(q);
        cayley([z[0] * self.r + self.xi, z[1] * self.r])
    }

    /// Whether `p` lies in the dilated ball `Π̃(D_r⁺(ξ))`.
    pub fn in_ball(&self, p: [f64; 2]) -> bool {
        let z = cayley_inverse(p);
        (z[0] - self.xi).hypot(z[1]) <= self.r
    }

    /// `|∂̄Ψ| / |∂Ψ|` at `p` by central differences.
    pub fn cr_defect(&self, p: [f64; 2]) -> f64 {
        let h = 1e-5;
        let fx = |s: f64| self.forward([p[0] + s, p[1]]);
        let fy = |s: f64| self.forward([p[0], p[1] + s]);
        let (a, b) = (fx(h), fx(-h));
        let (c, d) = (fy(h), fy(-h));
        let dx = C::new((a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h));
        let dy = C::new((c[0] - d[0]) / (2.0 * h), (c[1] - d[1]) / (2.0 * h));
        let dz = (dx - C::i() * dy) * 0.5;
        let dzb = (dx + C::i() * dy) * 0.5;
        dzb.norm() / dz.norm()
    }
}

/// In the reference region `D⁻ = Π̃(D_1⁺)`.
pub fn in_reference_region(p: [f64; 2]) -> bool {
    let z = cayley_inverse(p);
    z[0].hypot(z[1]) <= 1.0 + 1e-12
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            let pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
                break;
            }
        }
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_b_sends_center_and_intersections() {
        let b = GeneralizedBall::boundary(0.7, 0.3);
        let x = b.center();
        let q = b.pi_b(x);
        assert!(q[0].abs() < 1e-9 && q[1].abs() < 1e-9);
        let beta = 2.0 * (0.15f64).asin();
        let p_plus = [(0.7 + beta).cos(), (0.7 + beta).sin()];
        let q = b.pi_b(p_plus);
        assert!((q[0].abs() - 1.0).abs() < 1e-12 && q[1].abs() < 1e-12);
        let back = b.pi_b_inverse(b.pi_b([0.5, 0.6]));
        assert!((back[0] - 0.5).abs() < 1e-12 && (back[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn cayley_sends_reference_points() {
        let a = cayley([0.0, 0.0]);
        let b = cayley([1.0, 0.0]);
        assert!((a[0]).abs() < 1e-15 && (a[1] + 1.0).abs() < 1e-15);
        assert!((b[0] - 1.0).abs() < 1e-15 && b[1].abs() < 1e-15);
    }

    #[test]
    fn dilation_identity_case() {
        let d = ConformalDilation::new(cayley([0.0, 0.0]), 1.0);
        let p = [0.3, -0.2];
        let q = d.forward(p);
        assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }
}
