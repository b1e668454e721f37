//! Target manifolds N ⊂ R^N, constraint submanifolds Γ ⊂ N and Fermi charts.
//!
//! Every manifold is either flat (values are lifted to R^n, so projection is the
//! identity) or a level set `{F = 0}`. Sphere and ellipsoid have closed-form or
//! one-dimensional projections; general level sets go through a damped Newton solve
//! on the Lagrange system.

mod fermi;
mod gamma;

pub use fermi::{AlphaReport, FermiChart};
pub use gamma::{ConstraintSubmanifold, FourierCurve, GammaKind};

use crate::error::{Error, Result};
use crate::vec::{dist, dot, gram_schmidt, norm};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::fmt;
use std::sync::Arc;

/// A smooth map F: R^N -> R^c whose zero set is the manifold.
pub trait LevelSet: Send + Sync + fmt::Debug {
    fn ambient_dim(&self) -> usize;
    fn codim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    /// c x N.
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
    /// Hessian of component `a`, N x N.
    fn hessian(&self, a: usize, x: &[f64]) -> DMatrix<f64>;
    fn tubular_radius(&self) -> f64;
    /// A point on the zero set; used to seed random sampling.
    fn sample(&self, rng: &mut dyn rand::RngCore) -> Vec<f64>;
    fn name(&self) -> String;
}

/// Torus of revolution around the z axis, `(sqrt(x²+y²) - R)² + z² = r²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusOfRevolution {
    pub major: f64,
    pub minor: f64,
}

impl LevelSet for TorusOfRevolution {
    fn ambient_dim(&self) -> usize {
        3
    }
    fn codim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let rho = x[0].hypot(x[1]);
        vec![0.5 * ((rho - self.major).powi(2) + x[2] * x[2] - self.minor * self.minor)]
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let rho = x[0].hypot(x[1]).max(1e-300);
        let s = 1.0 - self.major / rho;
        DMatrix::from_row_slice(1, 3, &[s * x[0], s * x[1], x[2]])
    }
    fn hessian(&self, _a: usize, x: &[f64]) -> DMatrix<f64> {
        let rho = x[0].hypot(x[1]).max(1e-300);
        let s = 1.0 - self.major / rho;
        let k = self.major / rho.powi(3);
        DMatrix::from_row_slice(
            3,
            3,
            &[
                s + k * x[0] * x[0],
                k * x[0] * x[1],
                0.0,
                k * x[0] * x[1],
                s + k * x[1] * x[1],
                0.0,
                0.0,
                0.0,
                1.0,
            ],
        )
    }
    fn tubular_radius(&self) -> f64 {
        self.minor.min(self.major - self.minor)
    }
    fn sample(&self, rng: &mut dyn rand::RngCore) -> Vec<f64> {
        let u: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        let v: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        let rho = self.major + self.minor * v.cos();
        vec![rho * u.cos(), rho * u.sin(), self.minor * v.sin()]
    }
    fn name(&self) -> String {
        format!("torus_of_revolution(R={}, r={})", self.major, self.minor)
    }
}

#[derive(Debug, Clone)]
pub enum ManifoldKind {
    /// R^n / lattice; values are stored lifted, so the flat metric is all that matters.
    FlatTorus { n: usize, lattice: Vec<f64> },
    RoundSphere { radius: f64 },
    Ellipsoid { axes: Vec<f64> },
    LevelSet(Arc<dyn LevelSet>),
}

#[derive(Debug, Clone)]
pub struct EmbeddedManifold {
    pub ambient_dim: usize,
    pub kind: ManifoldKind,
    pub tubular_radius: f64,
}

impl EmbeddedManifold {
    pub fn flat_torus(n: usize) -> Self {
        Self::flat_torus_with_lattice(vec![1.0; n])
    }

    pub fn flat_torus_with_lattice(lattice: Vec<f64>) -> Self {
        let n = lattice.len();
        EmbeddedManifold {
            ambient_dim: n,
            kind: ManifoldKind::FlatTorus { n, lattice },
            tubular_radius: f64::INFINITY,
        }
    }

    pub fn sphere(radius: f64) -> Self {
        EmbeddedManifold {
            ambient_dim: 3,
            kind: ManifoldKind::RoundSphere { radius },
            tubular_radius: radius,
        }
    }

    pub fn ellipsoid(axes: Vec<f64>) -> Self {
        let amin = axes.iter().cloned().fold(f64::INFINITY, f64::min);
        let amax = axes.iter().cloned().fold(0.0, f64::max);
        EmbeddedManifold {
            ambient_dim: axes.len(),
            tubular_radius: amin * amin / amax,
            kind: ManifoldKind::Ellipsoid { axes },
        }
    }

    pub fn level_set(f: Arc<dyn LevelSet>) -> Self {
        EmbeddedManifold {
            ambient_dim: f.ambient_dim(),
            tubular_radius: f.tubular_radius(),
            kind: ManifoldKind::LevelSet(f),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, ManifoldKind::FlatTorus { .. })
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ManifoldKind::FlatTorus { n, .. } => *n,
            ManifoldKind::RoundSphere { .. } => 2,
            ManifoldKind::Ellipsoid { axes } => axes.len() - 1,
            ManifoldKind::LevelSet(f) => f.ambient_dim() - f.codim(),
        }
    }

    /// Smallest principal curvature radius (infinite for flat targets).
    pub fn min_curvature_radius(&self) -> f64 {
        self.tubular_radius
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ManifoldKind::FlatTorus { n, .. } => format!("flat_torus({n})"),
            ManifoldKind::RoundSphere { radius } => format!("sphere({radius})"),
            ManifoldKind::Ellipsoid { axes } => format!("ellipsoid({axes:?})"),
            ManifoldKind::LevelSet(f) => f.name(),
        }
    }

    /// Closest point on N.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.ambient_dim];
        self.project_into(p, &mut out)?;
        Ok(out)
    }

    pub fn project_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.kind {
            ManifoldKind::FlatTorus { .. } => {
                out.copy_from_slice(p);
                Ok(())
            }
            ManifoldKind::RoundSphere { radius } => {
                // The nearest point is unique everywhere except at the centre.
                let n = norm(p);
                if n < 1e-12 * radius {
                    return Err(Error::OutsideTubularNeighborhood {
                        distance: (n - radius).abs(),
                        radius: *radius,
                    });
                }
                for (o, x) in out.iter_mut().zip(p) {
                    *o = x * radius / n;
                }
                Ok(())
            }
            ManifoldKind::Ellipsoid { axes } => {
                let q = project_ellipsoid(axes, p)?;
                let d = dist(&q, p);
                if d >= self.tubular_radius {
                    return Err(Error::OutsideTubularNeighborhood {
                        distance: d,
                        radius: self.tubular_radius,
                    });
                }
                out.copy_from_slice(&q);
                Ok(())
            }
            ManifoldKind::LevelSet(f) => {
                let q = project_level_set(f.as_ref(), p, self.tubular_radius)?;
                out.copy_from_slice(&q);
                Ok(())
            }
        }
    }

    /// Norm of the defining equations at `x` (distance-like for the sphere).
    pub fn residual(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ManifoldKind::FlatTorus { .. } => 0.0,
            ManifoldKind::RoundSphere { radius } => (norm(x) - radius).abs(),
            ManifoldKind::Ellipsoid { axes } => {
                let s: f64 = x.iter().zip(axes).map(|(xi, a)| (xi / a).powi(2)).sum();
                (s - 1.0).abs()
            }
            ManifoldKind::LevelSet(f) => norm(&f.eval(x)),
        }
    }

    /// Jacobian and Hessians of the defining map at `x`, or `None` when flat.
    fn defining_derivatives(&self, x: &[f64]) -> Option<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let n = self.ambient_dim;
        match &self.kind {
            ManifoldKind::FlatTorus { .. } => None,
            ManifoldKind::RoundSphere { .. } => Some((
                DMatrix::from_row_slice(1, n, x),
                vec![DMatrix::identity(n, n)],
            )),
            ManifoldKind::Ellipsoid { axes } => {
                let j: Vec<f64> = x.iter().zip(axes).map(|(xi, a)| xi / (a * a)).collect();
                let h = DMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    axes.iter().map(|a| 1.0 / (a * a)),
                ));
                Some((DMatrix::from_row_slice(1, n, &j), vec![h]))
            }
            ManifoldKind::LevelSet(f) => {
                let hs = (0..f.codim()).map(|a| f.hessian(a, x)).collect();
                Some((f.jacobian(x), hs))
            }
        }
    }

    /// Orthonormal basis of the normal space at `x`.
    pub fn normal_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.kind {
            ManifoldKind::FlatTorus { .. } => Vec::new(),
            ManifoldKind::RoundSphere { .. } => {
                let n = norm(x);
                vec![x.iter().map(|v| v / n).collect()]
            }
            _ => {
                let (j, _) = self.defining_derivatives(x).expect("curved");
                let rows: Vec<Vec<f64>> = (0..j.nrows())
                    .map(|a| j.row(a).iter().cloned().collect())
                    .collect();
                gram_schmidt(&rows)
            }
        }
    }

    /// Tangential part of `v` at `x`, written into `out`.
    pub fn tangent_project_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
        match &self.kind {
            ManifoldKind::FlatTorus { .. } => {}
            ManifoldKind::RoundSphere { .. } => {
                let c = dot(v, x) / dot(x, x);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o -= c * xi;
                }
            }
            _ => {
                for nb in self.normal_basis(x) {
                    let c = dot(v, &nb);
                    for (o, ni) in out.iter_mut().zip(&nb) {
                        *o -= c * ni;
                    }
                }
            }
        }
    }

    pub fn tangent_project(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.tangent_project_into(x, v, &mut out);
        out
    }

    /// `I - J^T (J J^T)^{-1} J` as a dense matrix.
    pub fn tangent_projector(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.ambient_dim;
        let mut p = DMatrix::identity(n, n);
        if let Some((j, _)) = self.defining_derivatives(x) {
            let jjt = &j * j.transpose();
            let inv = jjt.try_inverse().expect("regular level set");
            p -= j.transpose() * inv * &j;
        }
        p
    }

    /// Second fundamental form A(v, w) = -J^T (J J^T)^{-1} (v^T ∇²F_a w)_a.
    pub fn second_fundamental_form(&self, x: &[f64], v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let scale = 1.0 + norm(v).max(norm(w));
        for u in [v, w] {
            let t = self.tangent_project(x, u);
            let normal = dist(&t, u);
            if normal > 1e-8 * scale {
                return Err(Error::NotTangent { normal });
            }
        }
        Ok(self.second_fundamental_form_unchecked(x, v, w))
    }

    pub fn second_fundamental_form_unchecked(&self, x: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.ambient_dim;
        match &self.kind {
            ManifoldKind::FlatTorus { .. } => vec![0.0; n],
            ManifoldKind::RoundSphere { radius } => {
                let c = -dot(v, w) / (radius * radius);
                x.iter().map(|xi| c * xi).collect()
            }
            _ => {
                let (j, hs) = self.defining_derivatives(x).expect("curved");
                let vv = DVector::from_column_slice(v);
                let ww = DVector::from_column_slice(w);
                let b = DVector::from_iterator(hs.len(), hs.iter().map(|h| vv.dot(&(h * &ww))));
                let jjt = &j * j.transpose();
                let lam = jjt.try_inverse().expect("regular level set") * b;
                let a = -(j.transpose() * lam);
                a.iter().cloned().collect()
            }
        }
    }

    /// A random point of N (uniform in the parameter domain, not in area).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            ManifoldKind::FlatTorus { n, lattice } => {
                (0..*n).map(|i| rng.gen::<f64>() * lattice[i]).collect()
            }
            ManifoldKind::RoundSphere { radius } => {
                let v = random_unit(rng, 3);
                v.iter().map(|x| x * radius).collect()
            }
            ManifoldKind::Ellipsoid { axes } => {
                let v = random_unit(rng, axes.len());
                let s: f64 = v.iter().zip(axes).map(|(x, a)| (x / a).powi(2)).sum();
                v.iter().map(|x| x / s.sqrt()).collect()
            }
            ManifoldKind::LevelSet(f) => {
                let mut core = rand_chacha::ChaCha8Rng::seed_from_u64(rng.gen());
                f.sample(&mut core)
            }
        }
    }

    /// A random unit tangent vector at `x`.
    pub fn sample_tangent<R: Rng + ?Sized>(&self, rng: &mut R, x: &[f64]) -> Vec<f64> {
        loop {
            let v = random_unit(rng, self.ambient_dim);
            let t = self.tangent_project(x, &v);
            let n = norm(&t);
            if n > 1e-3 {
                return t.iter().map(|c| c / n).collect();
            }
        }
    }
}

use rand::SeedableRng;

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let l = norm(&v);
        if l > 1e-3 && l <= 1.0 {
            return v.iter().map(|x| x / l).collect();
        }
    }
}

/// Closest point on `{Σ x_i²/a_i² = 1}` via the secular equation
/// `Σ (a_i p_i / (a_i² + t))² = 1` on `t > -min a_i²`.
pub(crate) fn project_ellipsoid(axes: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let g = |t: f64| -> f64 {
        p.iter()
            .zip(axes)
            .map(|(pi, a)| (a * pi / (a * a + t)).powi(2))
            .sum::<f64>()
            - 1.0
    };
    let amin2 = axes.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
    let pn = norm(p);
    if pn < 1e-14 {
        return Err(Error::OutsideTubularNeighborhood { distance: f64::INFINITY, radius: 0.0 });
    }
    let mut lo = -amin2 * (1.0 - 1e-15);
    if g(lo) < 0.0 {
        return Err(Error::OutsideTubularNeighborhood { distance: f64::INFINITY, radius: 0.0 });
    }
    let amax = axes.iter().cloned().fold(0.0, f64::max);
    let mut hi = amax * pn + amax * amax;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut t = if g(0.0) > 0.0 { lo = 0.0; 0.0 } else { hi = 0.0; 0.0 };
    if g(0.0) == 0.0 {
        return Ok(p.to_vec());
    }
    for _ in 0..200 {
        let gt = g(t);
        if gt.abs() < 1e-15 {
            break;
        }
        if gt > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let dg: f64 = p
            .iter()
            .zip(axes)
            .map(|(pi, a)| -2.0 * (a * pi).powi(2) / (a * a + t).powi(3))
            .sum();
        let mut tn = t - gt / dg;
        if !(tn > lo && tn < hi) {
            tn = 0.5 * (lo + hi);
        }
        if (tn - t).abs() <= 1e-16 * (1.0 + t.abs()) {
            t = tn;
            break;
        }
        t = tn;
    }
    Ok(p.iter().zip(axes).map(|(pi, a)| a * a * pi / (a * a + t)).collect())
}

/// Damped Newton on the Lagrange system `q - p + J(q)^T λ = 0, F(q) = 0`.
fn project_level_set(f: &dyn LevelSet, p: &[f64], tubular: f64) -> Result<Vec<f64>> {
    let n = f.ambient_dim();
    let c = f.codim();
    let fail = |q: &[f64]| Error::OutsideTubularNeighborhood { distance: dist(q, p), radius: tubular };
    // Gauss-Newton onto the zero set gives a feasible start.
    let mut q = p.to_vec();
    for _ in 0..50 {
        let fv = DVector::from_vec(f.eval(&q));
        if fv.norm() < 1e-15 {
            break;
        }
        let j = f.jacobian(&q);
        let jjt = &j * j.transpose();
        let Some(inv) = jjt.try_inverse() else { return Err(fail(&q)) };
        let dq = j.transpose() * (inv * fv);
        for i in 0..n {
            q[i] -= dq[i];
        }
    }
    let resid = |q: &[f64], lam: &DVector<f64>| -> DVector<f64> {
        let j = f.jacobian(q);
        let jt_l = j.transpose() * lam;
        let mut r = DVector::zeros(n + c);
        for i in 0..n {
            r[i] = q[i] - p[i] + jt_l[i];
        }
        let fv = f.eval(q);
        for a in 0..c {
            r[n + a] = fv[a];
        }
        r
    };
    let j = f.jacobian(&q);
    let jjt = &j * j.transpose();
    let Some(inv) = jjt.try_inverse() else { return Err(fail(&q)) };
    let d = DVector::from_iterator(n, (0..n).map(|i| p[i] - q[i]));
    let mut lam = -(inv * (&j * d));
    let mut r = resid(&q, &lam);
    let mut converged = r.norm() < 1e-13;
    for _ in 0..50 {
        if converged {
            break;
        }
        let j = f.jacobian(&q);
        let mut k = DMatrix::zeros(n + c, n + c);
        for i in 0..n {
            k[(i, i)] = 1.0;
        }
        for a in 0..c {
            let h = f.hessian(a, &q);
            for i in 0..n {
                for l in 0..n {
                    k[(i, l)] += lam[a] * h[(i, l)];
                }
                k[(i, n + a)] = j[(a, i)];
                k[(n + a, i)] = j[(a, i)];
            }
        }
        let Some(step) = k.lu().solve(&(-&r)) else { return Err(fail(&q)) };
        let r0 = r.norm();
        let mut t = 1.0;
        loop {
            let qn: Vec<f64> = (0..n).map(|i| q[i] + t * step[i]).collect();
            let ln = DVector::from_iterator(c, (0..c).map(|a| lam[a] + t * step[n + a]));
            let rn = resid(&qn, &ln);
            if rn.norm() <= (1.0 - 1e-4 * t) * r0 || t < 1e-6 {
                q = qn;
                lam = ln;
                r = rn;
                break;
            }
            t *= 0.5;
        }
        converged = r.norm() < 1e-13 * (1.0 + norm(p));
    }
    if !converged && r.norm() > 1e-9 {
        return Err(fail(&q));
    }
    if dist(&q, p) >= tubular {
        return Err(fail(&q));
    }
    Ok(q)
}
