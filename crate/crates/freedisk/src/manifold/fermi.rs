use super::gamma::FourierCurve;
use crate::vec::{complete_basis, dist, dot, gram_schmidt, norm};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub(crate) enum ChartKind {
    Affine { basis: Vec<Vec<f64>> },
    Latitude { radius: f64, lat0: f64, lon0: f64 },
    Curve { curve: Arc<FourierCurve>, s0: f64, normals: Vec<Vec<f64>> },
}

/// Local coordinates `y ∈ R^n` around a point of Γ in which Γ is `{y^{k+1} = … = y^n = 0}`
/// and the first `k` coordinates run along Γ.
#[derive(Debug, Clone)]
pub struct FermiChart {
    pub center: Vec<f64>,
    pub radius: f64,
    pub dim: usize,
    pub gamma_dim: usize,
    pub(crate) kind: ChartKind,
}

/// Measured closeness of the manifold metric, the flat chart metric and the ambient metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaReport {
    pub vector_alpha: f64,
    pub distance_alpha: f64,
    pub alpha: f64,
}

fn closeness(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let r = a / b;
    (r - 1.0).abs().max((1.0 / r - 1.0).abs())
}

impl FermiChart {
    pub fn forward(&self, y: &[f64]) -> Vec<f64> {
        match &self.kind {
            ChartKind::Affine { basis } => {
                let mut p = self.center.clone();
                for (yi, e) in y.iter().zip(basis) {
                    for (pj, ej) in p.iter_mut().zip(e) {
                        *pj += yi * ej;
                    }
                }
                p
            }
            ChartKind::Latitude { radius, lat0, lon0 } => {
                let lon = lon0 + y[0] / (radius * lat0.cos());
                let lat = lat0 + y[1] / radius;
                vec![radius * lat.cos() * lon.cos(), radius * lat.cos() * lon.sin(), radius * lat.sin()]
            }
            ChartKind::Curve { curve, s0, normals, .. } => {
                let phi = curve.phi_of_arclength(s0 + y[0]);
                let mut p = curve.eval(phi);
                let frame = transported_normals(curve, phi, normals);
                for (yi, n) in y[1..].iter().zip(&frame) {
                    for (pj, nj) in p.iter_mut().zip(n) {
                        *pj += yi * nj;
                    }
                }
                p
            }
        }
    }

    pub fn inverse(&self, p: &[f64]) -> Vec<f64> {
        match &self.kind {
            ChartKind::Affine { basis } => {
                let d: Vec<f64> = p.iter().zip(&self.center).map(|(a, b)| a - b).collect();
                basis.iter().map(|e| dot(&d, e)).collect()
            }
            ChartKind::Latitude { radius, lat0, lon0 } => {
                let lon = p[1].atan2(p[0]);
                let lat = (p[2] / norm(p)).clamp(-1.0, 1.0).asin();
                let dlon = (lon - lon0 + PI).rem_euclid(TAU) - PI;
                vec![dlon * radius * lat0.cos(), (lat - lat0) * radius]
            }
            ChartKind::Curve { curve, s0, normals, .. } => {
                let phi = curve.closest_phi(p);
                let l = curve.length();
                let s = (curve.arclength(phi) - s0 + 0.5 * l).rem_euclid(l) - 0.5 * l;
                let c = curve.eval(phi);
                let d: Vec<f64> = p.iter().zip(&c).map(|(a, b)| a - b).collect();
                let frame = transported_normals(curve, phi, normals);
                let mut y = vec![s];
                y.extend(frame.iter().map(|n| dot(&d, n)));
                y
            }
        }
    }

    /// Columns are ∂F/∂y^i, by central differences.
    pub fn differential(&self, y: &[f64]) -> DMatrix<f64> {
        let h = 1e-6;
        let n = self.center.len();
        let mut j = DMatrix::zeros(n, self.dim);
        for i in 0..self.dim {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[i] += h;
            ym[i] -= h;
            let fp = self.forward(&yp);
            let fm = self.forward(&ym);
            for r in 0..n {
                j[(r, i)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        j
    }

    /// Metric of N in chart coordinates.
    pub fn metric(&self, y: &[f64]) -> DMatrix<f64> {
        let j = self.differential(y);
        j.transpose() * j
    }

    /// Samples points of the chart ball and compares the three metrics on vectors and the
    /// flat chart distance against the ambient distance.
    pub fn measure_alpha(&self, samples: usize, seed: u64) -> AlphaReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            loop {
                let y: Vec<f64> = (0..self.dim).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * self.radius).collect();
                if norm(&y) <= self.radius {
                    return y;
                }
            }
        };
        let mut va: f64 = 0.0;
        let mut da: f64 = 0.0;
        for _ in 0..samples {
            let y = ball(&mut rng);
            let g = self.metric(&y);
            let j = self.differential(&y);
            let xi: Vec<f64> = (0..self.dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let xv = nalgebra::DVector::from_column_slice(&xi);
            let n1 = (xv.dot(&(&g * &xv))).sqrt();
            let n2 = norm(&xi);
            let n3 = (&j * &xv).norm();
            va = va.max(closeness(n1, n2)).max(closeness(n1, n3)).max(closeness(n2, n3));
            let y2 = ball(&mut rng);
            if dist(&y, &y2) > 1e-9 * self.radius {
                da = da.max(closeness(dist(&y, &y2), dist(&self.forward(&y), &self.forward(&y2))));
            }
        }
        AlphaReport { vector_alpha: va, distance_alpha: da, alpha: va.max(da) }
    }

    /// True when `p` maps inside the chart ball.
    pub fn contains(&self, p: &[f64]) -> bool {
        norm(&self.inverse(p)) <= self.radius
    }
}

fn transported_normals(curve: &FourierCurve, phi: f64, normals0: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = curve.derivative(phi);
    let mut fam = gram_schmidt(&[t]);
    fam.extend(normals0.iter().cloned());
    let b = gram_schmidt(&fam);
    if b.len() == curve.dim() {
        b[1..].to_vec()
    } else {
        complete_basis(&b, curve.dim())[1..].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold};

    #[test]
    fn equator_chart_metric_is_identity_at_center() {
        let g = ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0));
        let c = g.fermi_chart(&[1.0, 0.0, 0.0], 0.1).unwrap();
        let m = c.metric(&[0.0, 0.0]);
        assert!((m - nalgebra::DMatrix::<f64>::identity(2, 2)).norm() < 1e-9);
        let y = [0.03, -0.02];
        let back = c.inverse(&c.forward(&y));
        assert!((back[0] - y[0]).abs() < 1e-12 && (back[1] - y[1]).abs() < 1e-12);
    }

    #[test]
    fn chart_radius_is_bounded() {
        let g = ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0));
        assert!(g.fermi_chart(&[1.0, 0.0, 0.0], 0.5).is_err());
    }
}
