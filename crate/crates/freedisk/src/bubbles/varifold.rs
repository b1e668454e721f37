use crate::energy::MapOnMesh;
use crate::vec::dot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DICTIONARY_SIZE: usize = 64;
const DICTIONARY_SEED: u64 = 0x7a71_f01d;

/// Jacobian-weighted atoms `(J·|T|, u(centroid), tangent projector)` of the varifold a map
/// induces on `R^N × G(2, N)`.
#[derive(Debug, Clone, Default)]
pub struct VarifoldMeasure {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub positions: Vec<f64>,
    /// Row-major `N × N` projectors onto the image tangent plane.
    pub planes: Vec<f64>,
}

impl VarifoldMeasure {
    pub fn of(u: &MapOnMesh) -> Self {
        Self::of_where(u, |_| true)
    }

    /// Atoms of the triangles whose centroid satisfies `keep`.
    pub fn of_where(u: &MapOnMesh, keep: impl Fn([f64; 2]) -> bool) -> Self {
        let n = u.dim;
        let mut m = VarifoldMeasure { dim: n, ..Default::default() };
        let mut ux = vec![0.0; n];
        let mut uy = vec![0.0; n];
        for t in 0..u.mesh.n_triangles() {
            if !keep(u.mesh.centroid(t)) {
                continue;
            }
            u.gradient_into(t, &mut ux, &mut uy);
            let (a, b, c) = (dot(&ux, &ux), dot(&uy, &uy), dot(&ux, &uy));
            let j = (a * b - c * c).max(0.0).sqrt();
            if j <= 1e-14 * (a + b).max(1e-300) {
                continue;
            }
            m.weights.push(j * u.mesh.geometry.area[t]);
            let tri = u.mesh.triangles[t];
            for k in 0..n {
                m.positions.push(tri.iter().map(|&v| u.value(v)[k]).sum::<f64>() / 3.0);
            }
            // Orthonormal basis of span(u_x, u_y).
            let na = a.sqrt();
            let e1: Vec<f64> = ux.iter().map(|x| x / na).collect();
            let d = dot(&uy, &e1);
            let mut e2: Vec<f64> = uy.iter().zip(&e1).map(|(y, e)| y - d * e).collect();
            let n2 = dot(&e2, &e2).sqrt();
            e2.iter_mut().for_each(|x| *x /= n2);
            for i in 0..n {
                for k in 0..n {
                    m.planes.push(e1[i] * e1[k] + e2[i] * e2[k]);
                }
            }
        }
        m
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn extend(&mut self, other: &VarifoldMeasure) {
        if self.dim == 0 {
            self.dim = other.dim;
        }
        assert_eq!(self.dim, other.dim);
        self.weights.extend(&other.weights);
        self.positions.extend(&other.positions);
        self.planes.extend(&other.planes);
    }

    /// `∫ h dμ` for every dictionary function.
    pub fn moments(&self, dict: &TestDictionary) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; dict.functions.len()];
        for (a, w) in self.weights.iter().enumerate() {
            let x = &self.positions[a * n..(a + 1) * n];
            let p = &self.planes[a * n * n..(a + 1) * n * n];
            for (o, f) in out.iter_mut().zip(&dict.functions) {
                *o += w * f.eval(x, p);
            }
        }
        out
    }
}

/// `p(x) · g(P)` with `|p| ≤ 1` on the box `|x_i| ≤ R` and `|g| ≤ 1` on projectors.
#[derive(Debug, Clone)]
pub struct TestFunction {
    c0: f64,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
    /// Symmetric `S` with `g(P) = tr(SP)`, or empty for `g ≡ 1`.
    plane: Vec<f64>,
}

impl TestFunction {
    pub fn eval(&self, x: &[f64], p: &[f64]) -> f64 {
        let n = x.len();
        let mut v = self.c0 + dot(&self.linear, x);
        if !self.quadratic.is_empty() {
            for i in 0..n {
                for k in 0..n {
                    v += self.quadratic[i * n + k] * x[i] * x[k];
                }
            }
        }
        if !self.plane.is_empty() {
            v *= dot(&self.plane, p);
        }
        v
    }
}

/// The fixed-seed family of test functions used by [`varifold_distance`]; the first one
/// is `h ≡ 1`, so the distance dominates the mass difference.
#[derive(Debug, Clone)]
pub struct TestDictionary {
    pub dim: usize,
    pub box_radius: f64,
    pub functions: Vec<TestFunction>,
}

impl TestDictionary {
    pub fn new(dim: usize, box_radius: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(DICTIONARY_SEED);
        let r = box_radius.max(1.0);
        let mut functions = vec![TestFunction { c0: 1.0, linear: vec![0.0; dim], quadratic: vec![], plane: vec![] }];
        while functions.len() < DICTIONARY_SIZE {
            let degree = rng.gen_range(0..3usize);
            let c0: f64 = rng.gen_range(-1.0..1.0);
            let linear: Vec<f64> = (0..dim).map(|_| if degree >= 1 { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
            let quadratic: Vec<f64> = if degree == 2 { (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect() } else { vec![] };
            let bound = c0.abs()
                + linear.iter().map(|c| c.abs()).sum::<f64>() * r
                + quadratic.iter().map(|c| c.abs()).sum::<f64>() * r * r;
            let mut plane = Vec::new();
            if rng.gen_bool(0.75) {
                let mut s = vec![0.0; dim * dim];
                for i in 0..dim {
                    for k in i..dim {
                        let v = rng.gen_range(-1.0..1.0);
                        s[i * dim + k] = v;
                        s[k * dim + i] = v;
                    }
                }
                let fro = dot(&s, &s).sqrt();
                plane = s.iter().map(|x| x / (fro * 2f64.sqrt())).collect();
            }
            let scale = 1.0 / bound;
            functions.push(TestFunction {
                c0: c0 * scale,
                linear: linear.iter().map(|c| c * scale).collect(),
                quadratic: quadratic.iter().map(|c| c * scale).collect(),
                plane,
            });
        }
        TestDictionary { dim, box_radius, functions }
    }
}

/// `max_h |∫ h dμ_A - ∫ h dμ_B|` over the dictionary: a pseudometric on varifolds.
pub fn varifold_distance(a: &VarifoldMeasure, b: &VarifoldMeasure, dict: &TestDictionary) -> f64 {
    let ma = a.moments(dict);
    let mb = b.moments(dict);
    ma.iter().zip(&mb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
