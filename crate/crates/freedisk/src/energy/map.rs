use crate::domain::{DiskMesh, Locator, Role};
use crate::error::{Error, Result};
use crate::manifold::ConstraintSubmanifold;
use crate::vec::dist;
use std::sync::Arc;

/// Piecewise-linear map from a mesh into N, stored as a flat array of ambient points.
#[derive(Debug, Clone)]
pub struct MapOnMesh {
    pub mesh: Arc<DiskMesh>,
    pub target: Arc<ConstraintSubmanifold>,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl MapOnMesh {
    pub fn new(mesh: Arc<DiskMesh>, target: Arc<ConstraintSubmanifold>, values: Vec<f64>) -> Self {
        let dim = target.ambient_dim();
        assert_eq!(values.len(), dim * mesh.n_vertices(), "value array does not match the mesh");
        MapOnMesh { mesh, target, dim, values }
    }

    /// Samples `f` at every vertex without projecting.
    pub fn from_fn(mesh: Arc<DiskMesh>, target: Arc<ConstraintSubmanifold>, f: impl Fn([f64; 2]) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(mesh.n_vertices() * target.ambient_dim());
        for p in &mesh.vertices {
            values.extend(f(*p));
        }
        Self::new(mesh, target, values)
    }

    pub fn constant(mesh: Arc<DiskMesh>, target: Arc<ConstraintSubmanifold>, c: &[f64]) -> Self {
        let values = c.iter().cloned().cycle().take(c.len() * mesh.n_vertices()).collect();
        Self::new(mesh, target, values)
    }

    #[inline]
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn value_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn n_vertices(&self) -> usize {
        self.mesh.n_vertices()
    }

    /// Whether vertex `i` is constrained to Γ (free chord, full boundary or corner).
    pub fn on_gamma(&self, i: usize) -> bool {
        matches!(self.mesh.roles[i], Role::FreeChord | Role::FullBoundary | Role::Corner)
    }

    /// `(u_x, u_y)` on triangle `t`, written into the two buffers.
    #[inline]
    pub fn gradient_into(&self, t: usize, ux: &mut [f64], uy: &mut [f64]) {
        let tri = self.mesh.triangles[t];
        let g = &self.mesh.geometry.grad[t];
        for k in 0..self.dim {
            ux[k] = 0.0;
            uy[k] = 0.0;
        }
        for (v, gv) in tri.iter().zip(g) {
            let val = self.value(*v);
            for k in 0..self.dim {
                ux[k] += val[k] * gv[0];
                uy[k] += val[k] * gv[1];
            }
        }
    }

    pub fn gradient(&self, t: usize) -> (Vec<f64>, Vec<f64>) {
        let mut ux = vec![0.0; self.dim];
        let mut uy = vec![0.0; self.dim];
        self.gradient_into(t, &mut ux, &mut uy);
        (ux, uy)
    }

    /// Values on the Dirichlet arc (arc and corner vertices).
    pub fn dirichlet_trace(&self) -> Vec<(usize, Vec<f64>)> {
        (0..self.n_vertices())
            .filter(|&i| matches!(self.mesh.roles[i], Role::DirichletArc | Role::Corner))
            .map(|i| (i, self.value(i).to_vec()))
            .collect()
    }

    /// Largest distance of a vertex value from N, and of a Γ-vertex from Γ.
    pub fn constraint_violation(&self) -> (f64, f64) {
        let mut n_err: f64 = 0.0;
        let mut g_err: f64 = 0.0;
        for i in 0..self.n_vertices() {
            let x = self.value(i);
            n_err = n_err.max(self.target.parent.residual(x));
            if self.on_gamma(i) {
                g_err = g_err.max(self.target.distance(x));
            }
        }
        (n_err, g_err)
    }

    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let (n, g) = self.constraint_violation();
        if n > tol {
            return Err(Error::OutsideTubularNeighborhood { distance: n, radius: tol });
        }
        if g > tol {
            return Err(Error::TraceOffGamma(g));
        }
        Ok(())
    }

    /// Linear interpolation at `p` (not projected).
    pub fn eval(&self, locator: &Locator, p: [f64; 2]) -> Vec<f64> {
        let (t, bc) = locator.locate(&self.mesh, p);
        let tri = self.mesh.triangles[t];
        let mut out = vec![0.0; self.dim];
        for (v, b) in tri.iter().zip(bc) {
            for (o, x) in out.iter_mut().zip(self.value(*v)) {
                *o += b * x;
            }
        }
        out
    }

    /// `u ∘ φ` on `mesh`, sampled by barycentric interpolation and projected back to N
    /// (and to Γ on Γ-constrained vertices of the new mesh).
    pub fn pullback(&self, mesh: Arc<DiskMesh>, phi: impl Fn([f64; 2]) -> [f64; 2]) -> MapOnMesh {
        self.resample(mesh, phi, true)
    }

    /// [`pullback`](Self::pullback) with the snap to Γ optional.
    pub fn resample(&self, mesh: Arc<DiskMesh>, phi: impl Fn([f64; 2]) -> [f64; 2], snap: bool) -> MapOnMesh {
        let locator = Locator::new(&self.mesh);
        let mut values = Vec::with_capacity(mesh.n_vertices() * self.dim);
        for (p, role) in mesh.vertices.iter().zip(&mesh.roles) {
            let raw = self.eval(&locator, phi(*p));
            let mut q = self.target.parent.project(&raw).unwrap_or(raw);
            if snap && matches!(role, Role::FreeChord | Role::FullBoundary | Role::Corner) && self.target.distance(&q) < 0.5 {
                q = self.target.project(&q);
            }
            values.extend(q);
        }
        MapOnMesh::new(mesh, self.target.clone(), values)
    }

    /// Lumped-mass L² distance.
    pub fn l2_distance(&self, other: &MapOnMesh) -> f64 {
        let m = &self.mesh.geometry.mass;
        (0..self.n_vertices()).map(|i| m[i] * crate::vec::dist2(self.value(i), other.value(i))).sum::<f64>().sqrt()
    }

    pub fn c0_distance(&self, other: &MapOnMesh) -> f64 {
        (0..self.n_vertices()).map(|i| dist(self.value(i), other.value(i))).fold(0.0, f64::max)
    }

    /// `(∫|∇(u - v)|²)^{1/2}`.
    pub fn h1_seminorm_distance(&self, other: &MapOnMesh) -> f64 {
        let diff = self.difference(other);
        (2.0 * super::dirichlet_energy(&diff)).sqrt()
    }

    /// `u - v` as a map into the same ambient space (not on N).
    pub fn difference(&self, other: &MapOnMesh) -> MapOnMesh {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        MapOnMesh { mesh: self.mesh.clone(), target: self.target.clone(), dim: self.dim, values }
    }

    /// Values block `map v=<n> dim=<d> format=1` followed by one line per vertex.
    pub fn values_to_text(&self) -> String {
        let mut s = format!("map v={} dim={} format=1\n", self.n_vertices(), self.dim);
        for i in 0..self.n_vertices() {
            let line: Vec<String> = self.value(i).iter().map(|x| format!("{x:.17e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Mesh block followed by the values block.
    pub fn to_text(&self) -> String {
        self.mesh.to_text() + &self.values_to_text()
    }

    /// Parses a values block for `mesh`.
    pub fn values_from_text(text: &str, mesh: Arc<DiskMesh>, target: Arc<ConstraintSubmanifold>) -> Result<MapOnMesh> {
        let bad = |m: &str| Error::Parse(format!("map: {m}"));
        let mut lines = text.lines().skip_while(|l| !l.starts_with("map "));
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let field = |k: &str| {
            header.split_whitespace().find_map(|w| w.strip_prefix(k)).and_then(|v| v.parse::<usize>().ok()).ok_or_else(|| bad(k))
        };
        let (n, d) = (field("v=")?, field("dim=")?);
        if n != mesh.n_vertices() || d != target.ambient_dim() {
            return Err(bad("size does not match mesh or target"));
        }
        let mut values = Vec::with_capacity(n * d);
        for _ in 0..n {
            let l = lines.next().ok_or_else(|| bad("truncated"))?;
            let row: Vec<f64> = l.split_whitespace().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad(l))?;
            if row.len() != d {
                return Err(bad(l));
            }
            values.extend(row);
        }
        Ok(MapOnMesh::new(mesh, target, values))
    }

    /// Parses the output of [`MapOnMesh::to_text`].
    pub fn from_text(text: &str, target: Arc<ConstraintSubmanifold>) -> Result<MapOnMesh> {
        let split = text.find("\nmap ").ok_or_else(|| Error::Parse("map: missing values block".into()))?;
        let mesh = Arc::new(DiskMesh::from_text(&text[..split + 1])?);
        Self::values_from_text(&text[split + 1..], mesh, target)
    }

    /// Bitwise equality of values.
    pub fn bit_equal(&self, other: &MapOnMesh) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
