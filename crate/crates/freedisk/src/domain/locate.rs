use super::mesh::DiskMesh;

/// Uniform-grid bucket index for point location on a mesh.
#[derive(Debug, Clone)]
pub struct Locator {
    min: [f64; 2],
    cell: [f64; 2],
    n: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    pub fn new(mesh: &DiskMesh) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for t in 0..mesh.n_triangles() {
            for p in mesh.triangle_coords(t) {
                for k in 0..2 {
                    min[k] = min[k].min(p[k]);
                    max[k] = max[k].max(p[k]);
                }
            }
        }
        let side = ((mesh.n_triangles() as f64).sqrt() / 2.0).ceil().max(1.0) as usize;
        let n = [side, side];
        let cell = [((max[0] - min[0]) / side as f64).max(1e-12), ((max[1] - min[1]) / side as f64).max(1e-12)];
        let mut buckets = vec![Vec::new(); side * side];
        for t in 0..mesh.n_triangles() {
            let p = mesh.triangle_coords(t);
            let lo = [p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min), p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min)];
            let hi = [p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max), p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max)];
            let i0 = Self::idx(lo[0], min[0], cell[0], n[0]);
            let i1 = Self::idx(hi[0], min[0], cell[0], n[0]);
            let j0 = Self::idx(lo[1], min[1], cell[1], n[1]);
            let j1 = Self::idx(hi[1], min[1], cell[1], n[1]);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[i * n[1] + j].push(t);
                }
            }
        }
        Locator { min, cell, n, buckets }
    }

    fn idx(x: f64, min: f64, cell: f64, n: usize) -> usize {
        (((x - min) / cell).floor().max(0.0) as usize).min(n - 1)
    }

    /// Triangle containing `p` with barycentric coordinates; points slightly outside the
    /// mesh (polygonal boundary vs. curved domain) snap to the nearest triangle with
    /// clamped coordinates.
    pub fn locate(&self, mesh: &DiskMesh, p: [f64; 2]) -> (usize, [f64; 3]) {
        let i = Self::idx(p[0], self.min[0], self.cell[0], self.n[0]);
        let j = Self::idx(p[1], self.min[1], self.cell[1], self.n[1]);
        let mut best = (f64::NEG_INFINITY, 0usize, [1.0, 0.0, 0.0]);
        let mut radius = 0usize;
        loop {
            let (ilo, ihi) = (i.saturating_sub(radius), (i + radius).min(self.n[0] - 1));
            let (jlo, jhi) = (j.saturating_sub(radius), (j + radius).min(self.n[1] - 1));
            for a in ilo..=ihi {
                for b in jlo..=jhi {
                    if radius > 0 && a != ilo && a != ihi && b != jlo && b != jhi {
                        continue;
                    }
                    for &t in &self.buckets[a * self.n[1] + b] {
                        let bc = barycentric(&mesh.triangle_coords(t), p);
                        let m = bc[0].min(bc[1]).min(bc[2]);
                        if m > best.0 {
                            best = (m, t, bc);
                        }
                    }
                }
            }
            if best.0 >= -1e-12 || radius > self.n[0].max(self.n[1]) {
                break;
            }
            if best.0 > f64::NEG_INFINITY && radius >= 2 {
                break;
            }
            radius += 1;
        }
        let (_, t, mut bc) = best;
        if bc.iter().any(|c| *c < 0.0) {
            for c in bc.iter_mut() {
                *c = c.max(0.0);
            }
            let s: f64 = bc.iter().sum();
            for c in bc.iter_mut() {
                *c /= s;
            }
        }
        (t, bc)
    }
}

pub fn barycentric(p: &[[f64; 2]; 3], q: [f64; 2]) -> [f64; 3] {
    let d = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l1 = ((q[0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (q[1] - p[0][1])) / d;
    let l2 = ((p[1][0] - p[0][0]) * (q[1] - p[0][1]) - (q[0] - p[0][0]) * (p[1][1] - p[0][1])) / d;
    [1.0 - l1 - l2, l1, l2]
}
