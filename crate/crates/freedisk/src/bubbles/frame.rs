use crate::domain::{cayley, cayley_inverse, DiskMesh, Role};
use crate::energy::{triangle_energies, MapOnMesh};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

type C = Complex<f64>;

/// Local coordinates centred at a point of D̄. Interior frames are translations; boundary
/// frames are the half-plane coordinates `ζ = Π̃^{-1}(e^{-i(α+π/2)} p)`, which send the
/// boundary point `e^{iα}` to 0 and ∂D to the real axis. Radii in a boundary frame are
/// half-plane radii (about half the Euclidean ones near the centre).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Frame {
    Interior { center: [f64; 2] },
    Boundary { angle: f64 },
}

impl Frame {
    pub fn is_boundary(&self) -> bool {
        matches!(self, Frame::Boundary { .. })
    }

    /// The centre as a point of D̄.
    pub fn center(&self) -> [f64; 2] {
        match *self {
            Frame::Interior { center } => center,
            Frame::Boundary { angle } => [angle.cos(), angle.sin()],
        }
    }

    pub fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            Frame::Interior { center } => [p[0] - center[0], p[1] - center[1]],
            Frame::Boundary { angle } => {
                let q = C::new(p[0], p[1]) * C::from_polar(1.0, -(angle + FRAC_PI_2));
                cayley_inverse([q.re, q.im])
            }
        }
    }

    pub fn from_local(&self, z: [f64; 2]) -> [f64; 2] {
        match *self {
            Frame::Interior { center } => [z[0] + center[0], z[1] + center[1]],
            Frame::Boundary { angle } => {
                let w = cayley(z);
                let q = C::new(w[0], w[1]) * C::from_polar(1.0, angle + FRAC_PI_2);
                [q.re, q.im]
            }
        }
    }

    pub fn radius(&self, p: [f64; 2]) -> f64 {
        let z = self.to_local(p);
        z[0].hypot(z[1])
    }
}

/// Per-triangle energies of a map with their centroids, shared by all region queries.
#[derive(Debug, Clone)]
pub struct EnergyField {
    pub centroids: Vec<[f64; 2]>,
    pub energies: Vec<f64>,
    pub total: f64,
}

impl EnergyField {
    pub fn of(u: &MapOnMesh) -> Self {
        let energies = triangle_energies(u);
        let centroids = (0..u.mesh.n_triangles()).map(|t| u.mesh.centroid(t)).collect();
        let total = energies.iter().sum();
        EnergyField { centroids, energies, total }
    }

    /// Energy of triangles whose centroid satisfies `inside`.
    pub fn energy_where(&self, inside: impl Fn([f64; 2]) -> bool) -> f64 {
        self.centroids.iter().zip(&self.energies).filter(|(c, _)| inside(**c)).map(|(_, e)| e).sum()
    }

    /// `(local radius, energy)` of triangles with local radius at most `rho` in `frame`,
    /// sorted by radius.
    pub fn radial_profile(&self, frame: &Frame, rho: f64) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self
            .centroids
            .iter()
            .zip(&self.energies)
            .filter_map(|(c, e)| {
                let r = frame.radius(*c);
                (r <= rho).then_some((r, *e))
            })
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

/// Whether the mesh has a full circular free boundary.
pub fn has_full_boundary(mesh: &DiskMesh) -> bool {
    mesh.roles.iter().any(|r| *r == Role::FullBoundary)
}

/// Masses `ν(B_r(c))` for many centres at once, bucketing centres on a grid of cell `r`.
pub fn ball_masses(field: &EnergyField, centers: &[[f64; 2]], r: f64) -> Vec<f64> {
    use std::collections::HashMap;
    let key = |p: [f64; 2]| ((p[0] / r).floor() as i64, (p[1] / r).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, c) in centers.iter().enumerate() {
        grid.entry(key(*c)).or_default().push(i);
    }
    let mut out = vec![0.0; centers.len()];
    for (c, e) in field.centroids.iter().zip(&field.energies) {
        let (kx, ky) = key(*c);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    for &i in list {
                        let p = centers[i];
                        if (p[0] - c[0]).hypot(p[1] - c[1]) <= r {
                            out[i] += e;
                        }
                    }
                }
            }
        }
    }
    out
}
