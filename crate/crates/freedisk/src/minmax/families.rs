use super::sweepout::{EndpointMode, Sweepout};
use crate::domain::{build_mesh, DiskMesh, MeshDomain};
use crate::energy::MapOnMesh;
use crate::error::Result;
use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold, FourierCurve};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Named initial sweepout generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Every slice the same point of Γ.
    Constant,
    /// Flat torus, Γ a coordinate subtorus; an interior normal bump of amplitude `amp sin πt`.
    FlatBump { amp: f64 },
    /// As `FlatBump` with two separated energy peaks in t.
    TwoPeak { amp: f64 },
    /// Unit sphere, Γ the equator; a lune folded over the equator that opens to the
    /// upper hemisphere at t = ½.
    SphereFold,
    /// Flat R³, Γ the unit circle in the xy-plane; both ends the flat unit disk, with an
    /// interior bulge of height `amp sin πt`.
    FixedDiskBulge { amp: f64 },
}

fn times(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn bump(p: [f64; 2], c: [f64; 2], r: f64) -> f64 {
    let s = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (r * r);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - s).powi(3)
    }
}

impl Family {
    /// Target and mesh domain the family lives on.
    pub fn target(&self) -> ConstraintSubmanifold {
        match self {
            Family::Constant | Family::FlatBump { .. } | Family::TwoPeak { .. } => {
                ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 2)
            }
            Family::SphereFold => ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)),
            Family::FixedDiskBulge { .. } => ConstraintSubmanifold::curve(
                EmbeddedManifold::flat_torus_with_lattice(vec![64.0; 3]),
                FourierCurve::circle(3, 1.0),
            ),
        }
    }

    pub fn mesh(&self, h: f64) -> Result<DiskMesh> {
        build_mesh(MeshDomain::Disk, h)
    }

    /// Samples the family at `n ≥ 2` equally spaced times.
    pub fn build(&self, h: f64, n: usize) -> Result<Sweepout> {
        let mesh = Arc::new(self.mesh(h)?);
        let target = Arc::new(self.target());
        self.build_on(mesh, target, n)
    }

    pub fn build_on(&self, mesh: Arc<DiskMesh>, target: Arc<ConstraintSubmanifold>, n: usize) -> Result<Sweepout> {
        let n = n.max(2);
        let ts = times(n);
        let slice = |f: &dyn Fn([f64; 2]) -> Vec<f64>| MapOnMesh::from_fn(mesh.clone(), target.clone(), f);
        let (slices, mode): (Vec<MapOnMesh>, EndpointMode) = match *self {
            Family::Constant => (ts.iter().map(|_| slice(&|_| vec![0.0; 3])).collect(), EndpointMode::FreeHomotopy),
            Family::FlatBump { amp } => (
                ts.iter()
                    .map(|&t| {
                        let a = amp * (PI * t).sin();
                        slice(&|p| vec![0.0, 0.0, a * bump(p, [0.0, 0.0], 0.8)])
                    })
                    .collect(),
                EndpointMode::FreeHomotopy,
            ),
            Family::TwoPeak { amp } => (
                ts.iter()
                    .map(|&t| {
                        let a1 = amp * (2.0 * PI * t).sin().max(0.0).powi(2);
                        let a2 = amp * (-(2.0 * PI * t).sin()).max(0.0).powi(2);
                        slice(&|p| vec![0.0, 0.0, a1 * bump(p, [-0.4, 0.0], 0.4) + a2 * bump(p, [0.4, 0.0], 0.4)])
                    })
                    .collect(),
                EndpointMode::FreeHomotopy,
            ),
            Family::SphereFold => (ts.iter().map(|&t| slice(&|p| sphere_fold(p, t))).collect(), EndpointMode::FreeHomotopy),
            Family::FixedDiskBulge { amp } => {
                let disk = |p: [f64; 2], a: f64| {
                    let r2 = (p[0] * p[0] + p[1] * p[1]).min(1.0);
                    vec![p[0], p[1], a * (1.0 - r2)]
                };
                let slices: Vec<MapOnMesh> = ts.iter().map(|&t| slice(&|p| disk(p, amp * (PI * t).sin()))).collect();
                let mode = EndpointMode::FixedBoundary {
                    v0: Arc::new(slices[0].clone()),
                    v1: Arc::new(slices[n - 1].clone()),
                };
                (slices, mode)
            }
        };
        let mut slices = slices;
        for u in &mut slices {
            snap_boundary(u);
        }
        Sweepout::new(ts, slices, mode)
    }
}

/// Fold lune at time t: latitude `A(t)(√(1−x²) − |y|)`, longitude `L(t)x`, with
/// `A = (π/2) sin πt` and `L = π sin πt`.
pub fn sphere_fold(p: [f64; 2], t: f64) -> Vec<f64> {
    let s = (PI * t).sin();
    let (x, y) = (p[0].clamp(-1.0, 1.0), p[1]);
    let c = (1.0 - x * x).max(0.0).sqrt();
    let lat = 0.5 * PI * s * (c - y.abs()).max(0.0);
    let lon = PI * s * x;
    vec![lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Projects Γ-constrained vertices onto Γ and the rest onto N.
pub(crate) fn snap_boundary(u: &mut MapOnMesh) {
    for i in 0..u.n_vertices() {
        let q = if u.on_gamma(i) {
            u.target.project(u.value(i))
        } else {
            match u.target.parent.project(u.value(i)) {
                Ok(q) => q,
                Err(_) => continue,
            }
        };
        u.value_mut(i).copy_from_slice(&q);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_validate() {
        for f in [
            Family::Constant,
            Family::FlatBump { amp: 0.3 },
            Family::TwoPeak { amp: 0.3 },
            Family::SphereFold,
            Family::FixedDiskBulge { amp: 0.5 },
        ] {
            let s = f.build(0.2, 9).unwrap();
            s.validate(1e-9).unwrap();
            assert_eq!(s.len(), 9);
        }
    }

    #[test]
    fn sphere_fold_peaks_in_the_middle() {
        let s = Family::SphereFold.build(0.1, 9).unwrap();
        let (e, k) = s.max_energy();
        assert_eq!(k, 4);
        assert!(e > 2.0 * PI, "{e}");
        assert!(s.energies()[0] < 1e-20);
    }
}
