//! Meshes of the disk, half disk, half annulus and (half) cylinders, generalized balls
//! with their Möbius identifications, and conformal dilations.

mod balls;
mod locate;
mod mesh;

pub use balls::{
    ball_region, cayley, cayley_inverse, check_disjoint, gauss_legendre, in_reference_region, BallKind, BallRegion,
    ConformalDilation, GeneralizedBall,
};
pub use locate::{barycentric, Locator};
pub use mesh::{build_mesh, cylinder_mesh, graded_disk_mesh, DiskMesh, DomainKind, MeshDomain, MeshGeometry, Role};

/// `[a, b] x [0, π]` with a structured resolution; conformal to the half annulus
/// `e^a ≤ r ≤ e^b` through `t = log r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfCylinder {
    pub a: f64,
    pub b: f64,
    pub n_t: usize,
    pub n_theta: usize,
}

impl HalfCylinder {
    pub fn mesh(&self) -> DiskMesh {
        cylinder_mesh(self.a, self.b, self.n_t, self.n_theta, false)
    }
}
