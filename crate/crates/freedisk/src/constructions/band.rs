use crate::domain::{cylinder_mesh, gauss_legendre, DiskMesh, DomainKind, Role};
use std::f64::consts::PI;

/// Structured mesh of the half band `{a ≤ r ≤ b, 0 ≤ θ ≤ π}` in polar coordinates. Both
/// arcs are `DirichletArc`; the chord pieces are `FreeChord`.
pub fn band_mesh(a: f64, b: f64, h: f64) -> DiskMesh {
    let nth = ((PI * b / h).ceil() as usize).max(8);
    let nr = (((b - a) / h).ceil() as usize).max(4);
    let cyl = cylinder_mesh(a, b, nr, nth, false);
    let verts = cyl.vertices.iter().map(|p| polar(p[0], p[1])).collect();
    DiskMesh::new(verts, cyl.triangles, cyl.roles, DomainKind::Band { a, b }, h)
}

fn polar(r: f64, th: f64) -> [f64; 2] {
    let (s, c) = th.sin_cos();
    [r * c, if th == 0.0 { 0.0 } else { r * s }]
}

/// The modified band `MB_{a,b}`: the half band with the two half disks of radius
/// `(b - a)/2` centred at `((a+b)/2, 0)` and `((a+b)/2, π)` in the `(r, θ)` plane removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedBand {
    pub a: f64,
    pub b: f64,
}

impl ModifiedBand {
    pub fn new(a: f64, b: f64) -> Self {
        assert!(0.0 < a && a < b && b - a < PI, "modified band needs 0 < a < b, b - a < π");
        ModifiedBand { a, b }
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn disk_radius(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    /// Angular half-width of a removed half disk at radius `r`.
    pub fn theta0(&self, r: f64) -> f64 {
        let d = r - self.centre();
        (self.disk_radius().powi(2) - d * d).max(0.0).sqrt()
    }

    /// Angular length `l_r` of the arc `MB ∩ {r}`.
    pub fn arc_length(&self, r: f64) -> f64 {
        PI - 2.0 * self.theta0(r)
    }

    /// The change of variables from the band: `|θ' - π/2| : l_r/2 = |θ - π/2| : π/2`.
    pub fn squeeze(&self, r: f64, theta: f64) -> f64 {
        0.5 * PI + (theta - 0.5 * PI) * self.arc_length(r) / PI
    }

    pub fn unsqueeze(&self, r: f64, theta: f64) -> f64 {
        0.5 * PI + (theta - 0.5 * PI) * PI / self.arc_length(r)
    }

    /// Planar area `∫ r l_r dr`, by Gauss-Legendre quadrature in the angle `φ` of the removed
    /// disks (`r = c - R cos φ`), which removes the square-root endpoint behaviour.
    pub fn area_quadrature(&self, n: usize) -> f64 {
        let (c, rr) = (self.centre(), self.disk_radius());
        let (x, w) = gauss_legendre(n);
        let band = 0.5 * PI * (self.b * self.b - self.a * self.a);
        let removed: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| {
                let phi = 0.5 * PI * (xi + 1.0);
                let r = c - rr * phi.cos();
                // dr = R sin φ dφ, removed angular width 2θ₀ = 2R sin φ
                wi * 0.5 * PI * r * 2.0 * rr * phi.sin() * rr * phi.sin()
            })
            .sum();
        band - removed
    }

    /// Point of the removed arc on the `θ = 0` side (`side = 0`) or the `θ = π` side.
    pub fn arc_point(&self, side: usize, phi: f64) -> (f64, f64) {
        let r = self.centre() - self.disk_radius() * phi.cos();
        let t = self.disk_radius() * phi.sin();
        (r, if side == 0 { t } else { PI - t })
    }

    /// Mesh of MB as the image of [`band_mesh`] under the change of variables; every
    /// boundary vertex is a `DirichletArc`. Returns the mesh and the band coordinates
    /// `(r, θ)` of each vertex.
    pub fn mesh(&self, h: f64) -> (DiskMesh, Vec<(f64, f64)>) {
        let nth = ((PI * self.b / h).ceil() as usize).max(8);
        let nr = (((self.b - self.a) / h).ceil() as usize).max(4);
        let cyl = cylinder_mesh(self.a, self.b, nr, nth, false);
        let coords: Vec<(f64, f64)> = cyl.vertices.iter().map(|p| (p[0], p[1])).collect();
        let verts = coords.iter().map(|&(r, t)| polar(r, self.squeeze(r, t))).collect();
        let roles = cyl.roles.iter().map(|r| if *r == Role::Interior { Role::Interior } else { Role::DirichletArc }).collect();
        (DiskMesh::new(verts, cyl.triangles, roles, DomainKind::ModifiedBand { a: self.a, b: self.b }, h), coords)
    }
}
