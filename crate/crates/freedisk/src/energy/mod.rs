//! Dirichlet energy (½-convention), area, harmonic and free-boundary residuals, the Hopf
//! differential, and the inequality and slice diagnostics built on them.

mod inequalities;
mod map;
mod slices;

pub use inequalities::{
    gradient_estimate_check, hardy_check, p1_l2_squared, poincare_constant, poincare_half_disk_check, InequalityRatio,
};
pub use map::MapOnMesh;
pub use slices::{angular_energy, courant_lebesgue_slice, slice_energy_profile, AngularEnergy, CourantLebesgue, SliceProfile};

use crate::domain::Role;
use crate::vec::dot;
use nalgebra::Complex;
use serde::{Deserialize, Serialize};

/// `½ ∫ |∇u|²` per triangle (energy density times area).
pub fn triangle_energies(u: &MapOnMesh) -> Vec<f64> {
    let mut ux = vec![0.0; u.dim];
    let mut uy = vec![0.0; u.dim];
    (0..u.mesh.n_triangles())
        .map(|t| {
            u.gradient_into(t, &mut ux, &mut uy);
            0.5 * (dot(&ux, &ux) + dot(&uy, &uy)) * u.mesh.geometry.area[t]
        })
        .collect()
}

/// `E(u) = ½ ∫ |∇u|²` for the piecewise-linear map.
pub fn dirichlet_energy(u: &MapOnMesh) -> f64 {
    triangle_energies(u).iter().sum()
}

/// Energy restricted to a set of triangles.
pub fn energy_on(u: &MapOnMesh, triangles: &[usize]) -> f64 {
    let mut ux = vec![0.0; u.dim];
    let mut uy = vec![0.0; u.dim];
    triangles
        .iter()
        .map(|&t| {
            u.gradient_into(t, &mut ux, &mut uy);
            0.5 * (dot(&ux, &ux) + dot(&uy, &uy)) * u.mesh.geometry.area[t]
        })
        .sum()
}

/// `Σ sqrt(|u_x|²|u_y|² - ⟨u_x,u_y⟩²) · area`.
pub fn area_functional(u: &MapOnMesh) -> f64 {
    let mut ux = vec![0.0; u.dim];
    let mut uy = vec![0.0; u.dim];
    (0..u.mesh.n_triangles())
        .map(|t| {
            u.gradient_into(t, &mut ux, &mut uy);
            let (a, b, c) = (dot(&ux, &ux), dot(&uy, &uy), dot(&ux, &uy));
            (a * b - c * c).max(0.0).sqrt() * u.mesh.geometry.area[t]
        })
        .sum()
}

/// `∂E/∂u_i = Σ_j w_ij (u_i - u_j)` for every vertex, flat with stride `dim`.
pub fn energy_gradient(u: &MapOnMesh) -> Vec<f64> {
    let d = u.dim;
    let mut g = vec![0.0; u.values.len()];
    for i in 0..u.n_vertices() {
        let ui = u.value(i);
        for (&j, &w) in u.mesh.neighbors(i).iter().zip(u.mesh.weights(i)) {
            let uj = u.value(j);
            for k in 0..d {
                g[i * d + k] += w * (ui[k] - uj[k]);
            }
        }
    }
    g
}

/// Per-vertex vector residual with its weighted L² norm.
#[derive(Debug, Clone)]
pub struct VectorResidual {
    pub vertices: Vec<usize>,
    /// Flat, stride `dim`, aligned with `vertices`.
    pub values: Vec<f64>,
    pub norm: f64,
}

/// Tangential part of the cotangent Laplacian `Δ_h u = -M^{-1} ∂E/∂u` at interior vertices;
/// the norm is `(Σ M_i |τ_i|²)^{1/2}`.
pub fn tension_residual(u: &MapOnMesh) -> VectorResidual {
    let g = energy_gradient(u);
    let d = u.dim;
    let m = &u.mesh.geometry.mass;
    let mut vertices = Vec::new();
    let mut values = Vec::new();
    let mut sum = 0.0;
    let mut lap = vec![0.0; d];
    let mut tan = vec![0.0; d];
    for i in 0..u.n_vertices() {
        if u.mesh.roles[i] != Role::Interior {
            continue;
        }
        for k in 0..d {
            lap[k] = -g[i * d + k] / m[i];
        }
        u.target.parent.tangent_project_into(u.value(i), &lap, &mut tan);
        sum += m[i] * dot(&tan, &tan);
        vertices.push(i);
        values.extend_from_slice(&tan);
    }
    VectorResidual { vertices, values, norm: sum.sqrt() }
}

/// Per-free-vertex scalar residual with its boundary-weighted L² norm.
#[derive(Debug, Clone)]
pub struct ScalarResidual {
    pub vertices: Vec<usize>,
    pub values: Vec<f64>,
    pub norm: f64,
}

/// Orthogonality defect of the discrete conormal derivative `(∂E/∂u_i) / L_i` at free
/// vertices (free chord and full boundary).
pub fn free_boundary_residual(u: &MapOnMesh) -> ScalarResidual {
    let g = energy_gradient(u);
    let d = u.dim;
    let l = &u.mesh.geometry.boundary_length;
    let mut vertices = Vec::new();
    let mut values = Vec::new();
    let mut sum = 0.0;
    for i in 0..u.n_vertices() {
        if !matches!(u.mesh.roles[i], Role::FreeChord | Role::FullBoundary) || l[i] == 0.0 {
            continue;
        }
        let conormal: Vec<f64> = (0..d).map(|k| g[i * d + k] / l[i]).collect();
        let defect = u.target.orthogonality_defect(u.value(i), &conormal);
        sum += l[i] * defect * defect;
        vertices.push(i);
        values.push(defect);
    }
    ScalarResidual { vertices, values, norm: sum.sqrt() }
}

/// `φ = |u_x|² - |u_y|² - 2i⟨u_x, u_y⟩` per triangle and its L¹ norm.
pub fn hopf_differential(u: &MapOnMesh) -> (Vec<Complex<f64>>, f64) {
    let mut ux = vec![0.0; u.dim];
    let mut uy = vec![0.0; u.dim];
    let mut phi = Vec::with_capacity(u.mesh.n_triangles());
    let mut l1 = 0.0;
    for t in 0..u.mesh.n_triangles() {
        u.gradient_into(t, &mut ux, &mut uy);
        let z = Complex::new(dot(&ux, &ux) - dot(&uy, &uy), -2.0 * dot(&ux, &uy));
        l1 += z.norm() * u.mesh.geometry.area[t];
        phi.push(z);
    }
    (phi, l1)
}

/// One row of the energy CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub area: f64,
    /// Only meaningful on cylinder domains; zero elsewhere.
    pub angular_energy: f64,
    pub interior_residual: f64,
    pub boundary_residual: f64,
    pub hopf_norm: f64,
}

impl EnergyReport {
    pub fn of(u: &MapOnMesh) -> Self {
        let angular_energy = match u.mesh.domain {
            crate::domain::DomainKind::HalfCylinder { a, b } | crate::domain::DomainKind::Cylinder { a, b } => {
                angular_energy(u, a, b).map(|r| r.angular).unwrap_or(0.0)
            }
            _ => 0.0,
        };
        EnergyReport {
            energy: dirichlet_energy(u),
            area: area_functional(u),
            angular_energy,
            interior_residual: tension_residual(u).norm,
            boundary_residual: free_boundary_residual(u).norm,
            hopf_norm: hopf_differential(u).1,
        }
    }

    pub const CSV_HEADER: &'static str = "t,energy,area,interior_residual,boundary_residual,hopf_norm";

    pub fn csv_row(&self, t: f64) -> String {
        format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            t, self.energy, self.area, self.interior_residual, self.boundary_residual, self.hopf_norm
        )
    }
}

/// CSV text for a family of reports, with the format header line.
pub fn energy_csv(rows: &[(f64, EnergyReport)]) -> String {
    let mut s = String::from("# format: 1\n");
    s.push_str(EnergyReport::CSV_HEADER);
    s.push('\n');
    for (t, r) in rows {
        s.push_str(&r.csv_row(*t));
        s.push('\n');
    }
    s
}
