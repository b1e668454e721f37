//! Concentrating sequences with known bubble trees, used as oracles for the diagnostics.

use super::frame::Frame;
use crate::domain::{build_mesh, cylinder_mesh, graded_disk_mesh, DiskMesh, MeshDomain};
use crate::energy::MapOnMesh;
use crate::error::Result;
use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold, FourierCurve};
use nalgebra::Complex;
use rand::Rng;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Inverse stereographic projection from the plane onto the unit sphere, sending the
/// upper half plane to the upper hemisphere and the real axis to the equator.
pub fn sigma(w: [f64; 2]) -> Vec<f64> {
    let s = w[0] * w[0] + w[1] * w[1];
    if !s.is_finite() {
        return vec![1.0, 0.0, 0.0];
    }
    vec![(s - 1.0) / (s + 1.0), 2.0 * w[0] / (1.0 + s), 2.0 * w[1] / (1.0 + s)]
}

fn equator() -> Arc<ConstraintSubmanifold> {
    Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)))
}

fn flat_r3() -> EmbeddedManifold {
    EmbeddedManifold::flat_torus_with_lattice(vec![64.0; 3])
}

/// `σ(-ζ̄/λ)` in the half-plane frame at the boundary point `e^{i·angle}`: a hemisphere of
/// energy 2π shrinking to that point as `λ → 0`, with boundary degree 1. Sphere target
/// with Γ the equator.
pub fn hemisphere_sequence(h: f64, lambdas: &[f64], angle: f64) -> Result<Vec<MapOnMesh>> {
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, h)?);
    let target = equator();
    let frame = Frame::Boundary { angle };
    Ok(lambdas
        .iter()
        .map(|&l| {
            MapOnMesh::from_fn(mesh.clone(), target.clone(), |p| {
                let z = frame.to_local(p);
                sigma([-z[0] / l, z[1] / l])
            })
        })
        .collect())
}

/// `σ(-f̄)` with `f = -1/(λ(ζ - 1/ζ))` in the frame at `e^{i·angle}`: two hemispheres of
/// energy 2π each, concentrating at `ζ = 0` and `ζ = ∞`, i.e. at `e^{i·angle}` and at the
/// antipodal boundary point.
pub fn two_bubble_sequence(h: f64, lambdas: &[f64], angle: f64) -> Result<Vec<MapOnMesh>> {
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, h)?);
    let target = equator();
    let frame = Frame::Boundary { angle };
    Ok(lambdas
        .iter()
        .map(|&l| {
            MapOnMesh::from_fn(mesh.clone(), target.clone(), |p| {
                let z = frame.to_local(p);
                if !(z[0].is_finite() && z[1].is_finite()) {
                    return sigma([0.0, 0.0]);
                }
                let zeta = Complex::new(z[0], z[1]);
                let d = if zeta.norm() > 1.0 { (zeta - zeta.inv()) * l } else { (zeta * zeta - 1.0) * l / zeta };
                if !(d.norm() > 1e-300) {
                    return sigma([if zeta.norm() > 1e-300 { f64::INFINITY } else { 0.0 }, 0.0]);
                }
                let f = -d.inv();
                sigma([-f.re, f.im])
            })
        })
        .collect())
}

/// Log-polar disk mesh resolving the cores of [`conformal_neck_sequence`].
pub fn neck_mesh(tau_min: f64, n_theta: usize) -> Arc<DiskMesh> {
    Arc::new(graded_disk_mesh(tau_min, n_theta))
}

/// A conformal neck `c(cos θ, sin θ, τ)` on `e^{-T} ≤ |z| ≤ 1` capped by the flat disk
/// `c(x e^T, y e^T, -T)`, into R³ with Γ the plane `z = 0`. The neck carries energy
/// `neck_energy` for every `T` (`c² = neck_energy / (2πT)`), all of it escaping into the
/// collapsing neck.
pub fn conformal_neck_sequence(mesh: &Arc<DiskMesh>, lengths: &[f64], neck_energy: f64) -> Vec<MapOnMesh> {
    let target = Arc::new(ConstraintSubmanifold::coordinate_subtorus(flat_r3(), 2));
    lengths
        .iter()
        .map(|&t| {
            let c = (neck_energy / (TAU * t)).sqrt();
            let lambda = (-t).exp();
            MapOnMesh::from_fn(mesh.clone(), target.clone(), |p| {
                let r = p[0].hypot(p[1]);
                if r <= lambda {
                    vec![c * p[0] / lambda, c * p[1] / lambda, -c * t]
                } else {
                    let th = p[1].atan2(p[0]);
                    vec![c * th.cos(), c * th.sin(), c * r.ln()]
                }
            })
        })
        .collect()
}

/// The flat unit disk in R³ with a vertical bulge `A·Im w/(1+|w|²)`, `w = ζ/λ`, attached at
/// the boundary point `e^{i·angle}`; Γ is the unit circle. The bulge vanishes on ∂D, so
/// every element spans Γ once and the bubble it leaves behind has boundary degree 0.
pub fn two_disk_sequence(h: f64, lambdas: &[f64], amplitude: f64, angle: f64) -> Result<Vec<MapOnMesh>> {
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, h)?);
    let target = Arc::new(ConstraintSubmanifold::curve(flat_r3(), FourierCurve::circle(3, 1.0)));
    let frame = Frame::Boundary { angle };
    Ok(lambdas
        .iter()
        .map(|&l| {
            MapOnMesh::from_fn(mesh.clone(), target.clone(), |p| {
                let z = frame.to_local(p);
                let w = [z[0] / l, z[1] / l];
                let b = amplitude * w[1] / (1.0 + w[0] * w[0] + w[1] * w[1]);
                vec![p[0], p[1], b]
            })
        })
        .collect())
}

/// Random neck on the half cylinder `[-length, 0] x [0, π]` into flat R³, centred at
/// `τ_c = -length/2` with width `w`: a radial transition `a tanh((τ-τ_c)/w)`, an angular
/// mode `b sech((τ-τ_c)/w) cos kθ` and, for some draws, a conformal helix of amplitude `c`
/// along the whole neck. Amplitudes are spread over several decades.
pub fn random_neck<R: Rng + ?Sized>(rng: &mut R, length: f64, n_theta: usize) -> MapOnMesh {
    let dth = PI / n_theta as f64;
    let nt = (length / dth).ceil() as usize;
    let mesh = Arc::new(cylinder_mesh(-length, 0.0, nt, n_theta, false));
    let target = Arc::new(ConstraintSubmanifold::linear_subtorus(
        flat_r3(),
        vec![0.0; 3],
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
    ));
    let decade = |rng: &mut R, lo: f64, hi: f64| 10f64.powf(rng.gen_range(lo..hi));
    let a = decade(rng, -2.0, 0.0);
    let b = decade(rng, -3.0, 0.0);
    let k = rng.gen_range(1..4) as f64;
    let w = rng.gen_range(0.5..3.0);
    let tc = -0.5 * length;
    let c = if rng.gen_bool(0.3) { decade(rng, -2.0, 0.0) } else { 0.0 };
    MapOnMesh::from_fn(mesh, target, |p| {
        let (t, th) = (p[0], p[1]);
        let s = (t - tc) / w;
        vec![b * (k * th).cos() / s.cosh() + c * th.cos(), c * th.sin(), a * s.tanh() + c * t]
    })
}
