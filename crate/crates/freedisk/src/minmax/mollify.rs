use super::families::snap_boundary;
use super::sweepout::{w12_distance, EndpointMode, HomotopyMove, MoveKind, Sweepout};
use crate::domain::Role;
use crate::energy::{dirichlet_energy, MapOnMesh};
use crate::error::{Error, Result};

/// Discrete heat smoothing of one slice at length `scale`, then reprojection to N and Γ.
///
/// Each step moves a vertex halfway to its cotangent-weighted neighbour average; the weights
/// are one-sided at ∂D, which is the reflected (Neumann) smoothing across Γ. Dirichlet
/// vertices and, with `clamp_boundary`, all of ∂D stay put.
pub fn mollify_map(u: &MapOnMesh, scale: f64, clamp_boundary: bool) -> Result<MapOnMesh> {
    if !(scale >= 0.0) || scale > 0.5 {
        return Err(Error::ScaleTooLarge(scale));
    }
    let h = u.mesh.h.max(1e-12);
    let steps = ((scale / h).powi(2)).ceil() as usize;
    if steps == 0 {
        return Ok(u.clone());
    }
    let d = u.dim;
    let frozen: Vec<bool> = u
        .mesh
        .roles
        .iter()
        .map(|r| match r {
            Role::Interior => false,
            Role::FreeChord | Role::FullBoundary => clamp_boundary,
            _ => true,
        })
        .collect();
    let mut cur = u.values.clone();
    let mut next = cur.clone();
    let mut avg = vec![0.0; d];
    for _ in 0..steps {
        for i in 0..u.n_vertices() {
            if frozen[i] {
                continue;
            }
            let (nb, w) = (u.mesh.neighbors(i), u.mesh.weights(i));
            let wsum: f64 = w.iter().sum();
            if wsum <= 0.0 {
                continue;
            }
            avg.iter_mut().for_each(|a| *a = 0.0);
            for (&j, &wj) in nb.iter().zip(w) {
                for k in 0..d {
                    avg[k] += wj * cur[j * d + k];
                }
            }
            for k in 0..d {
                next[i * d + k] = 0.5 * cur[i * d + k] + 0.5 * avg[k] / wsum;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut out = MapOnMesh::new(u.mesh.clone(), u.target.clone(), cur);
    let reach = u.target.parent.tubular_radius;
    for i in 0..u.n_vertices() {
        let off = crate::vec::dist(out.value(i), u.value(i));
        if off > 0.5 * reach {
            return Err(Error::ScaleTooLarge(scale));
        }
    }
    snap_boundary(&mut out);
    Ok(out)
}

/// Smooths every slice. Constant end slices stay constant; in fixed-boundary mode the end
/// slices are kept exactly. Slices whose energy would rise keep their input value.
pub fn mollify_sweepout(g: &Sweepout, scale: f64, bound: f64, iteration: usize) -> Result<Sweepout> {
    let fixed = g.endpoint_mode.is_fixed();
    let mut out = g.clone();
    let n = g.len();
    for k in 0..n {
        if fixed && (k == 0 || k == n - 1) {
            continue;
        }
        let u = &g.slices[k];
        let m = mollify_map(u, scale, fixed)?;
        let dist = u.c0_distance(&m).max(w12_distance(u, &m));
        if dist > bound {
            return Err(Error::ScaleTooLarge(scale));
        }
        let (e0, e1) = (dirichlet_energy(u), dirichlet_energy(&m));
        if e1 <= e0 && !m.bit_equal(u) {
            out.slices[k] = m;
            out.log(HomotopyMove {
                iteration,
                kind: MoveKind::Mollify,
                slice: k,
                energy_before: e0,
                energy_after: e1,
                detail: format!("scale={scale}"),
            });
        }
    }
    if let EndpointMode::FixedBoundary { v0, v1 } = &g.endpoint_mode {
        out.slices[0] = (**v0).clone();
        out.slices[n - 1] = (**v1).clone();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_mesh, MeshDomain};
    use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold};
    use std::sync::Arc;

    fn flat() -> (Arc<crate::domain::DiskMesh>, Arc<ConstraintSubmanifold>) {
        (
            Arc::new(build_mesh(MeshDomain::Disk, 0.05).unwrap()),
            Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 2)),
        )
    }

    #[test]
    fn zero_scale_is_identity() {
        let (m, g) = flat();
        let u = MapOnMesh::from_fn(m, g, |p| vec![p[0], p[1], 0.1 * (1.0 - p[0] * p[0] - p[1] * p[1])]);
        assert!(mollify_map(&u, 0.0, false).unwrap().bit_equal(&u));
    }

    // A high-frequency mode loses energy like e^{-ck²}; the smooth part barely moves.
    #[test]
    fn wiggle_energy_decreases() {
        let (m, g) = flat();
        let u = MapOnMesh::from_fn(m, g, |p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            vec![p[0], p[1], 0.02 * (1.0 - r2) * (40.0 * p[0]).sin()]
        });
        let v = mollify_map(&u, 0.1, false).unwrap();
        let (e0, e1) = (dirichlet_energy(&u), dirichlet_energy(&v));
        assert!(e1 < e0, "{e1} vs {e0}");
        let wiggle = |w: &MapOnMesh| (0..w.n_vertices()).map(|i| w.value(i)[2].abs()).fold(0.0, f64::max);
        assert!(wiggle(&v) < 0.5 * wiggle(&u));
    }

    #[test]
    fn boundary_stays_on_gamma() {
        let m = Arc::new(build_mesh(MeshDomain::Disk, 0.05).unwrap());
        let g = Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)));
        let u = MapOnMesh::from_fn(m, g, |p| super::super::families::sphere_fold(p, 0.3));
        let v = mollify_map(&u, 0.1, false).unwrap();
        for i in 0..v.n_vertices() {
            if v.on_gamma(i) {
                assert!(v.target.distance(v.value(i)) < 1e-10);
            }
        }
    }

    #[test]
    fn oversized_scale_is_rejected() {
        let (m, g) = flat();
        let u = MapOnMesh::constant(m, g, &[0.0; 3]);
        assert!(matches!(mollify_map(&u, 0.8, false), Err(Error::ScaleTooLarge(_))));
    }
}
