use crate::domain::Role;
use crate::energy::MapOnMesh;
use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(TAU) - PI
}

/// Boundary vertices of a full-disk mesh in counter-clockwise order.
pub(crate) fn boundary_cycle(u: &MapOnMesh) -> Vec<usize> {
    let mut b: Vec<usize> = (0..u.n_vertices()).filter(|&i| u.mesh.roles[i] == Role::FullBoundary).collect();
    let ang = |i: usize| {
        let p = u.mesh.vertices[i];
        p[1].atan2(p[0])
    };
    b.sort_by(|&i, &j| ang(i).total_cmp(&ang(j)));
    b
}

/// Winding number of the boundary trace of `u` against the parametrization of the closed
/// curve Γ, by accumulating wrapped parameter increments around ∂D.
pub fn boundary_degree(u: &MapOnMesh) -> Result<i64> {
    let cycle = boundary_cycle(u);
    if cycle.is_empty() {
        return Err(Error::GateViolation("boundary degree needs a full-disk mesh".into()));
    }
    let mut params = Vec::with_capacity(cycle.len());
    for &i in &cycle {
        let x = u.value(i);
        let off = u.target.distance(x);
        if off > 1e-6 {
            return Err(Error::TraceOffGamma(off));
        }
        let phi = u
            .target
            .loop_parameter(x)
            .ok_or_else(|| Error::GateViolation("boundary degree needs a closed curve Γ".into()))?;
        params.push(phi);
    }
    let total: f64 = (0..params.len()).map(|k| wrap(params[(k + 1) % params.len()] - params[k])).sum();
    Ok((total / TAU).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_mesh, MeshDomain};
    use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold};
    use std::sync::Arc;

    fn setup() -> (Arc<crate::domain::DiskMesh>, Arc<ConstraintSubmanifold>) {
        (
            Arc::new(build_mesh(MeshDomain::Disk, 0.05).unwrap()),
            Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0))),
        )
    }

    fn trace(mesh: &Arc<crate::domain::DiskMesh>, g: &Arc<ConstraintSubmanifold>, f: impl Fn(f64) -> f64) -> MapOnMesh {
        MapOnMesh::from_fn(mesh.clone(), g.clone(), |p| {
            let a = f(p[1].atan2(p[0]));
            let r = p[0].hypot(p[1]);
            let z = (1.0 - r * r).max(0.0).sqrt();
            let s = (1.0 - z * z).sqrt();
            vec![s * a.cos(), s * a.sin(), z]
        })
    }

    #[test]
    fn constant_and_identity() {
        let (m, g) = setup();
        assert_eq!(boundary_degree(&trace(&m, &g, |_| 0.4)).unwrap(), 0);
        assert_eq!(boundary_degree(&trace(&m, &g, |a| a)).unwrap(), 1);
        assert_eq!(boundary_degree(&trace(&m, &g, |a| -2.0 * a)).unwrap(), -2);
    }

    // Dense lift: the continuous lift of θ ↦ φ(θ) sampled finely, compared with the
    // vertex accumulation.
    #[test]
    fn backtracking_trace_against_dense_lift() {
        let (m, g) = setup();
        let f = |a: f64| 2.5 * a.sin() + 0.3;
        let n = 100_000;
        let mut lift = 0.0;
        for k in 0..n {
            let (a, b) = (TAU * k as f64 / n as f64, TAU * (k + 1) as f64 / n as f64);
            lift += wrap(f(b) - f(a));
        }
        assert_eq!((lift / TAU).round() as i64, 0);
        assert_eq!(boundary_degree(&trace(&m, &g, f)).unwrap(), 0);
    }

    #[test]
    fn off_gamma_is_rejected() {
        let (m, g) = setup();
        let mut u = trace(&m, &g, |a| a);
        let i = boundary_cycle(&u)[3];
        u.value_mut(i)[2] = 0.1;
        assert!(matches!(boundary_degree(&u), Err(Error::TraceOffGamma(_))));
    }
}
