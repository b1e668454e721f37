use freedisk::bubbles::sequences::hemisphere_sequence;
use freedisk::bubbles::{detect_concentration, varifold_distance, BubblesConfig, TestDictionary, VarifoldMeasure};
use freedisk::domain::{build_mesh, DiskMesh, GeneralizedBall, MeshDomain};
use freedisk::energy::{dirichlet_energy, EnergyReport, MapOnMesh};
use freedisk::manifold::{ConstraintSubmanifold, EmbeddedManifold, FourierCurve};
use freedisk::minmax::boundary_degree;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

fn disk() -> Arc<DiskMesh> {
    static M: OnceLock<Arc<DiskMesh>> = OnceLock::new();
    M.get_or_init(|| Arc::new(build_mesh(MeshDomain::Disk, 0.1).unwrap())).clone()
}

fn manifolds() -> Vec<EmbeddedManifold> {
    vec![EmbeddedManifold::sphere(1.3), EmbeddedManifold::ellipsoid(vec![1.0, 1.5, 0.8]), EmbeddedManifold::flat_torus(3)]
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 3).prop_filter("away from origin", |p| p.iter().map(|x| x * x).sum::<f64>() > 0.05)
}

fn sphere_map(c: [f64; 6]) -> MapOnMesh {
    let target = Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)));
    MapOnMesh::from_fn(disk(), target, |p| {
        let q = vec![
            c[0] + p[0] + c[1] * p[1] * p[1],
            c[2] + p[1] + c[3] * p[0] * p[1],
            c[4] * (1.0 - p[0] * p[0] - p[1] * p[1]) + c[5] * p[0],
        ];
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        q.iter().map(|x| x / n).collect()
    })
}

fn coeffs() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-0.4..0.4f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(p in point()) {
        for n in manifolds() {
            // Outside the tubular neighborhood projection is an error, not a point.
            let Ok(q) = n.project(&p) else { continue };
            let r = n.project(&q).unwrap();
            let d = q.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(d < 1e-9, "{} moved by {d}", n.name());
            prop_assert!(n.residual(&q) < 1e-9);
        }
    }

    #[test]
    fn tangent_projector_is_symmetric_idempotent(p in point()) {
        for n in manifolds() {
            let Ok(x) = n.project(&p) else { continue };
            let pm = n.tangent_projector(&x);
            prop_assert!((&pm - pm.transpose()).amax() < 1e-10);
            prop_assert!((&pm * &pm - &pm).amax() < 1e-10);
            prop_assert!((pm.trace() - n.dim() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_second_fundamental_form_vanishes(p in point(), v in point(), w in point()) {
        let n = EmbeddedManifold::flat_torus(3);
        let a = n.second_fundamental_form_unchecked(&p, &v, &w);
        prop_assert!(a.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn gamma_projection_lands_on_gamma(p in point(), lat in -1.0..1.0f64) {
        let gammas = vec![
            ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)),
            ConstraintSubmanifold::latitude(EmbeddedManifold::sphere(1.0), lat),
            ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 2),
        ];
        for g in gammas {
            let q = g.project(&p);
            prop_assert!(g.distance(&q) < 1e-9, "{} off by {}", g.name(), g.distance(&q));
            let r = g.project(&q);
            prop_assert!(q.iter().zip(&r).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn area_never_exceeds_energy(c in coeffs()) {
        let u = sphere_map(c);
        let r = EnergyReport::of(&u);
        prop_assert!(r.area <= r.energy + 1e-12);
        prop_assert!(r.energy >= 0.0 && r.area >= 0.0 && r.interior_residual >= 0.0 && r.boundary_residual >= 0.0);
    }

    #[test]
    fn scaled_balls_nest(angle in 0.0..PI, r in 0.05..0.45f64, rho in 0.1..1.0f64, x in -1.0..1.0f64, y in 0.0..1.0f64) {
        let b = GeneralizedBall::boundary(angle, r);
        prop_assert!(b.validate().is_ok());
        if b.contains_scaled([x, y], rho) {
            prop_assert!(b.contains([x, y]));
        }
        let c = GeneralizedBall::classical([0.3 * x, 0.3 * y], 0.5 * r);
        if c.contains_scaled([x, y], rho) {
            prop_assert!(c.contains([x, y]));
        }
    }

    #[test]
    fn varifold_distance_is_a_pseudometric(a in coeffs(), b in coeffs(), c in coeffs()) {
        let dict = TestDictionary::new(3, 1.5);
        let [va, vb, vc] = [a, b, c].map(|k| VarifoldMeasure::of(&sphere_map(k)));
        let dab = varifold_distance(&va, &vb, &dict);
        prop_assert_eq!(dab, varifold_distance(&vb, &va, &dict));
        prop_assert_eq!(varifold_distance(&va, &va, &dict), 0.0);
        let via = varifold_distance(&va, &vc, &dict) + varifold_distance(&vc, &vb, &dict);
        prop_assert!(dab <= via + 1e-12);
        prop_assert!(dab + 1e-12 >= (va.mass() - vb.mass()).abs());
    }

    #[test]
    fn boundary_degree_counts_windings(k in -3i64..=3, phase in 0.0..(2.0 * PI)) {
        let target = Arc::new(ConstraintSubmanifold::curve(
            EmbeddedManifold::flat_torus_with_lattice(vec![64.0; 3]),
            FourierCurve::circle(3, 1.0),
        ));
        let u = MapOnMesh::from_fn(disk(), target, |p| {
            let r = p[0].hypot(p[1]);
            let t = k as f64 * p[1].atan2(p[0]) + phase;
            vec![r * t.cos(), r * t.sin(), 0.0]
        });
        prop_assert_eq!(boundary_degree(&u).unwrap(), k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn concentration_masses_respect_thresholds(angle in 0.0..PI) {
        let cfg = BubblesConfig::default();
        let tail = [0.1, 0.08, 0.06, 0.05, 0.04];
        let seq = hemisphere_sequence(0.02, &tail, angle).unwrap();
        let e0 = seq.iter().map(dirichlet_energy).fold(0.0, f64::max);
        let found = detect_concentration(&seq, &cfg);
        prop_assert!(!found.is_empty());
        for c in &found {
            prop_assert!(c.mass >= cfg.epsilon1 - 1e-9);
        }
        prop_assert!(found.iter().map(|c| c.mass).sum::<f64>() <= e0 + 1e-9);
    }
}
