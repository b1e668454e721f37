use super::sequences::*;
use super::*;
use crate::domain::{build_mesh, cylinder_mesh, MeshDomain};
use crate::energy::{dirichlet_energy, MapOnMesh};
use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

fn cfg() -> BubblesConfig {
    BubblesConfig::default()
}

const TAIL: [f64; 7] = [0.1, 0.08, 0.06, 0.05, 0.04, 0.03, 0.025];

#[test]
fn defaults_validate_and_ordering_is_enforced() {
    cfg().validate().unwrap();
    let c = BubblesConfig { epsilon3: 0.1, ..cfg() };
    assert!(matches!(c.validate(), Err(crate::Error::Config { key, .. }) if key == "bubbles.epsilon3"));
}

#[test]
fn smooth_sequence_has_no_concentration() {
    let seq = hemisphere_sequence(0.05, &[1.0; 5], 0.0).unwrap();
    assert!(detect_concentration(&seq, &cfg()).is_empty());
    let e = blowup_extract(&seq[0], &Frame::Interior { center: [0.0, 0.0] }, &cfg());
    assert!(matches!(e, Err(crate::Error::NoValidRadius)));
}

#[test]
fn hemisphere_concentrates_at_its_boundary_point() {
    let seq = hemisphere_sequence(0.01, &TAIL, 1.0).unwrap();
    let pts = detect_concentration(&seq, &cfg());
    assert_eq!(pts.len(), 1, "{pts:?}");
    let p = pts[0];
    assert!(p.frame.is_boundary());
    let c = p.frame.center();
    assert!((c[1].atan2(c[0]) - 1.0).abs() < 0.05);
    let e = dirichlet_energy(seq.last().unwrap());
    assert!(p.mass > 0.85 * TAU && p.mass <= e, "{} {e}", p.mass);
}

#[test]
fn two_bubbles_split_the_energy() {
    let seq = two_bubble_sequence(0.01, &TAIL, 0.0).unwrap();
    let pts = detect_concentration(&seq, &cfg());
    assert_eq!(pts.len(), 2, "{pts:?}");
    let total: f64 = pts.iter().map(|p| p.mass).sum();
    assert!((pts[0].mass - pts[1].mass).abs() < 0.05 * total);
}

#[test]
fn blowup_radius_matches_radial_scan() {
    // A radial bump 2ε₃ concentrated around an interior point of a flat target.
    let c = cfg();
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, 0.01).unwrap());
    let target = Arc::new(ConstraintSubmanifold::linear_subtorus(
        EmbeddedManifold::flat_torus_with_lattice(vec![64.0; 3]),
        vec![0.0, 0.0, 10.0],
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
    ));
    let x0 = [0.2, -0.1];
    let s = 0.03;
    let raw = MapOnMesh::from_fn(mesh.clone(), target.clone(), |p| {
        let r2 = (p[0] - x0[0]).powi(2) + (p[1] - x0[1]).powi(2);
        vec![(-r2 / (s * s)).exp(), 0.0, 0.0]
    });
    let k = (2.0 * c.epsilon3 / dirichlet_energy(&raw)).sqrt();
    let u = MapOnMesh::from_fn(mesh, target, |p| raw_val(p, x0, s, k));
    let frame = Frame::Interior { center: x0 };
    let b = blowup_extract(&u, &frame, &c).unwrap();
    // Exhaustive scan from the true centre: first radius leaving at most ε₃ outside.
    let field = EnergyField::of(&u);
    let prof = field.radial_profile(&frame, c.rho);
    let total: f64 = prof.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    let mut r_scan = 0.0;
    for (r, e) in prof {
        cum += e;
        if total - cum <= c.epsilon3 {
            r_scan = r;
            break;
        }
    }
    assert!((b.r - r_scan).abs() < 0.01, "{} {r_scan}", b.r);
    assert!((b.outer_energy - c.epsilon3).abs() < 0.02 * c.epsilon3 + 2e-3);

    fn raw_val(p: [f64; 2], x0: [f64; 2], s: f64, k: f64) -> Vec<f64> {
        let r2 = (p[0] - x0[0]).powi(2) + (p[1] - x0[1]).powi(2);
        vec![k * (-r2 / (s * s)).exp(), 0.0, 0.0]
    }
}

#[test]
fn interior_blowup_preserves_energy() {
    let c = cfg();
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, 0.01).unwrap());
    let target = Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)));
    let x0 = [0.1, 0.2];
    let l = 0.05;
    let u = MapOnMesh::from_fn(mesh, target, |p| sigma([(p[0] - x0[0]) / l, (p[1] - x0[1]) / l]));
    let b = blowup_extract(&u, &Frame::Interior { center: x0 }, &c).unwrap();
    let ratio = dirichlet_energy(&b.map) / b.window_energy;
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn hemisphere_tree_satisfies_the_identity() {
    let seq = hemisphere_sequence(0.01, &TAIL, 0.5).unwrap();
    let c = cfg();
    let tree = extract_tree(&seq, &c).unwrap();
    assert_eq!(tree.disk_bubbles().count(), 1);
    let id = energy_identity_check(&tree, tree.e_limit, c.identity_tol);
    assert!(id.pass, "{id:?}");
    let report = TreeReport::new(&tree, c.identity_tol);
    assert_eq!(report.format, 1);
    assert_eq!(report.base_degree, Some(0));
    assert_eq!(report.bubbles[0].degree, Some(1));
}

#[test]
fn conformal_neck_is_flagged() {
    let c = cfg();
    let mesh = neck_mesh(-44.0, 48);
    let seq = conformal_neck_sequence(&mesh, &[32.0, 34.0, 36.0, 38.0, 40.0], 2.0);
    let tree = extract_tree(&seq, &c).unwrap();
    assert_eq!(tree.points.len(), 1);
    let id = energy_identity_check(&tree, tree.e_limit, c.identity_tol);
    assert!(!id.pass, "{id:?}");
    let neck = tree.necks[0].report.expect("neck window");
    assert!((neck.area_ratio - 1.0).abs() < 0.05, "{neck:?}");
    assert!(!neck.hypotheses_hold());
}

#[test]
fn single_disk_audit() {
    let seq = hemisphere_sequence(0.05, &[1.0; 5], 0.0).unwrap();
    let tree = extract_tree(&seq, &cfg()).unwrap();
    assert_eq!(boundary_bubble_degree_audit(&tree).unwrap(), vec![1]);
}

#[test]
fn two_disk_audit() {
    let seq = two_disk_sequence(0.02, &TAIL, 4.0, 0.3).unwrap();
    let tree = extract_tree(&seq, &cfg()).unwrap();
    assert_eq!(tree.disk_bubbles().count(), 1, "{:?}", tree.points);
    let d = boundary_bubble_degree_audit(&tree).unwrap();
    assert_eq!(d, vec![1, 0]);
    assert_eq!(d.iter().sum::<i64>(), crate::minmax::boundary_degree(seq.last().unwrap()).unwrap());
}

#[test]
fn radial_neck_has_no_angular_energy() {
    let mesh = Arc::new(cylinder_mesh(-30.0, 0.0, 300, 16, false));
    let target = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus_with_lattice(vec![64.0; 3]), 2));
    let u = MapOnMesh::from_fn(mesh, target, |p| vec![0.0, 0.0, (p[0] + 15.0).tanh()]);
    let r = neck_report(&u, &NeckGeometry::Cylinder, 4.0, 0.02).unwrap();
    assert_eq!(r.m, 1);
    assert!(r.angular_ratio < 1e-12);
    assert!(r.area_ratio < 1e-12);
    assert_eq!(r.lemma_holds, Some(true));
    let short = neck_report(&u, &NeckGeometry::Cylinder, 5.0, 0.02);
    assert!(matches!(short, Err(crate::Error::WindowTooShort { .. })));
}

#[test]
fn annulus_and_cylinder_pictures_agree() {
    // Conformal helix pulled back to the disk annulus versus its cylinder form.
    let c0 = 0.3;
    let disk = neck_mesh(-36.0, 64);
    let target = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus_with_lattice(vec![64.0; 3]), 2));
    let u = MapOnMesh::from_fn(disk, target.clone(), |p| {
        let th = p[1].atan2(p[0]);
        vec![c0 * th.cos(), c0 * th.sin(), c0 * p[0].hypot(p[1]).max(1e-300).ln()]
    });
    let g = NeckGeometry::Annulus { frame: Frame::Interior { center: [0.0, 0.0] }, inner: (-34.0f64).exp(), outer: 1.0 };
    let r = neck_report(&u, &g, 4.0, 0.02).unwrap();
    let e = c0 * c0 * TAU * r.l * (r.m as f64 + 6.0);
    assert!((r.energy / e - 1.0).abs() < 0.02, "{} {e}", r.energy);
    assert!((r.angular_ratio - 0.5 * r.m as f64 / (r.m as f64 + 6.0)).abs() < 0.02);
    assert!((r.area_ratio - 1.0).abs() < 0.02);
}

#[test]
fn ode_check_cosh_oracle() {
    let (c, a, l) = (0.8, 0.5, 4.0);
    let n = 4001;
    let t: Vec<f64> = (0..n).map(|k| -2.0 * l + 4.0 * l * k as f64 / (n - 1) as f64).collect();
    let s = (4.0 * c as f64).sqrt();
    let f: Vec<f64> = t.iter().map(|x| 8.0 * c * a * (x / s).cosh()).collect();
    let v = ode_comparison_check(&t, &f, c, a, l);
    assert!(v.inequality_holds);
    assert_eq!(v.branch, OdeBranch::LargeMax);
    let exact = 8.0 * c * a * 2.0 * s * (2.0 * l / s).sinh();
    assert!((v.integral / exact - 1.0).abs() < 1e-5);
    assert_eq!(v.bound_holds, Some(true));
    assert!(v.integral > 2.0 * v.bound);
    assert!(v.integral < v.printed_bound);
}

#[test]
fn ode_check_small_branches() {
    let t: Vec<f64> = (0..401).map(|k| -8.0 + 0.04 * k as f64).collect();
    let zero = vec![0.0; t.len()];
    let v = ode_comparison_check(&t, &zero, 1.0, 0.3, 4.0);
    assert!(v.inequality_holds);
    assert_eq!(v.branch, OdeBranch::SmallMax);
    let bump: Vec<f64> = t.iter().map(|x| 0.01 * (-x * x).exp()).collect();
    let v = ode_comparison_check(&t, &bump, 1.0, 10.0, 4.0);
    assert!(v.inequality_holds);
    assert_eq!(v.branch, OdeBranch::SmallMax);
    assert_eq!(v.bound_holds, None);
}

#[test]
fn lemma_holds_across_random_necks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..60 {
        let u = random_neck(&mut rng, 60.0, 12);
        let r = neck_report(&u, &NeckGeometry::Cylinder, 4.0, 0.02).unwrap();
        if let Some(ok) = r.lemma_holds {
            assert!(ok, "{r:?}");
            checked += 1;
        }
    }
    assert!(checked > 10, "{checked}");
}

#[test]
fn varifold_distance_oracles() {
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, 0.02).unwrap());
    let target = Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)));
    let frame = Frame::Boundary { angle: 0.0 };
    let hemi = MapOnMesh::from_fn(mesh.clone(), target.clone(), |p| sigma(frame.to_local(p)));
    // Same hemisphere through a different Möbius parametrization.
    let moved = MapOnMesh::from_fn(mesh.clone(), target.clone(), |p| {
        let z = frame.to_local(p);
        sigma([2.0 * z[0] + 0.3, 2.0 * z[1]])
    });
    let flat = MapOnMesh::constant(mesh, target, &[1.0, 0.0, 0.0]);
    let dict = TestDictionary::new(3, 1.0);
    let (a, b, z) = (VarifoldMeasure::of(&hemi), VarifoldMeasure::of(&moved), VarifoldMeasure::of(&flat));
    assert_eq!(varifold_distance(&a, &a, &dict), 0.0);
    assert!(varifold_distance(&a, &b, &dict) < 1e-2 * a.mass(), "{}", varifold_distance(&a, &b, &dict));
    let d = varifold_distance(&a, &z, &dict);
    assert!(d >= a.mass() - 1e-12);
    assert!((a.mass() - crate::energy::area_functional(&hemi)).abs() < 1e-9);
    assert!((a.mass() - TAU).abs() < 0.02 * TAU);
    assert_eq!(varifold_distance(&a, &b, &dict), varifold_distance(&b, &a, &dict));
    let _ = PI;
}

#[test]
fn two_bubble_tree_satisfies_the_identity() {
    let c = cfg();
    let seq = two_bubble_sequence(0.01, &TAIL, 0.0).unwrap();
    let tree = extract_tree(&seq, &c).unwrap();
    assert_eq!(tree.disk_bubbles().count(), 2);
    let id = energy_identity_check(&tree, tree.e_limit, c.identity_tol);
    assert!(id.pass, "{id:?}");
    assert!((tree.e_limit - 2.0 * TAU).abs() < 0.05 * 2.0 * TAU, "{}", tree.e_limit);
    let d = boundary_bubble_degree_audit(&tree).unwrap();
    assert_eq!(d.iter().sum::<i64>(), 2);
}

#[test]
fn tree_varifold_matches_the_last_map() {
    let c = cfg();
    let seq = hemisphere_sequence(0.01, &TAIL, 0.0).unwrap();
    let tree = extract_tree(&seq, &c).unwrap();
    let dict = TestDictionary::new(3, 1.0);
    let d = varifold_distance(&tree.varifold(), &VarifoldMeasure::of(seq.last().unwrap()), &dict);
    assert!(d < 0.1 * TAU, "{d}");
}
