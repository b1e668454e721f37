use super::*;
use crate::domain::{build_mesh, MeshDomain};
use crate::energy::{dirichlet_energy, MapOnMesh};
use crate::manifold::{ConstraintSubmanifold, EmbeddedManifold};
use crate::solver::{BoundaryMode, SolverConfig};
use std::sync::Arc;

fn solver() -> SolverConfig {
    SolverConfig { tol_grad: 1e-7, epsilon0: 3.0, ..SolverConfig::default() }
}

fn flat_bump(amp: f64, centre: [f64; 2], r: f64) -> MapOnMesh {
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, 0.05).unwrap());
    let g = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 2));
    MapOnMesh::from_fn(mesh, g, |p| {
        let s = ((p[0] - centre[0]).powi(2) + (p[1] - centre[1]).powi(2)) / (r * r);
        vec![0.0, 0.0, if s < 1.0 { amp * (1.0 - s).powi(3) } else { 0.0 }]
    })
}

#[test]
fn harmonic_slice_has_no_improvement() {
    let mesh = Arc::new(build_mesh(MeshDomain::Disk, 0.05).unwrap());
    let g = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 2));
    let u = MapOnMesh::from_fn(mesh, g, |p| vec![0.2 * p[0], 0.2 * p[1], 0.0]);
    let mi = maximal_improvement_at(&u, 0.05, 6, 0.5, BoundaryMode::Fixed, &solver(), 1);
    assert!(mi.improvement < 1e-6, "{}", mi.improvement);
}

// A bump supported well inside ½B is removed entirely by the replacement, so the flat
// closed-form improvement is the bump energy itself.
#[test]
fn single_bump_improvement_matches_its_energy() {
    let u = flat_bump(0.05, [0.0, 0.0], 0.15);
    let e = dirichlet_energy(&u);
    let mi = maximal_improvement_at(&u, 1.0, 6, 0.5, BoundaryMode::Free, &solver(), 3);
    assert!(mi.improvement >= 0.95 * e, "{} vs {e}", mi.improvement);
}

#[test]
fn semicontinuity_probe() {
    let cfg = solver();
    let eps = 0.02;
    let t_map = flat_bump(0.05, [0.1, 0.0], 0.2);
    let e_t = maximal_improvement_at(&t_map, eps, 6, 0.5, BoundaryMode::Free, &cfg, 5).improvement;
    for a in [0.045, 0.05, 0.055] {
        let s_map = flat_bump(a, [0.1, 0.0], 0.2);
        let e_s = maximal_improvement_at(&s_map, eps / 2.0, 6, 0.5, BoundaryMode::Free, &cfg, 5).improvement;
        assert!(e_s <= 2.0 * e_t + 1e-6, "{e_s} vs {e_t}");
    }
}

#[test]
fn cover_examples() {
    let cfg = solver();
    let s = Family::FlatBump { amp: 0.05 }.build(0.1, 9).unwrap();
    let empty = build_interval_cover(&s, 1e9, 0.5, 4, 10.0, BoundaryMode::Free, &cfg, 0).unwrap();
    assert_eq!(empty.m(), 0);

    let (w, k) = s.max_energy();
    let one = build_interval_cover(&s, 0.5 * w, 0.5, 4, 10.0, BoundaryMode::Free, &cfg, 0).unwrap();
    assert_eq!(one.m(), 1);
    let (lo, hi) = one.pieces[0].interval;
    assert!(lo <= k && k <= hi);

    let two = Family::TwoPeak { amp: 0.05 }.build(0.1, 17).unwrap();
    let (w2, _) = two.max_energy();
    let c = build_interval_cover(&two, 0.5 * w2, 0.5, 4, 10.0, BoundaryMode::Free, &cfg, 0).unwrap();
    assert!(c.m() >= 2);
    let supp = |p: &CoverPiece| (0..p.radius.len()).filter(|&k| p.radius[k] > 0.0).collect::<Vec<_>>();
    let (a, b) = (supp(&c.pieces[0]), supp(&c.pieces[c.m() - 1]));
    assert!(a.last().unwrap() + 1 < b[0], "{a:?} {b:?}");
    assert!(c.max_overlap() <= 2);
}

#[test]
fn cover_rejects_discontinuous_family() {
    let s = Family::FlatBump { amp: 0.5 }.build(0.1, 3).unwrap();
    let r = build_interval_cover(&s, 0.0, 0.5, 4, 1e-3, BoundaryMode::Free, &solver(), 0);
    assert!(matches!(r, Err(crate::Error::CoverFailure(_))));
}

#[test]
fn tighten_leaves_constant_sweepout_alone() {
    let s = Family::Constant.build(0.1, 5).unwrap();
    let (out, rep) = tighten(&s, &MinmaxConfig::default(), &solver(), 1).unwrap();
    assert!(out.slices.iter().zip(&s.slices).all(|(a, b)| a.bit_equal(b)));
    assert!(out.homotopy_log.is_empty());
    assert_eq!(rep.row.max_energy, 0.0);
}

#[test]
fn tighten_never_raises_slice_energy() {
    let s = Family::TwoPeak { amp: 0.08 }.build(0.1, 9).unwrap();
    let cfg = MinmaxConfig { epsilon: 0.05, ball_budget: 4, ..MinmaxConfig::default() };
    let (out, rep) = tighten(&s, &cfg, &solver(), 1).unwrap();
    for (a, b) in out.energies().iter().zip(s.energies()) {
        assert!(*a <= b + 1e-12);
    }
    assert!(rep.row.max_energy < s.max_energy().0);
    assert!(out.homotopy_log.iter().all(|m| m.energy_after <= m.energy_before + 1e-12));
    if let Some(c) = rep.phi_c {
        assert!(c.is_finite() && c >= 0.0);
    }
}

#[test]
fn width_of_trivial_flat_family_goes_to_zero() {
    let s = Family::FlatBump { amp: 0.05 }.build(0.1, 7).unwrap();
    let cfg = MinmaxConfig { epsilon: 0.5, ball_budget: 4, iteration_budget: 6, reparam_evals: 20, ..MinmaxConfig::default() };
    let out = width(&s, &cfg, &solver(), |_| {}).unwrap();
    let first = out.estimate.per_iteration[0].max_area;
    assert!(out.estimate.w_upper < 0.05 * first.max(1e-12) || out.estimate.w_upper < 1e-6, "{:?}", out.estimate);
    assert!(out.estimate.energy_monotone());
}

#[test]
fn fixed_boundary_width_dominates_endpoint_area() {
    let s = Family::FixedDiskBulge { amp: 0.6 }.build(0.1, 7).unwrap();
    let cfg = MinmaxConfig { epsilon: 0.3, ball_budget: 4, iteration_budget: 3, lambda: 1.05, reparam_evals: 0, ..MinmaxConfig::default() };
    let out = width(&s, &cfg, &solver(), |_| {}).unwrap();
    let end = crate::energy::area_functional(&s.slices[0]);
    assert!(out.estimate.w_upper >= end - 1e-9);
    assert!(out.estimate.energy_monotone());
    let last = &out.sweepout;
    assert!(last.slices[0].bit_equal(&s.slices[0]));
    last.validate(1e-8).unwrap();
}

#[test]
fn archive_round_trip() {
    let s = Family::SphereFold.build(0.2, 5).unwrap();
    let dir = std::env::temp_dir().join(format!("freedisk-archive-{}", std::process::id()));
    s.write_archive(&dir).unwrap();
    let back = Sweepout::read_archive(&dir, s.slices[0].target.clone()).unwrap();
    assert_eq!(back.times, s.times);
    assert!(back.slices.iter().zip(&s.slices).all(|(a, b)| a.bit_equal(b)));
    std::fs::write(dir.join("slice_0001.txt"), "tampered").unwrap();
    assert!(Sweepout::read_archive(&dir, s.slices[0].target.clone()).is_err());
    std::fs::remove_dir_all(&dir).ok();
}
