use super::*;
use crate::manifold::EmbeddedManifold;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn flat_gamma(scale: f64) -> Arc<ConstraintSubmanifold> {
    Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus_with_lattice(vec![scale; 3]), 1))
}

fn simpson(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let s: f64 = (0..=n).map(|k| f(a + k as f64 * h) * if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    s * h / 3.0
}

type Curve = fn(f64) -> [f64; 3];

// Energy of the linear interpolation w = f + s(g - f), s = (r - a)/(b - a), on the half band
// a ≤ r ≤ b, from the radial integrals of s^k / r.
fn flat_band_energy(f: Curve, df: Curve, g: Curve, dg: Curve, a: f64, b: f64) -> f64 {
    let rho = b - a;
    let l = (b / a).ln();
    let i0 = l;
    let i1 = (rho - a * l) / rho;
    let i2 = (0.5 * (b * b - a * a) - 2.0 * a * rho + a * a * l) / (rho * rho);
    let d3 = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let sub = |x: [f64; 3], y: [f64; 3]| [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    simpson(4000, 0.0, PI, |t| {
        let (fv, gv, fp, gp) = (f(t), g(t), df(t), dg(t));
        let dv = sub(gv, fv);
        let dp = sub(gp, fp);
        d3(dv, dv) / (rho * rho) * 0.5 * (b * b - a * a) + d3(fp, fp) * i0 + 2.0 * d3(fp, dp) * i1 + d3(dp, dp) * i2
    }) * 0.5
}

fn trace(f: Curve) -> BoundaryTrace {
    BoundaryTrace::from_fn(4096, |t| f(t).to_vec())
}

#[test]
fn cone_over_constant_is_constant() {
    let gamma = flat_gamma(1.0);
    let f = BoundaryTrace::from_fn(64, |_| vec![0.2, 0.0, 0.0]);
    let c = cone_extension(&f, 0.1, &gamma, 0.1).unwrap();
    assert!(c.energy < 1e-28);
}

#[test]
fn flat_cone_energy_matches_closed_form() {
    let gamma = flat_gamma(10.0);
    let a = 0.05;
    let f = BoundaryTrace::from_fn(2048, |t| vec![a * t, 0.0, 0.0]);
    let c = cone_extension(&f, 1.0, &gamma, 0.02).unwrap();
    // ½∫∫(|f|² + |f'|²) r dr dθ with f = aθ.
    let exact = 0.25 * a * a * (PI.powi(3) / 3.0 + PI);
    assert!((c.energy - exact).abs() < 1e-3 * exact, "{} vs {exact}", c.energy);
    assert!(gamma_defect(&c.map) < 1e-12);
}

#[test]
fn cone_rejects_long_traces_and_off_gamma_endpoints() {
    let gamma = flat_gamma(1.0);
    let f = BoundaryTrace::from_fn(64, |t| vec![0.05 * t, 0.0, 0.0]);
    assert!(matches!(cone_extension(&f, 0.01, &gamma, 0.1), Err(Error::TraceTooLong { .. })));
    let g = BoundaryTrace::from_fn(64, |t| vec![0.0, 0.01 + 0.0 * t, 0.0]);
    assert!(matches!(cone_extension(&g, 1.0, &gamma, 0.1), Err(Error::TraceOffGamma(_))));
}

#[test]
fn sphere_cone_energy_scales_quadratically() {
    let gamma = Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)));
    let energies: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&d| {
            let f = BoundaryTrace::from_fn(512, |t| {
                let lon = d * t / PI;
                vec![lon.cos(), lon.sin(), 0.0]
            });
            cone_extension(&f, d * 1.001, &gamma, 0.04).unwrap().energy
        })
        .collect();
    for w in energies.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }
}

fn f1(t: f64) -> [f64; 3] {
    [0.05 * t.cos(), 0.05 * (2.0 * t).sin(), 0.0]
}
fn df1(t: f64) -> [f64; 3] {
    [-0.05 * t.sin(), 0.1 * (2.0 * t).cos(), 0.0]
}
fn g1(t: f64) -> [f64; 3] {
    let f = f1(t);
    [f[0] + 0.01 * t.sin(), f[1] + 0.01 * (3.0 * t).cos(), 0.01]
}
fn dg1(t: f64) -> [f64; 3] {
    let f = df1(t);
    [f[0] + 0.01 * t.cos(), f[1] - 0.03 * (3.0 * t).sin(), 0.0]
}

#[test]
fn flat_band_matches_quadrature() {
    let gamma = flat_gamma(1.0);
    let (f, g) = (trace(f1), trace(g1));
    let delta = f.sup_distance(&g);
    let c = band_interpolation(&f, &g, delta, &gamma, 0.01).unwrap();
    let exact = flat_band_energy(f1, df1, g1, dg1, 1.0 - c.rho, 1.0);
    assert!((c.energy - exact).abs() < 1e-3 * exact, "{} vs {exact}", c.energy);
}

#[test]
fn band_energy_follows_square_root_law() {
    let gamma = flat_gamma(1.0);
    let f = trace(|t| [0.3 * t.cos(), 0.3 * t.sin(), 0.0]);
    let e: Vec<f64> = [0.01, 0.0025]
        .iter()
        .map(|&d| {
            let g = BoundaryTrace::from_fn(4096, |t| vec![0.3 * t.cos(), 0.3 * t.sin(), d]);
            band_interpolation(&f, &g, d, &gamma, 0.01).unwrap().energy
        })
        .collect();
    let ratio = e[0] / e[1];
    assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
}

#[test]
fn equal_traces_give_small_band() {
    let gamma = flat_gamma(1.0);
    let f = trace(f1);
    let mut last = f64::INFINITY;
    for d in [1e-4, 1e-6, 1e-8] {
        let c = band_interpolation(&f, &f, d, &gamma, 0.01).unwrap();
        assert!(c.energy <= c.rho * f.dirichlet() && c.energy < last);
        last = c.energy;
    }
}

#[test]
fn modified_band_area_matches_closed_form() {
    for (a, b) in [(0.5, 1.0), (0.8, 1.0), (0.95, 1.0)] {
        let mb = ModifiedBand::new(a, b);
        let (c, r) = (mb.centre(), mb.disk_radius());
        let exact = 0.5 * PI * (b * b - a * a) - c * PI * r * r;
        assert!((mb.area_quadrature(32) - exact).abs() < 1e-6);
        let (mesh, _) = mb.mesh(0.01);
        assert!((mesh.total_area() - exact).abs() < 2e-3 * exact);
        assert!(mesh.is_conforming());
    }
}

#[test]
fn modified_band_arc_energy() {
    let gamma = flat_gamma(1.0);
    let f = BoundaryTrace::from_fn(64, |_| vec![0.1, 0.2, 0.0]);
    let c = modified_band_interpolation(&f, &f, 1e-6, &gamma, 0.05).unwrap();
    assert!(c.arc_energy.unwrap() < 1e-20);
    let arcs: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&d| {
            let base = trace(f1);
            let g = BoundaryTrace::from_fn(4096, |t| {
                let p = f1(t);
                vec![p[0] + d * t.cos(), p[1], p[2] + d * t.sin()]
            });
            modified_band_interpolation(&base, &g, d * 1.0001, &gamma, 0.02).unwrap().arc_energy.unwrap()
        })
        .collect();
    for w in arcs.windows(2) {
        assert!(((w[0] / w[1]).log2() - 2.0).abs() < 0.05);
    }
    // Linear interpolation along a removed arc: |g(0) - f(0)|² π/8 per side.
    assert!((arcs[2] - 2.0 * 0.005f64.powi(2) * PI / 8.0).abs() < 1e-8);
}

fn f2(t: f64) -> [f64; 3] {
    [0.03 * t, 0.02 * t.sin(), 0.01 * (2.0 * t).sin()]
}
fn df2(t: f64) -> [f64; 3] {
    [0.03, 0.02 * t.cos(), 0.02 * (2.0 * t).cos()]
}
fn g2(t: f64) -> [f64; 3] {
    let f = f2(t);
    [f[0] + 0.005 * (1.0 - t.cos()), f[1] + 0.004 * t.sin(), f[2] + 0.003 * (3.0 * t).sin()]
}
fn dg2(t: f64) -> [f64; 3] {
    let f = df2(t);
    [f[0] + 0.005 * t.sin(), f[1] + 0.004 * t.cos(), f[2] + 0.009 * (3.0 * t).cos()]
}

#[test]
fn flat_fermi_interpolation_matches_closed_form() {
    let gamma = flat_gamma(10.0);
    let (f, g) = (trace(f2), trace(g2));
    let c = fermi_interpolation(&f, &g, 1.0, &gamma, 0.01).unwrap();
    let exact = flat_band_energy(f2, df2, g2, dg2, 1.0 - c.rho, 1.0);
    assert!((c.energy - exact).abs() < 1e-3 * exact, "{} vs {exact}", c.energy);
    assert!(gamma_defect(&c.map) < 1e-12);
}

#[test]
fn fermi_interpolation_of_equal_traces_is_nearly_free() {
    let gamma = flat_gamma(10.0);
    let f = trace(f2);
    let c = fermi_interpolation(&f, &f, 1.0, &gamma, 0.01).unwrap();
    assert!(c.energy < 0.01 * f.dirichlet());
}

#[test]
fn fermi_gates() {
    let gamma = flat_gamma(1.0);
    let f = trace(f2);
    let far = BoundaryTrace::from_fn(4096, |t| {
        let p = f2(t);
        vec![p[0] + 0.01, p[1], p[2]]
    });
    assert!(matches!(fermi_interpolation(&f, &far, 1.0, &gamma, 0.05), Err(Error::GateViolation(_))));
    let wild = BoundaryTrace::from_fn(4096, |t| vec![0.2 * t, 0.0, 0.0]);
    assert!(matches!(fermi_interpolation(&wild, &wild, 1.0, &gamma, 0.05), Err(Error::GateViolation(_))));
}

#[test]
fn wirtinger_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let c: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = rng.gen_range(0.0..PI);
        let p = |t: f64| (0..4).map(|k| c[2 * k] * ((k + 1) as f64 * t).cos() + c[2 * k + 1] * ((k + 1) as f64 * t).sin()).sum::<f64>();
        let f = BoundaryTrace::from_fn(2048, |t| vec![t.sin(), t.cos()]);
        let g = BoundaryTrace::from_fn(2048, |t| vec![t.sin() + p(t) - p(s), t.cos()]);
        let (lhs, rhs) = wirtinger_check(&f, &g);
        assert!(lhs <= rhs);
    }
}
