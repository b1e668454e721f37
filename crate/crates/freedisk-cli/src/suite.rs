//! Randomized inequality suites. `verify` runs them on a scenario target; the acceptance run
//! calls them with the full case counts.

use freedisk::bubbles::{ode_comparison_check, OdeBranch};
use freedisk::constructions::{band_interpolation, cone_extension, modified_band_interpolation, BoundaryTrace};
use freedisk::domain::{build_mesh, DiskMesh, GeneralizedBall, MeshDomain, Role};
use freedisk::energy::{dirichlet_energy, gradient_estimate_check, hardy_check, poincare_half_disk_check, MapOnMesh};
use freedisk::manifold::{ConstraintSubmanifold, EmbeddedManifold};
use freedisk::solver::{
    convexity_check, harmonic_replace, improvement_inequality_check, solve_mixed_harmonic, BoundaryMode, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// One measured case of a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub check: String,
    pub case: usize,
    /// Case parameter (mesh size, sweep value, ...).
    pub param: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub note: String,
}

impl Row {
    fn new(check: &str, case: usize, param: f64) -> Self {
        Row {
            check: check.into(),
            case,
            param,
            lhs: f64::NAN,
            rhs: f64::NAN,
            value: f64::NAN,
            bound: f64::NAN,
            pass: false,
            note: String::new(),
        }
    }

    fn sides(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self
    }

    fn verdict(mut self, value: f64, bound: f64, pass: bool) -> Self {
        self.value = value;
        self.bound = bound;
        self.pass = pass;
        self
    }

    fn failed(mut self, note: impl Into<String>) -> Self {
        self.pass = false;
        self.note = note.into();
        self
    }
}

pub const CSV_HEADER: &str = "check,case,param,lhs,rhs,value,bound,pass,note";

pub fn to_csv(rows: &[Row]) -> String {
    let mut s = format!("# format: 1\n{CSV_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:.6e},{:.12e},{:.12e},{:.12e},{:.6e},{},{}\n",
            r.check,
            r.case,
            r.param,
            r.lhs,
            r.rhs,
            r.value,
            r.bound,
            r.pass,
            r.note.replace(',', ";")
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub rows: usize,
    pub passed: usize,
    pub pass: bool,
}

/// Per-check pass counts in first-seen order.
pub fn summarize(rows: &[Row]) -> Vec<CheckSummary> {
    let mut out: Vec<CheckSummary> = Vec::new();
    for r in rows {
        let i = match out.iter().position(|s| s.check == r.check) {
            Some(i) => i,
            None => {
                out.push(CheckSummary { check: r.check.clone(), rows: 0, passed: 0, pass: true });
                out.len() - 1
            }
        };
        out[i].rows += 1;
        if r.pass {
            out[i].passed += 1;
        } else {
            out[i].pass = false;
        }
    }
    out
}

const MONOMIALS: usize = 9;

fn monomials(p: [f64; 2]) -> [f64; MONOMIALS] {
    let (x, y) = (p[0], p[1]);
    [x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y]
}

/// Cubic polynomial field in the tangent plane of N at a point of Γ. The components normal
/// to Γ carry a factor `y`, so on the chord of D⁺ the field stays tangent to Γ.
#[derive(Debug, Clone)]
struct Field {
    base: Vec<f64>,
    basis: Vec<Vec<f64>>,
    /// Leading basis vectors spanning the tangent space of Γ.
    n_gamma: usize,
    coef: Vec<[f64; MONOMIALS]>,
    constant: Vec<f64>,
}

fn orthonormalize(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) {
    for b in basis.iter() {
        let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        for (x, y) in v.iter_mut().zip(b) {
            *x -= d * y;
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-8 {
        basis.push(v.iter().map(|x| x / norm).collect());
    }
}

fn tangent_frame(target: &ConstraintSubmanifold) -> (Vec<f64>, Vec<Vec<f64>>, usize) {
    let n = target.ambient_dim();
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let base = target.project(&e1);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in target.tangent_basis(&base) {
        orthonormalize(&mut basis, v);
    }
    let n_gamma = basis.len();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        orthonormalize(&mut basis, target.parent.tangent_project(&base, &e));
    }
    (base, basis, n_gamma)
}

impl Field {
    fn random(rng: &mut ChaCha8Rng, target: &ConstraintSubmanifold, amp: f64) -> Self {
        let (base, basis, n_gamma) = tangent_frame(target);
        let scale = amp / (MONOMIALS as f64).sqrt();
        let coef = basis
            .iter()
            .map(|_| {
                let mut c = [0.0; MONOMIALS];
                for x in c.iter_mut() {
                    *x = scale * rng.gen_range(-1.0..1.0);
                }
                c
            })
            .collect();
        let constant = basis.iter().map(|_| 0.2 * amp * rng.gen_range(-1.0..1.0)).collect();
        Field { base, basis, n_gamma, coef, constant }
    }

    fn random_in(rng: &mut ChaCha8Rng, target: &ConstraintSubmanifold, lo: f64, hi: f64) -> Self {
        let amp = rng.gen_range(lo..hi);
        Self::random(rng, target, amp)
    }

    fn scaled(&self, s: f64) -> Self {
        let mut f = self.clone();
        for c in f.coef.iter_mut() {
            for x in c.iter_mut() {
                *x *= s;
            }
        }
        for x in f.constant.iter_mut() {
            *x *= s;
        }
        f
    }

    /// Ambient offset at `p`.
    fn offset(&self, p: [f64; 2]) -> Vec<f64> {
        let m = monomials(p);
        let mut out = vec![0.0; self.base.len()];
        for (j, ((b, c), k)) in self.basis.iter().zip(&self.coef).zip(&self.constant).enumerate() {
            let mut a = k + c.iter().zip(&m).map(|(x, y)| x * y).sum::<f64>();
            if j >= self.n_gamma {
                a *= p[1];
            }
            for (o, bi) in out.iter_mut().zip(b) {
                *o += a * bi;
            }
        }
        out
    }

    fn point(&self, p: [f64; 2]) -> Vec<f64> {
        self.base.iter().zip(self.offset(p)).map(|(b, o)| b + o).collect()
    }
}

/// Builds a map from per-vertex ambient points, projecting onto N and Γ-vertices onto Γ.
fn map_by_vertex(mesh: &Arc<DiskMesh>, target: &Arc<ConstraintSubmanifold>, f: impl Fn(usize, [f64; 2]) -> Vec<f64>) -> MapOnMesh {
    let values: Vec<f64> = mesh.vertices.iter().enumerate().flat_map(|(i, &p)| f(i, p)).collect();
    let mut u = MapOnMesh::new(mesh.clone(), target.clone(), values);
    for i in 0..u.n_vertices() {
        let q = if u.on_gamma(i) {
            u.target.project(u.value(i))
        } else {
            match u.target.parent.project(u.value(i)) {
                Ok(q) => q,
                Err(_) => continue,
            }
        };
        u.value_mut(i).copy_from_slice(&q);
    }
    u
}

fn on_arc(mesh: &DiskMesh, i: usize) -> bool {
    matches!(mesh.roles[i], Role::DirichletArc | Role::Corner)
}

/// Initial map with arc data from `data` and interior values from `inside`.
fn with_data(mesh: &Arc<DiskMesh>, target: &Arc<ConstraintSubmanifold>, data: &Field, inside: &Field) -> MapOnMesh {
    map_by_vertex(mesh, target, |i, p| if on_arc(mesh, i) { data.point(p) } else { inside.point(p) })
}

/// `v = u + (1 - |x|²) G` projected back, with the arc trace copied bitwise.
fn competitor(u: &MapOnMesh, g: &Field) -> MapOnMesh {
    let mesh = u.mesh.clone();
    let mut v = map_by_vertex(&mesh, &u.target, |i, p| {
        let w = (1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0);
        u.value(i).iter().zip(g.offset(p)).map(|(a, b)| a + w * b).collect()
    });
    for i in 0..v.n_vertices() {
        if on_arc(&mesh, i) {
            let src = u.value(i).to_vec();
            v.value_mut(i).copy_from_slice(&src);
        }
    }
    v
}

fn tight(cfg: &SolverConfig) -> SolverConfig {
    SolverConfig { tol_grad: cfg.tol_grad.min(1e-10), ..cfg.clone() }
}

fn half_disk(h: f64) -> Arc<DiskMesh> {
    Arc::new(build_mesh(MeshDomain::HalfDisk, h).expect("valid mesh size"))
}

/// Free-boundary harmonic map on D⁺ with random arc data and energy at most `eps0`.
fn random_harmonic(
    rng: &mut ChaCha8Rng,
    mesh: &Arc<DiskMesh>,
    target: &Arc<ConstraintSubmanifold>,
    eps0: f64,
    cfg: &SolverConfig,
) -> Option<(MapOnMesh, Field)> {
    let mut data = Field::random_in(rng, target, 0.1, 0.5);
    let inside = data.scaled(0.0);
    for _ in 0..8 {
        let sol = solve_mixed_harmonic(&with_data(mesh, target, &data, &inside), BoundaryMode::Free, cfg);
        if sol.telemetry.converged && dirichlet_energy(&sol.map) <= eps0 {
            return Some((sol.map, data));
        }
        data = data.scaled(0.5);
    }
    None
}

/// L² error against the reflection solution on a flat target with Γ a coordinate line, for
/// each mesh size, then the observed orders between consecutive sizes. The second value is
/// the wall time per solve in seconds.
pub fn solver_oracle(hs: &[f64], cfg: &SolverConfig) -> (Vec<Row>, Vec<f64>) {
    fn oracle(p: [f64; 2]) -> Vec<f64> {
        let (r, t) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
        vec![
            0.1 * r * t.cos() + 0.05 * r * r * (2.0 * t).cos(),
            0.1 * r * t.sin() + 0.03 * r.powi(3) * (3.0 * t).sin(),
            -0.04 * r * r * (2.0 * t).sin(),
        ]
    }
    let gamma = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 1));
    let cfg = tight(cfg);
    let mut rows = Vec::new();
    let mut errs = Vec::new();
    let mut times = Vec::new();
    let finest = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    for (k, &h) in hs.iter().enumerate() {
        let mesh = half_disk(h);
        let u0 = MapOnMesh::from_fn(mesh.clone(), gamma.clone(), |p| {
            if p[0].hypot(p[1]) > 1.0 - 1e-9 {
                oracle(p)
            } else {
                vec![0.2 * p[1], 0.0, 0.0]
            }
        });
        let start = std::time::Instant::now();
        let sol = solve_mixed_harmonic(&u0, BoundaryMode::Free, &cfg);
        times.push(start.elapsed().as_secs_f64());
        let err = sol.map.l2_distance(&MapOnMesh::from_fn(mesh, gamma.clone(), oracle));
        errs.push(err);
        let row = Row::new("solver_oracle", k, h);
        let bound = if h <= finest { 1e-3 } else { f64::INFINITY };
        let row = row.verdict(err, bound, sol.telemetry.converged && err < bound);
        rows.push(if sol.telemetry.converged { row } else { row.failed("not converged") });
    }
    for k in 1..hs.len() {
        let order = (errs[k - 1] / errs[k]).ln() / (hs[k - 1] / hs[k]).ln();
        rows.push(Row::new("solver_order", k, hs[k]).sides(errs[k - 1], errs[k]).verdict(order, 1.8, order >= 1.8));
    }
    (rows, times)
}

/// Two solves with the same arc data from independent random interiors.
pub fn uniqueness(target: &Arc<ConstraintSubmanifold>, cases: usize, h: f64, eps0: f64, cfg: &SolverConfig, seed: u64) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0001);
    let mesh = half_disk(h);
    let cfg = tight(cfg);
    (0..cases)
        .map(|case| {
            let row = Row::new("uniqueness", case, h);
            let Some((u, data)) = random_harmonic(&mut rng, &mesh, target, eps0, &cfg) else {
                return row.failed("no small-energy solution");
            };
            let a = Field::random(&mut rng, target, 0.3);
            let b = Field::random(&mut rng, target, 0.3);
            let sa = solve_mixed_harmonic(&with_data(&mesh, target, &data, &a), BoundaryMode::Free, &cfg);
            let sb = solve_mixed_harmonic(&with_data(&mesh, target, &data, &b), BoundaryMode::Free, &cfg);
            let d = sa.map.l2_distance(&sb.map);
            let row = row.sides(dirichlet_energy(&u), eps0);
            if !(sa.telemetry.converged && sb.telemetry.converged) {
                return row.verdict(d, 1e-6, false).failed("not converged");
            }
            row.verdict(d, 1e-6, d < 1e-6)
        })
        .collect()
}

/// Convexity margins of random competitors around small harmonic maps. The bound is
/// `-rel·E(v)`, or `-abs` on flat targets where the energy is exactly quadratic.
pub fn convexity(
    target: &Arc<ConstraintSubmanifold>,
    cases: usize,
    h: f64,
    eps0: f64,
    cfg: &SolverConfig,
    seed: u64,
) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0002);
    let mesh = half_disk(h);
    let cfg = tight(cfg);
    let flat = target.parent.is_flat();
    let per_base = 20;
    let mut rows = Vec::new();
    let mut base: Option<MapOnMesh> = None;
    for case in 0..cases {
        if case % per_base == 0 {
            base = random_harmonic(&mut rng, &mesh, target, eps0, &cfg).map(|(u, _)| u);
        }
        let row = Row::new("convexity", case, h);
        let Some(u) = &base else {
            rows.push(row.failed("no small-energy solution"));
            continue;
        };
        let g = Field::random_in(&mut rng, target, 0.01, 0.4);
        let v = competitor(u, &g);
        rows.push(match convexity_check(u, &v, eps0, 1e-6) {
            Ok(m) => {
                let bound = if flat { -1e-12 } else { -1e-3 * dirichlet_energy(&v) };
                row.sides(m.lhs, m.rhs).verdict(m.margin, bound, m.margin >= bound)
            }
            Err(e) => row.failed(e.to_string()),
        });
    }
    rows
}

/// Hardy and Poincaré ratios for random fields vanishing on the arc of D⁺.
pub fn hardy_poincare(target: &Arc<ConstraintSubmanifold>, cases: usize, h: f64, seed: u64) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0003);
    let mesh = half_disk(h);
    let slack = 1.0 + 5.0 * h;
    let mut rows = Vec::new();
    for case in 0..cases {
        let f = Field::random_in(&mut rng, target, 0.05, 0.4);
        let u = map_by_vertex(&mesh, target, |_, p| f.point(p));
        let g = Field::random_in(&mut rng, target, 0.01, 0.3);
        let v = competitor(&u, &g);
        let row = Row::new("hardy", case, h);
        rows.push(match hardy_check(&u, &v) {
            Ok(r) => row.sides(r.lhs, r.rhs).verdict(r.ratio, slack, r.lhs <= slack * r.rhs),
            Err(e) => row.failed(e.to_string()),
        });
    }
    for case in 0..cases {
        let c: Vec<f64> = (0..MONOMIALS + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let k = rng.gen_range(1..5) as f64;
        let phase = rng.gen_range(0.0..PI);
        let f: Vec<f64> = mesh
            .vertices
            .iter()
            .map(|&p| {
                let w = (1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0);
                let m = monomials(p);
                let poly = c[0] + m.iter().zip(&c[1..]).map(|(a, b)| a * b).sum::<f64>();
                w * (poly + (k * PI * p[0] + phase).sin())
            })
            .collect();
        let (r, bound) = poincare_half_disk_check(&mesh, &f);
        rows.push(Row::new("poincare", case, h).sides(r.lhs, r.rhs).verdict(r.ratio, bound * slack, r.ratio <= bound * slack));
    }
    rows
}

/// Empirical gradient-estimate constant at `h` and `h/2`; passes when the two agree within 10%.
pub fn gradient_estimate(
    target: &Arc<ConstraintSubmanifold>,
    cases: usize,
    h: f64,
    eps0: f64,
    cfg: &SolverConfig,
    seed: u64,
) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0004);
    let (coarse, fine) = (half_disk(h), half_disk(0.5 * h));
    let cfg = tight(cfg);
    (0..cases)
        .map(|case| {
            let row = Row::new("gradient_estimate", case, h);
            let Some((_, data)) = random_harmonic(&mut rng, &coarse, target, eps0, &cfg) else {
                return row.failed("no small-energy solution");
            };
            let mut c = Vec::new();
            for mesh in [&coarse, &fine] {
                let sol = solve_mixed_harmonic(&with_data(mesh, target, &data, &data), BoundaryMode::Free, &cfg);
                match gradient_estimate_check(&sol.map, eps0, 1e-4) {
                    Ok(x) => c.push(x),
                    Err(e) => return row.failed(e.to_string()),
                }
            }
            let rel = (c[0] / c[1] - 1.0).abs();
            row.sides(c[0], c[1]).verdict(rel, 0.1, rel <= 0.1)
        })
        .collect()
}

/// Radii at least `r_min`, so that half-balls still hold mesh vertices.
fn random_ball_above(rng: &mut ChaCha8Rng, r_min: f64) -> GeneralizedBall {
    if rng.gen_bool(1.0 / 3.0) {
        GeneralizedBall::boundary(rng.gen_range(0.0..PI), rng.gen_range(r_min.max(0.1)..0.3))
    } else {
        let r = rng.gen_range(r_min.max(0.08)..0.25);
        let rad = rng.gen_range(0.0..(0.95 - r));
        let phi = rng.gen_range(0.0..PI);
        GeneralizedBall::classical([rad * phi.cos(), rad * phi.sin()], r)
    }
}

fn random_collection(rng: &mut ChaCha8Rng, max: usize) -> Vec<GeneralizedBall> {
    random_collection_above(rng, max, 0.0)
}

fn random_collection_above(rng: &mut ChaCha8Rng, max: usize, r_min: f64) -> Vec<GeneralizedBall> {
    let n = rng.gen_range(1..=max);
    let mut out: Vec<GeneralizedBall> = Vec::new();
    for _ in 0..50 {
        if out.len() == n {
            break;
        }
        let b = random_ball_above(rng, r_min);
        let far = out.iter().all(|o| {
            let (c1, c2) = (b.center(), o.center());
            (c1[0] - c2[0]).hypot(c1[1] - c2[1]) > 1.5 * (b.radius() + o.radius())
        });
        if far {
            out.push(b);
        }
    }
    out
}

/// Monotonicity, locality and the fixed-point property of harmonic replacement.
pub fn replacement(
    target: &Arc<ConstraintSubmanifold>,
    cases: usize,
    h: f64,
    eps0: f64,
    cfg: &SolverConfig,
    seed: u64,
) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0005);
    let mesh = half_disk(h);
    let cfg = tight(cfg);
    let mut rows = Vec::new();
    for case in 0..cases {
        let balls = random_collection(&mut rng, 3);
        let rho = rng.gen_range(0.5..=1.0);
        let mut f = Field::random_in(&mut rng, target, 0.05, 0.4);
        let mut outcome = None;
        for _ in 0..8 {
            let u = map_by_vertex(&mesh, target, |_, p| f.point(p));
            match harmonic_replace(&u, &balls, rho, BoundaryMode::Free, &cfg) {
                Ok(r) => {
                    outcome = Some(Ok((u, r)));
                    break;
                }
                Err(freedisk::Error::EnergyGateExceeded { .. }) => f = f.scaled(0.5),
                Err(e) => {
                    outcome = Some(Err(e));
                    break;
                }
            }
        }
        let (mono, local) = (Row::new("replace_monotone", case, rho), Row::new("replace_locality", case, rho));
        match outcome {
            Some(Ok((u, r))) => {
                let slack = 1e-12 * r.energy_before.max(1e-300);
                rows.push(mono.sides(r.energy_after, r.energy_before).verdict(
                    r.energy_after - r.energy_before,
                    slack,
                    r.energy_after <= r.energy_before + slack,
                ));
                let mut active = vec![false; u.n_vertices()];
                for &i in &r.active {
                    active[i] = true;
                }
                let moved = (0..u.n_vertices())
                    .filter(|&i| !active[i] && u.value(i).iter().zip(r.map.value(i)).any(|(a, b)| a.to_bits() != b.to_bits()))
                    .count();
                rows.push(local.verdict(moved as f64, 0.0, moved == 0));
            }
            Some(Err(e)) => {
                rows.push(mono.failed(e.to_string()));
                rows.push(local.failed(e.to_string()));
            }
            None => {
                rows.push(mono.failed("energy gate"));
                rows.push(local.failed("energy gate"));
            }
        }
        let fixed = Row::new("replace_fixed_point", case, rho);
        rows.push(match random_harmonic(&mut rng, &mesh, target, eps0, &cfg) {
            Some((u, _)) => match harmonic_replace(&u, &balls, rho, BoundaryMode::Free, &cfg) {
                Ok(r) => {
                    let d = r.map.c0_distance(&u);
                    fixed.verdict(d, 1e-6, d <= 1e-6)
                }
                Err(e) => fixed.failed(e.to_string()),
            },
            None => fixed.failed("no small-energy solution"),
        });
    }
    rows
}

/// Improvement inequality at `h` and `h/2` on the same random data, with the smallest
/// empirical constant per mesh and its stability under refinement.
pub fn improvement(
    target: &Arc<ConstraintSubmanifold>,
    cases: usize,
    h: f64,
    eps0: f64,
    cfg: &SolverConfig,
    seed: u64,
) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0006);
    let meshes = [half_disk(h), half_disk(0.5 * h)];
    let cfg = tight(cfg);
    let mut rows = Vec::new();
    let mut k_min = [f64::INFINITY; 2];
    for case in 0..cases {
        let b1 = random_collection_above(&mut rng, 2, 3.0 * h);
        let b2 = random_collection_above(&mut rng, 2, 3.0 * h);
        let mut f = Field::random_in(&mut rng, target, 0.05, 0.3);
        for _ in 0..8 {
            let small = meshes.iter().all(|m| {
                let u = map_by_vertex(m, target, |_, p| f.point(p));
                freedisk::solver::energy_on_balls(&u, &b1, 1.0) <= eps0 / 3.0
                    && freedisk::solver::energy_on_balls(&u, &b2, 1.0) <= eps0 / 3.0
                    && dirichlet_energy(&u) <= eps0
            });
            if small {
                break;
            }
            f = f.scaled(0.5);
        }
        for (m, mesh) in meshes.iter().enumerate() {
            let row = Row::new("improvement", case, mesh.h);
            let u = map_by_vertex(mesh, target, |_, p| f.point(p));
            rows.push(match improvement_inequality_check(&u, &b1, &b2, BoundaryMode::Free, &cfg) {
                Ok(r) => {
                    if let Some(k) = r.k_emp {
                        k_min[m] = k_min[m].min(k);
                    }
                    let ok = !(r.rhs > 0.0 && r.lhs < -1e-12 * dirichlet_energy(&u));
                    row.sides(r.lhs, r.rhs).verdict(r.k_emp.unwrap_or(f64::NAN), 0.0, ok)
                }
                Err(e) => row.failed(e.to_string()),
            });
        }
    }
    for (m, mesh) in meshes.iter().enumerate() {
        let k = k_min[m];
        rows.push(Row::new("improvement_k_min", m, mesh.h).verdict(k, 0.0, k.is_finite() && k > 0.0));
    }
    let spread = k_min[0].max(k_min[1]) / k_min[0].min(k_min[1]);
    rows.push(Row::new("improvement_k_stability", 0, h).sides(k_min[0], k_min[1]).verdict(spread, 2.0, spread <= 2.0));
    rows
}

fn slope_rows(check: &str, xs: &[f64], ys: &[f64], target: f64, rel: f64) -> Vec<Row> {
    (1..xs.len())
        .map(|k| {
            let s = (ys[k - 1] / ys[k]).ln() / (xs[k - 1] / xs[k]).ln();
            Row::new(check, k, xs[k]).sides(ys[k - 1], ys[k]).verdict(s, target, (s - target).abs() <= rel * target)
        })
        .collect()
}

/// Log-log slopes of the constructions on three-point sweeps, each within 15% of its law.
pub fn constructions_scaling() -> Vec<Row> {
    let mut rows = Vec::new();
    let sphere = Arc::new(ConstraintSubmanifold::equator(EmbeddedManifold::sphere(1.0)));
    let flat = Arc::new(ConstraintSubmanifold::coordinate_subtorus(EmbeddedManifold::flat_torus(3), 1));

    let deltas = [0.05, 0.025, 0.0125];
    let cone: Result<Vec<f64>, _> = deltas
        .iter()
        .map(|&d| {
            let f = BoundaryTrace::from_fn(512, |t| {
                let lon = d * t / PI;
                vec![lon.cos(), lon.sin(), 0.0]
            });
            cone_extension(&f, d * 1.001, &sphere, 0.04).map(|c| c.energy)
        })
        .collect();
    match cone {
        Ok(e) => rows.extend(slope_rows("cone_slope", &deltas, &e, 2.0, 0.15)),
        Err(e) => rows.push(Row::new("cone_slope", 0, 0.0).failed(e.to_string())),
    }

    let circle = |a: f64| BoundaryTrace::from_fn(4096, move |t| vec![a * t.cos(), a * t.sin(), 0.0]);
    let lifted = |a: f64, d: f64| BoundaryTrace::from_fn(4096, move |t| vec![a * t.cos(), a * t.sin(), d]);
    let ds = [0.01, 0.0025, 0.000625];
    let band_d: Result<Vec<f64>, _> =
        ds.iter().map(|&d| band_interpolation(&circle(0.3), &lifted(0.3, d), d, &flat, 0.01).map(|c| c.energy)).collect();
    match band_d {
        Ok(e) => rows.extend(slope_rows("band_slope_delta", &ds, &e, 0.5, 0.15)),
        Err(e) => rows.push(Row::new("band_slope_delta", 0, 0.0).failed(e.to_string())),
    }

    let d = 0.0025;
    let amps = [0.1, 0.2, 0.4];
    let band_p: Result<Vec<(f64, f64)>, _> = amps
        .iter()
        .map(|&a| {
            let f = circle(a);
            let dp = f.dirichlet();
            band_interpolation(&f, &lifted(a, d), d, &flat, 0.01).map(|c| (dp, c.energy))
        })
        .collect();
    match band_p {
        Ok(v) => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            rows.extend(slope_rows("band_slope_delta_prime", &xs, &ys, 0.5, 0.15));
        }
        Err(e) => rows.push(Row::new("band_slope_delta_prime", 0, 0.0).failed(e.to_string())),
    }

    let base = BoundaryTrace::from_fn(4096, |t| vec![0.05 * t.cos(), 0.05 * (2.0 * t).sin(), 0.0]);
    let ds = [0.02, 0.01, 0.005];
    let arcs: Result<Vec<f64>, _> = ds
        .iter()
        .map(|&d| {
            let g = BoundaryTrace::from_fn(4096, |t| vec![0.05 * t.cos() + d * t.cos(), 0.05 * (2.0 * t).sin(), d * t.sin()]);
            modified_band_interpolation(&base, &g, d * 1.0001, &flat, 0.02).map(|c| c.arc_energy.unwrap_or(f64::NAN))
        })
        .collect();
    match arcs {
        Ok(e) => rows.extend(slope_rows("modified_band_arc_slope", &ds, &e, 2.0, 0.15)),
        Err(e) => rows.push(Row::new("modified_band_arc_slope", 0, 0.0).failed(e.to_string())),
    }
    rows
}

/// ODE comparison lemma on closed-form profiles.
pub fn ode_lemma() -> Vec<Row> {
    let mut rows = Vec::new();
    let (c, a, l) = (0.8, 0.5, 4.0);
    let n = 4001;
    let t: Vec<f64> = (0..n).map(|k| -2.0 * l + 4.0 * l * k as f64 / (n - 1) as f64).collect();
    let s = (4.0 * c as f64).sqrt();
    let f: Vec<f64> = t.iter().map(|x| 8.0 * c * a * (x / s).cosh()).collect();
    let v = ode_comparison_check(&t, &f, c, a, l);
    let exact = 8.0 * c * a * 2.0 * s * (2.0 * l / s).sinh();
    let rel = (v.integral / exact - 1.0).abs();
    rows.push(Row::new("ode_cosh_integral", 0, l).sides(v.integral, exact).verdict(rel, 1e-5, rel < 1e-5));
    rows.push(Row::new("ode_cosh_bound", 0, l).sides(v.integral, v.bound).verdict(
        v.integral / v.bound,
        1.0,
        v.inequality_holds && v.branch == OdeBranch::LargeMax && v.bound_holds == Some(true),
    ));
    let t: Vec<f64> = (0..401).map(|k| -8.0 + 0.04 * k as f64).collect();
    let zero = vec![0.0; t.len()];
    let v = ode_comparison_check(&t, &zero, 1.0, 0.3, 4.0);
    rows.push(Row::new("ode_zero", 0, 4.0).verdict(v.max_middle, 8.0 * 0.3, v.inequality_holds && v.branch == OdeBranch::SmallMax));
    let bump: Vec<f64> = t.iter().map(|x| 0.01 * (-x * x).exp()).collect();
    let v = ode_comparison_check(&t, &bump, 1.0, 10.0, 4.0);
    rows.push(Row::new("ode_small_bump", 0, 4.0).verdict(
        v.max_middle,
        80.0,
        v.inequality_holds && v.branch == OdeBranch::SmallMax && v.bound_holds.is_none(),
    ));
    rows
}
