//! Subcommands, artifact writing and the `run.json` provenance record.

use crate::scenario::{Scenario, SequenceSpec};
use crate::suite;
use clap::{Parser, Subcommand};
use freedisk::bubbles::{
    extract_tree, sequences, varifold_distance, TestDictionary, TreeReport, VarifoldMeasure,
};
use freedisk::energy::{energy_csv, EnergyReport, MapOnMesh};
use freedisk::minmax::{sha256_hex, tighten, width, EndpointMode, Sweepout};
use freedisk::solver::{harmonic_replace, solve_mixed_harmonic};
use freedisk::{Error, Result};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Parser)]
#[command(name = "freedisk", version, about = "Free-boundary harmonic disks, min-max widths and bubble trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the scenario's `output`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Solver gradient tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Tightening iteration budget.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Worker threads for per-slice work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write the scenario mesh.
    Mesh,
    /// Solve the mixed problem from the family slice at `slice_time`.
    Solve,
    /// Harmonic replacement on the configured balls.
    Replace,
    /// Inequality suite with a CSV of ratios.
    Verify,
    /// One tightening iteration of the initial family.
    Tighten,
    /// Full width pipeline.
    Width,
    /// Bubble-tree analysis of an archived sequence, or of the scenario's constructed one.
    Bubbles {
        /// Archive directory written by `width` or `tighten`.
        archive: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::Solve => "solve",
            Command::Replace => "replace",
            Command::Verify => "verify",
            Command::Tighten => "tighten",
            Command::Width => "width",
            Command::Bubbles { .. } => "bubbles",
        }
    }
}

struct Ctx {
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn write(&self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, text)?;
        Ok(())
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn config_error(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.into(), reason: reason.into() }
}

/// Loads the config and applies the command-line overrides.
pub fn load(cli: &Cli) -> Result<Scenario> {
    let path = cli.config.as_ref().ok_or_else(|| config_error("--config", "missing"))?;
    let mut s = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(tol) = cli.tol {
        s.solver.tol_grad = tol;
    }
    if let Some(b) = cli.budget {
        s.minmax.iteration_budget = b;
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(config_error("--jobs", "must be at least 1"));
        }
        s.minmax.jobs = j;
    }
    s.validate()?;
    Ok(s)
}

/// Runs one subcommand and returns the process exit code: 0 success, 2 config error, 3
/// numerical failure (partial artifacts are kept).
pub fn run(cli: &Cli) -> i32 {
    let start = Instant::now();
    let scenario = match load(cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("freedisk: {e}");
            return 2;
        }
    };
    let out = cli.out.clone().or_else(|| scenario.output.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("freedisk: cannot create {}: {e}", out.display());
        return 3;
    }
    let ctx = Ctx { out, quiet: cli.quiet };
    let config_json = scenario.to_json();
    let result = ctx.write("scenario.json", &(config_json.clone() + "\n")).and_then(|_| match &cli.command {
        Command::Mesh => mesh(&ctx, &scenario),
        Command::Solve => solve(&ctx, &scenario),
        Command::Replace => replace(&ctx, &scenario),
        Command::Verify => verify(&ctx, &scenario),
        Command::Tighten => tighten_once(&ctx, &scenario),
        Command::Width => width_pipeline(&ctx, &scenario),
        Command::Bubbles { archive } => bubbles(&ctx, &scenario, archive.as_deref()),
    });
    let code = match &result {
        Ok(()) => 0,
        Err(Error::Config { .. }) => 2,
        Err(_) => 3,
    };
    if let Err(e) = &result {
        eprintln!("freedisk: {e}");
    }
    let record = json!({
        "format": 1,
        "command": cli.command.name(),
        "config_sha256": sha256_hex(config_json.as_bytes()),
        "seed": scenario.seed,
        "versions": { "freedisk": env!("CARGO_PKG_VERSION"), "freedisk-cli": env!("CARGO_PKG_VERSION") },
        "wall_time_s": start.elapsed().as_secs_f64(),
        "exit_code": code,
        "error": result.as_ref().err().map(|e| e.to_string()),
        "artifacts": artifact_hashes(&ctx.out),
    });
    if let Err(e) = ctx.write_json("run.json", &record) {
        eprintln!("freedisk: cannot write run.json: {e}");
        return 3;
    }
    code
}

fn list_files(dir: &Path, rel: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = std::fs::read_dir(dir) else { return };
    for e in entries.flatten() {
        let p = e.path();
        let r = rel.join(e.file_name());
        if p.is_dir() {
            list_files(&p, &r, out);
        } else {
            out.push(r);
        }
    }
}

/// `(relative path, sha256)` of every artifact except `run.json`, sorted by path.
pub fn artifact_hashes(dir: &Path) -> Vec<(String, String)> {
    let mut files = Vec::new();
    list_files(dir, Path::new(""), &mut files);
    files.sort();
    files
        .into_iter()
        .filter(|f| f != Path::new("run.json"))
        .filter_map(|f| {
            let bytes = std::fs::read(dir.join(&f)).ok()?;
            Some((f.to_string_lossy().replace('\\', "/"), sha256_hex(&bytes)))
        })
        .collect()
}

fn mesh(ctx: &Ctx, s: &Scenario) -> Result<()> {
    let m = s.mesh()?;
    ctx.write("mesh.txt", &m.to_text())?;
    ctx.write_json(
        "mesh.json",
        &json!({
            "format": 1,
            "domain": m.domain.to_string(),
            "h": m.h,
            "n_vertices": m.n_vertices(),
            "n_triangles": m.n_triangles(),
            "area": m.total_area(),
            "min_angle": m.min_angle(),
            "conforming": m.is_conforming(),
        }),
    )
}

fn family_sweepout(s: &Scenario) -> Result<Sweepout> {
    let family = s.family()?;
    family.build_on(Arc::new(s.mesh()?), Arc::new(s.target()?), s.slices)
}

fn initial_slice(s: &Scenario) -> Result<(f64, MapOnMesh)> {
    let g = family_sweepout(s)?;
    let k = (0..g.len())
        .min_by(|&a, &b| (g.times[a] - s.slice_time).abs().total_cmp(&(g.times[b] - s.slice_time).abs()))
        .expect("at least two slices");
    Ok((g.times[k], g.slices[k].clone()))
}

fn solve(ctx: &Ctx, s: &Scenario) -> Result<()> {
    let (t, u) = initial_slice(s)?;
    ctx.note(&format!("solve: slice t = {t}, {} vertices", u.n_vertices()));
    let sol = solve_mixed_harmonic(&u, s.boundary_mode(), &s.solver_config());
    ctx.write("solution.txt", &sol.map.to_text())?;
    ctx.write("energy.csv", &energy_csv(&[(t, EnergyReport::of(&sol.map))]))?;
    ctx.write_json("telemetry.json", &sol.telemetry)?;
    ctx.note(&format!("solve: {} iterations, energy {:.6}", sol.telemetry.iterations, freedisk::energy::dirichlet_energy(&sol.map)));
    match sol.error() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn replace(ctx: &Ctx, s: &Scenario) -> Result<()> {
    if s.balls.is_empty() {
        return Err(config_error("balls", "replace needs at least one ball"));
    }
    let (t, u) = initial_slice(s)?;
    let r = harmonic_replace(&u, &s.balls, s.rho, s.boundary_mode(), &s.solver_config())?;
    ctx.write("replaced.txt", &r.map.to_text())?;
    ctx.write("energy.csv", &energy_csv(&[(t, EnergyReport::of(&u)), (t, EnergyReport::of(&r.map))]))?;
    ctx.write_json(
        "replace.json",
        &json!({
            "format": 1,
            "t": t,
            "energy_before": r.energy_before,
            "energy_after": r.energy_after,
            "gate_energy": r.gate_energy,
            "active_vertices": r.active.len(),
            "telemetry": r.telemetry,
        }),
    )?;
    ctx.note(&format!("replace: energy {:.6} -> {:.6}", r.energy_before, r.energy_after));
    if !r.telemetry.converged {
        return Err(Error::NonConvergence { iterations: r.telemetry.iterations, residual: r.telemetry.grad_norm });
    }
    Ok(())
}

/// Rows of the verification suite for a scenario.
pub fn verify_rows(s: &Scenario, mut progress: impl FnMut(&str)) -> Result<Vec<suite::Row>> {
    let target = Arc::new(s.target()?);
    let cfg = s.solver_config();
    let (n, h, eps0, seed) = (s.verify.cases, s.verify.h, s.thresholds.epsilon0, s.seed);
    let mut rows = Vec::new();
    progress("solver oracle");
    rows.extend(suite::solver_oracle(&[0.08, 0.04, 0.02], &cfg).0);
    progress("uniqueness");
    rows.extend(suite::uniqueness(&target, n, h, eps0, &cfg, seed));
    progress("convexity");
    rows.extend(suite::convexity(&target, n, h, eps0, &cfg, seed));
    progress("hardy and poincare");
    rows.extend(suite::hardy_poincare(&target, n, h, seed));
    progress("gradient estimate");
    rows.extend(suite::gradient_estimate(&target, n.min(5), h, eps0, &cfg, seed));
    progress("replacement");
    rows.extend(suite::replacement(&target, n, h, eps0, &cfg, seed));
    progress("improvement");
    // k_emp squares a half-ball energy drop, which needs a finer mesh than the other checks.
    rows.extend(suite::improvement(&target, n, h.min(0.04), eps0, &cfg, seed));
    progress("constructions");
    rows.extend(suite::constructions_scaling());
    progress("ode lemma");
    rows.extend(suite::ode_lemma());
    Ok(rows)
}

fn verify(ctx: &Ctx, s: &Scenario) -> Result<()> {
    let rows = verify_rows(s, |name| ctx.note(&format!("verify: {name}")))?;
    ctx.write("verify.csv", &suite::to_csv(&rows))?;
    let checks = suite::summarize(&rows);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect();
    ctx.write_json("verify.json", &json!({ "format": 1, "pass": failed.is_empty(), "checks": checks }))?;
    for c in &checks {
        ctx.note(&format!("{:28} {}/{}", c.check, c.passed, c.rows));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::GateViolation(format!("verify: failed checks {}", failed.join(" "))))
    }
}

fn sweepout_csv(g: &Sweepout) -> String {
    let rows: Vec<(f64, EnergyReport)> = g.times.iter().zip(&g.slices).map(|(t, u)| (*t, EnergyReport::of(u))).collect();
    energy_csv(&rows)
}

fn tighten_once(ctx: &Ctx, s: &Scenario) -> Result<()> {
    let g = family_sweepout(s)?;
    let (next, report) = tighten(&g, &s.minmax_config(), &s.solver_config(), 1)?;
    ctx.write("energy.csv", &sweepout_csv(&next))?;
    ctx.write_json("tighten.json", &json!({ "format": 1, "report": report }))?;
    next.write_archive(&ctx.out.join("sweepout"))?;
    ctx.note(&format!("tighten: max energy {:.6}, max area {:.6}", report.row.max_energy, report.row.max_area));
    Ok(())
}

fn write_sequence(dir: &Path, slices: &[MapOnMesh]) -> Result<()> {
    let n = slices.len().max(2) - 1;
    let g = Sweepout {
        times: (0..slices.len()).map(|k| k as f64 / n as f64).collect(),
        slices: slices.to_vec(),
        endpoint_mode: EndpointMode::FreeHomotopy,
        homotopy_log: Vec::new(),
    };
    g.write_archive(dir)
}

fn tree_json(seq: &[MapOnMesh], s: &Scenario) -> (serde_json::Value, Option<Error>) {
    let cfg = s.bubbles_config();
    match extract_tree(seq, &cfg) {
        Ok(tree) => {
            let report = TreeReport::new(&tree, cfg.identity_tol);
            let last = seq.last().expect("non-empty sequence");
            let radius = last.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let dict = TestDictionary::new(last.dim, radius);
            let d = varifold_distance(&tree.varifold(), &VarifoldMeasure::of(last), &dict);
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["varifold_distance_to_last"] = json!(d);
            (v, None)
        }
        Err(e) => (json!({ "format": 1, "error": e.to_string() }), Some(e)),
    }
}

fn width_pipeline(ctx: &Ctx, s: &Scenario) -> Result<()> {
    let g = family_sweepout(s)?;
    let outcome = width(&g, &s.minmax_config(), &s.solver_config(), |row| {
        ctx.note(&format!("width: iteration {} max area {:.6} max energy {:.6}", row.iteration, row.max_area, row.max_energy));
    })?;
    ctx.write("width.csv", &outcome.estimate.to_csv())?;
    ctx.write("energy.csv", &sweepout_csv(&outcome.sweepout))?;
    ctx.write_json(
        "certificates.json",
        &json!({
            "format": 1,
            "status": outcome.status,
            "w_upper": outcome.estimate.w_upper,
            "energy_width": outcome.estimate.energy_width,
            "energy_monotone": outcome.estimate.energy_monotone(),
            "iterations": outcome.reports.len(),
            "certificates": outcome.certificates,
        }),
    )?;
    ctx.write_json("tighten.json", &json!({ "format": 1, "reports": outcome.reports }))?;
    outcome.sweepout.write_archive(&ctx.out.join("sweepout"))?;
    write_sequence(&ctx.out.join("minmax_sequence"), &outcome.argmax_slices)?;
    let (tree, _) = tree_json(&outcome.argmax_slices, s);
    ctx.write_json("bubbles.json", &tree)?;
    match outcome.error() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn constructed(which: &SequenceSpec, h: f64) -> Result<Vec<MapOnMesh>> {
    match which {
        SequenceSpec::Hemisphere { lambdas, angle } => sequences::hemisphere_sequence(h, lambdas, *angle),
        SequenceSpec::TwoBubble { lambdas, angle } => sequences::two_bubble_sequence(h, lambdas, *angle),
        SequenceSpec::ConformalNeck { lengths, neck_energy, tau_min, n_theta } => {
            Ok(sequences::conformal_neck_sequence(&sequences::neck_mesh(*tau_min, *n_theta), lengths, *neck_energy))
        }
        SequenceSpec::TwoDisk { lambdas, amplitude, angle } => sequences::two_disk_sequence(h, lambdas, *amplitude, *angle),
    }
}

fn bubbles(ctx: &Ctx, s: &Scenario, archive: Option<&Path>) -> Result<()> {
    let seq = match (archive, &s.sequence) {
        (Some(dir), _) => Sweepout::read_archive(dir, Arc::new(s.target()?))?.slices,
        (None, Some(which)) => constructed(which, s.h)?,
        (None, None) => return Err(config_error("sequence", "give an archive directory or a constructed sequence")),
    };
    if seq.is_empty() {
        return Err(Error::Parse("empty sequence".into()));
    }
    ctx.note(&format!("bubbles: {} maps", seq.len()));
    let (tree, err) = tree_json(&seq, s);
    ctx.write_json("bubbles.json", &tree)?;
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
