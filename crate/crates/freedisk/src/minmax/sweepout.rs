use crate::energy::{area_functional, dirichlet_energy, MapOnMesh};
use crate::error::{Error, Result};
use crate::manifold::ConstraintSubmanifold;
use crate::domain::DiskMesh;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::sync::Arc;

/// How the ends of a sweepout are pinned.
#[derive(Debug, Clone)]
pub enum EndpointMode {
    /// Both end slices are constant maps.
    FreeHomotopy,
    /// End slices equal two given maps (typically minimizers) and ∂D is clamped.
    FixedBoundary { v0: Arc<MapOnMesh>, v1: Arc<MapOnMesh> },
}

impl EndpointMode {
    pub fn name(&self) -> &'static str {
        match self {
            EndpointMode::FreeHomotopy => "free_homotopy",
            EndpointMode::FixedBoundary { .. } => "fixed_boundary",
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, EndpointMode::FixedBoundary { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Mollify,
    Reparametrize,
    Replace,
    Perturb,
}

/// One logged deformation of one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyMove {
    pub iteration: usize,
    pub kind: MoveKind,
    pub slice: usize,
    pub energy_before: f64,
    pub energy_after: f64,
    pub detail: String,
}

/// A sampled one-parameter family of disk maps with boundary on Γ.
#[derive(Debug, Clone)]
pub struct Sweepout {
    pub times: Vec<f64>,
    pub slices: Vec<MapOnMesh>,
    pub endpoint_mode: EndpointMode,
    pub homotopy_log: Vec<HomotopyMove>,
}

/// Largest adjacent-slice distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Continuity {
    pub c0: f64,
    pub w12: f64,
}

pub(crate) fn w12_distance(a: &MapOnMesh, b: &MapOnMesh) -> f64 {
    (a.l2_distance(b).powi(2) + a.h1_seminorm_distance(b).powi(2)).sqrt()
}

fn is_constant(u: &MapOnMesh, tol: f64) -> bool {
    let c = u.value(0);
    (0..u.n_vertices()).all(|i| crate::vec::dist(u.value(i), c) <= tol)
}

impl Sweepout {
    pub fn new(times: Vec<f64>, slices: Vec<MapOnMesh>, endpoint_mode: EndpointMode) -> Result<Self> {
        let s = Sweepout { times, slices, endpoint_mode, homotopy_log: Vec::new() };
        s.validate(1e-8)?;
        Ok(s)
    }

    /// Checks sampling, endpoint conventions and `u(∂D) ⊂ Γ`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let bad = |m: String| Err(Error::GateViolation(format!("sweepout: {m}")));
        if self.times.len() != self.slices.len() || self.times.len() < 2 {
            return bad("need at least two slices, one per time".into());
        }
        if self.times[0] != 0.0 || *self.times.last().unwrap() != 1.0 || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("times must increase from 0 to 1".into());
        }
        let (first, last) = (&self.slices[0], self.slices.last().unwrap());
        match &self.endpoint_mode {
            EndpointMode::FreeHomotopy => {
                if !is_constant(first, tol) || !is_constant(last, tol) {
                    return bad("end slices must be constant".into());
                }
            }
            EndpointMode::FixedBoundary { v0, v1 } => {
                if first.c0_distance(v0) > tol || last.c0_distance(v1) > tol {
                    return bad("end slices must equal the fixed endpoints".into());
                }
            }
        }
        for (k, u) in self.slices.iter().enumerate() {
            let off = (0..u.n_vertices()).filter(|&i| u.on_gamma(i)).map(|i| u.target.distance(u.value(i))).fold(0.0, f64::max);
            if off > tol.max(1e-6) {
                return bad(format!("slice {k} leaves Γ by {off:.3e}"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.slices.iter().map(dirichlet_energy).collect()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.slices.iter().map(area_functional).collect()
    }

    /// `(max energy, argmax index)`.
    pub fn max_energy(&self) -> (f64, usize) {
        argmax(&self.energies())
    }

    pub fn continuity(&self) -> Continuity {
        let mut c = Continuity { c0: 0.0, w12: 0.0 };
        for w in self.slices.windows(2) {
            c.c0 = c.c0.max(w[0].c0_distance(&w[1]));
            c.w12 = c.w12.max(w12_distance(&w[0], &w[1]));
        }
        c
    }

    pub fn log(&mut self, mv: HomotopyMove) {
        self.homotopy_log.push(mv);
    }

    /// Writes `slice_XXXX.txt` (mesh block then values block) per slice and `manifest.json`.
    pub fn write_archive(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (k, u) in self.slices.iter().enumerate() {
            let name = format!("slice_{k:04}.txt");
            let text = u.to_text();
            std::fs::write(dir.join(&name), &text)?;
            files.push(ManifestSlice { file: name, t: self.times[k], sha256: sha256_hex(text.as_bytes()) });
        }
        let manifest = Manifest {
            format: 1,
            endpoint_mode: self.endpoint_mode.name().to_string(),
            target: self.slices[0].target.name(),
            slices: files,
            homotopy_log: self.homotopy_log.clone(),
        };
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }

    /// Reads an archive written by [`Sweepout::write_archive`], verifying hashes. Slices
    /// share the mesh of the first file when the mesh blocks agree.
    pub fn read_archive(dir: &Path, target: Arc<ConstraintSubmanifold>) -> Result<Sweepout> {
        let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
        if manifest.format != 1 {
            return Err(Error::Parse(format!("manifest: unsupported format {}", manifest.format)));
        }
        let mut slices: Vec<MapOnMesh> = Vec::new();
        let mut times = Vec::new();
        let mut shared: Option<(String, Arc<DiskMesh>)> = None;
        for s in &manifest.slices {
            let text = std::fs::read_to_string(dir.join(&s.file))?;
            if sha256_hex(text.as_bytes()) != s.sha256 {
                return Err(Error::Parse(format!("manifest: hash mismatch for {}", s.file)));
            }
            let split = text.find("\nmap ").ok_or_else(|| Error::Parse(format!("{}: no values block", s.file)))?;
            let mesh_text = &text[..split + 1];
            let mesh = match &shared {
                Some((t, m)) if t == mesh_text => m.clone(),
                _ => {
                    let m = Arc::new(DiskMesh::from_text(mesh_text)?);
                    shared = Some((mesh_text.to_string(), m.clone()));
                    m
                }
            };
            slices.push(MapOnMesh::values_from_text(&text[split + 1..], mesh, target.clone())?);
            times.push(s.t);
        }
        let mode = match manifest.endpoint_mode.as_str() {
            "free_homotopy" => EndpointMode::FreeHomotopy,
            "fixed_boundary" => EndpointMode::FixedBoundary {
                v0: Arc::new(slices[0].clone()),
                v1: Arc::new(slices.last().unwrap().clone()),
            },
            m => return Err(Error::Parse(format!("manifest: unknown endpoint mode {m}"))),
        };
        Ok(Sweepout { times, slices, endpoint_mode: mode, homotopy_log: manifest.homotopy_log })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestSlice {
    file: String,
    t: f64,
    sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    format: u32,
    endpoint_mode: String,
    target: String,
    slices: Vec<ManifestSlice>,
    homotopy_log: Vec<HomotopyMove>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `(max, first argmax)`.
pub(crate) fn argmax(v: &[f64]) -> (f64, usize) {
    v.iter().enumerate().fold((f64::NEG_INFINITY, 0), |acc, (i, &x)| if x > acc.0 { (x, i) } else { acc })
}
