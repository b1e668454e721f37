use super::blowup::{blowup_with_field, Blowup};
use super::concentration::{detect_concentration, median, tail, Concentration};
use super::frame::{ball_masses, EnergyField, Frame};
use super::neck::{neck_report, NeckGeometry, NeckReport};
use super::varifold::VarifoldMeasure;
use super::BubblesConfig;
use crate::energy::MapOnMesh;
use crate::error::{Error, Result};
use crate::minmax::boundary_cycle;
use crate::vec::dot;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BubbleKind {
    /// Blow-up at a boundary point: a free-boundary disk on the half plane.
    Disk,
    /// Blow-up at an interior point.
    Sphere,
}

/// A bubble extracted at one concentration point.
#[derive(Debug, Clone)]
pub struct Bubble {
    pub point: usize,
    pub kind: BubbleKind,
    pub frame: Frame,
    pub r: f64,
    pub window: f64,
    /// Tail median of the window energy minus the nested concentration mass.
    pub energy: f64,
    pub area: f64,
    /// Tail median of the mass concentrating at scales far below `r`; a deeper bubble the
    /// depth-one tree does not resolve.
    pub unresolved: f64,
    /// The last tail element dilated onto the reference disk or half disk.
    pub map: MapOnMesh,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeckEntry {
    pub point: usize,
    pub geometry: NeckGeometry,
    pub report: Option<NeckReport>,
    pub error: Option<String>,
}

/// Base, bubbles and necks of a concentrating sequence, read off its tail.
#[derive(Debug, Clone)]
pub struct BubbleTree {
    /// Last tail element; its restriction away from the concentration points is the base.
    pub base: MapOnMesh,
    /// Tail median of the energy outside the balls `B_ρ(x_i)`.
    pub base_energy: f64,
    pub base_area: f64,
    /// Tail median of `E(u_j)`.
    pub e_limit: f64,
    pub points: Vec<Concentration>,
    pub bubbles: Vec<Bubble>,
    /// Concentration points where no bubble scale could be selected.
    pub unresolved_points: Vec<usize>,
    pub necks: Vec<NeckEntry>,
    pub rho: f64,
}

impl BubbleTree {
    pub fn disk_bubbles(&self) -> impl Iterator<Item = &Bubble> {
        self.bubbles.iter().filter(|b| b.kind == BubbleKind::Disk)
    }

    pub fn sphere_bubbles(&self) -> impl Iterator<Item = &Bubble> {
        self.bubbles.iter().filter(|b| b.kind == BubbleKind::Sphere)
    }

    pub fn bubble_energy(&self) -> f64 {
        self.bubbles.iter().map(|b| b.energy).sum()
    }

    fn outside_points(&self, p: [f64; 2]) -> bool {
        self.points.iter().all(|c| {
            let q = c.frame.center();
            (p[0] - q[0]).hypot(p[1] - q[1]) > self.rho
        })
    }

    /// Varifold of the base away from the concentration points plus the dilated bubbles.
    pub fn varifold(&self) -> VarifoldMeasure {
        let mut m = VarifoldMeasure::of_where(&self.base, |p| self.outside_points(p));
        for b in &self.bubbles {
            m.extend(&VarifoldMeasure::of(&b.map));
        }
        m
    }
}

fn area_where(u: &MapOnMesh, keep: impl Fn([f64; 2]) -> bool) -> f64 {
    let mut ux = vec![0.0; u.dim];
    let mut uy = vec![0.0; u.dim];
    let mut s = 0.0;
    for t in 0..u.mesh.n_triangles() {
        if !keep(u.mesh.centroid(t)) {
            continue;
        }
        u.gradient_into(t, &mut ux, &mut uy);
        let (a, b, c) = (dot(&ux, &ux), dot(&uy, &uy), dot(&ux, &uy));
        s += (a * b - c * c).max(0.0).sqrt() * u.mesh.geometry.area[t];
    }
    s
}

/// Mass in `B_{σr}(z)` around the strongest point of the window, in local coordinates, if
/// it reaches `ε₁`.
fn nested_mass(field: &EnergyField, x: &Frame, b: &Blowup, cfg: &BubblesConfig) -> f64 {
    let c = x.center();
    let mut local = EnergyField { centroids: Vec::new(), energies: Vec::new(), total: 0.0 };
    for (p, e) in field.centroids.iter().zip(&field.energies) {
        if (p[0] - c[0]).hypot(p[1] - c[1]) > cfg.rho {
            continue;
        }
        let z = b.frame.to_local(*p);
        if z[0].hypot(z[1]) <= b.window {
            local.centroids.push(z);
            local.energies.push(*e);
            local.total += e;
        }
    }
    let mut order: Vec<usize> = (0..local.energies.len()).collect();
    order.sort_by(|&i, &j| local.energies[j].total_cmp(&local.energies[i]));
    let mut centers = vec![[0.0, 0.0]];
    centers.extend(order.iter().take(20).map(|&i| local.centroids[i]));
    let m = ball_masses(&local, &centers, cfg.nested_ratio * b.r).into_iter().fold(0.0, f64::max);
    if m >= cfg.epsilon1 {
        m
    } else {
        0.0
    }
}

/// Depth-one bubble tree of the tail of `seq`: concentration points, one blow-up per point
/// and the neck between each bubble and the base.
pub fn extract_tree(seq: &[MapOnMesh], cfg: &BubblesConfig) -> Result<BubbleTree> {
    cfg.validate()?;
    let tail = tail(seq, cfg);
    let last = tail.last().ok_or_else(|| Error::GateViolation("extract_tree: empty sequence".into()))?;
    let points = detect_concentration(seq, cfg);
    let fields: Vec<EnergyField> = tail.iter().map(EnergyField::of).collect();
    let e_limit = median(fields.iter().map(|f| f.total).collect());
    let rho = cfg.rho;
    let outside = |p: [f64; 2]| {
        points.iter().all(|c| {
            let q = c.frame.center();
            (p[0] - q[0]).hypot(p[1] - q[1]) > rho
        })
    };
    let base_energy = median(fields.iter().map(|f| f.energy_where(outside)).collect());
    let base_area = area_where(last, outside);
    let mut bubbles = Vec::new();
    let mut unresolved_points = Vec::new();
    let mut necks = Vec::new();
    for (i, x) in points.iter().enumerate() {
        let mut energies = Vec::new();
        let mut nested = Vec::new();
        let mut last_blowup = None;
        for (k, (u, f)) in tail.iter().zip(&fields).enumerate() {
            match blowup_with_field(u, f, &x.frame, cfg) {
                Ok(b) => {
                    let n = nested_mass(f, &x.frame, &b, cfg);
                    energies.push(b.window_energy - n);
                    nested.push(n);
                    if k + 1 == tail.len() {
                        last_blowup = Some(b);
                    }
                }
                Err(Error::NoValidRadius) => {
                    energies.push(0.0);
                    nested.push(0.0);
                }
                Err(e) => return Err(e),
            }
        }
        let Some(b) = last_blowup else {
            unresolved_points.push(i);
            continue;
        };
        let unresolved = median(nested.clone());
        let c = x.frame.center();
        let in_ball = |p: [f64; 2]| (p[0] - c[0]).hypot(p[1] - c[1]) <= rho;
        let area = area_where(last, |p| in_ball(p) && b.frame.radius(p) <= b.window);
        let outer = match b.frame {
            Frame::Interior { center } => rho - (center[0] - c[0]).hypot(center[1] - c[1]),
            Frame::Boundary { .. } => 0.5 * rho,
        };
        let floor = fields[fields.len() - 1]
            .centroids
            .iter()
            .filter(|p| in_ball(**p))
            .map(|p| b.frame.radius(*p))
            .fold(f64::INFINITY, f64::min);
        let inner = if *nested.last().unwrap() > 0.0 { 2.0 * floor } else { b.r.max(2.0 * floor) };
        let geometry = NeckGeometry::Annulus { frame: b.frame, inner, outer };
        let (report, error) = match neck_report(last, &geometry, cfg.l, cfg.lemma_tol) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        necks.push(NeckEntry { point: i, geometry, report, error });
        bubbles.push(Bubble {
            point: i,
            kind: if x.frame.is_boundary() { BubbleKind::Disk } else { BubbleKind::Sphere },
            frame: b.frame,
            r: b.r,
            window: b.window,
            energy: median(energies),
            area,
            unresolved,
            map: b.map,
        });
    }
    Ok(BubbleTree { base: last.clone(), base_energy, base_area, e_limit, points, bubbles, unresolved_points, necks, rho })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub base: f64,
    pub bubbles: f64,
    pub e_limit: f64,
    pub defect: f64,
    pub relative: f64,
    pub pass: bool,
}

/// `|E(base) + Σ E(bubbles) - E_limit|`, passing when at most `tol · E_limit`.
pub fn energy_identity_check(tree: &BubbleTree, e_limit: f64, tol: f64) -> IdentityCheck {
    let bubbles = tree.bubble_energy();
    let defect = (tree.base_energy + bubbles - e_limit).abs();
    let relative = if e_limit > 0.0 { defect / e_limit } else { defect };
    IdentityCheck { base: tree.base_energy, bubbles, e_limit, defect, relative, pass: defect <= tol * e_limit.max(0.0) + 1e-12 }
}

fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(TAU) - PI
}

/// Boundary degrees `[base, disk bubbles...]` of the last tail element. Each disk bubble
/// owns the arc of ∂D inside its window, closed up by the wrapped jump between its end
/// points; the base owns the rest with the complementary jumps, so the degrees add up to
/// the degree of the slice.
pub fn boundary_bubble_degree_audit(tree: &BubbleTree) -> Result<Vec<i64>> {
    let u = &tree.base;
    let cycle = boundary_cycle(u);
    if cycle.is_empty() {
        return Err(Error::GateViolation("degree audit needs a full-disk mesh".into()));
    }
    let mut params = Vec::with_capacity(cycle.len());
    for &i in &cycle {
        let x = u.value(i);
        let off = u.target.distance(x);
        if off > 1e-6 {
            return Err(Error::TraceOffGamma(off));
        }
        params.push(u.target.loop_parameter(x).ok_or_else(|| Error::GateViolation("degree audit needs a closed curve Γ".into()))?);
    }
    let disks: Vec<&Bubble> = tree.disk_bubbles().collect();
    let owner: Vec<Option<usize>> = cycle
        .iter()
        .map(|&v| {
            let p = u.mesh.vertices[v];
            disks.iter().position(|b| b.frame.radius(p) <= b.window)
        })
        .collect();
    let n = cycle.len();
    let start = owner.iter().position(|o| o.is_none()).ok_or_else(|| Error::GateViolation("degree audit: bubbles cover ∂D".into()))?;
    let mut base = 0.0;
    let mut bubble = vec![0.0; disks.len()];
    let mut entry: Vec<Option<f64>> = vec![None; disks.len()];
    let mut exit: Vec<Option<f64>> = vec![None; disks.len()];
    for s in 0..n {
        let k = (start + s) % n;
        let k1 = (k + 1) % n;
        let d = wrap(params[k1] - params[k]);
        match (owner[k], owner[k1]) {
            (Some(a), Some(b)) if a == b => bubble[a] += d,
            (o0, o1) => {
                base += d;
                if let Some(b) = o1 {
                    entry[b].get_or_insert(params[k1]);
                }
                if let Some(a) = o0 {
                    exit[a] = Some(params[k]);
                }
            }
        }
    }
    // The base keeps the increments into and out of each arc and closes with the jump from
    // entry to exit.
    let mut degrees = vec![0i64; disks.len() + 1];
    for (b, (e, x)) in entry.iter().zip(&exit).enumerate() {
        if let (Some(e), Some(x)) = (e, x) {
            let j = wrap(e - x);
            bubble[b] += j;
            base -= j;
        }
        degrees[b + 1] = (bubble[b] / TAU).round() as i64;
    }
    degrees[0] = (base / TAU).round() as i64;
    Ok(degrees)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRow {
    pub location: [f64; 2],
    pub frame: Frame,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleRow {
    pub point: usize,
    pub kind: BubbleKind,
    pub r: f64,
    pub window: f64,
    pub energy: f64,
    pub area: f64,
    pub unresolved: f64,
    pub degree: Option<i64>,
}

/// JSON form of a bubble tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeReport {
    pub format: u32,
    pub points: Vec<PointRow>,
    pub base_energy: f64,
    pub base_area: f64,
    pub base_degree: Option<i64>,
    pub bubbles: Vec<BubbleRow>,
    pub unresolved_points: Vec<usize>,
    pub identity: IdentityCheck,
    pub necks: Vec<NeckEntry>,
}

impl TreeReport {
    pub fn new(tree: &BubbleTree, tol: f64) -> Self {
        let degrees = boundary_bubble_degree_audit(tree).ok();
        let mut disk_index = 0;
        let bubbles = tree
            .bubbles
            .iter()
            .map(|b| {
                let degree = match b.kind {
                    BubbleKind::Disk => {
                        disk_index += 1;
                        degrees.as_ref().map(|d| d[disk_index])
                    }
                    BubbleKind::Sphere => None,
                };
                BubbleRow { point: b.point, kind: b.kind, r: b.r, window: b.window, energy: b.energy, area: b.area, unresolved: b.unresolved, degree }
            })
            .collect();
        TreeReport {
            format: 1,
            points: tree.points.iter().map(|c| PointRow { location: c.frame.center(), frame: c.frame, mass: c.mass }).collect(),
            base_energy: tree.base_energy,
            base_area: tree.base_area,
            base_degree: degrees.as_ref().map(|d| d[0]),
            bubbles,
            unresolved_points: tree.unresolved_points.clone(),
            identity: energy_identity_check(tree, tree.e_limit, tol),
            necks: tree.necks.clone(),
        }
    }
}
