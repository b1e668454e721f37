use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

/// Boundary role of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Interior,
    /// The arc ∂^A where Dirichlet data is prescribed.
    DirichletArc,
    /// The chord ∂^C, constrained to Γ.
    FreeChord,
    /// ∂D of a full disk; constrained to Γ in free mode.
    FullBoundary,
    /// Endpoint of a Dirichlet arc on a free chord, e.g. (±1, 0) on D⁺.
    Corner,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Interior => "interior",
            Role::DirichletArc => "arc",
            Role::FreeChord => "chord",
            Role::FullBoundary => "boundary",
            Role::Corner => "corner",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Some(match s {
            "interior" => Role::Interior,
            "arc" => Role::DirichletArc,
            "chord" => Role::FreeChord,
            "boundary" => Role::FullBoundary,
            "corner" => Role::Corner,
            _ => return None,
        })
    }

    pub fn is_boundary(&self) -> bool {
        !matches!(self, Role::Interior)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Disk,
    HalfDisk,
    HalfAnnulus { r1: f64, r2: f64 },
    HalfCylinder { a: f64, b: f64 },
    /// Full cylinder `[a, b] x R/2πZ`.
    Cylinder { a: f64, b: f64 },
    /// `D⁺ \ D⁺_{a}` with outer radius `b`.
    Band { a: f64, b: f64 },
    ModifiedBand { a: f64, b: f64 },
    Custom,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Disk => write!(f, "disk"),
            DomainKind::HalfDisk => write!(f, "half_disk"),
            DomainKind::HalfAnnulus { r1, r2 } => write!(f, "half_annulus:{r1}:{r2}"),
            DomainKind::HalfCylinder { a, b } => write!(f, "half_cylinder:{a}:{b}"),
            DomainKind::Cylinder { a, b } => write!(f, "cylinder:{a}:{b}"),
            DomainKind::Band { a, b } => write!(f, "band:{a}:{b}"),
            DomainKind::ModifiedBand { a, b } => write!(f, "modified_band:{a}:{b}"),
            DomainKind::Custom => write!(f, "custom"),
        }
    }
}

impl DomainKind {
    pub fn parse(s: &str) -> Option<DomainKind> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| parts.get(i).and_then(|p| p.parse::<f64>().ok());
        Some(match parts[0] {
            "disk" => DomainKind::Disk,
            "half_disk" => DomainKind::HalfDisk,
            "half_annulus" => DomainKind::HalfAnnulus { r1: num(1)?, r2: num(2)? },
            "half_cylinder" => DomainKind::HalfCylinder { a: num(1)?, b: num(2)? },
            "cylinder" => DomainKind::Cylinder { a: num(1)?, b: num(2)? },
            "band" => DomainKind::Band { a: num(1)?, b: num(2)? },
            "modified_band" => DomainKind::ModifiedBand { a: num(1)?, b: num(2)? },
            "custom" => DomainKind::Custom,
            _ => return None,
        })
    }

    fn period(&self) -> Option<f64> {
        match self {
            DomainKind::Cylinder { .. } => Some(TAU),
            _ => None,
        }
    }
}

/// Per-triangle and per-vertex quantities used by every energy evaluation.
#[derive(Debug, Clone)]
pub struct MeshGeometry {
    pub area: Vec<f64>,
    /// Gradients of the three barycentric basis functions on each triangle.
    pub grad: Vec<[[f64; 2]; 3]>,
    /// CSR adjacency: neighbours of `i` are `nbr[offset[i]..offset[i+1]]`.
    pub offset: Vec<usize>,
    pub nbr: Vec<usize>,
    /// Cotangent weights `½(cot α + cot β)` aligned with `nbr`.
    pub weight: Vec<f64>,
    /// Lumped mass (a third of adjacent triangle areas).
    pub mass: Vec<f64>,
    /// Half the length of adjacent boundary edges; zero in the interior.
    pub boundary_length: Vec<f64>,
    pub boundary_edges: Vec<[usize; 2]>,
    /// Triangles containing each vertex.
    pub vertex_tris: Vec<Vec<usize>>,
}

/// Triangulation of a planar domain with boundary roles.
#[derive(Debug, Clone)]
pub struct DiskMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub roles: Vec<Role>,
    pub domain: DomainKind,
    pub h: f64,
    pub geometry: MeshGeometry,
}

impl DiskMesh {
    /// Builds the derived geometry and orients every triangle counter-clockwise.
    pub fn new(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>, roles: Vec<Role>, domain: DomainKind, h: f64) -> Self {
        let period = domain.period();
        for t in triangles.iter_mut() {
            let p = local_coords(&vertices, t, period);
            if signed_area(&p) < 0.0 {
                t.swap(1, 2);
            }
        }
        let geometry = compute_geometry(&vertices, &triangles, period);
        DiskMesh { vertices, triangles, roles, domain, h, geometry }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Vertex coordinates of triangle `t`, unwrapped across the seam of periodic domains.
    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        local_coords(&self.vertices, &self.triangles[t], self.domain.period())
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let p = self.triangle_coords(t);
        [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.area.iter().sum()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.geometry.nbr[self.geometry.offset[i]..self.geometry.offset[i + 1]]
    }

    pub fn weights(&self, i: usize) -> &[f64] {
        &self.geometry.weight[self.geometry.offset[i]..self.geometry.offset[i + 1]]
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut m = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let p = self.triangle_coords(t);
            for k in 0..3 {
                let a = p[k];
                let b = p[(k + 1) % 3];
                let c = p[(k + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0].hypot(u[1])) * (v[0].hypot(v[1])));
                m = m.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        m
    }

    /// Every interior edge is shared by exactly two triangles with opposite orientation
    /// and every boundary edge by one.
    pub fn is_conforming(&self) -> bool {
        let mut count: BTreeMap<(usize, usize), (i32, i32)> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = count.entry((a.min(b), a.max(b))).or_insert((0, 0));
                e.0 += 1;
                e.1 += if a < b { 1 } else { -1 };
            }
        }
        count.values().all(|&(n, s)| (n == 1 && s.abs() == 1) || (n == 2 && s == 0))
    }

    /// Writes the mesh in the plain-text format `mesh v=<n> t=<m> domain=<kind> format=1`.
    pub fn to_text(&self) -> String {
        let mut s = format!("mesh v={} t={} domain={} format=1\n", self.n_vertices(), self.n_triangles(), self.domain);
        for (p, r) in self.vertices.iter().zip(&self.roles) {
            s.push_str(&format!("{:.17e} {:.17e} {}\n", p[0], p[1], r.as_str()));
        }
        for t in &self.triangles {
            s.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<DiskMesh> {
        let bad = |m: &str| Error::Parse(format!("mesh: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let mut nv = None;
        let mut nt = None;
        let mut domain = None;
        let mut words = header.split_whitespace();
        if words.next() != Some("mesh") {
            return Err(bad("missing header"));
        }
        for w in words {
            if let Some(v) = w.strip_prefix("v=") {
                nv = v.parse::<usize>().ok();
            } else if let Some(v) = w.strip_prefix("t=") {
                nt = v.parse::<usize>().ok();
            } else if let Some(v) = w.strip_prefix("domain=") {
                domain = DomainKind::parse(v);
            }
        }
        let (nv, nt, domain) = (nv.ok_or_else(|| bad("v="))?, nt.ok_or_else(|| bad("t="))?, domain.ok_or_else(|| bad("domain="))?);
        let mut vertices = Vec::with_capacity(nv);
        let mut roles = Vec::with_capacity(nv);
        for _ in 0..nv {
            let l = lines.next().ok_or_else(|| bad("truncated vertices"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(l));
            }
            let x = f[0].parse::<f64>().map_err(|_| bad(l))?;
            let y = f[1].parse::<f64>().map_err(|_| bad(l))?;
            vertices.push([x, y]);
            roles.push(Role::parse(f[2]).ok_or_else(|| bad(l))?);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let l = lines.next().ok_or_else(|| bad("truncated triangles"))?;
            let f: Vec<usize> = l.split_whitespace().map(|w| w.parse::<usize>()).collect::<std::result::Result<_, _>>().map_err(|_| bad(l))?;
            if f.len() != 3 || f.iter().any(|&i| i >= nv) {
                return Err(bad(l));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        let h = mesh_size(&vertices, &triangles, domain.period());
        Ok(DiskMesh::new(vertices, triangles, roles, domain, h))
    }
}

fn local_coords(v: &[[f64; 2]], t: &[usize; 3], period: Option<f64>) -> [[f64; 2]; 3] {
    let mut p = [v[t[0]], v[t[1]], v[t[2]]];
    if let Some(per) = period {
        for k in 1..3 {
            let d = p[k][1] - p[0][1];
            p[k][1] -= per * (d / per).round();
        }
    }
    p
}

fn signed_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn mesh_size(v: &[[f64; 2]], tris: &[[usize; 3]], period: Option<f64>) -> f64 {
    let mut h: f64 = 0.0;
    for t in tris {
        let p = local_coords(v, t, period);
        for k in 0..3 {
            let a = p[k];
            let b = p[(k + 1) % 3];
            h = h.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    h
}

fn compute_geometry(v: &[[f64; 2]], tris: &[[usize; 3]], period: Option<f64>) -> MeshGeometry {
    let n = v.len();
    let mut area = Vec::with_capacity(tris.len());
    let mut grad = Vec::with_capacity(tris.len());
    let mut mass = vec![0.0; n];
    let mut w: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut vertex_tris = vec![Vec::new(); n];
    for (ti, t) in tris.iter().enumerate() {
        let p = local_coords(v, t, period);
        let a = signed_area(&p);
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            let e = [p[(i + 2) % 3][0] - p[(i + 1) % 3][0], p[(i + 2) % 3][1] - p[(i + 1) % 3][1]];
            g[i] = [-e[1] / (2.0 * a), e[0] / (2.0 * a)];
        }
        for i in 0..3 {
            mass[t[i]] += a / 3.0;
            vertex_tris[t[i]].push(ti);
            let j = (i + 1) % 3;
            let kij = a * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            let key = (t[i].min(t[j]), t[i].max(t[j]));
            *w.entry(key).or_insert(0.0) -= kij;
            *edge_count.entry(key).or_insert(0) += 1;
        }
        area.push(a);
        grad.push(g);
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &wij) in &w {
        adj[i].push((j, wij));
        adj[j].push((i, wij));
    }
    let mut offset = vec![0usize];
    let mut nbr = Vec::new();
    let mut weight = Vec::new();
    for a in adj.iter_mut() {
        a.sort_by_key(|e| e.0);
        for &(j, wij) in a.iter() {
            nbr.push(j);
            weight.push(wij);
        }
        offset.push(nbr.len());
    }
    let mut boundary_length = vec![0.0; n];
    let mut boundary_edges = Vec::new();
    for (&(i, j), &c) in &edge_count {
        if c == 1 {
            let mut d = [v[j][0] - v[i][0], v[j][1] - v[i][1]];
            if let Some(per) = period {
                d[1] -= per * (d[1] / per).round();
            }
            let l = d[0].hypot(d[1]);
            boundary_length[i] += 0.5 * l;
            boundary_length[j] += 0.5 * l;
            boundary_edges.push([i, j]);
        }
    }
    MeshGeometry { area, grad, offset, nbr, weight, mass, boundary_length, boundary_edges, vertex_tris }
}

/// Triangulates the strip between two polylines ordered by a common parameter, always
/// advancing along the side whose next point has the smaller parameter.
fn zipper(inner: &[(usize, f64)], outer: &[(usize, f64)], closed: bool, tris: &mut Vec<[usize; 3]>) {
    let (ni, no) = (inner.len(), outer.len());
    let (mut i, mut o) = (0usize, 0usize);
    let (ei, eo) = if closed { (ni, no) } else { (ni - 1, no - 1) };
    let par = |list: &[(usize, f64)], k: usize, closed: bool| -> f64 {
        if closed && k >= list.len() {
            list[k % list.len()].1 + TAU
        } else {
            list[k].1
        }
    };
    while i < ei || o < eo {
        let adv_outer = if i >= ei {
            true
        } else if o >= eo {
            false
        } else {
            par(outer, o + 1, closed) <= par(inner, i + 1, closed)
        };
        if adv_outer {
            tris.push([inner[i % ni].0, outer[o % no].0, outer[(o + 1) % no].0]);
            o += 1;
        } else {
            tris.push([inner[i % ni].0, outer[o % no].0, inner[(i + 1) % ni].0]);
            i += 1;
        }
    }
}

/// Structured polar mesh of the unit disk or the upper half disk.
fn polar_mesh(half: bool, h: f64) -> DiskMesh {
    let k_rings = (1.0 / h).ceil() as usize;
    let mut vertices = vec![[0.0, 0.0]];
    let mut roles = vec![if half { Role::FreeChord } else { Role::Interior }];
    let mut rings: Vec<Vec<(usize, f64)>> = vec![vec![(0, 0.0)]];
    for k in 1..=k_rings {
        let r = k as f64 / k_rings as f64;
        let mut ring = Vec::new();
        let (count, span, pts) = if half { (3 * k, PI, 3 * k + 1) } else { (6 * k, TAU, 6 * k) };
        for j in 0..pts {
            let phi = span * j as f64 / count as f64;
            let (s, c) = phi.sin_cos();
            let mut p = [r * c, r * s];
            if half && (j == 0 || j == count) {
                p[1] = 0.0;
            }
            let role = if k == k_rings {
                if !half {
                    Role::FullBoundary
                } else if j == 0 || j == count {
                    Role::Corner
                } else {
                    Role::DirichletArc
                }
            } else if half && (j == 0 || j == count) {
                Role::FreeChord
            } else {
                Role::Interior
            };
            ring.push((vertices.len(), phi));
            vertices.push(p);
            roles.push(role);
        }
        rings.push(ring);
    }
    let mut tris = Vec::new();
    for k in 1..=k_rings {
        if k == 1 {
            let ring = &rings[1];
            let m = ring.len();
            let segs = if half { m - 1 } else { m };
            for j in 0..segs {
                tris.push([0, ring[j].0, ring[(j + 1) % m].0]);
            }
        } else {
            zipper(&rings[k - 1], &rings[k], !half, &mut tris);
        }
    }
    let kind = if half { DomainKind::HalfDisk } else { DomainKind::Disk };
    DiskMesh::new(vertices, tris, roles, kind, h)
}

/// Structured `[a,b] x [0,π]` (or `[0,2π)` when `periodic`) mesh with alternating diagonals.
pub fn cylinder_mesh(a: f64, b: f64, nt: usize, nth: usize, periodic: bool) -> DiskMesh {
    let cols = if periodic { nth } else { nth + 1 };
    let span = if periodic { TAU } else { PI };
    let mut vertices = Vec::new();
    let mut roles = Vec::new();
    for i in 0..=nt {
        let t = a + (b - a) * i as f64 / nt as f64;
        for j in 0..cols {
            let th = span * j as f64 / nth as f64;
            vertices.push([t, th]);
            let end = i == 0 || i == nt;
            let side = !periodic && (j == 0 || j == nth);
            roles.push(match (end, side) {
                (true, true) => Role::Corner,
                (true, false) => Role::DirichletArc,
                (false, true) => Role::FreeChord,
                _ => Role::Interior,
            });
        }
    }
    let id = |i: usize, j: usize| i * cols + (j % cols);
    let mut tris = Vec::new();
    for i in 0..nt {
        for j in 0..nth {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            if (i + j) % 2 == 0 {
                tris.push([p00, p10, p11]);
                tris.push([p00, p11, p01]);
            } else {
                tris.push([p00, p10, p01]);
                tris.push([p10, p11, p01]);
            }
        }
    }
    let h = ((b - a) / nt as f64).hypot(span / nth as f64);
    let kind = if periodic { DomainKind::Cylinder { a, b } } else { DomainKind::HalfCylinder { a, b } };
    DiskMesh::new(vertices, tris, roles, kind, h)
}

/// Conformal image of a half-cylinder mesh under `(t, θ) ↦ e^t (cos θ, sin θ)`.
fn half_annulus_mesh(r1: f64, r2: f64, h: f64) -> DiskMesh {
    let (a, b) = (r1.ln(), r2.ln());
    let nth = (PI / h).ceil() as usize;
    let nt = ((b - a) / h).ceil().max(1.0) as usize;
    let cyl = cylinder_mesh(a, b, nt, nth, false);
    let vertices = cyl.vertices.iter().map(|p| [p[0].exp() * p[1].cos(), p[0].exp() * p[1].sin()]).collect();
    let mut verts: Vec<[f64; 2]> = vertices;
    for (v, r) in verts.iter_mut().zip(&cyl.roles) {
        if matches!(r, Role::FreeChord | Role::Corner) {
            v[1] = 0.0;
        }
    }
    DiskMesh::new(verts, cyl.triangles, cyl.roles, DomainKind::HalfAnnulus { r1, r2 }, h * r2)
}

/// Unit disk with log-polar rings `r = e^τ`, `τ ∈ [tau_min, 0]`, around the origin and a
/// fan closing the innermost ring; resolves every scale down to `e^{tau_min}` with square
/// cells of side `2π/n_theta` in `(τ, θ)`.
pub fn graded_disk_mesh(tau_min: f64, n_theta: usize) -> DiskMesh {
    let dth = TAU / n_theta as f64;
    let nt = ((-tau_min) / dth).ceil().max(1.0) as usize;
    let cyl = cylinder_mesh(tau_min, 0.0, nt, n_theta, true);
    let mut vertices: Vec<[f64; 2]> = cyl.vertices.iter().map(|p| [p[0].exp() * p[1].cos(), p[0].exp() * p[1].sin()]).collect();
    let mut roles: Vec<Role> =
        cyl.vertices.iter().map(|p| if p[0] == 0.0 { Role::FullBoundary } else { Role::Interior }).collect();
    let mut tris = cyl.triangles;
    let c = vertices.len();
    vertices.push([0.0, 0.0]);
    roles.push(Role::Interior);
    for j in 0..n_theta {
        tris.push([c, j, (j + 1) % n_theta]);
    }
    DiskMesh::new(vertices, tris, roles, DomainKind::Disk, dth)
}

/// Requested domain for [`build_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshDomain {
    Disk,
    HalfDisk,
    HalfAnnulus { r1: f64, r2: f64 },
}

pub fn build_mesh(domain: MeshDomain, h: f64) -> Result<DiskMesh> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidResolution(h));
    }
    Ok(match domain {
        MeshDomain::Disk => polar_mesh(false, h),
        MeshDomain::HalfDisk => polar_mesh(true, h),
        MeshDomain::HalfAnnulus { r1, r2 } => {
            if !(r1 > 0.0 && r2 > r1) {
                return Err(Error::InvalidResolution(h));
            }
            half_annulus_mesh(r1, r2, h)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_mesh_covers_the_disk() {
        let m = graded_disk_mesh(-20.0, 32);
        assert!(m.is_conforming());
        let exact = std::f64::consts::PI;
        let polygon = 0.5 * 32.0 * (std::f64::consts::TAU / 32.0).sin();
        assert!((m.total_area() - polygon).abs() < 1e-9 * exact);
        let smallest = m.vertices.iter().filter(|p| p[0] != 0.0 || p[1] != 0.0).map(|p| p[0].hypot(p[1])).fold(1.0, f64::min);
        assert!((smallest - (-20.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn disk_boundary_is_snapped() {
        let m = build_mesh(MeshDomain::Disk, 0.1).unwrap();
        for (p, r) in m.vertices.iter().zip(&m.roles) {
            if *r == Role::FullBoundary {
                assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
            }
        }
        assert!(m.is_conforming());
    }

    #[test]
    fn half_disk_has_corners() {
        let m = build_mesh(MeshDomain::HalfDisk, 0.1).unwrap();
        let corners: Vec<_> = m.vertices.iter().zip(&m.roles).filter(|(_, r)| **r == Role::Corner).map(|(p, _)| *p).collect();
        assert_eq!(corners, vec![[1.0, 0.0], [-1.0, 0.0]]);
        assert!(m.is_conforming());
    }

    #[test]
    fn rejects_bad_resolution() {
        assert!(build_mesh(MeshDomain::Disk, 0.6).is_err());
        assert!(build_mesh(MeshDomain::Disk, 0.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = build_mesh(MeshDomain::HalfDisk, 0.25).unwrap();
        let back = DiskMesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.roles, m.roles);
        assert_eq!(back.to_text(), m.to_text());
    }

    #[test]
    fn periodic_cylinder_area() {
        let m = cylinder_mesh(0.0, 2.0, 8, 12, true);
        assert!((m.total_area() - 2.0 * TAU).abs() < 1e-12);
        assert!(m.is_conforming());
    }
}
