//! Interface-conforming triangulation of the truncation disk B_R.
//!
//! Points come from three sources: the scatterer boundary marched with the
//! target size function, a uniform polygon on the truncation circle, and
//! the corners of a 2:1-balanced quadtree whose leaves follow the size
//! function. A constrained Delaunay triangulation of this cloud, followed by
//! angle-driven refinement, gives the final mesh.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;
use std::fmt::Write as _;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};
use thiserror::Error;

use super::domain::DomainSpec;

/// Exponent of the element-size grading toward the corner.
pub const GRADING_EXPONENT: f64 = 0.7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh size h = {h} too large for scatterer of size {feature} (need h < size/4)")]
    MeshSize { h: f64, feature: f64 },
    #[error("truncation radius {r} does not exceed scatterer extent {extent} by at least h")]
    Truncation { r: f64, extent: f64 },
    #[error("boundary is not simple: piece {a} meets piece {b} near ({x:.6}, {y:.6})")]
    NonSimple { a: usize, b: usize, x: f64, y: f64 },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("mesh file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    Interface,
    Truncation,
}

impl EdgeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeTag::Interface => "interface",
            EdgeTag::Truncation => "truncation",
        }
    }
}

/// Boundary edge with its unit normal: pointing into the scatterer for
/// interface edges and outward for truncation edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedEdge {
    pub i: usize,
    pub j: usize,
    pub tag: EdgeTag,
    pub normal: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct MeshedDomain {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Whether each triangle lies in the scatterer.
    pub inside: Vec<bool>,
    pub edges: Vec<TaggedEdge>,
    pub corner_vertex: usize,
    pub truncation_radius: f64,
    pub mesh_size: f64,
}

/// Target element size: h away from the corner, h (d/R)^gamma near it,
/// floored at the size where the grading would exceed the distance itself.
#[derive(Debug, Clone, Copy)]
pub struct SizeField {
    pub h: f64,
    pub r: f64,
    pub x0: [f64; 2],
    pub graded: bool,
    pub gamma: f64,
    floor: f64,
}

impl SizeField {
    pub fn new(h: f64, r: f64, x0: [f64; 2], graded: bool) -> Self {
        let gamma = GRADING_EXPONENT;
        let floor = (h / r.powf(gamma)).powf(1.0 / (1.0 - gamma));
        SizeField { h, r, x0, graded, gamma, floor }
    }

    pub fn at_distance(&self, d: f64) -> f64 {
        if !self.graded {
            return self.h;
        }
        (self.h * (d / self.r).min(1.0).powf(self.gamma)).max(self.floor)
    }

    pub fn at(&self, p: [f64; 2]) -> f64 {
        self.at_distance(dist(p, self.x0))
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0)
    };
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

/// Boundary points marched along every piece so that the spacing follows
/// the size field. Returns the closed polyline (first point not repeated)
/// and the piece index of each segment.
pub fn march_boundary(spec: &DomainSpec, size: &SizeField) -> (Vec<[f64; 2]>, Vec<usize>) {
    const M: usize = 20_000;
    let mut pts = Vec::new();
    let mut owner = Vec::new();
    for (k, piece) in spec.pieces.iter().enumerate() {
        let start_at_corner = dist(piece.point(0.0), size.x0) < 1e-14;
        let end_at_corner = dist(piece.point(1.0), size.x0) < 1e-14;
        let power = if size.graded { 1.0 / (1.0 - size.gamma) + 1.0 } else { 1.0 };
        // parameter samples clustered toward a corner end
        let ts: Vec<f64> = (0..=M)
            .map(|i| {
                let u = i as f64 / M as f64;
                match (start_at_corner, end_at_corner) {
                    (true, false) => u.powf(power),
                    (false, true) => 1.0 - (1.0 - u).powf(power),
                    (true, true) => {
                        if u < 0.5 {
                            0.5 * (2.0 * u).powf(power)
                        } else {
                            1.0 - 0.5 * (2.0 * (1.0 - u)).powf(power)
                        }
                    }
                    _ => u,
                }
            })
            .collect();
        let dens = |t: f64| {
            let d = piece.tangent(t);
            (d[0] * d[0] + d[1] * d[1]).sqrt() / size.at(piece.point(t))
        };
        let mut cum = vec![0.0; M + 1];
        let mut prev = dens(ts[0]);
        for i in 1..=M {
            let cur = dens(ts[i]);
            cum[i] = cum[i - 1] + 0.5 * (prev + cur) * (ts[i] - ts[i - 1]);
            prev = cur;
        }
        let n = (cum[M].ceil() as usize).max(1);
        pts.push(piece.point(0.0));
        owner.push(k);
        let mut j = 0;
        for s in 1..n {
            let target = cum[M] * s as f64 / n as f64;
            while cum[j + 1] < target {
                j += 1;
            }
            let f = (target - cum[j]) / (cum[j + 1] - cum[j]);
            let t = ts[j] + f * (ts[j + 1] - ts[j]);
            pts.push(piece.point(t));
            owner.push(k);
        }
    }
    (pts, owner)
}

/// Uniform bucket grid over segments for proximity queries.
struct SegmentGrid {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl SegmentGrid {
    fn new(segs: &[([f64; 2], [f64; 2])], cell: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (a, b) in segs {
            for p in [a, b] {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1);
        let mut g = SegmentGrid { origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for (k, (a, b)) in segs.iter().enumerate() {
            let (i0, j0) = g.cell_of([a[0].min(b[0]), a[1].min(b[1])]);
            let (i1, j1) = g.cell_of([a[0].max(b[0]), a[1].max(b[1])]);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    g.buckets[j * nx + i].push(k);
                }
            }
        }
        g
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let i = ((p[0] - self.origin[0]) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p[1] - self.origin[1]) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    /// Segments whose buckets intersect the box of half-width `r` around p.
    fn near(&self, p: [f64; 2], r: f64, out: &mut Vec<usize>) {
        out.clear();
        let (i0, j0) = self.cell_of([p[0] - r, p[1] - r]);
        let (i1, j1) = self.cell_of([p[0] + r, p[1] + r]);
        for i in i0..=i1 {
            for j in j0..=j1 {
                out.extend_from_slice(&self.buckets[j * self.nx + i]);
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let d1 = o(a, b, c);
    let d2 = o(a, b, d);
    let d3 = o(c, d, a);
    let d4 = o(c, d, b);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn check_simple(pts: &[[f64; 2]], owner: &[usize], cell: f64) -> Result<(), MeshError> {
    let n = pts.len();
    let segs: Vec<_> = (0..n).map(|i| (pts[i], pts[(i + 1) % n])).collect();
    let grid = SegmentGrid::new(&segs, cell);
    let mut near = Vec::new();
    for i in 0..n {
        let (a, b) = segs[i];
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        grid.near(mid, 0.5 * dist(a, b), &mut near);
        for &j in &near {
            if j <= i || j == (i + 1) % n || i == (j + 1) % n {
                continue;
            }
            let (c, d) = segs[j];
            if segments_cross(a, b, c, d) {
                return Err(MeshError::NonSimple { a: owner[i], b: owner[j], x: mid[0], y: mid[1] });
            }
        }
    }
    Ok(())
}

struct QuadNode {
    level: u32,
    ix: i64,
    iy: i64,
    children: Option<[usize; 4]>,
}

/// Quadtree over [-half, half]^2 refined until every leaf is no larger than
/// the size field at its closest point to x0, then 2:1 balanced. Returns
/// leaf corners as integer lattice coordinates at `max_level` together with
/// the lattice spacing.
struct QuadTree {
    nodes: Vec<QuadNode>,
    half: f64,
    max_level: u32,
}

impl QuadTree {
    fn side(&self, level: u32) -> f64 {
        2.0 * self.half / (1u64 << level) as f64
    }

    fn lo(&self, n: &QuadNode) -> [f64; 2] {
        let s = self.side(n.level);
        [-self.half + n.ix as f64 * s, -self.half + n.iy as f64 * s]
    }

    fn split(&mut self, k: usize) {
        let (level, ix, iy) = (self.nodes[k].level, self.nodes[k].ix, self.nodes[k].iy);
        let base = self.nodes.len();
        for c in 0..4 {
            self.nodes.push(QuadNode {
                level: level + 1,
                ix: 2 * ix + (c & 1) as i64,
                iy: 2 * iy + (c >> 1) as i64,
                children: None,
            });
        }
        self.nodes[k].children = Some([base, base + 1, base + 2, base + 3]);
    }

    fn leaf_at(&self, p: [f64; 2]) -> Option<usize> {
        if p[0] < -self.half || p[0] > self.half || p[1] < -self.half || p[1] > self.half {
            return None;
        }
        let mut k = 0;
        while let Some(ch) = self.nodes[k].children {
            let n = &self.nodes[k];
            let s = self.side(n.level + 1);
            let lo = self.lo(n);
            let cx = ((p[0] - lo[0]) >= s) as usize;
            let cy = ((p[1] - lo[1]) >= s) as usize;
            k = ch[cx + 2 * cy];
        }
        Some(k)
    }

    fn build(half: f64, r: f64, size: &SizeField) -> Self {
        let mut t = QuadTree {
            nodes: vec![QuadNode { level: 0, ix: 0, iy: 0, children: None }],
            half,
            max_level: 0,
        };
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let n = &t.nodes[k];
            let s = t.side(n.level);
            let lo = t.lo(n);
            // closest point of the cell to the disk center and to x0
            let cx = 0.0f64.clamp(lo[0], lo[0] + s);
            let cy = 0.0f64.clamp(lo[1], lo[1] + s);
            if (cx * cx + cy * cy).sqrt() > r {
                continue;
            }
            let qx = size.x0[0].clamp(lo[0], lo[0] + s);
            let qy = size.x0[1].clamp(lo[1], lo[1] + s);
            let target = size.at([qx, qy]);
            if s > target && n.level < 48 {
                t.split(k);
                let ch = t.nodes[k].children.unwrap();
                stack.extend(ch.iter().rev());
            }
        }
        // 2:1 balance across edges
        let mut queue: VecDeque<usize> =
            (0..t.nodes.len()).filter(|&k| t.nodes[k].children.is_none()).collect();
        while let Some(k) = queue.pop_front() {
            if t.nodes[k].children.is_some() {
                continue;
            }
            let level = t.nodes[k].level;
            let s = t.side(level);
            let lo = t.lo(&t.nodes[k]);
            let c = [lo[0] + 0.5 * s, lo[1] + 0.5 * s];
            let probes = [
                [c[0] + 0.5 * s + 0.25 * s, c[1]],
                [c[0] - 0.5 * s - 0.25 * s, c[1]],
                [c[0], c[1] + 0.5 * s + 0.25 * s],
                [c[0], c[1] - 0.5 * s - 0.25 * s],
            ];
            for p in probes {
                if let Some(nb) = t.leaf_at(p) {
                    if t.nodes[nb].level + 1 < level {
                        t.split(nb);
                        let ch = t.nodes[nb].children.unwrap();
                        queue.extend(ch);
                        queue.push_back(k);
                    }
                }
            }
        }
        t.max_level = t.nodes.iter().map(|n| n.level).max().unwrap_or(0);
        t
    }

    fn leaf_corners(&self) -> Vec<[f64; 2]> {
        let mut keys: Vec<(i64, i64)> = Vec::new();
        for n in &self.nodes {
            if n.children.is_some() {
                continue;
            }
            let sh = self.max_level - n.level;
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                keys.push(((n.ix + dx) << sh, (n.iy + dy) << sh));
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let s = self.side(self.max_level);
        keys.into_iter()
            .map(|(i, j)| [-self.half + i as f64 * s, -self.half + j as f64 * s])
            .collect()
    }
}

/// Minimum interior angle used by the refinement pass, in degrees.
pub const MIN_ANGLE_DEG: f64 = 22.0;

pub fn mesh_domain(spec: &DomainSpec, h: f64, r: f64) -> Result<MeshedDomain, MeshError> {
    let feature = spec.feature_size();
    if !(h > 0.0 && h < feature / 4.0) {
        return Err(MeshError::MeshSize { h, feature });
    }
    if !(r >= spec.outer_radius + h) {
        return Err(MeshError::Truncation { r, extent: spec.outer_radius });
    }
    let size = SizeField::new(h, r, spec.corner_point, spec.graded());
    let (bpts, owner) = march_boundary(spec, &size);
    check_simple(&bpts, &owner, h)?;

    let nc = ((TAU * r / h).ceil() as usize).max(8);
    let circle: Vec<[f64; 2]> = (0..nc)
        .map(|k| {
            let t = TAU * k as f64 / nc as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    let spacing = TAU * r / nc as f64;

    let nb = bpts.len();
    let segs: Vec<_> = (0..nb).map(|i| (bpts[i], bpts[(i + 1) % nb])).collect();
    let grid = SegmentGrid::new(&segs, h);
    let tree = QuadTree::build(r * (1.0 + 1e-9), r, &size);
    let mut interior = Vec::new();
    let mut near = Vec::new();
    for p in tree.leaf_corners() {
        let s = size.at(p);
        let rp = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if rp > r - 0.55 * s.max(spacing) {
            continue;
        }
        let tol = 0.55 * s;
        grid.near(p, tol, &mut near);
        if near.iter().any(|&k| seg_dist(p, segs[k].0, segs[k].1) < tol) {
            continue;
        }
        interior.push(p);
    }

    let mut pts: Vec<Point2<f64>> = Vec::with_capacity(nc + nb + interior.len());
    let mut cons = Vec::with_capacity(nc + nb);
    for (k, p) in circle.iter().enumerate() {
        pts.push(Point2::new(p[0], p[1]));
        cons.push([k, (k + 1) % nc]);
    }
    for (k, p) in bpts.iter().enumerate() {
        pts.push(Point2::new(p[0], p[1]));
        cons.push([nc + k, nc + (k + 1) % nb]);
    }
    for p in &interior {
        pts.push(Point2::new(p[0], p[1]));
    }
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(pts, cons)
        .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
    let extra = cdt.num_vertices();
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(MIN_ANGLE_DEG))
            .with_max_additional_vertices(extra),
    );
    if !result.refinement_complete {
        return Err(MeshError::Triangulation("quality refinement did not terminate".into()));
    }
    extract(&cdt, spec, h, r)
}

fn extract(
    cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>,
    spec: &DomainSpec,
    h: f64,
    r: f64,
) -> Result<MeshedDomain, MeshError> {
    let vertices: Vec<[f64; 2]> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    let mut face_index = HashMap::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices();
        face_index.insert(f.fix(), triangles.len());
        triangles.push([vs[0].fix().index(), vs[1].fix().index(), vs[2].fix().index()]);
    }
    // flood fill from hull-adjacent faces without crossing interface edges
    let nt = triangles.len();
    let mut outside = vec![false; nt];
    let mut queue = VecDeque::new();
    for e in cdt.convex_hull() {
        let inner = e.rev().face();
        if let Some(fi) = inner.as_inner().and_then(|f| face_index.get(&f.fix())) {
            if !outside[*fi] {
                outside[*fi] = true;
                queue.push_back(inner.as_inner().unwrap().fix());
            }
        }
    }
    while let Some(fh) = queue.pop_front() {
        let f = cdt.face(fh);
        for e in f.adjacent_edges() {
            if cdt.is_constraint_edge(e.as_undirected().fix()) {
                continue;
            }
            if let Some(g) = e.rev().face().as_inner() {
                let gi = face_index[&g.fix()];
                if !outside[gi] {
                    outside[gi] = true;
                    queue.push_back(g.fix());
                }
            }
        }
    }
    let inside: Vec<bool> = outside.iter().map(|o| !o).collect();

    let mut interface = Vec::new();
    let mut truncation = Vec::new();
    for e in cdt.undirected_edges() {
        if !cdt.is_constraint_edge(e.fix()) {
            continue;
        }
        let d = e.as_directed();
        let (f1, f2) = (d.face(), d.rev().face());
        let [a, b] = d.vertices().map(|v| v.fix().index());
        if f1.is_outer() || f2.is_outer() {
            // orient counterclockwise around the disk: the inner face on the left
            let (i, j) = if f1.is_outer() { (b, a) } else { (a, b) };
            let (p, q) = (vertices[i], vertices[j]);
            let t = [q[0] - p[0], q[1] - p[1]];
            let l = (t[0] * t[0] + t[1] * t[1]).sqrt();
            truncation.push(TaggedEdge { i, j, tag: EdgeTag::Truncation, normal: [t[1] / l, -t[0] / l] });
        } else {
            let i1 = face_index[&f1.as_inner().unwrap().fix()];
            let i2 = face_index[&f2.as_inner().unwrap().fix()];
            if inside[i1] == inside[i2] {
                return Err(MeshError::Triangulation("constraint edge inside a region".into()));
            }
            // the scatterer side on the left
            let (i, j) = if inside[i1] { (a, b) } else { (b, a) };
            let (p, q) = (vertices[i], vertices[j]);
            let t = [q[0] - p[0], q[1] - p[1]];
            let l = (t[0] * t[0] + t[1] * t[1]).sqrt();
            interface.push(TaggedEdge { i, j, tag: EdgeTag::Interface, normal: [-t[1] / l, t[0] / l] });
        }
    }
    let corner_vertex = vertices
        .iter()
        .position(|v| v[0] == spec.corner_point[0] && v[1] == spec.corner_point[1])
        .ok_or_else(|| MeshError::Triangulation("corner point missing from the mesh".into()))?;
    let interface = chain(interface, corner_vertex)?;
    let start = truncation
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let ang = |e: &TaggedEdge| vertices[e.i][1].atan2(vertices[e.i][0]).rem_euclid(TAU);
            ang(a.1).total_cmp(&ang(b.1))
        })
        .map(|(_, e)| e.i)
        .unwrap_or(0);
    let truncation = chain(truncation, start)?;
    let mut edges = interface;
    edges.extend(truncation);
    Ok(MeshedDomain { vertices, triangles, inside, edges, corner_vertex, truncation_radius: r, mesh_size: h })
}

/// Orders directed edges into a closed chain starting at vertex `start`.
fn chain(edges: Vec<TaggedEdge>, start: usize) -> Result<Vec<TaggedEdge>, MeshError> {
    let n = edges.len();
    let by_start: HashMap<usize, usize> = edges.iter().enumerate().map(|(k, e)| (e.i, k)).collect();
    if by_start.len() != n {
        return Err(MeshError::Triangulation("boundary edges do not form a simple loop".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut v = start;
    for _ in 0..n {
        let k = *by_start
            .get(&v)
            .ok_or_else(|| MeshError::Triangulation("boundary loop is open".into()))?;
        out.push(edges[k]);
        v = edges[k].j;
    }
    if v != start {
        return Err(MeshError::Triangulation("boundary loop does not close".into()));
    }
    Ok(out)
}

/// Quality and geometry statistics of a mesh.
#[derive(Debug, Clone, Copy)]
pub struct MeshStats {
    pub min_angle_deg: f64,
    pub min_signed_area: f64,
    pub total_area: f64,
    pub inside_area: f64,
}

impl MeshedDomain {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|k| self.vertices[k]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn interface_edges(&self) -> impl Iterator<Item = &TaggedEdge> {
        self.edges.iter().filter(|e| e.tag == EdgeTag::Interface)
    }

    pub fn truncation_edges(&self) -> impl Iterator<Item = &TaggedEdge> {
        self.edges.iter().filter(|e| e.tag == EdgeTag::Truncation)
    }

    pub fn stats(&self) -> MeshStats {
        let mut min_angle = f64::INFINITY;
        let mut min_area = f64::INFINITY;
        let mut total = 0.0;
        let mut inside = 0.0;
        for (k, t) in self.triangles.iter().enumerate() {
            let p = t.map(|i| self.vertices[i]);
            for c in 0..3 {
                let a = p[c];
                let b = p[(c + 1) % 3];
                let d = p[(c + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [d[0] - a[0], d[1] - a[1]];
                let ang = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
                min_angle = min_angle.min(ang.to_degrees());
            }
            let ar = self.signed_area(k);
            min_area = min_area.min(ar);
            total += ar;
            if self.inside[k] {
                inside += ar;
            }
        }
        MeshStats { min_angle_deg: min_angle, min_signed_area: min_area, total_area: total, inside_area: inside }
    }

    /// Writes the plain-text mesh format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "nodes {} triangles {} edges {}", self.vertices.len(), self.triangles.len(), self.edges.len())
            .unwrap();
        for v in &self.vertices {
            writeln!(s, "{:.16e} {:.16e}", v[0], v[1]).unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for e in &self.edges {
            writeln!(s, "{} {} {} {:.16e} {:.16e}", e.i, e.j, e.tag.as_str(), e.normal[0], e.normal[1]).unwrap();
        }
        s
    }

    /// Parses the plain-text mesh format. Region flags are recovered from
    /// the interface normals, and the corner vertex from `corner`.
    pub fn from_text(text: &str, corner: [f64; 2]) -> Result<(Self, usize), MeshError> {
        let bad = |m: &str| MeshError::Format(m.to_string());
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file"))?.split_whitespace().collect();
        if header.len() != 6 || header[0] != "nodes" || header[2] != "triangles" || header[4] != "edges" {
            return Err(bad("bad header"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad count"));
        let (nv, nt, ne) = (num(header[1])?, num(header[3])?, num(header[5])?);
        let fl = |s: &str| s.parse::<f64>().map_err(|_| bad("bad float"));
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let l: Vec<&str> = lines.next().ok_or_else(|| bad("truncated vertices"))?.split_whitespace().collect();
            if l.len() != 2 {
                return Err(bad("vertex line"));
            }
            vertices.push([fl(l[0])?, fl(l[1])?]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let l: Vec<&str> = lines.next().ok_or_else(|| bad("truncated triangles"))?.split_whitespace().collect();
            if l.len() != 3 {
                return Err(bad("triangle line"));
            }
            let t = [num(l[0])?, num(l[1])?, num(l[2])?];
            if t.iter().any(|&k| k >= nv) {
                return Err(bad("triangle index out of range"));
            }
            triangles.push(t);
        }
        let mut edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let l: Vec<&str> = lines.next().ok_or_else(|| bad("truncated edges"))?.split_whitespace().collect();
            if l.len() != 5 {
                return Err(bad("edge line"));
            }
            let tag = match l[2] {
                "interface" => EdgeTag::Interface,
                "truncation" => EdgeTag::Truncation,
                _ => return Err(bad("unknown edge tag")),
            };
            edges.push(TaggedEdge { i: num(l[0])?, j: num(l[1])?, tag, normal: [fl(l[3])?, fl(l[4])?] });
        }
        let consumed = 1 + nv + nt + ne;
        let r = edges
            .iter()
            .filter(|e| e.tag == EdgeTag::Truncation)
            .map(|e| (vertices[e.i][0].powi(2) + vertices[e.i][1].powi(2)).sqrt())
            .fold(0.0, f64::max);
        let inside = region_flags(&vertices, &triangles, &edges);
        let corner_vertex = vertices
            .iter()
            .position(|v| v[0] == corner[0] && v[1] == corner[1])
            .ok_or_else(|| bad("corner point is not a mesh vertex"))?;
        let h = estimate_h(&vertices, &edges);
        Ok((
            MeshedDomain { vertices, triangles, inside, edges, corner_vertex, truncation_radius: r, mesh_size: h },
            consumed,
        ))
    }
}

fn estimate_h(vertices: &[[f64; 2]], edges: &[TaggedEdge]) -> f64 {
    edges
        .iter()
        .filter(|e| e.tag == EdgeTag::Truncation)
        .map(|e| dist(vertices[e.i], vertices[e.j]))
        .fold(0.0, f64::max)
}

/// Triangles on the side of interface edges that their normals point to,
/// flood-filled across non-interface edges.
fn region_flags(vertices: &[[f64; 2]], triangles: &[[usize; 3]], edges: &[TaggedEdge]) -> Vec<bool> {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, t) in triangles.iter().enumerate() {
        for c in 0..3 {
            by_edge.entry(key(t[c], t[(c + 1) % 3])).or_default().push(k);
        }
    }
    let iface: HashMap<(usize, usize), [f64; 2]> = edges
        .iter()
        .filter(|e| e.tag == EdgeTag::Interface)
        .map(|e| (key(e.i, e.j), e.normal))
        .collect();
    let mut inside = vec![false; triangles.len()];
    let mut seen = vec![false; triangles.len()];
    let mut queue = VecDeque::new();
    for e in edges.iter().filter(|e| e.tag == EdgeTag::Interface) {
        let m = [0.5 * (vertices[e.i][0] + vertices[e.j][0]), 0.5 * (vertices[e.i][1] + vertices[e.j][1])];
        for &t in by_edge.get(&key(e.i, e.j)).into_iter().flatten() {
            let c = triangles[t].iter().fold([0.0, 0.0], |acc, &k| [acc[0] + vertices[k][0] / 3.0, acc[1] + vertices[k][1] / 3.0]);
            if (c[0] - m[0]) * e.normal[0] + (c[1] - m[1]) * e.normal[1] > 0.0 && !seen[t] {
                seen[t] = true;
                inside[t] = true;
                queue.push_back(t);
            }
        }
    }
    while let Some(t) = queue.pop_front() {
        for c in 0..3 {
            let k = key(triangles[t][c], triangles[t][(c + 1) % 3]);
            if iface.contains_key(&k) {
                continue;
            }
            for &u in by_edge.get(&k).into_iter().flatten() {
                if !seen[u] {
                    seen[u] = true;
                    inside[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    inside
}
