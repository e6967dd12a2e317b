//! Conforming triangulations of the perforated domain.
//!
//! Boundary curves are sampled into inscribed polygons, a constrained Delaunay
//! triangulation is split until edges match a graded size field (finer near
//! the cores), and a final angle-driven refinement fixes element quality.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::{point_in_polygon, OuterBoundary, PerforatedDomain};
use crate::elasticity::Vec2;
use crate::error::{Error, Result};

/// Sentinel for the missing second triangle of a boundary edge.
pub const NO_TRIANGLE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
pub struct MeshOptions {
    /// Target edge length away from the cores.
    pub h: f64,
    /// Edge length near a core is `h / core_refinement`.
    pub core_refinement: f64,
    /// Fine spacing is kept up to `grading_radius * eps` from a core center,
    /// then relaxes linearly to `h` over the same distance.
    pub grading_radius: f64,
    /// Target minimum angle for the quality pass, in degrees.
    pub quality_angle: f64,
    /// Generation fails below this angle, in degrees.
    pub min_angle: f64,
}

impl MeshOptions {
    pub fn new(h: f64) -> Self {
        Self { h, core_refinement: 4.0, grading_radius: 1.0, quality_angle: 25.0, min_angle: 10.0 }
    }

    /// Uniform target size, no grading.
    pub fn uniform(h: f64) -> Self {
        Self { core_refinement: 1.0, ..Self::new(h) }
    }
}

/// Boundary edge with the id of its loop (0 outer, `i + 1` core `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub loop_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub edges: usize,
    pub min_angle_deg: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub area: f64,
    pub loop_lengths: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Locator {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl Locator {
    fn new(vertices: &[Vec2], triangles: &[[usize; 3]]) -> Self {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for v in vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let span = (hi - lo).max().max(1e-300);
        let target = (triangles.len() as f64).sqrt().max(1.0);
        let cell = span / target;
        let nx = ((hi.x - lo.x) / cell).ceil() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).ceil() as usize + 1;
        let mut bins = vec![Vec::new(); nx * ny];
        for (t, tri) in triangles.iter().enumerate() {
            let mut a = vertices[tri[0]];
            let mut b = a;
            for &k in &tri[1..] {
                a = a.inf(&vertices[k]);
                b = b.sup(&vertices[k]);
            }
            let (i0, j0) = (((a.x - lo.x) / cell) as usize, ((a.y - lo.y) / cell) as usize);
            let (i1, j1) = (((b.x - lo.x) / cell) as usize, ((b.y - lo.y) / cell) as usize);
            for j in j0..=j1.min(ny - 1) {
                for i in i0..=i1.min(nx - 1) {
                    bins[j * nx + i].push(t as u32);
                }
            }
        }
        Self { origin: lo, cell, nx, ny, bins }
    }

    fn candidates(&self, x: &Vec2) -> &[u32] {
        let fx = (x.x - self.origin.x) / self.cell;
        let fy = (x.y - self.origin.y) / self.cell;
        if fx < 0.0 || fy < 0.0 {
            return &[];
        }
        let (i, j) = (fx as usize, fy as usize);
        if i >= self.nx || j >= self.ny {
            return &[];
        }
        &self.bins[j * self.nx + i]
    }
}

/// Triangle mesh with edge connectivity and boundary loop tags.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Nominal edge length away from the cores.
    pub h: f64,
    /// Unique edges with `a < b`.
    pub edges: Vec<[usize; 2]>,
    /// Local edge `k` is opposite local vertex `k`.
    pub tri_edges: Vec<[usize; 3]>,
    /// Adjacent triangles; boundary edges have `NO_TRIANGLE` second.
    pub edge_tris: Vec<[usize; 2]>,
    pub vertex_loop: Vec<Option<usize>>,
    pub edge_loop: Vec<Option<usize>>,
    locator: Locator,
}

fn tri_area(p: &[Vec2; 3]) -> f64 {
    0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]))
}

impl Mesh {
    /// Builds connectivity from raw arrays. Triangles are reoriented
    /// counter-clockwise; boundary edges are tagged from `vertex_loop`.
    pub fn from_parts(
        vertices: Vec<Vec2>,
        mut triangles: Vec<[usize; 3]>,
        vertex_loop: Vec<Option<usize>>,
        h: f64,
    ) -> Result<Self> {
        for tri in triangles.iter_mut() {
            let p = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            let a = tri_area(&p);
            if a == 0.0 {
                return Err(Error::Mesh(format!("degenerate triangle {tri:?}")));
            }
            if a < 0.0 {
                tri.swap(1, 2);
            }
        }
        let mut keyed: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                keyed.push(([a.min(b), a.max(b)], t, k));
            }
        }
        keyed.sort_unstable();
        let mut edges = Vec::new();
        let mut edge_tris = Vec::new();
        let mut tri_edges = vec![[0usize; 3]; triangles.len()];
        let mut i = 0;
        while i < keyed.len() {
            let (e, t, k) = keyed[i];
            let id = edges.len();
            edges.push(e);
            tri_edges[t][k] = id;
            let mut pair = [t, NO_TRIANGLE];
            if i + 1 < keyed.len() && keyed[i + 1].0 == e {
                let (_, t2, k2) = keyed[i + 1];
                tri_edges[t2][k2] = id;
                pair[1] = t2;
                i += 1;
                if i + 1 < keyed.len() && keyed[i + 1].0 == e {
                    return Err(Error::Mesh(format!("edge {e:?} shared by more than two triangles")));
                }
            }
            edge_tris.push(pair);
            i += 1;
        }
        let mut boundary_edges = Vec::new();
        let mut edge_loop = vec![None; edges.len()];
        for (id, pair) in edge_tris.iter().enumerate() {
            if pair[1] != NO_TRIANGLE {
                continue;
            }
            let [a, b] = edges[id];
            let tag = match (vertex_loop[a], vertex_loop[b]) {
                (Some(x), Some(y)) if x == y => x,
                _ => {
                    return Err(Error::Mesh(format!("boundary edge ({a}, {b}) has inconsistent loop tags")));
                }
            };
            edge_loop[id] = Some(tag);
            // orient with the domain on the left
            let tri = triangles[pair[0]];
            let k = (0..3).find(|&k| tri_edges[pair[0]][k] == id).expect("edge in triangle");
            boundary_edges.push(BoundaryEdge { v: [tri[(k + 1) % 3], tri[(k + 2) % 3]], loop_id: tag });
        }
        let locator = Locator::new(&vertices, &triangles);
        Ok(Self { vertices, triangles, boundary_edges, h, edges, tri_edges, edge_tris, vertex_loop, edge_loop, locator })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Vec2; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        tri_area(&self.triangle_points(t))
    }

    pub fn area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.vertices[b] - self.vertices[a]).norm()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1] == NO_TRIANGLE
    }

    /// Total length of the edges tagged with `loop_id`.
    pub fn loop_length(&self, loop_id: usize) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| e.loop_id == loop_id)
            .map(|e| (self.vertices[e.v[1]] - self.vertices[e.v[0]]).norm())
            .sum()
    }

    /// Barycentric coordinates of `x` in triangle `t`.
    pub fn barycentric(&self, t: usize, x: &Vec2) -> [f64; 3] {
        let p = self.triangle_points(t);
        let a = tri_area(&p);
        let l1 = tri_area(&[p[0], *x, p[2]]) / a;
        let l2 = tri_area(&[p[0], p[1], *x]) / a;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Containing triangle, accepting points within a relative tolerance of
    /// an edge.
    pub fn locate(&self, x: &Vec2) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &t in self.locator.candidates(x) {
            let t = t as usize;
            let l = self.barycentric(t, x);
            let m = l[0].min(l[1]).min(l[2]);
            if m >= 0.0 {
                return Some(t);
            }
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((t, m));
            }
        }
        best.filter(|&(_, m)| m > -1e-9).map(|(t, _)| t)
    }

    pub fn locate_or_err(&self, x: &Vec2) -> Result<usize> {
        self.locate(x).ok_or(Error::OutsideMesh([x.x, x.y]))
    }

    pub fn min_angle_deg(&self) -> f64 {
        let mut m = f64::INFINITY;
        for t in 0..self.num_triangles() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                let a = p[(k + 1) % 3] - p[k];
                let b = p[(k + 2) % 3] - p[k];
                m = m.min(a.angle(&b).to_degrees());
            }
        }
        m
    }

    pub fn stats(&self, num_loops: usize) -> MeshStats {
        let lens: Vec<f64> = (0..self.edges.len()).map(|e| self.edge_length(e)).collect();
        MeshStats {
            vertices: self.num_vertices(),
            triangles: self.num_triangles(),
            edges: self.edges.len(),
            min_angle_deg: self.min_angle_deg(),
            min_edge: lens.iter().cloned().fold(f64::INFINITY, f64::min),
            max_edge: lens.iter().cloned().fold(0.0, f64::max),
            area: self.area(),
            loop_lengths: (0..num_loops).map(|l| self.loop_length(l)).collect(),
        }
    }

    /// Red refinement: every triangle splits into four. Midpoints of boundary
    /// edges are moved onto the exact boundary curve.
    pub fn refine_uniform(&self, dom: &PerforatedDomain) -> Result<Mesh> {
        let nv = self.num_vertices();
        let mut vertices = self.vertices.clone();
        let mut vertex_loop = self.vertex_loop.clone();
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let mut m = 0.5 * (self.vertices[a] + self.vertices[b]);
            if let Some(l) = self.edge_loop[e] {
                m = if l == 0 {
                    dom.outer.project(&m)
                } else {
                    let c = dom.cores[l - 1].center_vec();
                    c + (dom.cores[l - 1].radius / (m - c).norm()) * (m - c)
                };
            }
            vertices.push(m);
            vertex_loop.push(self.edge_loop[e]);
        }
        let mut triangles = Vec::with_capacity(4 * self.num_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let m = self.tri_edges[t].map(|e| nv + e);
            // m[k] is opposite vertex k
            triangles.push([tri[0], m[2], m[1]]);
            triangles.push([tri[1], m[0], m[2]]);
            triangles.push([tri[2], m[1], m[0]]);
            triangles.push([m[0], m[1], m[2]]);
        }
        Mesh::from_parts(vertices, triangles, vertex_loop, 0.5 * self.h)
    }

    /// Plain-text dump: a vertex block then a triangle block, one record per line.
    pub fn write_table(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "vertices {}", self.num_vertices())?;
        for (i, v) in self.vertices.iter().enumerate() {
            let tag = self.vertex_loop[i].map(|l| l as i64).unwrap_or(-1);
            writeln!(w, "{i} {:?} {:?} {tag}", v.x, v.y)?;
        }
        writeln!(w, "triangles {}", self.num_triangles())?;
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(w, "{i} {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn read_table(r: impl BufRead, h: f64) -> Result<Mesh> {
        let bad = |line: usize, what: &str| Error::Mesh(format!("line {line}: {what}"));
        let mut lines = r.lines().enumerate();
        let mut header = |name: &str| -> Result<usize> {
            let (n, l) = lines.next().ok_or_else(|| bad(0, "unexpected end of input"))?;
            let l = l?;
            let mut it = l.split_whitespace();
            if it.next() != Some(name) {
                return Err(bad(n + 1, &format!("expected `{name}` header")));
            }
            it.next().and_then(|c| c.parse().ok()).ok_or_else(|| bad(n + 1, "missing count"))
        };
        let nv = header("vertices")?;
        let mut triangles = Vec::new();
        let mut rest = Vec::new();
        for (n, l) in lines {
            rest.push((n, l?));
        }
        let mut it = rest.into_iter();
        let mut vertices = Vec::with_capacity(nv);
        let mut vertex_loop = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (n, l) = it.next().ok_or_else(|| bad(0, "truncated vertex block"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad(n + 1, "vertex record needs 4 fields"));
            }
            let x: f64 = f[1].parse().map_err(|_| bad(n + 1, "bad coordinate"))?;
            let y: f64 = f[2].parse().map_err(|_| bad(n + 1, "bad coordinate"))?;
            let tag: i64 = f[3].parse().map_err(|_| bad(n + 1, "bad loop tag"))?;
            vertices.push(Vec2::new(x, y));
            vertex_loop.push(if tag < 0 { None } else { Some(tag as usize) });
        }
        let (n, l) = it.next().ok_or_else(|| bad(0, "missing triangle block"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.first() != Some(&"triangles") {
            return Err(bad(n + 1, "expected `triangles` header"));
        }
        let nt: usize = f.get(1).and_then(|c| c.parse().ok()).ok_or_else(|| bad(n + 1, "missing count"))?;
        for _ in 0..nt {
            let (n, l) = it.next().ok_or_else(|| bad(0, "truncated triangle block"))?;
            let f: Vec<usize> = l.split_whitespace().skip(1).map(|c| c.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad(n + 1, "bad index"))?;
            if f.len() != 3 || f.iter().any(|&i| i >= nv) {
                return Err(bad(n + 1, "triangle record needs 3 valid vertex indices"));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        Mesh::from_parts(vertices, triangles, vertex_loop, h)
    }
}

/// Graded size field: fine near core centers, `h` elsewhere.
fn size_at(dom: &PerforatedDomain, opts: &MeshOptions, x: &Vec2) -> f64 {
    let fine = opts.h / opts.core_refinement;
    let r0 = opts.grading_radius * dom.eps;
    let mut s = opts.h;
    for c in &dom.cores {
        let d = (x - c.center_vec()).norm();
        let ramp = ((d - r0) / r0).clamp(0.0, 1.0);
        s = s.min(fine + (opts.h - fine) * ramp);
    }
    s
}

/// Loop closest to `x` and the projection of `x` onto it.
fn nearest_loop(dom: &PerforatedDomain, x: &Vec2) -> (usize, Vec2) {
    let mut best = (0, dom.outer.project(x));
    let mut dist = (best.1 - x).norm();
    for (i, c) in dom.cores.iter().enumerate() {
        let r = x - c.center_vec();
        let y = c.center_vec() + r * (c.radius / r.norm());
        if (y - x).norm() < dist {
            dist = (y - x).norm();
            best = (i + 1, y);
        }
    }
    best
}

struct Seeded {
    loops: Vec<Vec<Vec2>>,
}

/// Boundary points are spaced a little tighter than the interior target so
/// interior insertions do not encroach on boundary segments.
const BOUNDARY_SPACING: f64 = 0.75;

fn seed_boundary(dom: &PerforatedDomain, opts: &MeshOptions) -> Seeded {
    let mut loops = Vec::with_capacity(dom.num_loops());
    match &dom.outer {
        OuterBoundary::Disk { center, radius } => {
            let probe = (0..720)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / 720.0;
                    size_at(dom, opts, &(center + *radius * Vec2::new(th.cos(), th.sin())))
                })
                .fold(f64::INFINITY, f64::min);
            let n = ((2.0 * PI * radius / (BOUNDARY_SPACING * probe)).ceil() as usize).max(12);
            loops.push(
                (0..n)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / n as f64;
                        center + *radius * Vec2::new(th.cos(), th.sin())
                    })
                    .collect(),
            );
        }
        OuterBoundary::Polygon { vertices } => {
            let m = vertices.len();
            let mut pts = Vec::new();
            for i in 0..m {
                let (a, b) = (vertices[i], vertices[(i + 1) % m]);
                let probe = (0..=64)
                    .map(|k| size_at(dom, opts, &(a + (k as f64 / 64.0) * (b - a))))
                    .fold(f64::INFINITY, f64::min);
                let n = ((b - a).norm() / (BOUNDARY_SPACING * probe)).ceil().max(1.0) as usize;
                for k in 0..n {
                    pts.push(a + (k as f64 / n as f64) * (b - a));
                }
            }
            loops.push(pts);
        }
    }
    for c in &dom.cores {
        let fine = size_at(dom, opts, &(c.center_vec() + Vec2::new(c.radius, 0.0)));
        let n = ((2.0 * PI * c.radius / (BOUNDARY_SPACING * fine)).ceil() as usize).max(12);
        loops.push(
            (0..n)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n as f64;
                    c.center_vec() + c.radius * Vec2::new(th.cos(), th.sin())
                })
                .collect(),
        );
    }
    Seeded { loops }
}

impl Seeded {
    fn inside(&self, x: &Vec2) -> bool {
        point_in_polygon(x, &self.loops[0]) && self.loops[1..].iter().all(|l| !point_in_polygon(x, l))
    }
}

fn p2(x: &Vec2) -> Point2<f64> {
    Point2::new(x.x, x.y)
}

fn v2(p: Point2<f64>) -> Vec2 {
    Vec2::new(p.x, p.y)
}

/// Constrained Delaunay mesh of the perforated domain. Core circles become
/// inscribed polygons with spacing `h / core_refinement`.
pub fn generate_mesh(dom: &PerforatedDomain, opts: &MeshOptions) -> Result<Mesh> {
    if !(opts.h > 0.0 && opts.h.is_finite()) {
        return Err(Error::Mesh(format!("mesh size must be positive, got {}", opts.h)));
    }
    if !dom.cores.is_empty() && opts.h >= dom.eps {
        return Err(Error::Mesh(format!("mesh size {} must be below the core radius {}", opts.h, dom.eps)));
    }
    if opts.core_refinement < 1.0 {
        return Err(Error::Mesh("core refinement factor must be at least 1".into()));
    }
    let seeded = seed_boundary(dom, opts);
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut loop_of = std::collections::HashMap::new();
    for (l, pts) in seeded.loops.iter().enumerate() {
        let handles: Vec<_> = pts
            .iter()
            .map(|p| cdt.insert(p2(p)).map_err(|e| Error::Mesh(format!("{e:?}"))))
            .collect::<Result<_>>()?;
        for h in &handles {
            loop_of.insert(h.index(), l);
        }
        for k in 0..handles.len() {
            cdt.add_constraint(handles[k], handles[(k + 1) % handles.len()]);
        }
    }

    // split interior edges until they match the size field
    for _ in 0..64 {
        let mut seen = HashSet::new();
        let mut splits = Vec::new();
        for face in cdt.inner_faces() {
            let pos = face.positions().map(v2);
            let centroid = (pos[0] + pos[1] + pos[2]) / 3.0;
            if !seeded.inside(&centroid) {
                continue;
            }
            let edge = face
                .adjacent_edges()
                .into_iter()
                .max_by(|a, b| a.length_2().total_cmp(&b.length_2()))
                .expect("three edges");
            let [a, b] = edge.positions().map(v2);
            let mid = 0.5 * (a + b);
            if edge.is_constraint_edge() || (b - a).norm() <= 1.3 * size_at(dom, opts, &mid) {
                continue;
            }
            if seen.insert(edge.as_undirected().fix()) {
                splits.push(mid);
            }
        }
        if splits.is_empty() {
            break;
        }
        for m in splits {
            cdt.insert(p2(&m)).map_err(|e| Error::Mesh(format!("{e:?}")))?;
        }
    }

    let budget = 4 * cdt.num_vertices() + 1000;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(opts.quality_angle))
            .exclude_outer_faces(true)
            .with_max_additional_vertices(budget),
    );
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();

    // refinement may split boundary segments; tag the new vertices and move
    // them onto the exact boundary
    let mut moved = std::collections::HashMap::new();
    for edge in cdt.undirected_edges() {
        if !edge.is_constraint_edge() {
            continue;
        }
        for v in edge.vertices() {
            let i = v.fix().index();
            if loop_of.contains_key(&i) {
                continue;
            }
            let x = v2(v.position());
            let (l, y) = nearest_loop(dom, &x);
            loop_of.insert(i, l);
            moved.insert(i, y);
        }
    }

    let mut index = vec![usize::MAX; cdt.num_vertices()];
    let mut vertices = Vec::new();
    let mut vertex_loop = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (k, v) in face.vertices().iter().enumerate() {
            let i = v.fix().index();
            if index[i] == usize::MAX {
                index[i] = vertices.len();
                vertices.push(moved.get(&i).copied().unwrap_or_else(|| v2(v.position())));
                vertex_loop.push(loop_of.get(&i).copied());
            }
            tri[k] = index[i];
        }
        triangles.push(tri);
    }
    let mesh = Mesh::from_parts(vertices, triangles, vertex_loop, opts.h)?;
    let min_angle = mesh.min_angle_deg();
    if min_angle < opts.min_angle {
        return Err(Error::Mesh(format!(
            "minimum angle {min_angle:.2} deg is below the {} deg limit",
            opts.min_angle
        )));
    }
    if mesh.boundary_edges.iter().map(|e| e.loop_id).collect::<HashSet<_>>().len() != dom.num_loops() {
        return Err(Error::Mesh("not every boundary loop is present in the mesh".into()));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defects::{Defect, DefectConfiguration};
    use crate::domain::build_perforated_domain;

    fn annulus() -> PerforatedDomain {
        let cfg = DefectConfiguration::new(vec![Defect::disclination([0.0, 0.0], 0.5)]).unwrap();
        build_perforated_domain(OuterBoundary::disk([0.0, 0.0], 1.0).unwrap(), &cfg, 0.2).unwrap()
    }

    #[test]
    fn annulus_mesh_area_and_loops() {
        let dom = annulus();
        let mesh = generate_mesh(&dom, &MeshOptions::uniform(0.1)).unwrap();
        let exact = PI * (1.0 - 0.04);
        assert!((mesh.area() - exact).abs() / exact < 0.02, "area {}", mesh.area());
        let core = mesh.loop_length(1);
        assert!((core - 2.0 * PI * 0.2).abs() / (2.0 * PI * 0.2) < 0.02);
        assert!(mesh.min_angle_deg() >= 10.0);
        for e in &mesh.boundary_edges {
            assert!(e.loop_id <= 1);
            assert!((mesh.vertices[e.v[1]] - mesh.vertices[e.v[0]]).norm() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn halving_h_scales_triangle_count() {
        let dom = annulus();
        let a = generate_mesh(&dom, &MeshOptions::new(0.1)).unwrap();
        let b = generate_mesh(&dom, &MeshOptions::new(0.05)).unwrap();
        let ratio = b.num_triangles() as f64 / a.num_triangles() as f64;
        assert!((2.5..=8.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn boundary_vertices_lie_on_circles() {
        let dom = annulus();
        let mesh = generate_mesh(&dom, &MeshOptions::new(0.1)).unwrap();
        for (i, v) in mesh.vertices.iter().enumerate() {
            match mesh.vertex_loop[i] {
                Some(0) => assert!((v.norm() - 1.0).abs() < 1e-12),
                Some(1) => assert!((v.norm() - 0.2).abs() < 1e-12),
                _ => {}
            }
        }
        let fine = mesh.refine_uniform(&dom).unwrap();
        assert_eq!(fine.num_triangles(), 4 * mesh.num_triangles());
        for (i, v) in fine.vertices.iter().enumerate() {
            if fine.vertex_loop[i] == Some(1) {
                assert!((v.norm() - 0.2).abs() < 1e-12);
            }
        }
        // sagitta bound for the inscribed polygon
        let sag = mesh.loop_length(1) / mesh.boundary_edges.iter().filter(|e| e.loop_id == 1).count() as f64;
        for t in 0..mesh.num_triangles() {
            let c = mesh.triangle_points(t).iter().sum::<Vec2>() / 3.0;
            assert!(c.norm() > 0.2 - sag * sag / (2.0 * 0.2));
        }
    }

    #[test]
    fn connectivity_is_consistent() {
        let dom = annulus();
        let mesh = generate_mesh(&dom, &MeshOptions::new(0.1)).unwrap();
        for t in 0..mesh.num_triangles() {
            assert!(mesh.triangle_area(t) > 0.0);
        }
        let nb = mesh.edge_tris.iter().filter(|p| p[1] == NO_TRIANGLE).count();
        assert_eq!(nb, mesh.boundary_edges.len());
        // Euler characteristic of an annulus is 0
        let chi = mesh.num_vertices() as i64 - mesh.edges.len() as i64 + mesh.num_triangles() as i64;
        assert_eq!(chi, 0);
        let x = Vec2::new(0.5, 0.3);
        let t = mesh.locate(&x).unwrap();
        assert!(mesh.barycentric(t, &x).iter().all(|&l| l >= -1e-12));
        assert!(mesh.locate(&Vec2::new(0.05, 0.0)).is_none());
        assert!(mesh.locate(&Vec2::new(2.0, 0.0)).is_none());
    }

    #[test]
    fn table_round_trip() {
        let dom = annulus();
        let mesh = generate_mesh(&dom, &MeshOptions::uniform(0.15)).unwrap();
        let mut buf = Vec::new();
        mesh.write_table(&mut buf).unwrap();
        let back = Mesh::read_table(std::io::Cursor::new(buf), mesh.h).unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.boundary_edges.len(), mesh.boundary_edges.len());
    }

    #[test]
    fn polygon_outer_with_two_cores() {
        let cfg = DefectConfiguration::new(vec![
            Defect::dislocation([-0.4, 0.0], [1.0, 0.0]),
            Defect::disclination([0.4, 0.1], 0.5),
        ])
        .unwrap();
        let sq = OuterBoundary::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        let dom = build_perforated_domain(sq, &cfg, 0.15).unwrap();
        let mesh = generate_mesh(&dom, &MeshOptions::new(0.1)).unwrap();
        let exact = 4.0 - 2.0 * PI * 0.0225;
        assert!((mesh.area() - exact).abs() / exact < 0.02);
        for l in 1..3 {
            assert!((mesh.loop_length(l) - 2.0 * PI * 0.15).abs() < 0.02 * 2.0 * PI * 0.15);
        }
    }
}
