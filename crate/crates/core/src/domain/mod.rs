//! Perforated domain geometry and exact boundary parametrizations.
//!
//! Every loop stores `n = Pi t` with `Pi` the clockwise quarter turn. The
//! outer loop runs counter-clockwise, so `n` is the outward normal of the
//! body. A core loop traversed clockwise has `n` pointing to the core
//! center, i.e. outward of the perforated domain; traversed
//! counter-clockwise, `n` points away from the center.

mod mesh;

pub use mesh::{generate_mesh, BoundaryEdge, Mesh, MeshOptions, MeshStats, NO_TRIANGLE};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::defects::{core_radius_bound, extend_defects, DefectConfiguration, ExtendedDefect};
use crate::elasticity::{rotate_quarter_cw, Vec2};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;

#[derive(Debug, Clone, PartialEq)]
pub enum OuterBoundary {
    Disk { center: Vec2, radius: f64 },
    /// Simple polygon, counter-clockwise.
    Polygon { vertices: Vec<Vec2> },
}

fn segment_closest(x: &Vec2, a: &Vec2, b: &Vec2) -> Vec2 {
    let ab = b - a;
    let t = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    a + t * ab
}

fn segment_distance(x: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (x - segment_closest(x, a, b)).norm()
}

fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    (b - a).perp(&(c - a))
}

fn segments_cross(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Even-odd point-in-polygon test.
pub(crate) fn point_in_polygon(x: &Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > x.y) != (b.y > x.y) {
            let xc = a.x + (x.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x.x < xc {
                inside = !inside;
            }
        }
    }
    inside
}

impl OuterBoundary {
    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        let b = OuterBoundary::Disk { center: center.into(), radius };
        b.validate()?;
        Ok(b)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let b = OuterBoundary::Polygon { vertices: vertices.into_iter().map(Vec2::from).collect() };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OuterBoundary::Disk { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0 && center.iter().all(|c| c.is_finite())) {
                    return Err(Error::InvalidDomain(format!("disk radius must be positive, got {radius}")));
                }
            }
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::InvalidDomain("polygon needs at least 3 vertices".into()));
                }
                if self.signed_area() <= 0.0 {
                    return Err(Error::InvalidDomain("polygon must be counter-clockwise".into()));
                }
                for i in 0..n {
                    for j in i + 1..n {
                        if j == i + 1 || (i == 0 && j == n - 1) {
                            continue;
                        }
                        if segments_cross(&vertices[i], &vertices[(i + 1) % n], &vertices[j], &vertices[(j + 1) % n]) {
                            return Err(Error::InvalidDomain(format!("polygon edges {i} and {j} intersect")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn signed_area(&self) -> f64 {
        match self {
            OuterBoundary::Disk { radius, .. } => PI * radius * radius,
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n).map(|i| vertices[i].perp(&vertices[(i + 1) % n])).sum::<f64>()
            }
        }
    }

    /// Strict interior test.
    pub fn contains(&self, x: &Vec2) -> bool {
        match self {
            OuterBoundary::Disk { center, radius } => (x - center).norm() < *radius,
            OuterBoundary::Polygon { vertices } => {
                point_in_polygon(x, vertices) && self.distance_to_boundary(x) > 0.0
            }
        }
    }

    pub fn distance_to_boundary(&self, x: &Vec2) -> f64 {
        match self {
            OuterBoundary::Disk { center, radius } => (radius - (x - center).norm()).abs(),
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(x, &vertices[i], &vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match self {
            OuterBoundary::Disk { center, radius } => {
                (center - Vec2::new(*radius, *radius), center + Vec2::new(*radius, *radius))
            }
            OuterBoundary::Polygon { vertices } => {
                let mut lo = vertices[0];
                let mut hi = vertices[0];
                for v in vertices {
                    lo = lo.inf(v);
                    hi = hi.sup(v);
                }
                (lo, hi)
            }
        }
    }

    /// Closest point on the exact boundary, used to place refined boundary vertices.
    pub fn project(&self, x: &Vec2) -> Vec2 {
        match self {
            OuterBoundary::Disk { center, radius } => center + (radius / (x - center).norm()) * (x - center),
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_closest(x, &vertices[i], &vertices[(i + 1) % n]))
                    .min_by(|p, q| (p - x).norm().total_cmp(&(q - x).norm()))
                    .expect("polygon has vertices")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Core {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Core {
    pub fn center_vec(&self) -> Vec2 {
        self.center.into()
    }
}

/// Outer region minus one disk of radius `eps` per defect; core `i` belongs
/// to defect `i`.
#[derive(Debug, Clone)]
pub struct PerforatedDomain {
    pub outer: OuterBoundary,
    pub cores: Vec<Core>,
    pub eps: f64,
    pub defects: Vec<ExtendedDefect>,
}

/// Reasons `eps` is inadmissible, one per offending pair or boundary contact.
pub fn core_radius_violations(outer: &OuterBoundary, cfg: &DefectConfiguration, eps: f64) -> Vec<String> {
    let mut out = Vec::new();
    if !(eps.is_finite() && eps > 0.0) {
        out.push(format!("core radius must be positive, got {eps}"));
        return out;
    }
    let e = cfg.entries();
    for i in 0..e.len() {
        let d = outer.distance_to_boundary(&e[i].position());
        if d <= eps {
            out.push(format!(
                "core {i} touches the outer boundary: distance {d} must exceed the core radius {eps}"
            ));
        }
        for j in i + 1..e.len() {
            let d = (e[i].position() - e[j].position()).norm();
            if d <= 2.0 * eps {
                out.push(format!(
                    "cores {i} and {j} overlap: centers are {d} apart, need more than 2*eps = {}",
                    2.0 * eps
                ));
            }
        }
    }
    out
}

pub fn build_perforated_domain(outer: OuterBoundary, cfg: &DefectConfiguration, eps: f64) -> Result<PerforatedDomain> {
    outer.validate()?;
    let bound = core_radius_bound(cfg, &outer)?;
    let violations = core_radius_violations(&outer, cfg, eps);
    if !violations.is_empty() || eps >= bound {
        let mut msg = format!("core radius {eps} must lie in (0, {bound})");
        for v in violations {
            msg.push_str("; ");
            msg.push_str(&v);
        }
        return Err(Error::InvalidDomain(msg));
    }
    let defects = extend_defects(cfg)?;
    let cores = defects.iter().map(|d| Core { center: d.position, radius: eps }).collect();
    Ok(PerforatedDomain { outer, cores, eps, defects })
}

impl PerforatedDomain {
    /// The outer region with no cores removed, for plain plate problems.
    pub fn unperforated(outer: OuterBoundary) -> Result<Self> {
        outer.validate()?;
        Ok(Self { outer, cores: Vec::new(), eps: f64::INFINITY, defects: Vec::new() })
    }

    pub fn num_cores(&self) -> usize {
        self.cores.len()
    }

    /// Loop ids: 0 is the outer boundary, `i + 1` is core `i`.
    pub fn num_loops(&self) -> usize {
        self.cores.len() + 1
    }

    pub fn contains(&self, x: &Vec2) -> bool {
        self.outer.contains(x) && self.cores.iter().all(|c| (x - c.center_vec()).norm() > c.radius)
    }

    /// Exact area of the perforated region.
    pub fn area(&self) -> f64 {
        self.outer.signed_area() - self.cores.len() as f64 * PI * self.eps * self.eps
    }

    /// Distance from `x` to the nearest boundary of the perforated region.
    pub fn clearance(&self, x: &Vec2) -> f64 {
        let mut d = self.outer.distance_to_boundary(x);
        for c in &self.cores {
            d = d.min((x - c.center_vec()).norm() - c.radius);
        }
        d
    }

    pub fn boundary_loop(&self, loop_id: usize, n_quad: usize, orientation: Orientation) -> Result<BoundaryLoop> {
        if loop_id == 0 {
            match &self.outer {
                OuterBoundary::Disk { center, radius } => Ok(BoundaryLoop::circle(0, *center, *radius, n_quad, orientation)),
                OuterBoundary::Polygon { vertices } => Ok(BoundaryLoop::polygon(0, vertices, n_quad, orientation)),
            }
        } else {
            let core = self.cores.get(loop_id - 1).ok_or(Error::UnknownLoop(loop_id))?;
            Ok(BoundaryLoop::circle(loop_id, core.center_vec(), core.radius, n_quad, orientation))
        }
    }

    /// Core loop with the traversal that makes `n` point out of the perforated
    /// domain (toward the core center).
    pub fn core_loop(&self, core: usize, n_quad: usize) -> Result<BoundaryLoop> {
        self.boundary_loop(core + 1, n_quad, Orientation::Clockwise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopNode {
    pub x: Vec2,
    /// Unit tangent in the direction of traversal.
    pub t: Vec2,
    /// `Pi t`.
    pub n: Vec2,
    pub weight: f64,
}

/// Quadrature nodes along one boundary curve.
#[derive(Debug, Clone)]
pub struct BoundaryLoop {
    pub loop_id: usize,
    pub orientation: Orientation,
    pub nodes: Vec<LoopNode>,
}

impl BoundaryLoop {
    /// Uniform trapezoidal nodes on a circle; spectrally accurate for smooth
    /// periodic integrands.
    pub fn circle(loop_id: usize, center: Vec2, radius: f64, n: usize, orientation: Orientation) -> Self {
        let sign = match orientation {
            Orientation::CounterClockwise => 1.0,
            Orientation::Clockwise => -1.0,
        };
        let w = 2.0 * PI * radius / n as f64;
        let nodes = (0..n)
            .map(|k| {
                let th = sign * 2.0 * PI * k as f64 / n as f64;
                let (s, c) = th.sin_cos();
                let t = sign * Vec2::new(-s, c);
                LoopNode { x: center + radius * Vec2::new(c, s), t, n: rotate_quarter_cw(&t), weight: w }
            })
            .collect();
        Self { loop_id, orientation, nodes }
    }

    /// Gauss nodes on every edge of a counter-clockwise polygon.
    pub fn polygon(loop_id: usize, vertices: &[Vec2], n_per_edge: usize, orientation: Orientation) -> Self {
        let gl = gauss_legendre_unit(n_per_edge);
        let m = vertices.len();
        let mut nodes = Vec::with_capacity(m * gl.len());
        for i in 0..m {
            let (a, b) = match orientation {
                Orientation::CounterClockwise => (vertices[i], vertices[(i + 1) % m]),
                Orientation::Clockwise => (vertices[(m - i) % m], vertices[(2 * m - i - 1) % m]),
            };
            let len = (b - a).norm();
            let t = (b - a) / len;
            for &(u, w) in &gl {
                nodes.push(LoopNode { x: a + u * (b - a), t, n: rotate_quarter_cw(&t), weight: w * len });
            }
        }
        Self { loop_id, orientation, nodes }
    }

    pub fn reversed(&self) -> Self {
        let orientation = match self.orientation {
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::CounterClockwise,
        };
        let nodes = self
            .nodes
            .iter()
            .map(|nd| LoopNode { x: nd.x, t: -nd.t, n: -nd.n, weight: nd.weight })
            .collect();
        Self { loop_id: self.loop_id, orientation, nodes }
    }

    pub fn length(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// `int f dH^1`.
    pub fn integrate(&self, mut f: impl FnMut(&LoopNode) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for nd in &self.nodes {
            acc += nd.weight * f(nd)?;
        }
        Ok(acc)
    }

    /// Vector-valued `int f dH^1`.
    pub fn integrate_vec(&self, mut f: impl FnMut(&LoopNode) -> Result<Vec2>) -> Result<Vec2> {
        let mut acc = Vec2::zeros();
        for nd in &self.nodes {
            acc += nd.weight * f(nd)?;
        }
        Ok(acc)
    }

    /// The one-form integrals `(int f dx_1, int f dx_2)`.
    pub fn integrate_form(&self, mut f: impl FnMut(&LoopNode) -> Result<f64>) -> Result<Vec2> {
        self.integrate_vec(|nd| Ok(f(nd)? * nd.t))
    }
}

/// Plain-function convenience wrapper around [`BoundaryLoop::integrate`].
pub fn line_integral(lp: &BoundaryLoop, f: impl Fn(&Vec2, &Vec2, &Vec2) -> f64) -> f64 {
    lp.nodes.iter().map(|nd| nd.weight * f(&nd.x, &nd.n, &nd.t)).sum()
}
