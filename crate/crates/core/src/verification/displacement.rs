//! Integration of a strain field to a displacement along mesh edges.
//!
//! `du = eps dx + omega Pi dx` and `d omega = grad omega . dx`, where
//! `grad omega` depends only on first derivatives of `eps`. Both are carried
//! along a spanning tree of the mesh graph that never crosses the cut rays,
//! one ray from each core to the outer boundary. Edges that cross a ray
//! measure the jump of `(omega, u)` around that core; the remaining non-tree
//! edges close contractible loops and measure bulk incompatibility.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Mesh, PerforatedDomain};
use crate::elasticity::{cross, rotate_quarter_cw, Vec2};
use crate::error::{Error, Result};
use crate::field::StrainField;
use crate::quadrature::gauss_legendre_unit;

use super::integrals::rotation_gradient;

/// Jump of rotation and of displacement around one core, taken
/// counter-clockwise. The displacement jump has the rotation's lever arm
/// about the core center removed, so for a Volterra cut it is the Burgers
/// vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopMismatch {
    pub rotation_jump: f64,
    pub displacement_jump: [f64; 2],
}

/// Straight cut from a core center out of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutRay {
    pub origin: Vec2,
    pub direction: Vec2,
    pub length: f64,
}

impl CutRay {
    fn end(&self) -> Vec2 {
        self.origin + self.length * self.direction
    }

    fn distance_to(&self, x: &Vec2) -> f64 {
        let s = (x - self.origin).dot(&self.direction).clamp(0.0, self.length);
        (x - (self.origin + s * self.direction)).norm()
    }

    fn crosses(&self, a: &Vec2, b: &Vec2) -> bool {
        segments_cross(&self.origin, &self.end(), a, b)
    }
}

fn segments_cross(p1: &Vec2, p2: &Vec2, q1: &Vec2, q2: &Vec2) -> bool {
    let d = |a: &Vec2, b: &Vec2, c: &Vec2| cross(&(b - a), &(c - a));
    let (d1, d2) = (d(q1, q2, p1), d(q1, q2, p2));
    let (d3, d4) = (d(p1, p2, q1), d(p1, p2, q2));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Candidate directions, offset from lattice angles so rays do not pass
/// through mesh vertices placed symmetrically.
const RAY_CANDIDATES: usize = 72;
const RAY_OFFSET: f64 = 0.137_036;

/// One ray per core, pairwise disjoint, staying clear of the other cores and
/// leaving the outer boundary exactly once.
pub fn choose_cut_rays(dom: &PerforatedDomain) -> Result<Vec<CutRay>> {
    let (lo, hi) = dom.outer.bounding_box();
    let length = 2.0 * (hi - lo).norm();
    let mut rays: Vec<CutRay> = Vec::with_capacity(dom.num_cores());
    for (i, core) in dom.cores.iter().enumerate() {
        let origin = core.center_vec();
        let found = (0..RAY_CANDIDATES).find_map(|k| {
            let th = RAY_OFFSET + 2.0 * PI * k as f64 / RAY_CANDIDATES as f64;
            let ray = CutRay { origin, direction: Vec2::new(th.cos(), th.sin()), length };
            let clear = dom
                .cores
                .iter()
                .enumerate()
                .all(|(j, c)| j == i || ray.distance_to(&c.center_vec()) > 2.0 * c.radius);
            let disjoint = rays.iter().all(|r| !segments_cross(&r.origin, &r.end(), &ray.origin, &ray.end()));
            (clear && disjoint && exits_once(dom, &ray)).then_some(ray)
        });
        rays.push(found.ok_or_else(|| Error::Precondition(format!("no admissible cut ray for core {i}")))?);
    }
    Ok(rays)
}

fn exits_once(dom: &PerforatedDomain, ray: &CutRay) -> bool {
    let n = 4096;
    let mut left = false;
    for k in 1..=n {
        let inside = dom.outer.contains(&(ray.origin + (ray.length * k as f64 / n as f64) * ray.direction));
        if left && inside {
            return false;
        }
        left |= !inside;
    }
    left
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionOptions {
    /// Gauss points per edge.
    pub gauss_points: usize,
    /// Fail when a contractible loop misses closure by more than this.
    pub closure_tol: Option<f64>,
    /// Vertices fewer than this many edges away from a boundary vertex are
    /// left out, so paths avoid boundary layers of a discrete field. Counting
    /// edges makes the buffer follow the local element size.
    pub boundary_layers: usize,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self { gauss_points: 4, closure_tol: None, boundary_layers: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Per mesh vertex, zero at the base vertex; NaN for vertices inside the
    /// boundary layers left out.
    pub displacement: Vec<Vec2>,
    /// Per mesh vertex, zero at the base vertex; NaN inside the buffer.
    pub rotation: Vec<f64>,
    pub base_vertex: usize,
    pub mismatches: Vec<LoopMismatch>,
    pub cuts: Vec<CutRay>,
    /// Largest rotation misclosure over contractible loops.
    pub closure_rotation: f64,
    /// Largest displacement misclosure over contractible loops.
    pub closure_displacement: f64,
}

/// Integrals along edge `a -> b`, parametrized by `t in [0, 1]`:
/// `int eps d`, `int omega'` and `int (1 - t) omega'`.
#[derive(Debug, Clone, Copy)]
struct EdgeStep {
    strain: Vec2,
    rot: f64,
    rot_weighted: f64,
}

impl EdgeStep {
    /// `(omega(b) - omega(a), u(b) - u(a))` given `omega(a)`, for `d = b - a`.
    fn apply(&self, d: &Vec2, omega_a: f64) -> (f64, Vec2) {
        (self.rot, self.strain + rotate_quarter_cw(d) * (omega_a + self.rot_weighted))
    }

    fn reversed(&self) -> Self {
        Self { strain: -self.strain, rot: -self.rot, rot_weighted: self.rot_weighted - self.rot }
    }
}

fn edge_step(eps: &dyn StrainField, a: &Vec2, b: &Vec2, rule: &[(f64, f64)]) -> Result<EdgeStep> {
    let d = b - a;
    let mut s = EdgeStep { strain: Vec2::zeros(), rot: 0.0, rot_weighted: 0.0 };
    for &(t, w) in rule {
        let (e, de) = eps.strain_jet(&(a + t * d))?;
        let dw = rotation_gradient(&de).dot(&d);
        s.strain += w * e.apply(&d);
        s.rot += w * dw;
        s.rot_weighted += w * (1.0 - t) * dw;
    }
    Ok(s)
}

/// Edge count from each vertex to the nearest boundary vertex.
fn boundary_hops(mesh: &Mesh) -> Vec<usize> {
    let nv = mesh.num_vertices();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for &[a, b] in &mesh.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut hops = vec![usize::MAX; nv];
    let mut queue = VecDeque::new();
    for v in 0..nv {
        if mesh.vertex_loop[v].is_some() {
            hops[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(p) = queue.pop_front() {
        for &q in &adj[p] {
            if hops[q] == usize::MAX {
                hops[q] = hops[p] + 1;
                queue.push_back(q);
            }
        }
    }
    hops
}

/// Vertices reachable from `start` through edges accepted by `open`.
fn component_of(mesh: &Mesh, start: usize, open: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); mesh.num_vertices()];
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut seen = vec![false; mesh.num_vertices()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(p) = stack.pop() {
        for &(q, e) in &adj[p] {
            if !seen[q] && open(e) {
                seen[q] = true;
                stack.push(q);
            }
        }
    }
    seen
}

pub fn reconstruct_displacement(
    eps: &dyn StrainField,
    mesh: &Mesh,
    dom: &PerforatedDomain,
    base: &Vec2,
    opts: &ReconstructionOptions,
) -> Result<Reconstruction> {
    let cuts = choose_cut_rays(dom)?;
    let rule = gauss_legendre_unit(opts.gauss_points);
    let nv = mesh.num_vertices();
    let kept: Vec<bool> = boundary_hops(mesh).iter().map(|&d| d >= opts.boundary_layers).collect();
    let base_vertex = (0..nv)
        .filter(|&i| kept[i])
        .min_by(|&i, &j| (mesh.vertices[i] - base).norm().total_cmp(&(mesh.vertices[j] - base).norm()))
        .ok_or_else(|| Error::Precondition("no vertex left outside the boundary layers".into()))?;
    // Pockets cut off by the boundary layers are dropped along with them.
    let active = component_of(mesh, base_vertex, |e| {
        let [a, b] = mesh.edges[e];
        kept[a] && kept[b]
    });
    let used: Vec<bool> = mesh.edges.iter().map(|&[a, b]| active[a] && active[b]).collect();
    let zero = EdgeStep { strain: Vec2::zeros(), rot: 0.0, rot_weighted: 0.0 };
    let steps: Vec<EdgeStep> = mesh
        .edges
        .par_iter()
        .zip(used.par_iter())
        .map(|(&[a, b], &u)| if u { edge_step(eps, &mesh.vertices[a], &mesh.vertices[b], &rule) } else { Ok(zero) })
        .collect::<Result<_>>()?;
    let cut_of: Vec<Option<usize>> = mesh
        .edges
        .iter()
        .map(|&[a, b]| cuts.iter().position(|r| r.crosses(&mesh.vertices[a], &mesh.vertices[b])))
        .collect();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        if used[e] && cut_of[e].is_none() {
            adj[a].push(e);
            adj[b].push(e);
        }
    }

    // Oriented step from `from` along edge `e`.
    let oriented = |e: usize, from: usize| {
        let [a, b] = mesh.edges[e];
        if from == a { (b, steps[e]) } else { (a, steps[e].reversed()) }
    };

    let mut omega = vec![f64::NAN; nv];
    let mut u = vec![Vec2::new(f64::NAN, f64::NAN); nv];
    let mut tree = vec![false; mesh.edges.len()];
    omega[base_vertex] = 0.0;
    u[base_vertex] = Vec2::zeros();
    let mut queue = VecDeque::from([base_vertex]);
    while let Some(p) = queue.pop_front() {
        for &e in &adj[p] {
            let (q, st) = oriented(e, p);
            if !omega[q].is_nan() {
                continue;
            }
            let (dw, du) = st.apply(&(mesh.vertices[q] - mesh.vertices[p]), omega[p]);
            omega[q] = omega[p] + dw;
            u[q] = u[p] + du;
            tree[e] = true;
            queue.push_back(q);
        }
    }
    if omega.iter().zip(&active).any(|(w, &a)| a && w.is_nan()) {
        return Err(Error::Precondition("cut rays disconnect the mesh".into()));
    }

    let (mut closure_rotation, mut closure_displacement) = (0.0f64, 0.0f64);
    let mut sums = vec![(0.0, Vec2::zeros(), 0usize); cuts.len()];
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        if tree[e] || !used[e] {
            continue;
        }
        match cut_of[e] {
            None => {
                let (dw, du) = steps[e].apply(&(mesh.vertices[b] - mesh.vertices[a]), omega[a]);
                closure_rotation = closure_rotation.max((omega[a] + dw - omega[b]).abs());
                closure_displacement = closure_displacement.max((u[a] + du - u[b]).norm());
            }
            Some(i) => {
                let xi = cuts[i].origin;
                let (p, q) = if cross(&(mesh.vertices[a] - xi), &(mesh.vertices[b] - xi)) > 0.0 { (a, b) } else { (b, a) };
                let (_, st) = oriented(e, p);
                let (xp, xq) = (mesh.vertices[p], mesh.vertices[q]);
                let (dw, du) = st.apply(&(xq - xp), omega[p]);
                let jump = omega[p] + dw - omega[q];
                let around = du + u[p] - u[q] + jump * rotate_quarter_cw(&(xp - xq));
                let burgers = around - jump * rotate_quarter_cw(&(xp - xi));
                sums[i].0 += jump;
                sums[i].1 += burgers;
                sums[i].2 += 1;
            }
        }
    }
    if let Some(tol) = opts.closure_tol {
        if closure_rotation > tol || closure_displacement > tol {
            return Err(Error::Precondition(format!(
                "strain is not compatible in the bulk: loop misclosure {closure_rotation:e} (rotation), \
                 {closure_displacement:e} (displacement) exceeds {tol:e}"
            )));
        }
    }
    let mismatches = sums
        .iter()
        .enumerate()
        .map(|(i, &(w, b, n))| {
            if n == 0 {
                return Err(Error::Precondition(format!("cut ray of core {i} crosses no mesh edge")));
            }
            let n = n as f64;
            Ok(LoopMismatch { rotation_jump: w / n, displacement_jump: [b.x / n, b.y / n] })
        })
        .collect::<Result<_>>()?;
    Ok(Reconstruction {
        displacement: u,
        rotation: omega,
        base_vertex,
        mismatches,
        cuts,
        closure_rotation,
        closure_displacement,
    })
}
