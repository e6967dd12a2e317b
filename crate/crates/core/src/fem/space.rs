use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::element::{ElementBasis, ElementKind, Functional, LocalDof};
use crate::defects::ScalarJet3;
use crate::domain::Mesh;
use crate::elasticity::Vec2;
use crate::error::{Error, Result};

/// Boundary datum `a0 + a1 x1 + a2 x2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineTrace {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl AffineTrace {
    pub const fn new(a0: f64, a1: f64, a2: f64) -> Self {
        Self { a0, a1, a2 }
    }

    /// Affine mode `r` centered at `c`: `1`, `x1 - c1` or `x2 - c2`.
    pub fn mode(r: usize, c: &Vec2) -> Self {
        match r {
            0 => Self::new(1.0, 0.0, 0.0),
            1 => Self::new(-c.x, 1.0, 0.0),
            2 => Self::new(-c.y, 0.0, 1.0),
            _ => panic!("affine mode index {r} out of range"),
        }
    }

    pub fn eval(&self, x: &Vec2) -> f64 {
        self.a0 + self.a1 * x.x + self.a2 * x.y
    }

    pub fn gradient(&self) -> Vec2 {
        Vec2::new(self.a1, self.a2)
    }

    pub fn jet(&self, x: &Vec2) -> ScalarJet3 {
        ScalarJet3::affine([self.a0, self.a1, self.a2], x)
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.a1.is_finite() && self.a2.is_finite()
    }
}

pub type JetFn = Arc<dyn Fn(&Vec2) -> ScalarJet3 + Send + Sync>;

/// Clamped data on one boundary loop: the trace and normal derivative of
/// the given function.
#[derive(Clone)]
pub enum BoundaryData {
    Clamped,
    Affine(AffineTrace),
    /// Trace of a smooth function sampled through its jet.
    Sampled(JetFn),
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryData::Clamped => write!(f, "Clamped"),
            BoundaryData::Affine(a) => write!(f, "Affine({a:?})"),
            BoundaryData::Sampled(_) => write!(f, "Sampled(..)"),
        }
    }
}

impl BoundaryData {
    pub fn jet(&self, x: &Vec2) -> ScalarJet3 {
        match self {
            BoundaryData::Clamped => ScalarJet3::ZERO,
            BoundaryData::Affine(a) => a.jet(x),
            BoundaryData::Sampled(f) => f(x),
        }
    }
}

/// Degree-of-freedom map of a plate element on a mesh.
///
/// Vertex dofs are scaled by a local length so all unknowns have comparable
/// magnitude. Boundary vertices use a tangent/normal frame, which lets the
/// clamped conditions at straight boundary points leave the normal-normal
/// curvature free.
#[derive(Debug)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    pub kind: ElementKind,
    frames: Vec<[Vec2; 2]>,
    vertex_scale: Vec<f64>,
    corner: Vec<bool>,
    edge_normal: Vec<Vec2>,
    vertex_tris: Vec<Vec<u32>>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, kind: ElementKind) -> Result<Self> {
        let nv = mesh.num_vertices();
        let mut sum = vec![0.0; nv];
        let mut count = vec![0usize; nv];
        for (e, &[a, b]) in mesh.edges.iter().enumerate() {
            let l = mesh.edge_length(e);
            for v in [a, b] {
                sum[v] += l;
                count[v] += 1;
            }
        }
        let vertex_scale: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| s / c.max(1) as f64).collect();

        let mut frames = vec![[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]; nv];
        let mut corner = vec![false; nv];
        let mut incoming = vec![None; nv];
        let mut outgoing = vec![None; nv];
        for be in &mesh.boundary_edges {
            outgoing[be.v[0]] = Some(be.v[1]);
            incoming[be.v[1]] = Some(be.v[0]);
        }
        for v in 0..nv {
            if mesh.vertex_loop[v].is_none() {
                continue;
            }
            let (Some(p), Some(n)) = (incoming[v], outgoing[v]) else {
                return Err(Error::Mesh(format!("boundary vertex {v} is not on a closed loop")));
            };
            let din = (mesh.vertices[v] - mesh.vertices[p]).normalize();
            let dout = (mesh.vertices[n] - mesh.vertices[v]).normalize();
            corner[v] = din.perp(&dout).abs() > 1e-8;
            let t = (mesh.vertices[n] - mesh.vertices[p]).normalize();
            frames[v] = [t, Vec2::new(-t.y, t.x)];
        }
        let edge_normal = mesh
            .edges
            .iter()
            .map(|&[a, b]| {
                let t = (mesh.vertices[b] - mesh.vertices[a]).normalize();
                Vec2::new(t.y, -t.x)
            })
            .collect();
        let mut vertex_tris = vec![Vec::new(); nv];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for &v in tri {
                vertex_tris[v].push(t as u32);
            }
        }
        Ok(Self { mesh, kind, frames, vertex_scale, corner, edge_normal, vertex_tris })
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_vertices() * self.kind.vertex_dofs() + self.mesh.edges.len()
    }

    pub fn vertex_dof(&self, v: usize, role: usize) -> usize {
        v * self.kind.vertex_dofs() + role
    }

    pub fn edge_dof(&self, e: usize) -> usize {
        self.mesh.num_vertices() * self.kind.vertex_dofs() + e
    }

    /// Global normal of edge `e`: the clockwise quarter turn of the direction
    /// from the lower to the higher vertex index.
    pub fn edge_normal(&self, e: usize) -> Vec2 {
        self.edge_normal[e]
    }

    pub fn is_corner(&self, v: usize) -> bool {
        self.corner[v]
    }

    fn vertex_functionals(&self, v: usize) -> Vec<Functional> {
        match self.kind {
            ElementKind::Morley => vec![Functional::Value],
            ElementKind::Argyris => {
                let [e1, e2] = self.frames[v];
                let s = self.vertex_scale[v];
                vec![
                    Functional::Value,
                    Functional::Slope { dir: e1, scale: s },
                    Functional::Slope { dir: e2, scale: s },
                    Functional::Curvature { e: e1, f: e1, scale: s },
                    Functional::Curvature { e: e1, f: e2, scale: s },
                    Functional::Curvature { e: e2, f: e2, scale: s },
                ]
            }
        }
    }

    fn edge_functional(&self, e: usize) -> LocalDof {
        let [a, b] = self.mesh.edges[e];
        let (pa, pb) = (self.mesh.vertices[a], self.mesh.vertices[b]);
        LocalDof {
            point: 0.5 * (pa + pb),
            functional: Functional::Slope { dir: self.edge_normal[e], scale: (pb - pa).norm() },
        }
    }

    /// Global ids and functionals of the local dofs of triangle `t`.
    pub fn element_dofs(&self, t: usize) -> (Vec<usize>, Vec<LocalDof>) {
        let tri = self.mesh.triangles[t];
        let nvd = self.kind.vertex_dofs();
        let mut ids = Vec::with_capacity(self.kind.local_dofs());
        let mut fun = Vec::with_capacity(self.kind.local_dofs());
        for &v in &tri {
            for (role, f) in self.vertex_functionals(v).into_iter().enumerate() {
                ids.push(v * nvd + role);
                fun.push(LocalDof { point: self.mesh.vertices[v], functional: f });
            }
        }
        for &e in &self.mesh.tri_edges[t] {
            ids.push(self.edge_dof(e));
            fun.push(self.edge_functional(e));
        }
        (ids, fun)
    }

    pub fn element_basis(&self, t: usize) -> Result<ElementBasis> {
        let (_, fun) = self.element_dofs(t);
        ElementBasis::new(self.kind, &self.mesh.triangle_points(t), &fun)
    }

    /// Elements touching a dof.
    pub fn dof_support(&self, dof: usize) -> Vec<usize> {
        let nvd = self.kind.vertex_dofs();
        let split = self.mesh.num_vertices() * nvd;
        if dof < split {
            self.vertex_tris[dof / nvd].iter().map(|&t| t as usize).collect()
        } else {
            self.mesh.edge_tris[dof - split].iter().copied().filter(|&t| t != usize::MAX).collect()
        }
    }

    /// Applies every global functional to a smooth function given by its jet.
    pub fn interpolate(&self, f: impl Fn(&Vec2) -> ScalarJet3) -> Vec<f64> {
        let mut out = vec![0.0; self.num_dofs()];
        let nvd = self.kind.vertex_dofs();
        for v in 0..self.mesh.num_vertices() {
            let jet = f(&self.mesh.vertices[v]);
            for (role, fun) in self.vertex_functionals(v).iter().enumerate() {
                out[v * nvd + role] = apply(fun, &jet);
            }
        }
        for e in 0..self.mesh.edges.len() {
            let d = self.edge_functional(e);
            out[self.edge_dof(e)] = apply(&d.functional, &f(&d.point));
        }
        out
    }

    /// Dofs fixed by clamped data on `loop_id` with their values. At straight
    /// boundary vertices the normal-normal curvature stays free.
    pub fn loop_constraints(&self, loop_id: usize, data: &BoundaryData) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let nvd = self.kind.vertex_dofs();
        for v in 0..self.mesh.num_vertices() {
            if self.mesh.vertex_loop[v] != Some(loop_id) {
                continue;
            }
            let jet = data.jet(&self.mesh.vertices[v]);
            for (role, fun) in self.vertex_functionals(v).iter().enumerate() {
                if role == 5 && !self.corner[v] {
                    continue;
                }
                out.push((v * nvd + role, apply(fun, &jet)));
            }
        }
        for (e, l) in self.mesh.edge_loop.iter().enumerate() {
            if *l == Some(loop_id) {
                let d = self.edge_functional(e);
                out.push((self.edge_dof(e), apply(&d.functional, &data.jet(&d.point))));
            }
        }
        out
    }

    /// Mask of dofs fixed when every loop carries clamped data.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_dofs()];
        let loops: std::collections::BTreeSet<usize> = self.mesh.boundary_edges.iter().map(|e| e.loop_id).collect();
        for l in loops {
            for (d, _) in self.loop_constraints(l, &BoundaryData::Clamped) {
                mask[d] = true;
            }
        }
        mask
    }
}

fn apply(f: &Functional, jet: &ScalarJet3) -> f64 {
    match *f {
        Functional::Value => jet.value,
        Functional::Slope { dir, scale } => scale * jet.gradient.dot(&dir),
        Functional::Curvature { e, f, scale } => scale * scale * e.dot(&jet.hessian.apply(&f)),
    }
}
