//! Triangle plate elements built from a local monomial basis.
//!
//! Each element inverts the matrix of its degree-of-freedom functionals
//! applied to monomials in the scaled coordinates `(x - c) / d`, so shape
//! functions live directly in physical space and no reference map is needed.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::defects::ScalarJet3;
use crate::elasticity::{SymTensor2, Vec2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// Quadratic nonconforming: vertex values and edge-midpoint normal derivatives.
    Morley,
    /// Quintic C1: second-order jets at vertices and edge-midpoint normal derivatives.
    Argyris,
}

impl ElementKind {
    pub fn degree(self) -> usize {
        match self {
            ElementKind::Morley => 2,
            ElementKind::Argyris => 5,
        }
    }

    pub fn vertex_dofs(self) -> usize {
        match self {
            ElementKind::Morley => 1,
            ElementKind::Argyris => 6,
        }
    }

    pub fn num_monomials(self) -> usize {
        let p = self.degree();
        (p + 1) * (p + 2) / 2
    }

    pub fn local_dofs(self) -> usize {
        3 * self.vertex_dofs() + 3
    }

    /// Energy-norm convergence order for smooth solutions.
    pub fn nominal_order(self) -> f64 {
        match self {
            ElementKind::Morley => 1.0,
            ElementKind::Argyris => 4.0,
        }
    }

    pub fn is_conforming(self) -> bool {
        matches!(self, ElementKind::Argyris)
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Morley => "morley",
            ElementKind::Argyris => "argyris",
        }
    }
}

/// A scaled point functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    Value,
    /// `s * e . grad u`
    Slope { dir: Vec2, scale: f64 },
    /// `s^2 * e^T hess(u) f`
    Curvature { e: Vec2, f: Vec2, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDof {
    pub point: Vec2,
    pub functional: Functional,
}

/// Number of derivative slots up to third order:
/// `00, 10, 01, 20, 11, 02, 30, 21, 12, 03`.
pub const NDER: usize = 10;
const DER: [(u32, u32); NDER] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];

pub fn monomial_exponents(degree: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for total in 0..=degree as u32 {
        for b in 0..=total {
            out.push((total - b, b));
        }
    }
    out
}

fn falling(a: u32, i: u32) -> f64 {
    (0..i).map(|k| (a - k) as f64).product()
}

/// All monomial derivatives up to third order in physical units at `x`.
/// Row-major: `out[m * NDER + slot]`.
pub fn monomial_derivatives(exps: &[(u32, u32)], center: &Vec2, scale: f64, x: &Vec2, out: &mut Vec<f64>) {
    let xi = (x - center) / scale;
    let max = exps.iter().map(|e| e.0.max(e.1)).max().unwrap_or(0) as usize;
    let mut px = vec![1.0; max + 1];
    let mut py = vec![1.0; max + 1];
    for k in 1..=max {
        px[k] = px[k - 1] * xi.x;
        py[k] = py[k - 1] * xi.y;
    }
    let inv = [1.0, 1.0 / scale, 1.0 / (scale * scale), 1.0 / (scale * scale * scale)];
    out.clear();
    out.resize(exps.len() * NDER, 0.0);
    for (m, &(a, b)) in exps.iter().enumerate() {
        for (s, &(i, j)) in DER.iter().enumerate() {
            if i <= a && j <= b {
                out[m * NDER + s] = falling(a, i) * falling(b, j) * px[(a - i) as usize] * py[(b - j) as usize] * inv[(i + j) as usize];
            }
        }
    }
}

fn apply_functional(f: &Functional, d: &[f64]) -> f64 {
    match *f {
        Functional::Value => d[0],
        Functional::Slope { dir, scale } => scale * (dir.x * d[1] + dir.y * d[2]),
        Functional::Curvature { e, f, scale } => {
            scale * scale * (e.x * f.x * d[3] + (e.x * f.y + e.y * f.x) * d[4] + e.y * f.y * d[5])
        }
    }
}

/// Shape functions of one triangle as monomial coefficient columns.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    pub center: Vec2,
    pub scale: f64,
    /// `coef[(m, k)]` is the coefficient of monomial `m` in shape function `k`.
    pub coef: DMatrix<f64>,
}

impl ElementBasis {
    pub fn new(kind: ElementKind, points: &[Vec2; 3], dofs: &[LocalDof]) -> Result<Self> {
        let exps = monomial_exponents(kind.degree());
        let center = (points[0] + points[1] + points[2]) / 3.0;
        let scale = (0..3).map(|k| (points[(k + 1) % 3] - points[k]).norm()).fold(0.0, f64::max);
        let nm = exps.len();
        let mut vander = DMatrix::<f64>::zeros(dofs.len(), nm);
        let mut d = Vec::new();
        for (k, dof) in dofs.iter().enumerate() {
            monomial_derivatives(&exps, &center, scale, &dof.point, &mut d);
            for m in 0..nm {
                vander[(k, m)] = apply_functional(&dof.functional, &d[m * NDER..(m + 1) * NDER]);
            }
        }
        let coef = vander
            .try_inverse()
            .ok_or_else(|| Error::Solver("singular element functional matrix".into()))?;
        Ok(Self { center, scale, coef })
    }

    /// Monomial coefficients of the element polynomial with local dof values `u`.
    pub fn polynomial(&self, u: &[f64]) -> Vec<f64> {
        let nm = self.coef.nrows();
        (0..nm).map(|m| (0..u.len()).map(|k| self.coef[(m, k)] * u[k]).sum()).collect()
    }
}

/// All derivatives up to third order of a polynomial, in the slot order
/// `1, x, y, xx, xy, yy, xxx, xxy, xyy, yyy`.
pub fn polynomial_derivatives(
    exps: &[(u32, u32)],
    center: &Vec2,
    scale: f64,
    q: &[f64],
    x: &Vec2,
    scratch: &mut Vec<f64>,
) -> [f64; NDER] {
    monomial_derivatives(exps, center, scale, x, scratch);
    let mut s = [0.0; NDER];
    for (m, &c) in q.iter().enumerate() {
        if c != 0.0 {
            for k in 0..NDER {
                s[k] += c * scratch[m * NDER + k];
            }
        }
    }
    s
}

pub fn jet_from_derivatives(s: &[f64; NDER]) -> ScalarJet3 {
    ScalarJet3 {
        value: s[0],
        gradient: Vec2::new(s[1], s[2]),
        hessian: SymTensor2::new(s[3], s[4], s[5]),
        grad_laplacian: Vec2::new(s[6] + s[8], s[7] + s[9]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn argyris_dofs(p: &[Vec2; 3]) -> Vec<LocalDof> {
        let ex = Vec2::new(1.0, 0.0);
        let ey = Vec2::new(0.0, 1.0);
        let mut out = Vec::new();
        for v in p {
            out.push(LocalDof { point: *v, functional: Functional::Value });
            out.push(LocalDof { point: *v, functional: Functional::Slope { dir: ex, scale: 0.1 } });
            out.push(LocalDof { point: *v, functional: Functional::Slope { dir: ey, scale: 0.1 } });
            out.push(LocalDof { point: *v, functional: Functional::Curvature { e: ex, f: ex, scale: 0.1 } });
            out.push(LocalDof { point: *v, functional: Functional::Curvature { e: ex, f: ey, scale: 0.1 } });
            out.push(LocalDof { point: *v, functional: Functional::Curvature { e: ey, f: ey, scale: 0.1 } });
        }
        for k in 0..3 {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            let t = (b - a).normalize();
            out.push(LocalDof { point: 0.5 * (a + b), functional: Functional::Slope { dir: Vec2::new(t.y, -t.x), scale: 0.1 } });
        }
        out
    }

    #[test]
    fn argyris_reproduces_quintics() {
        let p = [Vec2::new(0.1, 0.2), Vec2::new(0.25, 0.18), Vec2::new(0.17, 0.33)];
        let dofs = argyris_dofs(&p);
        let basis = ElementBasis::new(ElementKind::Argyris, &p, &dofs).unwrap();
        // u = x^3 y^2 - 2 x y + 1
        let u = |x: &Vec2| x.x.powi(3) * x.y.powi(2) - 2.0 * x.x * x.y + 1.0;
        let g = |x: &Vec2| Vec2::new(3.0 * x.x.powi(2) * x.y.powi(2) - 2.0 * x.y, 2.0 * x.x.powi(3) * x.y - 2.0 * x.x);
        let h = |x: &Vec2| SymTensor2::new(6.0 * x.x * x.y.powi(2), 6.0 * x.x.powi(2) * x.y - 2.0, 2.0 * x.x.powi(3));
        let vals: Vec<f64> = dofs
            .iter()
            .map(|d| match d.functional {
                Functional::Value => u(&d.point),
                Functional::Slope { dir, scale } => scale * g(&d.point).dot(&dir),
                Functional::Curvature { e, f, scale } => scale * scale * e.dot(&h(&d.point).apply(&f)),
            })
            .collect();
        let q = basis.polynomial(&vals);
        let exps = monomial_exponents(5);
        let x = Vec2::new(0.18, 0.23);
        let jet = jet_from_derivatives(&polynomial_derivatives(&exps, &basis.center, basis.scale, &q, &x, &mut Vec::new()));
        assert_relative_eq!(jet.value, u(&x), epsilon = 1e-12);
        assert_relative_eq!(jet.hessian.t12, h(&x).t12, epsilon = 1e-9);
        let glap = Vec2::new(6.0 * x.y.powi(2) + 6.0 * x.x.powi(2), 12.0 * x.x * x.y);
        assert!((jet.grad_laplacian - glap).norm() < 1e-7);
    }
}
