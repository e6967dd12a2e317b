use std::sync::Arc;

use super::element::{jet_from_derivatives, monomial_exponents, polynomial_derivatives};
use super::space::FeSpace;
use crate::defects::ScalarJet3;
use crate::elasticity::{energy_density_from_hessian, MaterialParams, SymTensor2, Vec2};
use crate::error::{Error, Result};
use crate::quadrature::TriangleRule;

/// Piecewise polynomial with per-element monomial coefficients.
///
/// Elements of degree below three have no third derivatives; for them the
/// gradient of the Laplacian comes from a patch recovery (nodal averages of
/// the element Laplacians, differentiated piecewise linearly) and
/// [`DiscreteField::third_derivatives_exact`] is false.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
    exps: Vec<(u32, u32)>,
    frames: Vec<(Vec2, f64)>,
    poly: Vec<f64>,
    recovered: Option<Vec<Vec2>>,
}

impl DiscreteField {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.num_dofs() {
            return Err(Error::Precondition("coefficient vector length does not match dof count".into()));
        }
        let exps = monomial_exponents(space.kind.degree());
        let nt = space.mesh.num_triangles();
        let mut frames = Vec::with_capacity(nt);
        let mut poly = Vec::with_capacity(nt * exps.len());
        for t in 0..nt {
            let basis = space.element_basis(t)?;
            let (ids, _) = space.element_dofs(t);
            let u: Vec<f64> = ids.iter().map(|&i| coeffs[i]).collect();
            poly.extend(basis.polynomial(&u));
            frames.push((basis.center, basis.scale));
        }
        let mut field = Self { space, coeffs, exps, frames, poly, recovered: None };
        if field.space.kind.degree() < 3 {
            field.recovered = Some(field.recover_laplacian_gradient());
        }
        Ok(field)
    }

    fn recover_laplacian_gradient(&self) -> Vec<Vec2> {
        let mesh = &self.space.mesh;
        let nv = mesh.num_vertices();
        let mut sum = vec![0.0; nv];
        let mut wsum = vec![0.0; nv];
        let mut scratch = Vec::new();
        for t in 0..mesh.num_triangles() {
            let p = mesh.triangle_points(t);
            let c = (p[0] + p[1] + p[2]) / 3.0;
            let lap = self.raw_jet(t, &c, &mut scratch).laplacian();
            let a = mesh.triangle_area(t);
            for &v in &mesh.triangles[t] {
                sum[v] += a * lap;
                wsum[v] += a;
            }
        }
        let nodal: Vec<f64> = sum.iter().zip(&wsum).map(|(s, w)| s / w).collect();
        (0..mesh.num_triangles())
            .map(|t| {
                let [a, b, c] = mesh.triangles[t];
                let p = mesh.triangle_points(t);
                let (e1, e2) = (p[1] - p[0], p[2] - p[0]);
                let det = e1.x * e2.y - e1.y * e2.x;
                let (d1, d2) = (nodal[b] - nodal[a], nodal[c] - nodal[a]);
                Vec2::new((d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det)
            })
            .collect()
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn third_derivatives_exact(&self) -> bool {
        self.recovered.is_none()
    }

    fn derivatives(&self, t: usize, x: &Vec2, scratch: &mut Vec<f64>) -> [f64; 10] {
        let nm = self.exps.len();
        let (c, s) = self.frames[t];
        polynomial_derivatives(&self.exps, &c, s, &self.poly[t * nm..(t + 1) * nm], x, scratch)
    }

    fn raw_jet(&self, t: usize, x: &Vec2, scratch: &mut Vec<f64>) -> ScalarJet3 {
        jet_from_derivatives(&self.derivatives(t, x, scratch))
    }

    /// `[d hess / dx1, d hess / dx2]` of the restriction to triangle `t`;
    /// `None` when the element has no third derivatives.
    pub fn hessian_gradient_in(&self, t: usize, x: &Vec2) -> Option<[SymTensor2; 2]> {
        if self.recovered.is_some() {
            return None;
        }
        let d = self.derivatives(t, x, &mut Vec::new());
        Some([SymTensor2::new(d[6], d[7], d[8]), SymTensor2::new(d[7], d[8], d[9])])
    }

    pub fn hessian_gradient(&self, x: &Vec2) -> Result<Option<[SymTensor2; 2]>> {
        let t = self.space.mesh.locate_or_err(x)?;
        Ok(self.hessian_gradient_in(t, x))
    }

    /// Jet of the restriction to triangle `t`, evaluated at `x` (which may lie
    /// slightly outside `t`).
    pub fn jet_with(&self, t: usize, x: &Vec2, scratch: &mut Vec<f64>) -> ScalarJet3 {
        let mut j = self.raw_jet(t, x, scratch);
        if let Some(r) = &self.recovered {
            j.grad_laplacian = r[t];
        }
        j
    }

    pub fn jet_in(&self, t: usize, x: &Vec2) -> ScalarJet3 {
        self.jet_with(t, x, &mut Vec::new())
    }

    pub fn evaluate(&self, x: &Vec2) -> Result<ScalarJet3> {
        let t = self.space.mesh.locate_or_err(x)?;
        Ok(self.jet_in(t, x))
    }

    /// `sum_k w_k f_k` over fields on the same space.
    pub fn combine(terms: &[(f64, &DiscreteField)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| Error::Precondition("empty combination".into()))?;
        if terms.iter().any(|(_, f)| !Arc::ptr_eq(&f.space, &first.space)) {
            return Err(Error::Precondition("fields live on different spaces".into()));
        }
        let mut out = (*first).clone();
        let lin = |get: &dyn Fn(&DiscreteField) -> &[f64], dst: &mut [f64]| {
            dst.iter_mut().enumerate().for_each(|(i, d)| *d = terms.iter().map(|(w, f)| w * get(f)[i]).sum());
        };
        lin(&|f| &f.coeffs, &mut out.coeffs);
        lin(&|f| &f.poly, &mut out.poly);
        if let Some(r) = &mut out.recovered {
            for (t, g) in r.iter_mut().enumerate() {
                *g = terms.iter().map(|(w, f)| *w * f.recovered.as_ref().expect("same kind")[t]).sum();
            }
        }
        Ok(out)
    }

    /// `sum_T int_T f(t, x, jet)` with a rule exact to `degree`.
    pub fn integrate(&self, degree: usize, mut f: impl FnMut(usize, &Vec2, &ScalarJet3) -> f64) -> f64 {
        let rule = TriangleRule::for_degree(degree);
        let mut scratch = Vec::new();
        let mut total = 0.0;
        for t in 0..self.space.mesh.num_triangles() {
            for (x, w) in rule.map(&self.space.mesh.triangle_points(t)) {
                let j = self.jet_with(t, &x, &mut scratch);
                total += w * f(t, &x, &j);
            }
        }
        total
    }

    /// Stored energy `int W(cof H)`.
    pub fn energy(&self, mat: &MaterialParams) -> f64 {
        let deg = 2 * (self.space.kind.degree() - 2);
        self.integrate(deg, |_, _, j| energy_density_from_hessian(&j.hessian, mat))
    }

    /// Broken Hessian error `sqrt(sum_T int_T |H - H_h|^2)`.
    pub fn hessian_error(&self, exact: impl Fn(&Vec2) -> SymTensor2, degree: usize) -> f64 {
        self.integrate(degree, |_, x, j| (exact(x) - j.hessian).norm_sq()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_perforated_domain, generate_mesh, MeshOptions, OuterBoundary};
    use crate::fem::ElementKind;
    use crate::DefectConfiguration;

    fn space(kind: ElementKind) -> Arc<FeSpace> {
        let cfg = DefectConfiguration::new(vec![crate::Defect::disclination([0.1, 0.0], 0.1)]).unwrap();
        let dom = build_perforated_domain(OuterBoundary::disk([0.0, 0.0], 1.0).unwrap(), &cfg, 0.3).unwrap();
        let mesh = generate_mesh(&dom, &MeshOptions::uniform(0.25)).unwrap();
        Arc::new(FeSpace::new(Arc::new(mesh), kind).unwrap())
    }

    fn cubic(x: &Vec2) -> ScalarJet3 {
        // u = x^3 - x y^2 + 2 y
        ScalarJet3 {
            value: x.x.powi(3) - x.x * x.y * x.y + 2.0 * x.y,
            gradient: Vec2::new(3.0 * x.x * x.x - x.y * x.y, -2.0 * x.x * x.y + 2.0),
            hessian: SymTensor2::new(6.0 * x.x, -2.0 * x.y, -2.0 * x.x),
            grad_laplacian: Vec2::new(4.0, 0.0),
        }
    }

    #[test]
    fn argyris_interpolant_reproduces_cubics_exactly() {
        let sp = space(ElementKind::Argyris);
        let f = DiscreteField::new(sp.clone(), sp.interpolate(cubic)).unwrap();
        assert!(f.third_derivatives_exact());
        for x in [Vec2::new(0.5, 0.1), Vec2::new(-0.7, 0.3), Vec2::new(0.1, -0.6)] {
            let (a, b) = (f.evaluate(&x).unwrap(), cubic(&x));
            assert!((a.value - b.value).abs() < 1e-11);
            assert!((a.hessian - b.hessian).max_abs() < 1e-9);
            assert!((a.grad_laplacian - b.grad_laplacian).norm() < 1e-7);
        }
    }

    #[test]
    fn argyris_interpolant_is_c1_across_edges() {
        let sp = space(ElementKind::Argyris);
        let u = sp.interpolate(|x| {
            let s = (2.0 * x.x + x.y).sin();
            let c = (2.0 * x.x + x.y).cos();
            ScalarJet3 {
                value: s,
                gradient: Vec2::new(2.0 * c, c),
                hessian: SymTensor2::new(-4.0 * s, -2.0 * s, -s),
                grad_laplacian: Vec2::new(-10.0 * c, -5.0 * c),
            }
        });
        let f = DiscreteField::new(sp.clone(), u).unwrap();
        let mesh = &sp.mesh;
        for (e, tris) in mesh.edge_tris.iter().enumerate() {
            if tris[1] == usize::MAX {
                continue;
            }
            let [a, b] = mesh.edges[e];
            let x = 0.3 * mesh.vertices[a] + 0.7 * mesh.vertices[b];
            let (j0, j1) = (f.jet_in(tris[0], &x), f.jet_in(tris[1], &x));
            assert!((j0.value - j1.value).abs() < 1e-12);
            assert!((j0.gradient - j1.gradient).norm() < 1e-11);
        }
    }

    #[test]
    fn morley_recovers_constant_laplacian_gradient_of_cubic() {
        let sp = space(ElementKind::Morley);
        let f = DiscreteField::new(sp.clone(), sp.interpolate(cubic)).unwrap();
        assert!(!f.third_derivatives_exact());
        let c = (sp.mesh.triangle_points(0)[0] + sp.mesh.triangle_points(0)[1] + sp.mesh.triangle_points(0)[2]) / 3.0;
        let g = f.jet_in(0, &c).grad_laplacian;
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn combination_is_linear() {
        let sp = space(ElementKind::Argyris);
        let a = DiscreteField::new(sp.clone(), sp.interpolate(cubic)).unwrap();
        let b = DiscreteField::new(sp.clone(), sp.interpolate(|x| ScalarJet3::affine([1.0, 2.0, 3.0], x))).unwrap();
        let c = DiscreteField::combine(&[(2.0, &a), (-0.5, &b)]).unwrap();
        let x = Vec2::new(0.4, 0.4);
        let expect = 2.0 * a.evaluate(&x).unwrap().value - 0.5 * b.evaluate(&x).unwrap().value;
        assert!((c.evaluate(&x).unwrap().value - expect).abs() < 1e-12);
    }
}
