//! Line integrals over closed loops that detect incompatibility.

use serde::{Deserialize, Serialize};

use crate::domain::BoundaryLoop;
use crate::elasticity::{airy_stress, MaterialParams, SymTensor2, Vec2};
use crate::error::Result;
use crate::field::{AiryField, AiryStrain, StrainField};
use crate::numdiff::try_tensor_gradient_fd;

/// Airy-form boundary functionals of a potential on one loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MichellIntegrals {
    /// `int d_n lap v`.
    pub i0: f64,
    /// `int x1 d_t lap v - x2 d_n lap v + (hess v t)_1 / (1 - nu)`.
    pub i1: f64,
    /// `int x1 d_n lap v + x2 d_t lap v + (hess v t)_2 / (1 - nu)`.
    pub i2: f64,
}

impl MichellIntegrals {
    pub fn to_array(&self) -> [f64; 3] {
        [self.i0, self.i1, self.i2]
    }

    /// `(1 - nu^2)/E (i0, i1, i2)`: on a clockwise core loop this is
    /// `(s, b1, b2)` for the defect potentials.
    pub fn charges(&self, mat: &MaterialParams) -> [f64; 3] {
        let k = 1.0 / mat.plane_modulus();
        [k * self.i0, k * self.i1, k * self.i2]
    }
}

/// Strain-form line integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YavariIntegrals {
    pub rotational: f64,
    pub translational: [f64; 2],
}

impl YavariIntegrals {
    pub fn to_array(&self) -> [f64; 3] {
        [self.rotational, self.translational[0], self.translational[1]]
    }
}

/// Michell integrals with coordinates measured from `origin`. The loop's
/// own orientation is used: `t` along the traversal and `n = Pi t`.
pub fn michell_integrals(v: &dyn AiryField, lp: &BoundaryLoop, mat: &MaterialParams, origin: &Vec2) -> Result<MichellIntegrals> {
    let k = 1.0 / (1.0 - mat.poisson_ratio);
    let (mut i0, mut i1, mut i2) = (0.0, 0.0, 0.0);
    for nd in &lp.nodes {
        let j = v.jet(&nd.x)?;
        let y = nd.x - origin;
        let dn = j.grad_laplacian.dot(&nd.n);
        let dt = j.grad_laplacian.dot(&nd.t);
        let ht = j.hessian.apply(&nd.t);
        i0 += nd.weight * dn;
        i1 += nd.weight * (y.x * dt - y.y * dn + k * ht.x);
        i2 += nd.weight * (y.x * dn + y.y * dt + k * ht.y);
    }
    Ok(MichellIntegrals { i0, i1, i2 })
}

fn entry(e: &SymTensor2, r: usize, c: usize) -> f64 {
    match (r, c) {
        (0, 0) => e.t11,
        (1, 1) => e.t22,
        _ => e.t12,
    }
}

/// `grad omega` of any displacement whose symmetric gradient is `eps`.
pub fn rotation_gradient(de: &[SymTensor2; 2]) -> Vec2 {
    Vec2::new(de[1].t11 - de[0].t12, de[1].t12 - de[0].t22)
}

/// Strain-form integrals along the loop's traversal, with the moment arm
/// measured from `origin`. Counter-clockwise loops give `(s, b)` for the
/// plastic strain of a defect enclosed by the loop.
pub fn yavari_integrals(eps: &dyn StrainField, lp: &BoundaryLoop, origin: &Vec2) -> Result<YavariIntegrals> {
    let mut rot = 0.0;
    let mut tr = [0.0; 2];
    for nd in &lp.nodes {
        let (e, de) = eps.strain_jet(&nd.x)?;
        let dx = nd.weight * nd.t;
        let y = nd.x - origin;
        rot += rotation_gradient(&de).dot(&dx);
        for (r, acc) in tr.iter_mut().enumerate() {
            for c in 0..2 {
                let mut arm = 0.0;
                for q in 0..2 {
                    arm += y[q] * (entry(&de[q], r, c) - entry(&de[r], c, q));
                }
                *acc += (entry(&e, r, c) - arm) * dx[c];
            }
        }
    }
    Ok(YavariIntegrals { rotational: rot, translational: tr })
}

/// Largest discrepancy between `-E/(1-nu^2)` times the strain-form integrals
/// of `C^-1 cof(hess v)` and the Michell integrals of `v`, relative to the
/// largest Michell integral (absolute when that is below 1e-12).
pub fn check_strain_airy_equivalence(
    v: &dyn AiryField,
    lp: &BoundaryLoop,
    mat: &MaterialParams,
    origin: &Vec2,
    fd_step: f64,
) -> Result<f64> {
    let m = michell_integrals(v, lp, mat, origin)?.to_array();
    let strain = AiryStrain { field: v, mat: *mat, fd_step };
    let y = yavari_integrals(&strain, lp, origin)?.to_array();
    let k = -mat.plane_modulus();
    let diff = (0..3).map(|i| (k * y[i] - m[i]).abs()).fold(0.0, f64::max);
    let scale = m.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(if scale > 1e-12 { diff / scale } else { diff })
}

/// Largest `|Div cof(hess v)|` over the samples, with the divergence taken by
/// central differences of step `h`.
pub fn divergence_identity_check(v: &dyn AiryField, samples: &[Vec2], h: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in samples {
        let [d1, d2] = try_tensor_gradient_fd(|y| Ok(airy_stress(&v.jet(y)?.hessian)), x, h)?;
        let div = Vec2::new(d1.t11 + d2.t12, d1.t12 + d2.t22);
        worst = worst.max(div.norm());
    }
    Ok(worst)
}

/// `int hess v t dH^1`, which vanishes on circles about a single defect.
pub fn tangential_hessian_integral(v: &dyn AiryField, lp: &BoundaryLoop) -> Result<Vec2> {
    lp.integrate_vec(|nd| Ok(v.jet(&nd.x)?.hessian.apply(&nd.t)))
}

/// `int f dx_r + int x_r d_t f dH^1` on a closed loop; zero up to quadrature.
pub fn tangential_parts_residual(f: &dyn AiryField, lp: &BoundaryLoop) -> Result<Vec2> {
    lp.integrate_vec(|nd| {
        let j = f.jet(&nd.x)?;
        Ok(j.value * nd.t + j.gradient.dot(&nd.t) * nd.x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defects::{disclination_potential, dislocation_potential};
    use crate::domain::Orientation;
    use crate::field::{AnalyticField, Polynomial, StrainFn};

    fn circle(c: [f64; 2], r: f64, o: Orientation) -> BoundaryLoop {
        BoundaryLoop::circle(1, Vec2::new(c[0], c[1]), r, 256, o)
    }

    #[test]
    fn cubic_potential_has_vanishing_michell_integrals() {
        let mat = MaterialParams::new(1.0, 0.3).unwrap();
        let v = Polynomial::monomial(3, 0, 1.0);
        let m = michell_integrals(&v, &circle([0.2, 0.1], 0.4, Orientation::Clockwise), &mat, &Vec2::zeros()).unwrap();
        assert!(m.to_array().iter().all(|x| x.abs() < 1e-12), "{m:?}");
    }

    #[test]
    fn compatible_strain_has_vanishing_strain_integrals() {
        // u = (x^2 y, x y^3 - y): eps = (2xy, (x^2 + y^3)/2, 3xy^2 - 1)
        let eps = StrainFn(|x: &Vec2| {
            let (a, b) = (x.x, x.y);
            Ok((
                SymTensor2::new(2.0 * a * b, 0.5 * (a * a + b.powi(3)), 3.0 * a * b * b - 1.0),
                [SymTensor2::new(2.0 * b, a, 3.0 * b * b), SymTensor2::new(2.0 * a, 1.5 * b * b, 6.0 * a * b)],
            ))
        });
        let y = yavari_integrals(&eps, &circle([0.3, -0.2], 0.7, Orientation::CounterClockwise), &Vec2::zeros()).unwrap();
        assert!(y.to_array().iter().all(|x| x.abs() < 1e-12), "{y:?}");
    }

    #[test]
    fn rotation_gradient_of_rigid_rotation_field() {
        // u = w(x2, -x1) has omega = w and zero strain; u = (x1 x2, 0) has
        // omega = x1/2 and eps = (x2, x1/2, 0).
        let de = [SymTensor2::new(0.0, 0.5, 0.0), SymTensor2::new(1.0, 0.0, 0.0)];
        assert_eq!(rotation_gradient(&de), Vec2::new(0.5, 0.0));
    }

    #[test]
    fn off_center_loop_sees_no_defect() {
        let mat = MaterialParams::new(1.0, 0.3).unwrap();
        let c = Vec2::new(0.5, 0.0);
        let v = AnalyticField(move |x: &Vec2| {
            Ok(disclination_potential(x, &c, 0.7, &mat)? + dislocation_potential(x, &c, &Vec2::new(0.2, 1.0), &mat)?)
        });
        let m = michell_integrals(&v, &circle([-0.3, 0.2], 0.3, Orientation::Clockwise), &mat, &Vec2::new(-0.3, 0.2)).unwrap();
        assert!(m.to_array().iter().all(|x| x.abs() < 1e-9), "{m:?}");
        let d = check_strain_airy_equivalence(&v, &circle([-0.3, 0.2], 0.3, Orientation::Clockwise), &mat, &Vec2::zeros(), 3e-5)
            .unwrap();
        assert!(d < 1e-7, "{d}");
    }

    #[test]
    fn parts_identity_for_polynomial() {
        let f = Polynomial::new([((2, 3), 1.0), ((0, 1), -2.0), ((4, 0), 0.5)]);
        let r = tangential_parts_residual(&f, &circle([0.1, 0.0], 0.8, Orientation::CounterClockwise)).unwrap();
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn divergence_of_cofactor_hessian_vanishes_for_quartic() {
        let v = Polynomial::new([((4, 0), 1.0), ((2, 2), -3.0), ((1, 3), 2.0), ((0, 1), 1.0)]);
        let pts = [Vec2::new(0.3, 0.4), Vec2::new(-1.0, 0.5)];
        assert!(divergence_identity_check(&v, &pts, 1e-2).unwrap() < 1e-10);
    }
}
