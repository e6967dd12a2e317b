//! Symmetry of `int [xi, eta] chi` over a disk.
//!
//! `[xi, eta] = cof(hess xi) : hess eta`. The triple integral is invariant
//! under cyclic permutations when one argument is clamped to zero on the
//! boundary, and `eta, chi` may be swapped when `xi` has an affine trace
//! (value and gradient of an affine function along the boundary).

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::elasticity::{monge_ampere_bracket, Vec2};
use crate::error::{Error, Result};
use crate::field::AiryField;
use crate::quadrature::disk_rule;

/// Exact for polynomial integrands up to degree 39.
const RADIAL_NODES: usize = 20;
const ANGULAR_NODES: usize = 64;
const TRACE_SAMPLES: usize = 97;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    fn center_vec(&self) -> Vec2 {
        Vec2::new(self.center[0], self.center[1])
    }

    fn boundary(&self) -> impl Iterator<Item = Vec2> + '_ {
        let c = self.center_vec();
        (0..TRACE_SAMPLES).map(move |k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / TRACE_SAMPLES as f64;
            c + self.radius * Vec2::new(th.cos(), th.sin())
        })
    }
}

/// `int [a, b] c` over the disk.
pub fn bracket_integral(a: &dyn AiryField, b: &dyn AiryField, c: &dyn AiryField, disk: &Disk) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in disk_rule(disk.center_vec(), disk.radius, RADIAL_NODES, ANGULAR_NODES) {
        let (ja, jb, jc) = (a.jet(&x)?, b.jet(&x)?, c.jet(&x)?);
        acc += w * monge_ampere_bracket(&ja.hessian, &jb.hessian) * jc.value;
    }
    Ok(acc)
}

/// Size of `f` over the disk, used to make trace tolerances relative.
fn magnitude(f: &dyn AiryField, disk: &Disk) -> Result<f64> {
    let mut m = 0.0f64;
    for (x, _) in disk_rule(disk.center_vec(), disk.radius, 4, 16) {
        let j = f.jet(&x)?;
        m = m.max(j.value.abs()).max(disk.radius * j.gradient.norm());
    }
    Ok(m.max(1.0))
}

/// Largest deviation of the boundary trace `(f, radius * grad f)` from the
/// best-fitting affine function.
pub fn affine_trace_defect(f: &dyn AiryField, disk: &Disk) -> Result<f64> {
    let c = disk.center_vec();
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    let mut samples = Vec::with_capacity(TRACE_SAMPLES);
    for x in disk.boundary() {
        let j = f.jet(&x)?;
        let row = Vector3::new(1.0, x.x - c.x, x.y - c.y);
        ata += row * row.transpose();
        atb += row * j.value;
        samples.push((x, j));
    }
    let a = ata.lu().solve(&atb).ok_or_else(|| Error::Solver("affine fit is singular".into()))?;
    let slope = Vec2::new(a[1], a[2]);
    let mut worst = 0.0f64;
    for (x, j) in samples {
        let fit = a[0] + slope.dot(&(x - c));
        worst = worst.max((j.value - fit).abs()).max(disk.radius * (j.gradient - slope).norm());
    }
    Ok(worst)
}

fn clamped_defect(f: &dyn AiryField, disk: &Disk) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in disk.boundary() {
        let j = f.jet(&x)?;
        worst = worst.max(j.value.abs()).max(disk.radius * j.gradient.norm());
    }
    Ok(worst)
}

const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MongeAmpereSymmetry {
    /// `int [xi, eta] chi`, `int [chi, xi] eta`, `int [eta, chi] xi`.
    pub integrals: [f64; 3],
    /// `|I0 - I1|, |I1 - I2|, |I0 - I2|`.
    pub discrepancies: [f64; 3],
}

/// Cyclic-permutation check. At least one argument must be clamped to zero
/// on the disk boundary; otherwise the call is rejected.
pub fn monge_ampere_symmetry_check(
    xi: &dyn AiryField,
    eta: &dyn AiryField,
    chi: &dyn AiryField,
    disk: &Disk,
) -> Result<MongeAmpereSymmetry> {
    let mut clamped = false;
    for f in [xi, eta, chi] {
        if clamped_defect(f, disk)? <= TRACE_TOL * magnitude(f, disk)? {
            clamped = true;
            break;
        }
    }
    if !clamped {
        return Err(Error::Precondition("no argument vanishes with its gradient on the boundary".into()));
    }
    let i = [
        bracket_integral(xi, eta, chi, disk)?,
        bracket_integral(chi, xi, eta, disk)?,
        bracket_integral(eta, chi, xi, disk)?,
    ];
    Ok(MongeAmpereSymmetry {
        integrals: i,
        discrepancies: [(i[0] - i[1]).abs(), (i[1] - i[2]).abs(), (i[0] - i[2]).abs()],
    })
}

/// `(int [xi, eta] chi, int [xi, chi] eta)`; `xi` must have an affine trace.
pub fn monge_ampere_pair_swap(xi: &dyn AiryField, eta: &dyn AiryField, chi: &dyn AiryField, disk: &Disk) -> Result<[f64; 2]> {
    let defect = affine_trace_defect(xi, disk)?;
    if defect > TRACE_TOL * magnitude(xi, disk)? {
        return Err(Error::Precondition(format!("trace of xi deviates from affine by {defect:e}")));
    }
    Ok([bracket_integral(xi, eta, chi, disk)?, bracket_integral(xi, chi, eta, disk)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Polynomial;

    const UNIT: Disk = Disk { center: [0.0, 0.0], radius: 1.0 };

    fn bump() -> Polynomial {
        Polynomial::new([((0, 0), 1.0), ((2, 0), -1.0), ((0, 2), -1.0)])
    }

    #[test]
    fn bracket_of_quadratics_is_constant() {
        // [x1^2, x2^2] = cof(diag(2, 0)) : diag(0, 2) = 4
        let (a, b) = (Polynomial::monomial(2, 0, 1.0), Polynomial::monomial(0, 2, 1.0));
        let one = Polynomial::monomial(0, 0, 1.0);
        let i = bracket_integral(&a, &b, &one, &UNIT).unwrap();
        assert!((i - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn unclamped_triple_is_rejected() {
        let a = Polynomial::monomial(2, 0, 1.0);
        assert!(matches!(monge_ampere_symmetry_check(&a, &a, &a, &UNIT), Err(Error::Precondition(_))));
    }

    #[test]
    fn value_only_affine_trace_is_rejected() {
        // 1 - r^2 vanishes on the circle but its gradient does not
        let p = Polynomial::monomial(1, 1, 1.0);
        assert!(monge_ampere_pair_swap(&bump(), &p, &p, &UNIT).is_err());
    }

    #[test]
    fn zero_argument_gives_zero_integrals() {
        let z = Polynomial::default();
        let p = Polynomial::new([((3, 1), 1.0), ((0, 2), 0.5)]);
        let r = monge_ampere_symmetry_check(&z, &p, &p, &UNIT).unwrap();
        assert_eq!(r.integrals, [0.0; 3]);
    }

    #[test]
    fn affine_trace_defect_of_clamped_affine_field() {
        let b = bump();
        let xi = &(&b * &b) + &Polynomial::new([((0, 0), 2.0), ((1, 0), -1.0)]);
        assert!(affine_trace_defect(&xi, &UNIT).unwrap() < 1e-13);
    }
}
