//! Plane-strain constitutive algebra and the Airy operator.
//!
//! Everything here is a pure value function on 2x2 symmetric tensors. The
//! out-of-plane stress is exposed for reporting only and never enters an
//! energy.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Isotropic material: Young's modulus and Poisson ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
}

impl MaterialParams {
    pub fn new(young_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let mat = Self { young_modulus, poisson_ratio };
        mat.validate()?;
        Ok(mat)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.young_modulus.is_finite() && self.young_modulus > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "young_modulus must be positive, got {}",
                self.young_modulus
            )));
        }
        if !(self.poisson_ratio > -1.0 && self.poisson_ratio < 0.5) {
            return Err(Error::InvalidMaterial(format!(
                "poisson_ratio must lie strictly inside (-1, 1/2), got {}",
                self.poisson_ratio
            )));
        }
        Ok(())
    }

    /// E / (1 - nu^2), the plane-strain modulus that scales every defect potential.
    pub fn plane_modulus(&self) -> f64 {
        self.young_modulus / (1.0 - self.poisson_ratio * self.poisson_ratio)
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self { young_modulus: 1.0, poisson_ratio: 0.3 }
    }
}

/// Symmetric 2x2 tensor stored as its three independent components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymTensor2 {
    pub t11: f64,
    pub t12: f64,
    pub t22: f64,
}

impl SymTensor2 {
    pub const ZERO: Self = Self { t11: 0.0, t12: 0.0, t22: 0.0 };
    pub const IDENTITY: Self = Self { t11: 1.0, t12: 0.0, t22: 1.0 };

    pub const fn new(t11: f64, t12: f64, t22: f64) -> Self {
        Self { t11, t12, t22 }
    }

    pub fn trace(&self) -> f64 {
        self.t11 + self.t22
    }

    /// Full contraction `a : b`, counting the off-diagonal entry twice.
    pub fn ddot(&self, other: &Self) -> f64 {
        self.t11 * other.t11 + 2.0 * self.t12 * other.t12 + self.t22 * other.t22
    }

    pub fn norm_sq(&self) -> f64 {
        self.ddot(self)
    }

    pub fn apply(&self, w: &Vec2) -> Vec2 {
        Vec2::new(self.t11 * w.x + self.t12 * w.y, self.t12 * w.x + self.t22 * w.y)
    }

    pub fn max_abs(&self) -> f64 {
        self.t11.abs().max(self.t12.abs()).max(self.t22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.t11.is_finite() && self.t12.is_finite() && self.t22.is_finite()
    }
}

impl Add for SymTensor2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.t11 + o.t11, self.t12 + o.t12, self.t22 + o.t22)
    }
}

impl AddAssign for SymTensor2 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for SymTensor2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.t11 - o.t11, self.t12 - o.t12, self.t22 - o.t22)
    }
}

impl Neg for SymTensor2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t11, -self.t12, -self.t22)
    }
}

impl Mul<SymTensor2> for f64 {
    type Output = SymTensor2;
    fn mul(self, m: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self * m.t11, self * m.t12, self * m.t22)
    }
}

impl Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, c: f64) -> SymTensor2 {
        c * self
    }
}

/// In-plane stress together with the out-of-plane normal stress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneStrainStress {
    pub in_plane: SymTensor2,
    pub sigma33: f64,
}

impl PlaneStrainStress {
    pub fn new(in_plane: SymTensor2, mat: &MaterialParams) -> Self {
        Self { in_plane, sigma33: out_of_plane_stress(&in_plane, mat) }
    }
}

/// Swaps the diagonal and negates the off-diagonal entry.
pub fn cofactor(m: &SymTensor2) -> SymTensor2 {
    SymTensor2::new(m.t22, -m.t12, m.t11)
}

/// Plane-strain stiffness, the exact inverse of [`constitutive_strain`].
pub fn constitutive_stress(eps: &SymTensor2, mat: &MaterialParams) -> SymTensor2 {
    let (e, nu) = (mat.young_modulus, mat.poisson_ratio);
    let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    (c * nu) * cofactor(eps) + (c * (1.0 - nu)) * *eps
}

pub fn constitutive_strain(sigma: &SymTensor2, mat: &MaterialParams) -> SymTensor2 {
    let (e, nu) = (mat.young_modulus, mat.poisson_ratio);
    ((1.0 - nu * nu) / e) * *sigma - (nu * (1.0 + nu) / e) * cofactor(sigma)
}

pub fn out_of_plane_stress(sigma: &SymTensor2, mat: &MaterialParams) -> f64 {
    mat.poisson_ratio * sigma.trace()
}

/// Stress generated by an Airy potential with the given Hessian.
pub fn airy_stress(hessian: &SymTensor2) -> SymTensor2 {
    cofactor(hessian)
}

pub fn energy_density_from_stress(sigma: &SymTensor2, mat: &MaterialParams) -> f64 {
    let (e, nu) = (mat.young_modulus, mat.poisson_ratio);
    let tr = sigma.trace();
    0.5 * (1.0 + nu) / e * (sigma.norm_sq() - nu * tr * tr)
}

pub fn energy_density_from_hessian(hessian: &SymTensor2, mat: &MaterialParams) -> f64 {
    let (e, nu) = (mat.young_modulus, mat.poisson_ratio);
    let lap = hessian.trace();
    0.5 * (1.0 + nu) / e * (hessian.norm_sq() - nu * lap * lap)
}

/// `cof(h_xi) : h_eta`; on the diagonal this is `(lap)^2 - |hess|^2`.
pub fn monge_ampere_bracket(h_xi: &SymTensor2, h_eta: &SymTensor2) -> f64 {
    cofactor(h_xi).ddot(h_eta)
}

/// Rotation by -pi/2.
pub fn rotate_quarter_cw(w: &Vec2) -> Vec2 {
    Vec2::new(w.y, -w.x)
}

/// Scalar cross product `a1 w2 - a2 w1`.
pub fn cross(a: &Vec2, w: &Vec2) -> f64 {
    a.x * w.y - a.y * w.x
}
