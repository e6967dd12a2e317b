//! Scalar potentials that can be evaluated with third-order jets.

use std::collections::BTreeMap;

use rand::Rng;

use crate::defects::{eval_plastic_potential, DefectConfiguration, ScalarJet3};
use crate::elasticity::{airy_stress, constitutive_strain, MaterialParams, SymTensor2, Vec2};
use crate::error::Result;
use crate::fem::DiscreteField;
use crate::numdiff::try_tensor_gradient_fd;

/// An Airy potential evaluable pointwise.
pub trait AiryField: Sync {
    fn jet(&self, x: &Vec2) -> Result<ScalarJet3>;

    /// False when `grad_laplacian` comes from a recovery rather than the
    /// field itself.
    fn third_derivatives_exact(&self) -> bool {
        true
    }

    /// Exact `[d hess / dx1, d hess / dx2]` when the field can supply it.
    fn hessian_gradient(&self, _x: &Vec2) -> Result<Option<[SymTensor2; 2]>> {
        Ok(None)
    }

    fn stress(&self, x: &Vec2) -> Result<SymTensor2> {
        Ok(airy_stress(&self.jet(x)?.hessian))
    }

    fn strain(&self, x: &Vec2, mat: &MaterialParams) -> Result<SymTensor2> {
        Ok(constitutive_strain(&self.stress(x)?, mat))
    }
}

impl<T: AiryField + ?Sized> AiryField for &T {
    fn jet(&self, x: &Vec2) -> Result<ScalarJet3> {
        (**self).jet(x)
    }
    fn third_derivatives_exact(&self) -> bool {
        (**self).third_derivatives_exact()
    }
    fn hessian_gradient(&self, x: &Vec2) -> Result<Option<[SymTensor2; 2]>> {
        (**self).hessian_gradient(x)
    }
}

impl AiryField for DiscreteField {
    fn jet(&self, x: &Vec2) -> Result<ScalarJet3> {
        self.evaluate(x)
    }
    fn third_derivatives_exact(&self) -> bool {
        DiscreteField::third_derivatives_exact(self)
    }
    fn hessian_gradient(&self, x: &Vec2) -> Result<Option<[SymTensor2; 2]>> {
        DiscreteField::hessian_gradient(self, x)
    }
}

/// A closure returning exact jets.
pub struct AnalyticField<F>(pub F);

impl<F> AiryField for AnalyticField<F>
where
    F: Fn(&Vec2) -> Result<ScalarJet3> + Sync,
{
    fn jet(&self, x: &Vec2) -> Result<ScalarJet3> {
        (self.0)(x)
    }
}

/// Superposed defect potentials of a configuration.
#[derive(Debug, Clone)]
pub struct PlasticPotential {
    pub cfg: DefectConfiguration,
    pub mat: MaterialParams,
}

impl AiryField for PlasticPotential {
    fn jet(&self, x: &Vec2) -> Result<ScalarJet3> {
        eval_plastic_potential(x, &self.cfg, &self.mat)
    }
}

/// `sum_k w_k f_k`.
pub struct Superposition<'a> {
    pub terms: Vec<(f64, &'a dyn AiryField)>,
}

impl AiryField for Superposition<'_> {
    fn jet(&self, x: &Vec2) -> Result<ScalarJet3> {
        let mut j = ScalarJet3::ZERO;
        for (w, f) in &self.terms {
            j += *w * f.jet(x)?;
        }
        Ok(j)
    }
    fn third_derivatives_exact(&self) -> bool {
        self.terms.iter().all(|(_, f)| f.third_derivatives_exact())
    }
}

/// Bivariate polynomial `sum c x1^i x2^j` with exact jets of any order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Polynomial {
    pub fn new(terms: impl IntoIterator<Item = ((u32, u32), f64)>) -> Self {
        let mut p = Self::default();
        for (e, c) in terms {
            *p.terms.entry(e).or_insert(0.0) += c;
        }
        p
    }

    pub fn monomial(i: u32, j: u32, c: f64) -> Self {
        Self::new([((i, j), c)])
    }

    /// Random coefficients in `[-1, 1]` for every monomial up to `degree`.
    pub fn random(degree: u32, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        for d in 0..=degree {
            for i in 0..=d {
                terms.push(((i, d - i), rng.random_range(-1.0..=1.0)));
            }
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|(_, c)| **c != 0.0).map(|((i, j), _)| i + j).max().unwrap_or(0)
    }

    /// `d^(a+b) / dx1^a dx2^b`.
    pub fn derivative(&self, a: u32, b: u32) -> Self {
        let falling = |n: u32, k: u32| (0..k).map(|m| f64::from(n - m)).product::<f64>();
        Self::new(
            self.terms
                .iter()
                .filter(|((i, j), _)| *i >= a && *j >= b)
                .map(|(&(i, j), &c)| ((i - a, j - b), c * falling(i, a) * falling(j, b))),
        )
    }

    pub fn eval(&self, x: &Vec2) -> f64 {
        self.terms.iter().map(|(&(i, j), c)| c * x.x.powi(i as i32) * x.y.powi(j as i32)).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.terms().map(|(e, c)| (e, k * c)))
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::new(self.terms().chain(rhs.terms()))
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::new(
            self.terms().flat_map(|((i, j), c)| rhs.terms().map(move |((k, l), d)| ((i + k, j + l), c * d))),
        )
    }
}

impl AiryField for Polynomial {
    fn jet(&self, x: &Vec2) -> Result<ScalarJet3> {
        let d = |a, b| self.derivative(a, b).eval(x);
        Ok(ScalarJet3 {
            value: self.eval(x),
            gradient: Vec2::new(d(1, 0), d(0, 1)),
            hessian: SymTensor2::new(d(2, 0), d(1, 1), d(0, 2)),
            grad_laplacian: Vec2::new(d(3, 0) + d(1, 2), d(2, 1) + d(0, 3)),
        })
    }

    fn hessian_gradient(&self, x: &Vec2) -> Result<Option<[SymTensor2; 2]>> {
        let d = |a, b| self.derivative(a, b).eval(x);
        let (xxx, xxy, xyy, yyy) = (d(3, 0), d(2, 1), d(1, 2), d(0, 3));
        Ok(Some([SymTensor2::new(xxx, xxy, xyy), SymTensor2::new(xxy, xyy, yyy)]))
    }
}

/// Strain field with its first derivatives, the input of the strain-form
/// line integrals and of displacement reconstruction.
pub trait StrainField: Sync {
    /// `(eps, [d eps / dx1, d eps / dx2])`.
    fn strain_jet(&self, x: &Vec2) -> Result<(SymTensor2, [SymTensor2; 2])>;
}

/// Strain `C^-1 cof(hess v)` of an Airy field. Its derivatives come from
/// the field's own third derivatives when it has them, otherwise from
/// central differences of the Hessian with step `fd_step`.
pub struct AiryStrain<'a> {
    pub field: &'a dyn AiryField,
    pub mat: MaterialParams,
    pub fd_step: f64,
}

impl StrainField for AiryStrain<'_> {
    fn strain_jet(&self, x: &Vec2) -> Result<(SymTensor2, [SymTensor2; 2])> {
        let eps = self.field.strain(x, &self.mat)?;
        let to_strain = |dh: &SymTensor2| constitutive_strain(&airy_stress(dh), &self.mat);
        if let Some([d1, d2]) = self.field.hessian_gradient(x)? {
            return Ok((eps, [to_strain(&d1), to_strain(&d2)]));
        }
        let d = try_tensor_gradient_fd(|y| self.field.strain(y, &self.mat), x, self.fd_step)?;
        Ok((eps, d))
    }
}

/// `sum_k w_k eps_k`, for instance the elastic part `eps - eps^p`.
pub struct StrainCombination<'a> {
    pub terms: Vec<(f64, &'a dyn StrainField)>,
}

impl StrainField for StrainCombination<'_> {
    fn strain_jet(&self, x: &Vec2) -> Result<(SymTensor2, [SymTensor2; 2])> {
        let mut acc = (SymTensor2::ZERO, [SymTensor2::ZERO; 2]);
        for (w, f) in &self.terms {
            let (e, [d1, d2]) = f.strain_jet(x)?;
            acc.0 += *w * e;
            acc.1[0] += *w * d1;
            acc.1[1] += *w * d2;
        }
        Ok(acc)
    }
}

/// A strain field given pointwise together with its derivatives.
pub struct StrainFn<F>(pub F);

impl<F> StrainField for StrainFn<F>
where
    F: Fn(&Vec2) -> Result<(SymTensor2, [SymTensor2; 2])> + Sync,
{
    fn strain_jet(&self, x: &Vec2) -> Result<(SymTensor2, [SymTensor2; 2])> {
        (self.0)(x)
    }
}
