//! Defect bookkeeping and the closed-form singular Airy potentials.
//!
//! The disclination potential is `v_d(x) = K |x|^2 log|x|^2 / (16 pi)` and the
//! vector dislocation potential is `v_D(x) = K x (log|x|^2 + 1) / (8 pi)`,
//! with `K = E / (1 - nu^2)`. Jets carry value, gradient, Hessian and the
//! gradient of the Laplacian; nothing higher is needed downstream.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::domain::OuterBoundary;
use crate::elasticity::{
    airy_stress, constitutive_strain, cross, MaterialParams, SymTensor2, Vec2,
};
use crate::error::{Error, Result};

/// Evaluations closer than this to a defect are rejected.
pub const EXCLUSION_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dislocation {
    pub position: Vec2,
    pub burgers: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disclination {
    pub position: Vec2,
    pub frank_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Defect {
    Dislocation(Dislocation),
    Disclination(Disclination),
}

impl Defect {
    pub fn dislocation(position: [f64; 2], burgers: [f64; 2]) -> Self {
        Defect::Dislocation(Dislocation { position: position.into(), burgers: burgers.into() })
    }

    pub fn disclination(position: [f64; 2], frank_angle: f64) -> Self {
        Defect::Disclination(Disclination { position: position.into(), frank_angle })
    }

    pub fn position(&self) -> Vec2 {
        match self {
            Defect::Dislocation(d) => d.position,
            Defect::Disclination(d) => d.position,
        }
    }

    /// Same defect with its charge negated.
    pub fn negated(&self) -> Self {
        match *self {
            Defect::Dislocation(d) => Defect::Dislocation(Dislocation { burgers: -d.burgers, ..d }),
            Defect::Disclination(d) => {
                Defect::Disclination(Disclination { frank_angle: -d.frank_angle, ..d })
            }
        }
    }

    pub fn translated(&self, shift: &Vec2) -> Self {
        match *self {
            Defect::Dislocation(d) => {
                Defect::Dislocation(Dislocation { position: d.position + shift, ..d })
            }
            Defect::Disclination(d) => {
                Defect::Disclination(Disclination { position: d.position + shift, ..d })
            }
        }
    }
}

/// Ordered list of defects. The order is the core order used everywhere
/// downstream (cell basis, forcing, reports).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefectConfiguration {
    entries: Vec<Defect>,
}

impl DefectConfiguration {
    pub fn new(entries: Vec<Defect>) -> Result<Self> {
        let cfg = Self { entries };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Defect] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dislocations(&self) -> impl Iterator<Item = &Dislocation> {
        self.entries.iter().filter_map(|d| match d {
            Defect::Dislocation(x) => Some(x),
            _ => None,
        })
    }

    pub fn disclinations(&self) -> impl Iterator<Item = &Disclination> {
        self.entries.iter().filter_map(|d| match d {
            Defect::Disclination(x) => Some(x),
            _ => None,
        })
    }

    pub fn negated(&self) -> Self {
        Self { entries: self.entries.iter().map(Defect::negated).collect() }
    }

    pub fn translated(&self, shift: &Vec2) -> Self {
        Self { entries: self.entries.iter().map(|d| d.translated(shift)).collect() }
    }

    /// Concatenation; fails if the union has coincident positions.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(entries)
    }

    /// All violations, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, d) in self.entries.iter().enumerate() {
            let p = d.position();
            if !(p.x.is_finite() && p.y.is_finite()) {
                out.push(format!("defect {i}: position is not finite"));
            }
            match d {
                Defect::Dislocation(x) => {
                    if !(x.burgers.norm() > 0.0 && x.burgers.iter().all(|c| c.is_finite())) {
                        out.push(format!("defect {i}: Burgers vector must be finite and nonzero"));
                    }
                }
                Defect::Disclination(x) => {
                    if !(x.frank_angle != 0.0 && x.frank_angle.is_finite()) {
                        out.push(format!("defect {i}: Frank angle must be finite and nonzero"));
                    }
                }
            }
        }
        for i in 0..self.entries.len() {
            for j in i + 1..self.entries.len() {
                if self.entries[i].position() == self.entries[j].position() {
                    out.push(format!(
                        "defects {i} and {j} share position {:?}; supports must be disjoint",
                        [self.entries[i].position().x, self.entries[i].position().y]
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidDefects(v.join("; ")))
        }
    }
}

/// One entry of the extended ensemble: a dislocation carries `frank = 0`,
/// a disclination carries `burgers = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedDefect {
    pub position: [f64; 2],
    pub burgers: [f64; 2],
    pub frank: f64,
}

impl ExtendedDefect {
    pub fn center(&self) -> Vec2 {
        self.position.into()
    }

    pub fn burgers_vec(&self) -> Vec2 {
        self.burgers.into()
    }
}

pub fn extend_defects(cfg: &DefectConfiguration) -> Result<Vec<ExtendedDefect>> {
    cfg.validate()?;
    Ok(cfg
        .entries
        .iter()
        .map(|d| match d {
            Defect::Dislocation(x) => ExtendedDefect {
                position: [x.position.x, x.position.y],
                burgers: [x.burgers.x, x.burgers.y],
                frank: 0.0,
            },
            Defect::Disclination(x) => ExtendedDefect {
                position: [x.position.x, x.position.y],
                burgers: [0.0, 0.0],
                frank: x.frank_angle,
            },
        })
        .collect())
}

/// Value, gradient, Hessian and gradient of the Laplacian at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScalarJet3 {
    pub value: f64,
    pub gradient: Vec2,
    pub hessian: SymTensor2,
    pub grad_laplacian: Vec2,
}

impl ScalarJet3 {
    pub const ZERO: Self = Self {
        value: 0.0,
        gradient: Vec2::new(0.0, 0.0),
        hessian: SymTensor2::ZERO,
        grad_laplacian: Vec2::new(0.0, 0.0),
    };

    pub fn laplacian(&self) -> f64 {
        self.hessian.trace()
    }

    /// Jet of the affine function `a0 + a1 x1 + a2 x2` at `x`.
    pub fn affine(a: [f64; 3], x: &Vec2) -> Self {
        Self {
            value: a[0] + a[1] * x.x + a[2] * x.y,
            gradient: Vec2::new(a[1], a[2]),
            ..Self::ZERO
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|c| c.is_finite())
            && self.hessian.is_finite()
            && self.grad_laplacian.iter().all(|c| c.is_finite())
    }
}

impl Add for ScalarJet3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            gradient: self.gradient + o.gradient,
            hessian: self.hessian + o.hessian,
            grad_laplacian: self.grad_laplacian + o.grad_laplacian,
        }
    }
}

impl AddAssign for ScalarJet3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ScalarJet3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-1.0) * o
    }
}

impl Neg for ScalarJet3 {
    type Output = Self;
    fn neg(self) -> Self {
        (-1.0) * self
    }
}

impl Mul<ScalarJet3> for f64 {
    type Output = ScalarJet3;
    fn mul(self, j: ScalarJet3) -> ScalarJet3 {
        ScalarJet3 {
            value: self * j.value,
            gradient: self * j.gradient,
            hessian: self * j.hessian,
            grad_laplacian: self * j.grad_laplacian,
        }
    }
}

fn check_away(x: &Vec2, center: &Vec2) -> Result<()> {
    if (x - center).norm() <= EXCLUSION_RADIUS {
        Err(Error::NearDefect { x: [x.x, x.y], defect: [center.x, center.y], radius: EXCLUSION_RADIUS })
    } else {
        Ok(())
    }
}

/// Value of the disclination potential; zero at the origin by convention.
pub fn v_d_value(x: &Vec2, mat: &MaterialParams) -> f64 {
    let r2 = x.norm_squared();
    if r2 == 0.0 {
        return 0.0;
    }
    mat.plane_modulus() / (16.0 * PI) * r2 * r2.ln()
}

pub fn eval_v_d(x: &Vec2, mat: &MaterialParams) -> Result<ScalarJet3> {
    check_away(x, &Vec2::zeros())?;
    let c = mat.plane_modulus() / (16.0 * PI);
    let r2 = x.norm_squared();
    let l = r2.ln();
    let diag = 2.0 * c * (l + 1.0);
    let off = 4.0 * c / r2;
    Ok(ScalarJet3 {
        value: c * r2 * l,
        gradient: diag * x,
        hessian: SymTensor2::new(diag + off * x.x * x.x, off * x.x * x.y, diag + off * x.y * x.y),
        grad_laplacian: (8.0 * c / r2) * x,
    })
}

/// Value of the vector dislocation potential; zero at the origin by convention.
pub fn v_dislocation_value(x: &Vec2, mat: &MaterialParams) -> Vec2 {
    let r2 = x.norm_squared();
    if r2 == 0.0 {
        return Vec2::zeros();
    }
    (mat.plane_modulus() / (8.0 * PI) * (r2.ln() + 1.0)) * x
}

/// Component jets `[v_D,1, v_D,2]` of the vector dislocation potential.
pub fn eval_v_dislocation(x: &Vec2, mat: &MaterialParams) -> Result<[ScalarJet3; 2]> {
    check_away(x, &Vec2::zeros())?;
    let d = mat.plane_modulus() / (8.0 * PI);
    let r2 = x.norm_squared();
    let l1 = r2.ln() + 1.0;
    let xs = [x.x, x.y];
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let component = |m: usize| {
        let grad = |i: usize| d * (delta(i, m) * l1 + 2.0 * xs[m] * xs[i] / r2);
        let hess = |i: usize, j: usize| {
            d * ((2.0 / r2) * (delta(i, m) * xs[j] + delta(j, m) * xs[i] + xs[m] * delta(i, j))
                - 4.0 * xs[m] * xs[i] * xs[j] / (r2 * r2))
        };
        let glap = |i: usize| 4.0 * d * (delta(i, m) / r2 - 2.0 * xs[m] * xs[i] / (r2 * r2));
        ScalarJet3 {
            value: d * xs[m] * l1,
            gradient: Vec2::new(grad(0), grad(1)),
            hessian: SymTensor2::new(hess(0, 0), hess(0, 1), hess(1, 1)),
            grad_laplacian: Vec2::new(glap(0), glap(1)),
        }
    };
    Ok([component(0), component(1)])
}

/// Jet of `-b x v_D(x - center)` for one dislocation.
pub fn dislocation_potential(x: &Vec2, center: &Vec2, burgers: &Vec2, mat: &MaterialParams) -> Result<ScalarJet3> {
    let [d1, d2] = eval_v_dislocation(&(x - center), mat)?;
    // b x w = b1 w2 - b2 w1
    Ok((-burgers.x) * d2 + burgers.y * d1)
}

/// Jet of `-s v_d(x - center)` for one disclination.
pub fn disclination_potential(x: &Vec2, center: &Vec2, frank: f64, mat: &MaterialParams) -> Result<ScalarJet3> {
    Ok((-frank) * eval_v_d(&(x - center), mat)?)
}

pub fn eval_plastic_potential(x: &Vec2, cfg: &DefectConfiguration, mat: &MaterialParams) -> Result<ScalarJet3> {
    let mut jet = ScalarJet3::ZERO;
    for d in cfg.entries() {
        jet += match d {
            Defect::Dislocation(b) => dislocation_potential(x, &b.position, &b.burgers, mat)?,
            Defect::Disclination(s) => disclination_potential(x, &s.position, s.frank_angle, mat)?,
        };
    }
    Ok(jet)
}

/// Plastic potential value, using the zero-at-origin conventions.
pub fn plastic_potential_value(x: &Vec2, cfg: &DefectConfiguration, mat: &MaterialParams) -> f64 {
    cfg.entries()
        .iter()
        .map(|d| match d {
            Defect::Dislocation(b) => -cross(&b.burgers, &v_dislocation_value(&(x - b.position), mat)),
            Defect::Disclination(s) => -s.frank_angle * v_d_value(&(x - s.position), mat),
        })
        .sum()
}

/// Plastic stress `cof(hess v^p)` and strain `C^-1 sigma^p`.
pub fn plastic_stress_strain(
    x: &Vec2,
    cfg: &DefectConfiguration,
    mat: &MaterialParams,
) -> Result<(SymTensor2, SymTensor2)> {
    let jet = eval_plastic_potential(x, cfg, mat)?;
    let sigma = airy_stress(&jet.hessian);
    Ok((sigma, constitutive_strain(&sigma, mat)))
}

/// Largest admissible core radius: half the closest pair distance, capped by
/// the distance to the outer boundary.
pub fn core_radius_bound(cfg: &DefectConfiguration, outer: &OuterBoundary) -> Result<f64> {
    if cfg.is_empty() {
        return Err(Error::InvalidDefects("at least one defect is required".into()));
    }
    cfg.validate()?;
    let mut bound = f64::INFINITY;
    for (i, d) in cfg.entries().iter().enumerate() {
        let p = d.position();
        if !outer.contains(&p) {
            return Err(Error::InvalidDefects(format!(
                "defect {i} at ({}, {}) is not strictly inside the outer boundary",
                p.x, p.y
            )));
        }
        bound = bound.min(outer.distance_to_boundary(&p));
    }
    let e = cfg.entries();
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            bound = bound.min(0.5 * (e[i].position() - e[j].position()).norm());
        }
    }
    Ok(bound)
}
