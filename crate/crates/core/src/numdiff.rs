//! Fourth-order central finite differences on the plane.

use std::cell::RefCell;

use crate::elasticity::{SymTensor2, Vec2};
use crate::error::Result;

const DIRS: [Vec2; 2] = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];

fn central<T>(f: impl Fn(&Vec2) -> T, x: &Vec2, dir: &Vec2, h: f64) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
    T: std::ops::Mul<f64, Output = T>,
{
    let at = |k: f64| f(&(x + dir * (k * h)));
    ((at(1.0) - at(-1.0)) * 8.0 - (at(2.0) - at(-2.0))) * (1.0 / (12.0 * h))
}

pub fn gradient_fd(f: impl Fn(&Vec2) -> f64, x: &Vec2, h: f64) -> Vec2 {
    Vec2::new(central(&f, x, &DIRS[0], h), central(&f, x, &DIRS[1], h))
}

/// Symmetrized Jacobian of a gradient field.
pub fn hessian_fd(g: impl Fn(&Vec2) -> Vec2, x: &Vec2, h: f64) -> SymTensor2 {
    let d1 = central(&g, x, &DIRS[0], h);
    let d2 = central(&g, x, &DIRS[1], h);
    SymTensor2::new(d1.x, 0.5 * (d1.y + d2.x), d2.y)
}

/// `[d/dx1 t, d/dx2 t]` for a tensor field.
pub fn tensor_gradient_fd(t: impl Fn(&Vec2) -> SymTensor2, x: &Vec2, h: f64) -> [SymTensor2; 2] {
    [central(&t, x, &DIRS[0], h), central(&t, x, &DIRS[1], h)]
}

/// [`tensor_gradient_fd`] for a fallible field; the first error wins.
pub fn try_tensor_gradient_fd(t: impl Fn(&Vec2) -> Result<SymTensor2>, x: &Vec2, h: f64) -> Result<[SymTensor2; 2]> {
    let err = RefCell::new(None);
    let d = tensor_gradient_fd(
        |y| {
            t(y).unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                SymTensor2::ZERO
            })
        },
        x,
        h,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(d),
    }
}

/// Row-wise divergence of a symmetric tensor field.
pub fn divergence_fd(t: impl Fn(&Vec2) -> SymTensor2, x: &Vec2, h: f64) -> Vec2 {
    let [d1, d2] = tensor_gradient_fd(t, x, h);
    Vec2::new(d1.t11 + d2.t12, d1.t12 + d2.t22)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_polynomials_are_exact_to_rounding() {
        let f = |p: &Vec2| p.x.powi(4) - 3.0 * p.x * p.y.powi(2) + p.y;
        let x = Vec2::new(0.3, -0.7);
        let g = gradient_fd(f, &x, 1e-2);
        assert!((g.x - (4.0 * 0.027 - 3.0 * 0.49)).abs() < 1e-10);
        assert!((g.y - (-3.0 * 0.3 * 2.0 * -0.7 + 1.0)).abs() < 1e-10);
    }
}
