//! Quadrature rules: Gauss-Legendre on intervals, collapsed (Duffy) rules on
//! triangles, and a polar product rule on disks.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::elasticity::Vec2;

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("n >= 1"));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`; exact for
/// polynomials of total degree `2n - 2`. Points are `(xi, eta)`, weights sum
/// to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn collapsed(n: usize) -> Self {
        let gl = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for &(u, wu) in &gl {
            for &(v, wv) in &gl {
                points.push([u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    /// Rule exact to at least the given polynomial degree.
    pub fn for_degree(degree: usize) -> Self {
        Self::collapsed(degree / 2 + 1)
    }

    /// Physical points and weights on the triangle with vertices `p`.
    pub fn map(&self, p: &[Vec2; 3]) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        let e1 = p[1] - p[0];
        let e2 = p[2] - p[0];
        let jac = (e1.x * e2.y - e1.y * e2.x).abs();
        let p0 = p[0];
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(q, w)| (p0 + q[0] * e1 + q[1] * e2, w * jac))
    }
}

/// Product rule on the disk of given center and radius: Gauss in the radius
/// (with the polar Jacobian) times the trapezoid rule in angle. Exact for
/// polynomials of degree below `min(2 n_r - 1, n_theta)`.
pub fn disk_rule(center: Vec2, radius: f64, n_r: usize, n_theta: usize) -> Vec<(Vec2, f64)> {
    let gl = gauss_legendre_unit(n_r);
    let mut out = Vec::with_capacity(n_r * n_theta);
    let dth = 2.0 * PI / n_theta as f64;
    for &(u, wu) in &gl {
        let r = radius * u;
        for k in 0..n_theta {
            let th = dth * k as f64;
            out.push((center + r * Vec2::new(th.cos(), th.sin()), wu * radius * r * dth));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn monomial_integral(a: i32, b: i32) -> f64 {
        // int over reference triangle of x^a y^b = a! b! / (a + b + 2)!
        let f = |n: i32| (1..=n).map(f64::from).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn collapsed_rule_is_exact_to_its_degree() {
        for n in 1..8 {
            let rule = TriangleRule::collapsed(n);
            let deg = 2 * n as i32 - 2;
            for a in 0..=deg {
                for b in 0..=deg - a {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a) * p[1].powi(b))
                        .sum();
                    assert_relative_eq!(q, monomial_integral(a, b), max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn mapped_rule_gives_area() {
        let rule = TriangleRule::for_degree(4);
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.5, 3.0)];
        let area: f64 = rule.map(&tri).map(|(_, w)| w).sum();
        assert_relative_eq!(area, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn disk_rule_moments() {
        let rule = disk_rule(Vec2::new(0.2, -0.1), 1.5, 8, 32);
        let area: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(area, PI * 2.25, epsilon = 1e-12);
        let r4: f64 = rule.iter().map(|(x, w)| w * (x - Vec2::new(0.2, -0.1)).norm_squared().powi(2)).sum();
        assert_relative_eq!(r4, PI * 1.5f64.powi(6) / 3.0, epsilon = 1e-11);
    }
}
