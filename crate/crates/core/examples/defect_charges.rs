//! Boundary charges of the singular defect potentials.
//!
//! Integrates the Michell functionals of a disclination and a dislocation
//! potential around circles of several radii. The charges do not depend on
//! the circle and reproduce the Frank angle and Burgers vector.

use defect_equilibrium::defects::{disclination_potential, dislocation_potential};
use defect_equilibrium::domain::{BoundaryLoop, Orientation};
use defect_equilibrium::field::AnalyticField;
use defect_equilibrium::verification::michell_integrals;
use defect_equilibrium::{MaterialParams, Vec2};

fn main() -> defect_equilibrium::Result<()> {
    let mat = MaterialParams::new(1.0, 0.3)?;
    let origin = Vec2::zeros();
    let wedge = AnalyticField(|x: &Vec2| disclination_potential(x, &origin, 0.5, &mat));
    let edge = AnalyticField(|x: &Vec2| dislocation_potential(x, &origin, &Vec2::new(0.3, -0.7), &mat));

    println!("{:>6} {:>34} {:>34}", "rho", "disclination s=0.5", "dislocation b=(0.3,-0.7)");
    for rho in [0.05, 0.2, 0.5, 2.0] {
        let lp = BoundaryLoop::circle(1, origin, rho, 512, Orientation::Clockwise);
        let a = michell_integrals(&wedge, &lp, &mat, &origin)?.charges(&mat);
        let b = michell_integrals(&edge, &lp, &mat, &origin)?.charges(&mat);
        let show = |c: [f64; 3]| format!("{:+.3e} {:+.3e} {:+.3e}", c[0], c[1], c[2]);
        println!("{rho:>6} {:>34} {:>34}", show(a), show(b));
    }
    Ok(())
}
