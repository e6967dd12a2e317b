//! Equilibrium of a disk holding a dislocation and a disclination: cell
//! problems, influence matrix, minimizer, recovered charges and a few field
//! samples along the line through both cores.

use defect_equilibrium::domain::{MeshOptions, OuterBoundary};
use defect_equilibrium::equilibrium::{extract_fields, recover_core_charges, solve_problem, ProblemSetup};
use defect_equilibrium::fem::ElementKind;
use defect_equilibrium::{Defect, DefectConfiguration, MaterialParams, Vec2};

fn main() -> defect_equilibrium::Result<()> {
    let setup = ProblemSetup {
        outer: OuterBoundary::disk([0.0, 0.0], 1.0)?,
        defects: DefectConfiguration::new(vec![
            Defect::dislocation([-0.4, 0.0], [1.0, 0.0]),
            Defect::disclination([0.4, 0.0], 0.5),
        ])?,
        eps: 0.2,
        mat: MaterialParams::new(1.0, 0.3)?,
        mesh: MeshOptions::new(0.1),
        element: ElementKind::Argyris,
    };
    let solved = solve_problem(&setup)?;
    println!("{} free dofs, {} cell problems", solved.system.num_free(), solved.basis.fields.len());
    let sol = solved.solution;
    println!("influence matrix\n{:.5}", sol.influence.m);
    let coeffs: Vec<String> = sol.coeffs.iter().map(|a| format!("{a:+.5e}")).collect();
    println!("coefficients {}", coeffs.join(" "));
    println!("minimum energy {:.6e}", sol.min_energy);
    for i in 0..sol.domain.num_cores() {
        let c = recover_core_charges(&sol, i)?;
        println!("core {i}: frank {:+.6} burgers ({:+.6}, {:+.6})", c.frank, c.burgers[0], c.burgers[1]);
    }
    println!("{:>6} {:>12} {:>12} {:>12}", "x1", "v", "sigma11", "sigma_e11");
    for k in 0..=12 {
        let x = Vec2::new(-0.9 + 0.15 * k as f64, 0.0);
        if !sol.domain.contains(&x) {
            continue;
        }
        let f = extract_fields(&sol, &x)?;
        println!("{:>6.2} {:>12.4e} {:>12.4e} {:>12.4e}", x.x, f.v, f.sigma.t11, f.sigma_e.t11);
    }
    Ok(())
}
