//! Integrates the elastic and total strains of an equilibrium solution along
//! mesh edges. The elastic strain lifts to a single-valued displacement; the
//! total strain jumps across each cut by the core's Frank angle and Burgers
//! vector.

use defect_equilibrium::domain::{MeshOptions, OuterBoundary};
use defect_equilibrium::equilibrium::{solve_problem, ProblemSetup};
use defect_equilibrium::fem::ElementKind;
use defect_equilibrium::field::{AiryStrain, PlasticPotential, StrainCombination};
use defect_equilibrium::verification::{reconstruct_displacement, ReconstructionOptions, BOUNDARY_LAYERS};
use defect_equilibrium::{Defect, DefectConfiguration, MaterialParams, Vec2};

fn main() -> defect_equilibrium::Result<()> {
    let setup = ProblemSetup {
        outer: OuterBoundary::disk([0.0, 0.0], 1.0)?,
        defects: DefectConfiguration::new(vec![
            Defect::disclination([-0.35, 0.1], -0.3),
            Defect::dislocation([0.35, -0.1], [0.5, 0.5]),
        ])?,
        eps: 0.2,
        mat: MaterialParams::new(1.0, 0.3)?,
        mesh: MeshOptions::new(0.05),
        element: ElementKind::Argyris,
    };
    let sol = solve_problem(&setup)?.solution;
    let fd_step = 1e-4 * sol.domain.eps;
    let total = AiryStrain { field: &sol.field, mat: sol.mat, fd_step };
    let vp = PlasticPotential { cfg: sol.defects.clone(), mat: sol.mat };
    let plastic = AiryStrain { field: &vp, mat: sol.mat, fd_step };
    let elastic = StrainCombination { terms: vec![(1.0, &total), (-1.0, &plastic)] };

    let opts = ReconstructionOptions { boundary_layers: BOUNDARY_LAYERS, ..Default::default() };
    let mesh = &sol.field.space().mesh;
    let base = Vec2::new(1.0, 0.0);
    for (name, strain) in [("elastic", &elastic as &dyn defect_equilibrium::field::StrainField), ("total", &total)] {
        let rec = reconstruct_displacement(strain, mesh, &sol.domain, &base, &opts)?;
        println!("{name}: closure {:.2e} (rotation) {:.2e} (displacement)", rec.closure_rotation, rec.closure_displacement);
        for (i, m) in rec.mismatches.iter().enumerate() {
            println!(
                "  core {i}: rotation jump {:+.6}, displacement jump ({:+.6}, {:+.6})",
                m.rotation_jump, m.displacement_jump[0], m.displacement_jump[1]
            );
        }
    }
    Ok(())
}
