//! Clamped plate on the unit disk with `biharmonic(v) = 64`, exact solution
//! `(1 - r^2)^2`, solved with both elements under uniform refinement.
//!
//! Morley converges at its nominal first order in the broken Hessian norm.
//! Argyris is limited to about half an order here: the polygonal boundary
//! pins the full Hessian at every boundary vertex, while the exact solution
//! has normal curvature 8 on the circle.

use std::sync::Arc;

use defect_equilibrium::domain::{generate_mesh, MeshOptions, OuterBoundary, PerforatedDomain};
use defect_equilibrium::fem::{clamped_system, solve_dirichlet, BoundaryData, ElementKind};
use defect_equilibrium::{SymTensor2, Vec2};

fn exact_hessian(x: &Vec2) -> SymTensor2 {
    let (a, b) = (x.x * x.x, x.y * x.y);
    SymTensor2::new(-4.0 + 12.0 * a + 4.0 * b, 8.0 * x.x * x.y, -4.0 + 4.0 * a + 12.0 * b)
}

fn main() -> defect_equilibrium::Result<()> {
    let dom = PerforatedDomain::unperforated(OuterBoundary::disk([0.0, 0.0], 1.0)?)?;
    for kind in [ElementKind::Morley, ElementKind::Argyris] {
        println!("{} (nominal order {})", kind.name(), kind.nominal_order());
        let mut mesh = generate_mesh(&dom, &MeshOptions::uniform(0.4))?;
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..4 {
            let system = clamped_system(Arc::new(mesh.clone()), kind)?;
            let v = solve_dirichlet(&system, &[BoundaryData::Clamped], Some(&|_: &Vec2| 64.0))?;
            let err = v.hessian_error(exact_hessian, 12);
            let rate = prev.map_or(String::new(), |(e, h)| format!("rate {:.3}", (e / err).ln() / (h / mesh.h).ln()));
            println!("  h={:.4} dofs={:>6} error={err:.4e} {rate}", mesh.h, system.space.num_dofs());
            prev = Some((err, mesh.h));
            mesh = mesh.refine_uniform(&dom)?;
        }
    }
    Ok(())
}
