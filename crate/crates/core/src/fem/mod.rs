//! Plate finite elements for clamped biharmonic problems on perforated meshes.

mod assembly;
mod element;
mod field;
mod space;
mod system;

pub use assembly::{assemble, element_matrix, load_vector, Form, LowerCsc};
pub use element::{monomial_exponents, ElementBasis, ElementKind, Functional, LocalDof};
pub use field::DiscreteField;
pub use space::{AffineTrace, BoundaryData, FeSpace, JetFn};
pub use system::ConstrainedSystem;

use std::sync::Arc;

use crate::domain::PerforatedDomain;
use crate::elasticity::Vec2;
use crate::error::{Error, Result};

/// Values of the constrained dofs for clamped data on each loop, as a full
/// dof vector (free entries zero).
pub fn boundary_values(space: &FeSpace, data: &[BoundaryData]) -> Vec<f64> {
    let mut u = vec![0.0; space.num_dofs()];
    for (l, d) in data.iter().enumerate() {
        if matches!(d, BoundaryData::Clamped) {
            continue;
        }
        for (dof, v) in space.loop_constraints(l, d) {
            u[dof] = v;
        }
    }
    u
}

fn check_loops(system: &ConstrainedSystem, data: &[BoundaryData]) -> Result<()> {
    let loops = system.space.mesh.boundary_edges.iter().map(|e| e.loop_id + 1).max().unwrap_or(0);
    if data.len() != loops {
        return Err(Error::Precondition(format!("boundary data for {} loops given, mesh has {loops}", data.len())));
    }
    Ok(())
}

/// Discrete solution of `biharmonic(v) = load` with clamped data per loop.
pub fn solve_dirichlet(
    system: &ConstrainedSystem,
    data: &[BoundaryData],
    load: Option<&(dyn Fn(&Vec2) -> f64 + Sync)>,
) -> Result<DiscreteField> {
    check_loops(system, data)?;
    let space = &system.space;
    let rhs = load.map(|f| load_vector(space, f)).transpose()?;
    let u = system.solve(boundary_values(space, data), rhs)?;
    DiscreteField::new(space.clone(), u)
}

/// Boundary data of cell problem `(core, mode)`: affine mode `mode` about the
/// core center on that core, clamped to zero on every other loop.
pub fn cell_problem_data(dom: &PerforatedDomain, core: usize, mode: usize) -> Result<Vec<BoundaryData>> {
    if core >= dom.num_cores() {
        return Err(Error::UnknownLoop(core + 1));
    }
    if mode > 2 {
        return Err(Error::Precondition(format!("affine mode {mode} is not in 0..=2")));
    }
    let mut data = vec![BoundaryData::Clamped; dom.num_loops()];
    data[core + 1] = BoundaryData::Affine(AffineTrace::mode(mode, &dom.cores[core].center_vec()));
    Ok(data)
}

pub fn solve_cell_problem(system: &ConstrainedSystem, dom: &PerforatedDomain, core: usize, mode: usize) -> Result<DiscreteField> {
    solve_dirichlet(system, &cell_problem_data(dom, core, mode)?, None)
}

/// All `3N` cell solutions ordered by core, then mode, from one factorization.
pub fn solve_cell_basis(system: &ConstrainedSystem, dom: &PerforatedDomain) -> Result<Vec<DiscreteField>> {
    let mut cases = Vec::with_capacity(3 * dom.num_cores());
    for i in 0..dom.num_cores() {
        for r in 0..3 {
            let data = cell_problem_data(dom, i, r)?;
            check_loops(system, &data)?;
            cases.push((boundary_values(&system.space, &data), None));
        }
    }
    system
        .solve_many(&cases)?
        .into_iter()
        .map(|u| DiscreteField::new(system.space.clone(), u))
        .collect()
}

/// Space and clamped system for a domain mesh.
pub fn clamped_system(mesh: Arc<crate::domain::Mesh>, kind: ElementKind) -> Result<ConstrainedSystem> {
    let space = Arc::new(FeSpace::new(mesh, kind)?);
    ConstrainedSystem::clamped(space, Form::HESSIAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defects::ScalarJet3;
    use crate::domain::{build_perforated_domain, generate_mesh, MeshOptions, Orientation, OuterBoundary};
    use crate::{Defect, DefectConfiguration};

    fn setup(kind: ElementKind, defects: Vec<Defect>, eps: f64, h: f64) -> (PerforatedDomain, ConstrainedSystem) {
        let cfg = DefectConfiguration::new(defects).unwrap();
        let dom = build_perforated_domain(OuterBoundary::disk([0.0, 0.0], 1.0).unwrap(), &cfg, eps).unwrap();
        let mesh = generate_mesh(&dom, &MeshOptions::new(h)).unwrap();
        (dom, clamped_system(Arc::new(mesh), kind).unwrap())
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let (dom, sys) = setup(ElementKind::Argyris, vec![Defect::disclination([0.0, 0.0], 0.5)], 0.3, 0.2);
        let f = solve_dirichlet(&sys, &vec![BoundaryData::Clamped; dom.num_loops()], None).unwrap();
        assert!(f.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn cell_traces_and_linearity() {
        let (dom, sys) = setup(
            ElementKind::Argyris,
            vec![Defect::disclination([-0.4, 0.0], 0.5), Defect::dislocation([0.4, 0.1], [1.0, 0.0])],
            0.2,
            0.15,
        );
        let k0 = solve_cell_problem(&sys, &dom, 0, 0).unwrap();
        let k1 = solve_cell_problem(&sys, &dom, 0, 1).unwrap();
        let c = dom.cores[0].center_vec();
        // Traces are sampled just inside the mesh polygon.
        for lp_id in 1..=2 {
            let lp = dom.boundary_loop(lp_id, 24, Orientation::CounterClockwise).unwrap();
            for node in &lp.nodes {
                let x = node.x + 1e-3 * (node.x - dom.cores[lp_id - 1].center_vec());
                let v0 = k0.evaluate(&x).unwrap().value;
                let v1 = k1.evaluate(&x).unwrap().value;
                if lp_id == 1 {
                    assert!((v0 - 1.0).abs() < 1e-2, "{v0}");
                    assert!((v1 - (x.x - c.x)).abs() < 1e-2, "{v1}");
                } else {
                    assert!(v0.abs() < 1e-2 && v1.abs() < 1e-2);
                }
            }
        }
        let mut data = cell_problem_data(&dom, 0, 0).unwrap();
        data[1] = BoundaryData::Affine(AffineTrace::new(2.0, 0.0, 0.0));
        let twice = solve_dirichlet(&sys, &data, None).unwrap();
        for (a, b) in twice.coeffs().iter().zip(k0.coeffs()) {
            assert!((a - 2.0 * b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let basis = solve_cell_basis(&sys, &dom).unwrap();
        assert_eq!(basis.len(), 6);
        for (a, b) in basis[1].coeffs().iter().zip(k1.coeffs()) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn superposition_of_data() {
        let (dom, sys) = setup(ElementKind::Morley, vec![Defect::disclination([0.1, 0.0], 0.5)], 0.3, 0.2);
        let d1 = vec![BoundaryData::Affine(AffineTrace::new(0.5, 1.0, 0.0)), BoundaryData::Clamped];
        let d2 = vec![BoundaryData::Clamped, BoundaryData::Affine(AffineTrace::new(0.0, 0.0, 2.0))];
        let both = vec![d1[0].clone(), d2[1].clone()];
        let (a, b, c) = (
            solve_dirichlet(&sys, &d1, None).unwrap(),
            solve_dirichlet(&sys, &d2, None).unwrap(),
            solve_dirichlet(&sys, &both, None).unwrap(),
        );
        for i in 0..c.coeffs().len() {
            assert!((c.coeffs()[i] - a.coeffs()[i] - b.coeffs()[i]).abs() < 1e-10);
        }
        let _ = dom;
    }

    #[test]
    fn centered_cell_solution_is_radially_symmetric() {
        let (dom, sys) = setup(ElementKind::Argyris, vec![Defect::disclination([0.0, 0.0], 0.5)], 0.2, 0.1);
        let k0 = solve_cell_problem(&sys, &dom, 0, 0).unwrap();
        let lp = dom.boundary_loop(1, 64, Orientation::CounterClockwise).unwrap();
        let vals: Vec<f64> = lp.nodes.iter().map(|n| k0.evaluate(&(n.x * 3.0)).unwrap().value).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!(var.sqrt() < 0.01 * mean.abs(), "mean {mean}, sd {}", var.sqrt());
    }

    #[test]
    fn affine_interpolant_has_exact_jet() {
        let (_, sys) = setup(ElementKind::Argyris, vec![Defect::disclination([0.0, 0.0], 0.5)], 0.3, 0.2);
        let sp = sys.space.clone();
        let f = DiscreteField::new(sp.clone(), sp.interpolate(|x| ScalarJet3::affine([0.5, -1.0, 2.0], x))).unwrap();
        let x = Vec2::new(0.5, 0.5);
        let j = f.evaluate(&x).unwrap();
        assert!((j.value - (0.5 - 0.5 + 1.0)).abs() < 1e-12);
        assert!((j.gradient - Vec2::new(-1.0, 2.0)).norm() < 1e-12);
        assert!(j.hessian.max_abs() < 1e-10);
    }

    #[test]
    fn stiffness_is_positive_definite_once_clamped() {
        let (_, sys) = setup(ElementKind::Morley, vec![Defect::disclination([0.0, 0.0], 0.5)], 0.3, 0.2);
        let n = sys.num_free();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        assert!(sys.matrix().quadratic(&x) > 0.0);
    }
}
