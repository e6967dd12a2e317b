//! Batteries of checks with built-in inputs, and the checks run after a solve.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::defects::{disclination_potential, dislocation_potential, DefectConfiguration};
use crate::domain::{BoundaryLoop, Orientation, PerforatedDomain};
use crate::elasticity::{MaterialParams, Vec2};
use crate::equilibrium::{evaluate_functional, recover_core_charges, EquilibriumSolution};
use crate::error::{Error, Result};
use crate::field::{AiryField, AiryStrain, AnalyticField, PlasticPotential, Polynomial, StrainCombination};
use crate::Defect;

use super::{
    check_strain_airy_equivalence, divergence_identity_check, michell_integrals, monge_ampere_pair_swap,
    monge_ampere_symmetry_check, reconstruct_displacement, tangential_hessian_integral, tangential_parts_residual,
    yavari_integrals, CheckLevel, CheckRecord, Disk, ReconstructionOptions,
};

/// Nodes per circle for the analytic boundary integrals.
const CIRCLE_NODES: usize = 512;
const FRANK_ANGLES: [f64; 2] = [0.3, -1.0];
const BURGERS: [[f64; 2]; 2] = [[1.0, 0.0], [0.3, -0.7]];
const RADII: [f64; 2] = [0.2, 0.5];
const POISSON: [f64; 2] = [0.0, 0.3];
/// Element layers next to every boundary loop left out of displacement
/// reconstruction; the polygonal clamped boundary pollutes pointwise
/// derivatives of discrete potentials over a few elements.
pub const BOUNDARY_LAYERS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticSuite {
    Annulus,
    MongeAmpere,
    All,
}

impl std::str::FromStr for AnalyticSuite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annulus" => Ok(Self::Annulus),
            "monge-ampere" => Ok(Self::MongeAmpere),
            "all" => Ok(Self::All),
            _ => Err(Error::Config(format!("unknown suite `{s}` (expected annulus, monge-ampere or all)"))),
        }
    }
}

impl AnalyticSuite {
    pub fn run(self) -> Result<Vec<CheckRecord>> {
        Ok(match self {
            Self::Annulus => annulus_suite()?,
            Self::MongeAmpere => monge_ampere_suite()?,
            Self::All => {
                let mut r = annulus_suite()?;
                r.extend(monge_ampere_suite()?);
                r.extend(identity_suite()?);
                r
            }
        })
    }
}

fn single_defect(defect: Defect, mat: MaterialParams) -> impl AiryField {
    AnalyticField(move |x: &Vec2| match &defect {
        Defect::Disclination(d) => disclination_potential(x, &d.position, d.frank_angle, &mat),
        Defect::Dislocation(d) => dislocation_potential(x, &d.position, &d.burgers, &mat),
    })
}

fn sweep_defects() -> Vec<(String, Defect, [f64; 3])> {
    let mut out = Vec::new();
    for s in FRANK_ANGLES {
        out.push((format!("disclination s={s}"), Defect::disclination([0.0, 0.0], s), [s, 0.0, 0.0]));
    }
    for b in BURGERS {
        out.push((format!("dislocation b=({}, {})", b[0], b[1]), Defect::dislocation([0.0, 0.0], b), [0.0, b[0], b[1]]));
    }
    out
}

/// Ground truths for single defects centered in circles of several radii:
/// boundary charges of the Airy potentials, their strain-form counterparts,
/// and the vanishing tangential-Hessian and cross-core integrals.
pub fn annulus_suite() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let origin = Vec2::zeros();
    for (label, defect, truth) in sweep_defects() {
        for nu in POISSON {
            let mat = MaterialParams::new(1.0, nu)?;
            let v = single_defect(defect.clone(), mat);
            let mut seen = Vec::new();
            for rho in RADII {
                let tag = format!("{label} rho={rho} nu={nu}");
                let cw = BoundaryLoop::circle(1, origin, rho, CIRCLE_NODES, Orientation::Clockwise);
                let charges = michell_integrals(&v, &cw, &mat, &origin)?.charges(&mat);
                out.push(CheckRecord::within(format!("michell charges, {tag}"), &truth, &charges, 1e-8));
                let d = check_strain_airy_equivalence(&v, &cw, &mat, &origin, 1e-4 * rho)?;
                out.push(CheckRecord::within(format!("strain/airy equivalence, {tag}"), &[0.0], &[d], 1e-6));
                let strain = AiryStrain { field: &v, mat, fd_step: 1e-4 * rho };
                let y = yavari_integrals(&strain, &cw.reversed(), &origin)?.to_array();
                out.push(CheckRecord::within(format!("strain-form charges, {tag}"), &truth, &y, 1e-6));
                let th = tangential_hessian_integral(&v, &cw)?;
                out.push(CheckRecord::within(format!("tangential hessian, {tag}"), &[0.0, 0.0], &[th.x, th.y], 1e-10));
                seen.push(charges);
            }
            out.push(CheckRecord::within(format!("radius independence, {label} nu={nu}"), &seen[0], &seen[1], 1e-8));
        }
    }
    out.extend(cross_term_checks()?);
    Ok(out)
}

/// Potentials of one defect integrated around another defect's core.
fn cross_term_checks() -> Result<Vec<CheckRecord>> {
    let mat = MaterialParams::new(1.0, 0.3)?;
    let defects = [Defect::disclination([-0.4, 0.0], 0.5), Defect::dislocation([0.4, 0.0], [1.0, 0.0])];
    let mut out = Vec::new();
    for (i, di) in defects.iter().enumerate() {
        for (j, dj) in defects.iter().enumerate() {
            if i == j {
                continue;
            }
            let c = di.position();
            let v = single_defect(dj.clone(), mat);
            let lp = BoundaryLoop::circle(1, c, 0.2, CIRCLE_NODES, Orientation::Clockwise);
            let m = michell_integrals(&v, &lp, &mat, &c)?.to_array();
            out.push(CheckRecord::within(format!("cross term, defect {j} around core {i}"), &[0.0; 3], &m, 1e-8));
        }
    }
    Ok(out)
}

/// `bump = 1 - |x|^2` on the unit disk.
fn bump() -> Polynomial {
    Polynomial::new([((0, 0), 1.0), ((2, 0), -1.0), ((0, 2), -1.0)])
}

/// Cyclic symmetry with a clamped argument, and the `eta <-> chi` swap for an
/// argument whose trace is affine in value and gradient.
pub fn monge_ampere_suite() -> Result<Vec<CheckRecord>> {
    let disk = Disk { center: [0.0, 0.0], radius: 1.0 };
    let b2 = &bump() * &bump();
    let mut out = Vec::new();
    let r = monge_ampere_symmetry_check(&b2, &Polynomial::monomial(2, 0, 1.0), &Polynomial::monomial(0, 2, 1.0), &disk)?;
    out.push(CheckRecord::within("cyclic symmetry, bump^2 x1^2 x2^2", &[0.0; 3], &r.discrepancies, 1e-8));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..5 {
        let xi = &b2 * &Polynomial::random(2, &mut rng);
        let (eta, chi) = (Polynomial::random(3, &mut rng), Polynomial::random(3, &mut rng));
        // the clamped argument rotates through all three slots
        let r = match k % 3 {
            0 => monge_ampere_symmetry_check(&xi, &eta, &chi, &disk)?,
            1 => monge_ampere_symmetry_check(&eta, &xi, &chi, &disk)?,
            _ => monge_ampere_symmetry_check(&eta, &chi, &xi, &disk)?,
        };
        out.push(CheckRecord::within(format!("cyclic symmetry, random triple {k}"), &[0.0; 3], &r.discrepancies, 1e-8));
    }
    for k in 0..5 {
        let affine = Polynomial::random(1, &mut rng);
        let xi = &affine + &(&b2 * &Polynomial::random(2, &mut rng));
        let (eta, chi) = (Polynomial::random(3, &mut rng), Polynomial::random(3, &mut rng));
        let [lhs, rhs] = monge_ampere_pair_swap(&xi, &eta, &chi, &disk)?;
        out.push(CheckRecord::within(format!("pair swap, affine trace {k}"), &[lhs], &[rhs], 1e-8));
    }
    let zero = Polynomial::default();
    let p = Polynomial::random(3, &mut rng);
    let r = monge_ampere_symmetry_check(&zero, &p, &p, &disk)?;
    out.push(CheckRecord::within("zero argument", &[0.0; 3], &r.integrals, 0.0));
    // value-affine only: 1 - |x|^2 vanishes on the circle, its gradient does not
    let rejected = monge_ampere_pair_swap(&bump(), &p, &p, &disk).is_err();
    out.push(CheckRecord::within("pair swap rejects non-affine gradient trace", &[1.0], &[f64::from(u8::from(rejected))], 0.0));
    Ok(out)
}

/// Pointwise identities: `Div cof(hess v) = 0` and the tangential
/// integration-by-parts identity.
pub fn identity_suite() -> Result<Vec<CheckRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1f);
    let pts: Vec<Vec2> = (0..8).map(|k| Vec2::new(0.9 * (k as f64).cos(), 0.7 * (1.3 * k as f64).sin())).collect();
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        worst = worst.max(divergence_identity_check(&Polynomial::random(4, &mut rng), &pts, 1e-2)?);
    }
    out.push(CheckRecord::within("divergence identity, 20 random quartics", &[0.0], &[worst], 1e-7));

    let mat = MaterialParams::new(1.0, 0.3)?;
    let cfg = DefectConfiguration::new(vec![
        Defect::disclination([-0.4, 0.1], 0.5),
        Defect::dislocation([0.4, -0.1], [0.3, -0.7]),
    ])?;
    let vp = PlasticPotential { cfg, mat };
    let far: Vec<Vec2> = pts.iter().filter(|x| (*x - Vec2::new(-0.4, 0.1)).norm() > 0.2 && (*x - Vec2::new(0.4, -0.1)).norm() > 0.2).copied().collect();
    let d = divergence_identity_check(&vp, &far, 1e-3)?;
    out.push(CheckRecord::within("divergence identity, plastic potential", &[0.0], &[d], 1e-6));

    let f = Polynomial::random(6, &mut rng);
    let lp = BoundaryLoop::circle(0, Vec2::new(0.1, -0.2), 0.7, CIRCLE_NODES, Orientation::CounterClockwise);
    let r = tangential_parts_residual(&f, &lp)?;
    out.push(CheckRecord::within("tangential integration by parts", &[0.0, 0.0], &[r.x, r.y], 1e-10));
    Ok(out)
}

/// Outer boundary point used as the displacement base.
fn base_point(dom: &PerforatedDomain) -> Vec2 {
    let (lo, hi) = dom.outer.bounding_box();
    dom.outer.project(&(hi + (hi - lo)))
}

fn charge_tolerance(charges: &[f64]) -> f64 {
    let m = charges.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if m > 0.0 { 0.02 * m } else { 1e-3 }
}

fn mismatch_tolerance(charge: f64) -> f64 {
    if charge != 0.0 { 0.01 * charge.abs() } else { 1e-3 }
}

/// Checks of a solved configuration. `Fast` covers the reduced system, the
/// energy identity and the recovered core charges; `All` adds displacement
/// reconstruction of the elastic and total strains.
pub fn solution_checks(sol: &EquilibriumSolution, level: CheckLevel) -> Result<Vec<CheckRecord>> {
    if level == CheckLevel::None {
        return Ok(Vec::new());
    }
    let mut out = vec![
        CheckRecord::within("influence matrix symmetry", &[0.0], &[sol.influence.asymmetry()], 1e-10),
        CheckRecord::positive("influence matrix smallest eigenvalue", sol.influence.min_eigenvalue()),
        CheckRecord::within("reduced system residual", &[0.0], &[sol.relative_residual()], 1e-10),
    ];
    let f = evaluate_functional(&sol.field, &sol.domain, &sol.mat, CIRCLE_NODES)?;
    out.push(CheckRecord::within("functional at minimizer", &[sol.min_energy], &[f.total], 5e-3 * sol.min_energy.abs()));
    for (i, d) in sol.domain.defects.iter().enumerate() {
        let c = recover_core_charges(sol, i)?;
        let truth = [d.frank, d.burgers[0], d.burgers[1]];
        out.push(CheckRecord::within(
            format!("recovered charges, core {i}"),
            &truth,
            &[c.frank, c.burgers[0], c.burgers[1]],
            charge_tolerance(&truth),
        ));
    }
    if level == CheckLevel::All {
        out.extend(liftability_checks(sol)?);
    }
    Ok(out)
}

/// Jumps of the reconstructed displacement around each core: none for the
/// elastic strain, the prescribed charges for the total strain.
fn liftability_checks(sol: &EquilibriumSolution) -> Result<Vec<CheckRecord>> {
    let dom = &sol.domain;
    let mesh = &sol.field.space().mesh;
    let fd_step = 1e-4 * dom.eps;
    let total = AiryStrain { field: &sol.field, mat: sol.mat, fd_step };
    let vp = PlasticPotential { cfg: sol.defects.clone(), mat: sol.mat };
    let plastic = AiryStrain { field: &vp, mat: sol.mat, fd_step };
    let elastic = StrainCombination { terms: vec![(1.0, &total), (-1.0, &plastic)] };
    let base = base_point(dom);
    // clamped corners pin the Hessian at boundary vertices; keep paths out of
    // the resulting layer
    let opts = ReconstructionOptions { boundary_layers: BOUNDARY_LAYERS, ..Default::default() };
    let rec_e = reconstruct_displacement(&elastic, mesh, dom, &base, &opts)?;
    let rec_t = reconstruct_displacement(&total, mesh, dom, &base, &opts)?;
    let approx = !sol.field.third_derivatives_exact();
    let mut out = Vec::new();
    for (i, d) in dom.defects.iter().enumerate() {
        let (me, mt) = (rec_e.mismatches[i], rec_t.mismatches[i]);
        let b = d.burgers_vec().norm();
        let mut push = |r: CheckRecord| out.push(if approx { r.approximate() } else { r });
        push(CheckRecord::within(
            format!("elastic rotation jump, core {i}"),
            &[0.0],
            &[me.rotation_jump],
            mismatch_tolerance(d.frank),
        ));
        push(CheckRecord::within(
            format!("elastic displacement jump, core {i}"),
            &[0.0],
            &[me.displacement_jump[0].hypot(me.displacement_jump[1])],
            mismatch_tolerance(b),
        ));
        let truth = [d.frank, d.burgers[0], d.burgers[1]];
        push(CheckRecord::within(
            format!("total strain jumps, core {i}"),
            &truth,
            &[mt.rotation_jump, mt.displacement_jump[0], mt.displacement_jump[1]],
            charge_tolerance(&truth),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_all_pass(records: &[CheckRecord]) {
        let failed: Vec<String> = records.iter().filter(|r| !r.pass).map(|r| r.to_string()).collect();
        assert!(failed.is_empty(), "{}", failed.join("\n"));
    }

    #[test]
    fn analytic_suites_pass() {
        let r = AnalyticSuite::All.run().unwrap();
        assert_eq!(r.len(), 90);
        assert_all_pass(&r);
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("monge-ampere".parse::<AnalyticSuite>().unwrap(), AnalyticSuite::MongeAmpere);
        assert!("annuli".parse::<AnalyticSuite>().is_err());
    }
}
