//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Criteria 4 to 6 solve on meshes down to h = eps/8 and
//! take a few minutes.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use defect_equilibrium::defects::{core_radius_bound, disclination_potential, dislocation_potential};
use defect_equilibrium::domain::{generate_mesh, BoundaryLoop, MeshOptions, Orientation, OuterBoundary, PerforatedDomain};
use defect_equilibrium::elasticity::{constitutive_strain, constitutive_stress};
use defect_equilibrium::equilibrium::{evaluate_functional, recover_core_charges, solve_problem, EquilibriumSolution, ProblemSetup};
use defect_equilibrium::fem::{clamped_system, solve_dirichlet, BoundaryData, ElementKind};
use defect_equilibrium::field::{AiryField, AiryStrain, AnalyticField, PlasticPotential, Polynomial, StrainCombination};
use defect_equilibrium::verification::{
    check_strain_airy_equivalence, divergence_identity_check, michell_integrals, monge_ampere_pair_swap,
    monge_ampere_symmetry_check, reconstruct_displacement, Disk, ReconstructionOptions, BOUNDARY_LAYERS,
};
use defect_equilibrium::{Defect, DefectConfiguration, MaterialParams, SymTensor2, Vec2};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

const EPS: f64 = 0.2;
const NODES: usize = 512;
/// h = eps/4 and two further levels, each refined by sqrt(2).
const LADDER: [f64; 3] = [EPS / 4.0, EPS / 4.0 / std::f64::consts::SQRT_2, EPS / 8.0];

fn sweep() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for rho in [0.2, 0.5] {
        for nu in [0.0, 0.3] {
            v.push((rho, nu));
        }
    }
    v
}

fn disclination_field(s: f64, mat: MaterialParams) -> impl AiryField {
    AnalyticField(move |x: &Vec2| disclination_potential(x, &Vec2::zeros(), s, &mat))
}

fn dislocation_field(b: [f64; 2], mat: MaterialParams) -> impl AiryField {
    AnalyticField(move |x: &Vec2| dislocation_potential(x, &Vec2::zeros(), &Vec2::new(b[0], b[1]), &mat))
}

fn max_dev(expected: &[f64], got: &[f64]) -> f64 {
    expected.iter().zip(got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn charges_on_circle(v: &dyn AiryField, rho: f64, mat: &MaterialParams) -> Result<[f64; 3], defect_equilibrium::Error> {
    let lp = BoundaryLoop::circle(1, Vec2::zeros(), rho, NODES, Orientation::Clockwise);
    Ok(michell_integrals(v, &lp, mat, &Vec2::zeros())?.charges(mat))
}

fn annulus_disclination() -> Outcome {
    let mut worst = 0.0f64;
    for s in [0.3, -1.0] {
        for (rho, nu) in sweep() {
            let mat = MaterialParams::new(1.0, nu)?;
            worst = worst.max(max_dev(&[s, 0.0, 0.0], &charges_on_circle(&disclination_field(s, mat), rho, &mat)?));
        }
    }
    Ok((worst < 1e-8, format!("max deviation {worst:.2e} (limit 1e-8)")))
}

fn annulus_dislocation() -> Outcome {
    let mut worst = 0.0f64;
    for b in [[1.0, 0.0], [0.3, -0.7]] {
        for (rho, nu) in sweep() {
            let mat = MaterialParams::new(1.0, nu)?;
            worst = worst.max(max_dev(&[0.0, b[0], b[1]], &charges_on_circle(&dislocation_field(b, mat), rho, &mat)?));
        }
    }
    Ok((worst < 1e-8, format!("max deviation {worst:.2e} (limit 1e-8)")))
}

fn strain_airy_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for (rho, nu) in sweep() {
        let mat = MaterialParams::new(1.0, nu)?;
        let lp = BoundaryLoop::circle(1, Vec2::zeros(), rho, NODES, Orientation::Clockwise);
        let fields: Vec<Box<dyn AiryField>> = vec![
            Box::new(disclination_field(0.3, mat)),
            Box::new(disclination_field(-1.0, mat)),
            Box::new(dislocation_field([1.0, 0.0], mat)),
            Box::new(dislocation_field([0.3, -0.7], mat)),
        ];
        for v in &fields {
            worst = worst.max(check_strain_airy_equivalence(v.as_ref(), &lp, &mat, &Vec2::zeros(), 1e-4 * rho)?);
        }
    }
    Ok((worst < 1e-6, format!("max relative discrepancy {worst:.2e} (limit 1e-6)")))
}

fn unit_disk_setup(defects: Vec<Defect>, h: f64) -> Result<ProblemSetup, defect_equilibrium::Error> {
    Ok(ProblemSetup {
        outer: OuterBoundary::disk([0.0, 0.0], 1.0)?,
        defects: DefectConfiguration::new(defects)?,
        eps: EPS,
        mat: MaterialParams::new(1.0, 0.3)?,
        mesh: MeshOptions::new(h),
        element: ElementKind::Argyris,
    })
}

/// Largest charge error over the cores, relative to each core's largest charge.
fn charge_error(sol: &EquilibriumSolution) -> Result<f64, defect_equilibrium::Error> {
    let mut worst = 0.0f64;
    for (i, d) in sol.domain.defects.iter().enumerate() {
        let c = recover_core_charges(sol, i)?;
        let truth = [d.frank, d.burgers[0], d.burgers[1]];
        let scale = truth.iter().map(|t| t.abs()).fold(0.0, f64::max);
        worst = worst.max(max_dev(&truth, &[c.frank, c.burgers[0], c.burgers[1]]) / scale);
    }
    Ok(worst)
}

struct Level {
    h: f64,
    energy_gap: f64,
    charge_error: f64,
}

/// Solves each level in turn, dropping the linear system before the next one.
/// The solution at the first level is kept for the liftability check.
fn ladder(defects: &[Defect], hs: &[f64]) -> Result<(Vec<Level>, EquilibriumSolution), defect_equilibrium::Error> {
    let mut levels = Vec::new();
    let mut first = None;
    for &h in hs {
        let p = solve_problem(&unit_disk_setup(defects.to_vec(), h)?)?;
        let sol = p.solution;
        let f = evaluate_functional(&sol.field, &sol.domain, &sol.mat, NODES)?;
        levels.push(Level {
            h,
            energy_gap: (f.total - sol.min_energy).abs() / sol.min_energy.abs(),
            charge_error: charge_error(&sol)?,
        });
        if first.is_none() {
            first = Some(sol);
        }
    }
    Ok((levels, first.expect("at least one level")))
}

fn non_increasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] <= w[0])
}

fn cell_formula_consistency(single: &[Level]) -> Outcome {
    let gaps: Vec<String> = single.iter().map(|l| format!("h={:.4}: {:.2e}", l.h, l.energy_gap)).collect();
    let pass = single[0].energy_gap < 5e-3 && non_increasing(single.iter().map(|l| l.energy_gap));
    Ok((pass, format!("relative gap {} (limit 5e-3 at h=eps/4, non-increasing)", gaps.join(", "))))
}

fn boundary_conditions(single: &[Level], pair: &[Level]) -> Outcome {
    let fmt = |ls: &[Level]| ls.iter().map(|l| format!("{:.2e}", l.charge_error)).collect::<Vec<_>>().join(" -> ");
    let pass = [single, pair]
        .iter()
        .all(|ls| ls[0].charge_error < 0.02 && non_increasing(ls.iter().map(|l| l.charge_error)));
    Ok((pass, format!("relative charge error single {} / two-defect {} (limit 0.02, non-increasing)", fmt(single), fmt(pair))))
}

/// Worst liftability ratio (error over allowed error) for one solution.
fn liftability_ratio(sol: &EquilibriumSolution) -> Result<f64, defect_equilibrium::Error> {
    let dom = &sol.domain;
    let fd_step = 1e-4 * dom.eps;
    let total = AiryStrain { field: &sol.field, mat: sol.mat, fd_step };
    let vp = PlasticPotential { cfg: sol.defects.clone(), mat: sol.mat };
    let plastic = AiryStrain { field: &vp, mat: sol.mat, fd_step };
    let elastic = StrainCombination { terms: vec![(1.0, &total), (-1.0, &plastic)] };
    let mesh = &sol.field.space().mesh;
    let opts = ReconstructionOptions { boundary_layers: BOUNDARY_LAYERS, ..Default::default() };
    let base = Vec2::new(1.0, 0.0);
    let rec_e = reconstruct_displacement(&elastic, mesh, dom, &base, &opts)?;
    let rec_t = reconstruct_displacement(&total, mesh, dom, &base, &opts)?;
    let allowed = |charge: f64| if charge != 0.0 { 0.01 * charge.abs() } else { 1e-3 };
    let mut worst = 0.0f64;
    for (i, d) in dom.defects.iter().enumerate() {
        let (e, t) = (rec_e.mismatches[i], rec_t.mismatches[i]);
        let b = d.burgers[0].hypot(d.burgers[1]);
        worst = worst.max(e.rotation_jump.abs() / allowed(d.frank));
        worst = worst.max(e.displacement_jump[0].hypot(e.displacement_jump[1]) / allowed(b));
        let truth = [d.frank, d.burgers[0], d.burgers[1]];
        let scale = truth.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let got = [t.rotation_jump, t.displacement_jump[0], t.displacement_jump[1]];
        worst = worst.max(max_dev(&truth, &got) / (0.02 * scale));
    }
    Ok(worst)
}

fn liftability(single: &EquilibriumSolution, pair: &EquilibriumSolution) -> Outcome {
    let (a, b) = (liftability_ratio(single)?, liftability_ratio(pair)?);
    Ok((a < 1.0 && b < 1.0, format!("worst error/limit single {a:.2e}, two-defect {b:.2e} at h=eps/4")))
}

fn bump_squared() -> Polynomial {
    let bump = Polynomial::new([((0, 0), 1.0), ((2, 0), -1.0), ((0, 2), -1.0)]);
    &bump * &bump
}

fn monge_ampere() -> Outcome {
    let disk = Disk { center: [0.0, 0.0], radius: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let clamp = bump_squared();
    let mut worst = 0.0f64;
    for k in 0..12 {
        let xi = &clamp * &Polynomial::random(2, &mut rng);
        let (eta, chi) = (Polynomial::random(3, &mut rng), Polynomial::random(3, &mut rng));
        let r = match k % 3 {
            0 => monge_ampere_symmetry_check(&xi, &eta, &chi, &disk)?,
            1 => monge_ampere_symmetry_check(&eta, &xi, &chi, &disk)?,
            _ => monge_ampere_symmetry_check(&eta, &chi, &xi, &disk)?,
        };
        worst = worst.max(r.discrepancies.iter().copied().fold(0.0, f64::max));
        // affine value and gradient on the circle
        let xa = &Polynomial::random(1, &mut rng) + &(&clamp * &Polynomial::random(2, &mut rng));
        let [l, r] = monge_ampere_pair_swap(&xa, &eta, &chi, &disk)?;
        worst = worst.max((l - r).abs());
    }
    Ok((worst < 1e-8, format!("max discrepancy {worst:.2e} over 12 triples and 12 swaps (limit 1e-8)")))
}

fn random_configuration(n: usize, rng: &mut ChaCha8Rng) -> DefectConfiguration {
    loop {
        let defects: Vec<Defect> = (0..n)
            .map(|_| {
                let (r, t) = (0.7 * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
                let p = [r * t.cos(), r * t.sin()];
                if rng.random_bool(0.5) {
                    Defect::disclination(p, rng.random_range(-1.0..1.0))
                } else {
                    Defect::dislocation(p, [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                }
            })
            .collect();
        let cfg = DefectConfiguration::new(defects).expect("distinct random positions");
        let outer = OuterBoundary::disk([0.0, 0.0], 1.0).expect("unit disk");
        if core_radius_bound(&cfg, &outer).is_ok_and(|b| b > 0.2) {
            return cfg;
        }
    }
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut notes = Vec::new();
    let mut pass = true;

    let mut asym = 0.0f64;
    for n in 1..=3 {
        let cfg = random_configuration(n, &mut rng);
        let outer = OuterBoundary::disk([0.0, 0.0], 1.0)?;
        let eps = rng.random_range(0.16..0.9 * core_radius_bound(&cfg, &outer)?.min(0.2));
        let setup = ProblemSetup {
            outer,
            defects: cfg,
            eps,
            mat: MaterialParams::new(rng.random_range(0.5..2.0), rng.random_range(0.0..0.45))?,
            mesh: MeshOptions::new(0.15),
            element: ElementKind::Argyris,
        };
        let solved = solve_problem(&setup)?;
        let m = solved.solution.influence.m;
        // every entry again from the cell fields, both triangles, unsymmetrized
        let fields = &solved.basis.fields;
        let g = DMatrix::from_fn(fields.len(), fields.len(), |a, b| {
            fields[a].integrate(6, |t, x, ja| ja.hessian.ddot(&fields[b].jet_in(t, x).hessian))
        });
        let a = ((&g - g.transpose()).amax() / g.amax()).max((&g - &m).amax() / m.amax());
        asym = asym.max(a);
        let chol = m.clone().cholesky().is_some();
        pass &= a < 1e-10 && chol;
        notes.push(format!("N={n} cholesky {}", if chol { "ok" } else { "failed" }));
    }
    notes.push(format!("M asymmetry and deviation from direct quadrature {asym:.1e}"));

    let mut roundtrip = 0.0f64;
    for _ in 0..1000 {
        let mat = MaterialParams::new(rng.random_range(0.1..10.0), rng.random_range(0.0..0.49))?;
        let eps = SymTensor2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let back = constitutive_strain(&constitutive_stress(&eps, &mat), &mat);
        roundtrip = roundtrip.max(((back - eps).norm_sq() / eps.norm_sq()).sqrt());
    }
    pass &= roundtrip < 1e-12;
    notes.push(format!("constitutive round trip {roundtrip:.1e}"));

    let pts: Vec<Vec2> = (0..8).map(|k| Vec2::new(0.8 * (k as f64).cos(), 0.6 * (2.1 * k as f64).sin())).collect();
    let mut div = 0.0f64;
    for _ in 0..20 {
        div = div.max(divergence_identity_check(&Polynomial::random(4, &mut rng), &pts, 1e-2)?);
    }
    pass &= div < 1e-7;
    notes.push(format!("Div cof residual {div:.1e}"));
    Ok((pass, notes.join(", ")))
}

/// Broken-Hessian errors for the clamped disk with exact `(1 - r^2)^2` over a
/// mesh and three uniform refinements.
fn manufactured_rates(kind: ElementKind) -> Result<Vec<f64>, defect_equilibrium::Error> {
    let dom = PerforatedDomain::unperforated(OuterBoundary::disk([0.0, 0.0], 1.0)?)?;
    let exact = |x: &Vec2| {
        SymTensor2::new(-4.0 + 12.0 * x.x * x.x + 4.0 * x.y * x.y, 8.0 * x.x * x.y, -4.0 + 4.0 * x.x * x.x + 12.0 * x.y * x.y)
    };
    let mut mesh = generate_mesh(&dom, &MeshOptions::uniform(0.4))?;
    let mut errs: Vec<(f64, f64)> = Vec::new();
    for level in 0..4 {
        if level > 0 {
            mesh = mesh.refine_uniform(&dom)?;
        }
        let sys = clamped_system(Arc::new(mesh.clone()), kind)?;
        let v = solve_dirichlet(&sys, &[BoundaryData::Clamped], Some(&|_: &Vec2| 64.0))?;
        errs.push((mesh.h, v.hessian_error(exact, 12)));
    }
    Ok(errs.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect())
}

fn manufactured_convergence() -> Outcome {
    let fmt = |r: &[f64]| r.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    let morley = manufactured_rates(ElementKind::Morley)?;
    let order = ElementKind::Morley.nominal_order();
    let pass = morley.iter().all(|&r| r >= 0.9 * order);
    let argyris = manufactured_rates(ElementKind::Argyris)?;
    Ok((
        pass,
        format!(
            "morley rates {} (need >= {:.1}); argyris rates {} on the polygonal disk, not graded",
            fmt(&morley),
            0.9 * order,
            fmt(&argyris)
        ),
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut line = |n: usize, title: &str, outcome: Outcome, t: Instant| {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!("criterion {n} {} {title}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    line(1, "annulus disclination charges", annulus_disclination(), t);
    let t = Instant::now();
    line(2, "annulus dislocation charges", annulus_dislocation(), t);
    let t = Instant::now();
    line(3, "strain and Airy boundary integrals", strain_airy_equivalence(), t);

    let t = Instant::now();
    let single = ladder(&[Defect::disclination([0.0, 0.0], 0.5)], &LADDER);
    let pair = ladder(&[Defect::dislocation([-0.4, 0.0], [1.0, 0.0]), Defect::disclination([0.4, 0.0], 0.5)], &LADDER[..2]);
    match (&single, &pair) {
        (Ok((s, s0)), Ok((p, p0))) => {
            line(4, "cell-formula energy", cell_formula_consistency(s), t);
            let t = Instant::now();
            line(5, "recovered core charges", boundary_conditions(s, p), t);
            let t = Instant::now();
            line(6, "liftability", liftability(s0, p0), t);
        }
        _ => {
            let err = single.as_ref().err().or(pair.as_ref().err()).map(|e| e.to_string()).unwrap_or_default();
            for (n, title) in [(4, "cell-formula energy"), (5, "recovered core charges"), (6, "liftability")] {
                line(n, title, Err(format!("solve failed: {err}").into()), t);
            }
        }
    }

    let t = Instant::now();
    line(7, "Monge-Ampere symmetry", monge_ampere(), t);
    let t = Instant::now();
    line(8, "structural invariants", structural_invariants(), t);
    let t = Instant::now();
    line(9, "manufactured biharmonic convergence", manufactured_convergence(), t);

    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
