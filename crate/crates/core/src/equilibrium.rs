//! Reduction of the equilibrium problem to a `3N`-dimensional quadratic
//! minimization over the affine boundary coefficients of the cores.
//!
//! Every admissible potential splits into a part vanishing with its gradient
//! on the whole boundary and a combination `sum_(i,r) A_(i,r) kappa_r^i` of
//! the cell solutions. Only the second part carries the boundary terms, so
//! the minimizer is `A = -E/(1 - nu^2) M^-1 Phi` with `M` the Hessian Gram
//! matrix of the cell solutions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defects::{plastic_stress_strain, DefectConfiguration, ExtendedDefect, ScalarJet3};
use crate::domain::{Mesh, MeshOptions, OuterBoundary, PerforatedDomain};
use crate::elasticity::{
    airy_stress, constitutive_strain, rotate_quarter_cw, MaterialParams, SymTensor2, Vec2,
};
use crate::error::{Error, Result};
use crate::fem::{
    assemble, solve_cell_basis, AffineTrace, ConstrainedSystem, DiscreteField, ElementKind, FeSpace, Form,
};
use crate::quadrature::TriangleRule;

/// Cell solutions `kappa_r^i`, ordered by core and then by mode.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub fields: Vec<DiscreteField>,
}

impl CellBasis {
    pub fn solve(system: &ConstrainedSystem, dom: &PerforatedDomain) -> Result<Self> {
        Ok(Self { fields: solve_cell_basis(system, dom)? })
    }

    pub fn num_cores(&self) -> usize {
        self.fields.len() / 3
    }

    pub fn space(&self) -> Result<&Arc<FeSpace>> {
        self.fields
            .first()
            .map(|f| f.space())
            .ok_or_else(|| Error::Precondition("empty cell basis".into()))
    }
}

#[derive(Debug, Clone)]
pub struct InfluenceMatrix {
    pub m: DMatrix<f64>,
}

impl InfluenceMatrix {
    /// `max |M - M^T| / max |M|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.m.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.m - self.m.transpose()).amax() / scale
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = 0.5 * (&self.m + self.m.transpose());
        sym.symmetric_eigenvalues().min()
    }
}

/// Per-element Gram matrix of the given fields under `form`, accumulated in
/// a fixed order so repeated runs agree bit for bit.
pub fn form_gram(fields: &[&DiscreteField], form: Form) -> Result<DMatrix<f64>> {
    let first = fields.first().ok_or_else(|| Error::Precondition("no fields".into()))?;
    let space = first.space();
    if fields.iter().any(|f| !Arc::ptr_eq(f.space(), space)) {
        return Err(Error::Precondition("fields live on different spaces".into()));
    }
    let n = fields.len();
    let rule = TriangleRule::for_degree(2 * (space.kind.degree() - 2));
    let nt = space.mesh.num_triangles();
    const CHUNK: usize = 1024;
    let parts: Vec<DMatrix<f64>> = (0..nt.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = DMatrix::zeros(n, n);
            let mut scratch = Vec::new();
            let mut hs = vec![SymTensor2::ZERO; n];
            for t in c * CHUNK..((c + 1) * CHUNK).min(nt) {
                for (x, w) in rule.map(&space.mesh.triangle_points(t)) {
                    for (h, f) in hs.iter_mut().zip(fields) {
                        *h = f.jet_with(t, &x, &mut scratch).hessian;
                    }
                    for a in 0..n {
                        for b in 0..=a {
                            let (ha, hb) = (&hs[a], &hs[b]);
                            let v = form.hessian * ha.ddot(hb) + form.laplacian * ha.trace() * hb.trace();
                            acc[(a, b)] += w * v;
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for p in parts {
        m += p;
    }
    m.fill_upper_triangle_with_lower_triangle();
    Ok(m)
}

/// `M[(i,r),(j,s)] = int hess kappa_r^i : hess kappa_s^j` by element quadrature.
pub fn assemble_influence_matrix(basis: &CellBasis) -> Result<InfluenceMatrix> {
    let refs: Vec<&DiscreteField> = basis.fields.iter().collect();
    Ok(InfluenceMatrix { m: form_gram(&refs, Form::HESSIAN)? })
}

/// Forcing `Phi = Phi_D + Phi_d` with block `(s, b2, -b1)` per core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingVector {
    pub phi: Vec<f64>,
    /// Dislocation part `(0, b2, -b1)` per core.
    pub dislocation_part: Vec<f64>,
    /// Disclination part `(s, 0, 0)` per core.
    pub disclination_part: Vec<f64>,
}

pub fn build_forcing(defects: &[ExtendedDefect]) -> ForcingVector {
    let mut dislocation_part = Vec::with_capacity(3 * defects.len());
    let mut disclination_part = Vec::with_capacity(3 * defects.len());
    for d in defects {
        let pb = rotate_quarter_cw(&d.burgers_vec());
        dislocation_part.extend([0.0, pb.x, pb.y]);
        disclination_part.extend([d.frank, 0.0, 0.0]);
    }
    let phi = dislocation_part.iter().zip(&disclination_part).map(|(a, b)| a + b).collect();
    ForcingVector { phi, dislocation_part, disclination_part }
}

/// Minimizer of the reduced problem together with the synthesized potential.
#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    /// `A`, ordered like the cell basis.
    pub coeffs: Vec<f64>,
    /// `v = sum A_k kappa_k`.
    pub field: DiscreteField,
    /// `-E/(2(1 - nu^2)) <M^-1 Phi, Phi>`.
    pub min_energy: f64,
    pub mat: MaterialParams,
    pub domain: PerforatedDomain,
    pub defects: DefectConfiguration,
    pub forcing: ForcingVector,
    pub influence: InfluenceMatrix,
}

impl EquilibriumSolution {
    pub fn core_trace(&self, core: usize) -> AffineTrace {
        AffineTrace::new(self.coeffs[3 * core], self.coeffs[3 * core + 1], self.coeffs[3 * core + 2])
    }

    /// `|M A + E/(1 - nu^2) Phi| / |E/(1 - nu^2) Phi|`.
    pub fn relative_residual(&self) -> f64 {
        let c = self.mat.young_modulus / (1.0 - self.mat.poisson_ratio.powi(2));
        let a = DVector::from_column_slice(&self.coeffs);
        let f = DVector::from_column_slice(&self.forcing.phi) * c;
        let r = &self.influence.m * a + &f;
        if f.norm() == 0.0 {
            r.norm()
        } else {
            r.norm() / f.norm()
        }
    }
}

pub fn solve_equilibrium(
    basis: &CellBasis,
    influence: &InfluenceMatrix,
    forcing: &ForcingVector,
    mat: &MaterialParams,
    domain: &PerforatedDomain,
    defects: &DefectConfiguration,
) -> Result<EquilibriumSolution> {
    mat.validate()?;
    let n = basis.fields.len();
    if influence.m.nrows() != n || forcing.phi.len() != n || defects.len() * 3 != n {
        return Err(Error::Precondition(format!(
            "sizes disagree: {n} cell fields, {}x{} matrix, {} forcing entries, {} defects",
            influence.m.nrows(),
            influence.m.ncols(),
            forcing.phi.len(),
            defects.len()
        )));
    }
    let asym = influence.asymmetry();
    if asym > 1e-10 {
        return Err(Error::Solver(format!("influence matrix is not symmetric (relative asymmetry {asym:e})")));
    }
    let chol = influence
        .m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Solver("influence matrix is not positive definite".into()))?;
    let phi = DVector::from_column_slice(&forcing.phi);
    let m_inv_phi = chol.solve(&phi);
    let c = mat.young_modulus / (1.0 - mat.poisson_ratio.powi(2));
    let coeffs: Vec<f64> = (-c * &m_inv_phi).iter().copied().collect();
    let min_energy = -0.5 * c * m_inv_phi.dot(&phi);
    let terms: Vec<(f64, &DiscreteField)> = coeffs.iter().copied().zip(&basis.fields).collect();
    let field = DiscreteField::combine(&terms)?;
    Ok(EquilibriumSolution {
        coeffs,
        field,
        min_energy,
        mat: *mat,
        domain: domain.clone(),
        defects: defects.clone(),
        forcing: forcing.clone(),
        influence: influence.clone(),
    })
}

/// Everything needed to run the cell-formula route on one configuration.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub outer: OuterBoundary,
    pub defects: DefectConfiguration,
    pub eps: f64,
    pub mat: MaterialParams,
    pub mesh: MeshOptions,
    pub element: ElementKind,
}

/// Intermediate products of [`solve_problem`], kept for diagnostics.
#[derive(Debug)]
pub struct SolvedProblem {
    pub domain: PerforatedDomain,
    pub system: ConstrainedSystem,
    pub basis: CellBasis,
    pub solution: EquilibriumSolution,
}

/// Mesh, cell problems, influence matrix and reduced solve.
pub fn solve_problem(setup: &ProblemSetup) -> Result<SolvedProblem> {
    let domain = crate::domain::build_perforated_domain(setup.outer.clone(), &setup.defects, setup.eps)?;
    let mesh = crate::domain::generate_mesh(&domain, &setup.mesh)?;
    solve_on_mesh(domain, Arc::new(mesh), setup)
}

pub fn solve_on_mesh(domain: PerforatedDomain, mesh: Arc<Mesh>, setup: &ProblemSetup) -> Result<SolvedProblem> {
    let system = crate::fem::clamped_system(mesh, setup.element)?;
    let basis = CellBasis::solve(&system, &domain)?;
    let influence = assemble_influence_matrix(&basis)?;
    let forcing = build_forcing(&domain.defects);
    let solution = solve_equilibrium(&basis, &influence, &forcing, &setup.mat, &domain, &setup.defects)?;
    Ok(SolvedProblem { domain, system, basis, solution })
}

/// Parts of the energy functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    /// Stored energy `int W(cof hess v)`.
    pub bulk: f64,
    /// `sum_j avg <grad v, Pi b^j>` over the dislocation cores.
    pub dislocation: f64,
    /// `sum_k s^k avg v` over the disclination cores.
    pub disclination: f64,
    pub total: f64,
}

/// Energy functional with the bulk term from element quadrature and the
/// core averages from `n_circle` equispaced nodes on each core circle.
pub fn evaluate_functional(
    v: &DiscreteField,
    dom: &PerforatedDomain,
    mat: &MaterialParams,
    n_circle: usize,
) -> Result<FunctionalValue> {
    if n_circle == 0 {
        return Err(Error::Precondition("circle quadrature needs at least one node".into()));
    }
    let bulk = v.energy(mat);
    let (mut dislocation, mut disclination) = (0.0, 0.0);
    for (i, d) in dom.defects.iter().enumerate() {
        let lp = dom.boundary_loop(i + 1, n_circle, crate::domain::Orientation::CounterClockwise)?;
        let len = lp.length();
        let pb = rotate_quarter_cw(&d.burgers_vec());
        let mut mean_v = 0.0;
        let mut mean_g = Vec2::zeros();
        for nd in &lp.nodes {
            let j = v.evaluate(&nd.x)?;
            mean_v += nd.weight * j.value;
            mean_g += nd.weight * j.gradient;
        }
        dislocation += (mean_g / len).dot(&pb);
        disclination += d.frank * mean_v / len;
    }
    Ok(FunctionalValue { bulk, dislocation, disclination, total: bulk + dislocation + disclination })
}

/// Stress and strain at a point, with the split into plastic and elastic parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub v: f64,
    pub sigma: SymTensor2,
    pub eps: SymTensor2,
    pub sigma_p: SymTensor2,
    pub eps_p: SymTensor2,
    pub sigma_e: SymTensor2,
    pub eps_e: SymTensor2,
}

pub fn extract_fields(sol: &EquilibriumSolution, x: &Vec2) -> Result<FieldSample> {
    if !sol.domain.contains(x) {
        return Err(Error::Precondition(format!("point ({}, {}) is outside the perforated domain", x.x, x.y)));
    }
    let jet = sol.field.evaluate(x)?;
    sample_from_jet(&jet, x, &sol.defects, &sol.mat)
}

pub(crate) fn sample_from_jet(
    jet: &ScalarJet3,
    x: &Vec2,
    defects: &DefectConfiguration,
    mat: &MaterialParams,
) -> Result<FieldSample> {
    let sigma = airy_stress(&jet.hessian);
    let eps = constitutive_strain(&sigma, mat);
    let (sigma_p, eps_p) = plastic_stress_strain(x, defects, mat)?;
    let sigma_e = sigma - sigma_p;
    Ok(FieldSample { v: jet.value, sigma, eps, sigma_p, eps_p, sigma_e, eps_e: constitutive_strain(&sigma_e, mat) })
}

/// A test function of the admissible class: evaluable elementwise, with an
/// affine trace on every core and a clamped outer trace.
pub trait AdmissibleTest: Sync {
    fn jet_in(&self, t: usize, x: &Vec2) -> ScalarJet3;

    /// Affine trace on each core in coordinates centered at the core.
    fn core_traces(&self, dom: &PerforatedDomain) -> Result<Vec<AffineTrace>>;

    /// Triangles outside which the function is affine, so the bulk term
    /// vanishes there. `None` means all.
    fn support(&self, _mesh: &Mesh) -> Option<Vec<usize>> {
        None
    }
}

impl AdmissibleTest for DiscreteField {
    fn jet_in(&self, t: usize, x: &Vec2) -> ScalarJet3 {
        DiscreteField::jet_in(self, t, x)
    }

    fn core_traces(&self, dom: &PerforatedDomain) -> Result<Vec<AffineTrace>> {
        let outer = fit_loop_trace(self, 0)?;
        if outer.1 > trace_tolerance(self) || outer.0.gradient().norm() + outer.0.a0.abs() > trace_tolerance(self) {
            return Err(Error::Precondition("test function is not clamped on the outer boundary".into()));
        }
        (0..dom.num_cores())
            .map(|i| {
                let (a, dev) = fit_loop_trace(self, i + 1)?;
                if dev > trace_tolerance(self) {
                    return Err(Error::Precondition(format!(
                        "test function trace on core {i} deviates from affine by {dev:e}"
                    )));
                }
                let c = dom.cores[i].center_vec();
                Ok(AffineTrace::new(a.eval(&c), a.a1, a.a2))
            })
            .collect()
    }
}

fn trace_tolerance(f: &DiscreteField) -> f64 {
    1e-8 * f.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()))
}

/// Least-squares affine fit of the values on the vertices of one loop, with
/// the largest deviation of values and (for C1 elements) gradients.
fn fit_loop_trace(f: &DiscreteField, loop_id: usize) -> Result<(AffineTrace, f64)> {
    let mesh = &f.space().mesh;
    let mut samples = Vec::new();
    for e in &mesh.boundary_edges {
        if e.loop_id != loop_id {
            continue;
        }
        let t = mesh.locate_or_err(&mesh.vertices[e.v[0]])?;
        let x = mesh.vertices[e.v[0]];
        samples.push((x, f.jet_in(t, &x)));
    }
    if samples.len() < 3 {
        return Err(Error::UnknownLoop(loop_id));
    }
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (x, j) in &samples {
        let row = nalgebra::Vector3::new(1.0, x.x, x.y);
        ata += row * row.transpose();
        atb += row * j.value;
    }
    let c = ata.lu().solve(&atb).ok_or_else(|| Error::Solver("degenerate loop for trace fit".into()))?;
    let a = AffineTrace::new(c[0], c[1], c[2]);
    let c1 = f.third_derivatives_exact();
    let dev = samples.iter().fold(0.0f64, |m, (x, j)| {
        let dv = (j.value - a.eval(x)).abs();
        let dg = if c1 { (j.gradient - a.gradient()).norm() * mesh.h } else { 0.0 };
        m.max(dv).max(dg)
    });
    Ok((a, dev))
}

/// `psi(|x - c|) * (a0 + a1 (x1 - c1) + a2 (x2 - c2))` with `psi = 1` inside
/// `r_inner` and `0` outside `r_outer`, joined by a degree-nine smoothstep.
#[derive(Debug, Clone, Copy)]
pub struct CutoffAffine {
    pub core: usize,
    pub center: Vec2,
    pub trace: AffineTrace,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl CutoffAffine {
    /// Cutoff around `core` whose transition sits in the middle half of the
    /// gap between the core and the nearest other boundary.
    pub fn around(dom: &PerforatedDomain, core: usize, trace: AffineTrace) -> Result<Self> {
        let c = dom.cores.get(core).ok_or(Error::UnknownLoop(core + 1))?.center_vec();
        let mut gap = dom.outer.distance_to_boundary(&c) - dom.eps;
        for (j, o) in dom.cores.iter().enumerate() {
            if j != core {
                gap = gap.min((o.center_vec() - c).norm() - o.radius - dom.eps);
            }
        }
        if gap <= 0.0 {
            return Err(Error::InvalidDomain(format!("core {core} has no room for a cutoff")));
        }
        Ok(Self { core, center: c, trace, r_inner: dom.eps + 0.25 * gap, r_outer: dom.eps + 0.75 * gap })
    }

    /// `(psi, psi', psi'')` in the radius.
    fn profile(&self, r: f64) -> (f64, f64, f64) {
        let w = self.r_outer - self.r_inner;
        let s = ((r - self.r_inner) / w).clamp(0.0, 1.0);
        if s <= 0.0 {
            return (1.0, 0.0, 0.0);
        }
        if s >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        // C4 step: its third derivative is continuous, so elementwise
        // quadrature of the pairing converges quickly across the transition
        let (u, v) = (s * s * s, (1.0 - s) * (1.0 - s) * (1.0 - s));
        let step = s * s * u * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + 70.0 * s))));
        let d1 = 630.0 * s * u * (1.0 - s) * v;
        let d2 = 2520.0 * u * v * (1.0 - 2.0 * s);
        (1.0 - step, -d1 / w, -d2 / (w * w))
    }

    pub fn jet(&self, x: &Vec2) -> ScalarJet3 {
        let d = x - self.center;
        let r = d.norm();
        let a = self.trace.a0 + self.trace.a1 * d.x + self.trace.a2 * d.y;
        let ga = self.trace.gradient();
        let (p, p1, p2) = self.profile(r);
        if p1 == 0.0 && p2 == 0.0 {
            return p * ScalarJet3 { value: a, gradient: ga, ..ScalarJet3::ZERO };
        }
        let e = d / r;
        let gp = p1 * e;
        let t = p1 / r;
        let hp = SymTensor2::new(
            p2 * e.x * e.x + t * (1.0 - e.x * e.x),
            (p2 - t) * e.x * e.y,
            p2 * e.y * e.y + t * (1.0 - e.y * e.y),
        );
        let cross = SymTensor2::new(2.0 * gp.x * ga.x, gp.x * ga.y + gp.y * ga.x, 2.0 * gp.y * ga.y);
        ScalarJet3 {
            value: p * a,
            gradient: p * ga + a * gp,
            hessian: a * hp + cross,
            grad_laplacian: Vec2::new(f64::NAN, f64::NAN),
        }
    }
}

impl AdmissibleTest for CutoffAffine {
    fn jet_in(&self, _t: usize, x: &Vec2) -> ScalarJet3 {
        self.jet(x)
    }

    fn core_traces(&self, dom: &PerforatedDomain) -> Result<Vec<AffineTrace>> {
        let mut out = vec![AffineTrace::default(); dom.num_cores()];
        *out.get_mut(self.core).ok_or(Error::UnknownLoop(self.core + 1))? = self.trace;
        Ok(out)
    }

    fn support(&self, mesh: &Mesh) -> Option<Vec<usize>> {
        Some(
            (0..mesh.num_triangles())
                .filter(|&t| {
                    let p = mesh.triangle_points(t);
                    let d = p.map(|q| (q - self.center).norm());
                    let diam = (0..3).map(|k| (p[(k + 1) % 3] - p[k]).norm()).fold(0.0, f64::max);
                    let (lo, hi) = (d[0].min(d[1]).min(d[2]), d[0].max(d[1]).max(d[2]));
                    hi > self.r_inner && lo - diam < self.r_outer
                })
                .collect(),
        )
    }
}

/// `(1 + nu)/E int (hess v : hess phi - nu lap v lap phi)` over the given
/// triangles.
fn energy_pairing(v: &DiscreteField, phi: &dyn AdmissibleTest, mat: &MaterialParams, tris: &[usize], degree: usize) -> f64 {
    let rule = TriangleRule::for_degree(degree);
    let mesh = &v.space().mesh;
    let form = Form::energy(mat);
    let mut scratch = Vec::new();
    let mut acc = 0.0;
    for &t in tris {
        for (x, w) in rule.map(&mesh.triangle_points(t)) {
            let hv = v.jet_with(t, &x, &mut scratch).hessian;
            let hp = phi.jet_in(t, &x).hessian;
            acc += w * (form.hessian * hv.ddot(&hp) + form.laplacian * hv.trace() * hp.trace());
        }
    }
    acc
}

/// Right-hand side of the weak Euler-Lagrange equation,
/// `(1+nu)/E int (hess v : hess phi - nu lap v lap phi)
///  + sum_i (<grad a^i, Pi b^i> + s^i a^i(center_i))`,
/// with `a^i` the affine trace of `phi` on core `i`. Zero at the minimizer.
pub fn weak_el_residual(sol: &EquilibriumSolution, phi: &dyn AdmissibleTest) -> Result<f64> {
    let traces = phi.core_traces(&sol.domain)?;
    let mesh = &sol.field.space().mesh;
    let tris = phi.support(mesh).unwrap_or_else(|| (0..mesh.num_triangles()).collect());
    let degree = 2 * sol.field.space().kind.degree() + 14;
    let mut r = energy_pairing(&sol.field, phi, &sol.mat, &tris, degree);
    for (a, d) in traces.iter().zip(&sol.domain.defects) {
        r += a.gradient().dot(&rotate_quarter_cw(&d.burgers_vec())) + d.frank * a.a0;
    }
    Ok(r)
}

/// Charges seen by the solution around one core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreCharges {
    pub frank: f64,
    pub burgers: [f64; 2],
}

/// Frank angle and Burgers vector of core `i` recovered from the solution
/// alone: the weak equation tested with a cutoff times `1`, `x1 - c1` and
/// `x2 - c2` isolates `s`, `b2` and `-b1`.
pub fn recover_core_charges(sol: &EquilibriumSolution, core: usize) -> Result<CoreCharges> {
    let mesh = &sol.field.space().mesh;
    let degree = 2 * sol.field.space().kind.degree() + 14;
    let pairing = |r: usize| -> Result<f64> {
        let phi = CutoffAffine::around(&sol.domain, core, AffineTrace::mode(r, &Vec2::zeros()))?;
        let tris = phi.support(mesh).expect("cutoff has bounded support");
        Ok(energy_pairing(&sol.field, &phi, &sol.mat, &tris, degree))
    };
    let (p0, p1, p2) = (pairing(0)?, pairing(1)?, pairing(2)?);
    Ok(CoreCharges { frank: -p0, burgers: [p2, -p1] })
}

/// Cross-check of the reduced route: the Schur complement of the full
/// energy-form stiffness on the affine boundary modes, computed by a
/// stiffness sandwich of the energy-form cell solutions, and the resulting
/// minimizer. Returns `(A, min_energy)`.
pub fn direct_minimization(space: Arc<FeSpace>, dom: &PerforatedDomain, mat: &MaterialParams) -> Result<(Vec<f64>, f64)> {
    let form = Form::energy(mat);
    let system = ConstrainedSystem::clamped(space.clone(), form)?;
    let cells = solve_cell_basis(&system, dom)?;
    let k = assemble(&space, form)?;
    let ku: Vec<Vec<f64>> = cells.iter().map(|c| k.apply(c.coeffs())).collect();
    let n = cells.len();
    let s = DMatrix::<f64>::from_fn(n, n, |a, b| ku[a].iter().zip(cells[b].coeffs()).map(|(x, y)| x * y).sum());
    let s = 0.5 * (&s + s.transpose());
    let phi = DVector::from_vec(build_forcing(&dom.defects).phi);
    let chol = s.cholesky().ok_or_else(|| Error::Solver("direct Schur complement is not positive definite".into()))?;
    let a = -chol.solve(&phi);
    let energy = 0.5 * a.dot(&phi);
    Ok((a.iter().copied().collect(), energy))
}
