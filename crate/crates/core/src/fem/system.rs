use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Side};

use super::assembly::{for_each_element_matrix, Form, LowerCsc, NONE};
use super::space::FeSpace;
use crate::error::{Error, Result};

/// Stiffness of a form with a fixed set of constrained dofs eliminated and
/// the free block factored once.
pub struct ConstrainedSystem {
    pub space: Arc<FeSpace>,
    pub form: Form,
    free_index: Vec<usize>,
    free: Vec<usize>,
    matrix: LowerCsc,
    coupling: Vec<(u32, u32, f64)>,
    llt: Llt<usize, f64>,
}

impl std::fmt::Debug for ConstrainedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstrainedSystem")
            .field("free", &self.free.len())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl ConstrainedSystem {
    pub fn new(space: Arc<FeSpace>, form: Form, constrained: &[bool]) -> Result<Self> {
        if constrained.len() != space.num_dofs() {
            return Err(Error::Precondition("constraint mask length does not match dof count".into()));
        }
        let mut free_index = vec![NONE; constrained.len()];
        let mut free = Vec::new();
        for (d, &c) in constrained.iter().enumerate() {
            if !c {
                free_index[d] = free.len();
                free.push(d);
            }
        }
        if free.is_empty() {
            return Err(Error::Precondition("no free degrees of freedom".into()));
        }
        let mut matrix = LowerCsc::pattern(&space, &free_index);
        let mut coupling = Vec::new();
        for_each_element_matrix(&space, form, |ids, k| {
            for (i, &gi) in ids.iter().enumerate() {
                let fi = free_index[gi];
                if fi == NONE {
                    continue;
                }
                for (j, &gj) in ids.iter().enumerate() {
                    let fj = free_index[gj];
                    if fj == NONE {
                        coupling.push((fi as u32, gj as u32, k[(i, j)]));
                    } else if fi >= fj {
                        matrix.add(fi, fj, k[(i, j)]);
                    }
                }
            }
        })?;
        let n = matrix.n;
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &matrix.col_ptr, None, &matrix.row_idx);
        let a = SparseColMatRef::new(sym, &matrix.values);
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solver(format!("stiffness factorization failed: {e:?}")))?;
        Ok(Self { space, form, free_index, free, matrix, coupling, llt })
    }

    /// All boundary dofs constrained, the usual clamped setting.
    pub fn clamped(space: Arc<FeSpace>, form: Form) -> Result<Self> {
        let mask = space.boundary_mask();
        Self::new(space, form, &mask)
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn is_free(&self, dof: usize) -> bool {
        self.free_index[dof] != NONE
    }

    /// Free stiffness block.
    pub fn matrix(&self) -> &LowerCsc {
        &self.matrix
    }

    /// Solves for several data sets at once. Each entry carries the values of
    /// the constrained dofs (other entries ignored) and an optional load over
    /// all dofs. Returns full dof vectors.
    pub fn solve_many(&self, cases: &[(Vec<f64>, Option<Vec<f64>>)]) -> Result<Vec<Vec<f64>>> {
        let n = self.free.len();
        let nd = self.space.num_dofs();
        let mut rhs = Mat::<f64>::zeros(n, cases.len());
        for (c, (fixed, load)) in cases.iter().enumerate() {
            if fixed.len() != nd || load.as_ref().is_some_and(|l| l.len() != nd) {
                return Err(Error::Precondition("data vector length does not match dof count".into()));
            }
            for &(i, g, v) in &self.coupling {
                rhs[(i as usize, c)] -= v * fixed[g as usize];
            }
            if let Some(l) = load {
                for (i, &g) in self.free.iter().enumerate() {
                    rhs[(i, c)] += l[g];
                }
            }
        }
        let x = self.llt.solve(&rhs);
        let mut out = Vec::with_capacity(cases.len());
        for (c, (fixed, _)) in cases.iter().enumerate() {
            let mut u = fixed.clone();
            for (i, &g) in self.free.iter().enumerate() {
                u[g] = x[(i, c)];
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Solver("non-finite solution".into()));
            }
            out.push(u);
        }
        Ok(out)
    }

    pub fn solve(&self, fixed: Vec<f64>, load: Option<Vec<f64>>) -> Result<Vec<f64>> {
        Ok(self.solve_many(&[(fixed, load)])?.pop().expect("one case"))
    }

    /// Relative residual of the free equations for a full dof vector.
    pub fn residual(&self, u: &[f64], load: Option<&[f64]>) -> f64 {
        let uf: Vec<f64> = self.free.iter().map(|&g| u[g]).collect();
        let mut r = self.matrix.apply(&uf);
        for &(i, g, v) in &self.coupling {
            r[i as usize] += v * u[g as usize];
        }
        if let Some(l) = load {
            for (i, &g) in self.free.iter().enumerate() {
                r[i] -= l[g];
            }
        }
        let scale = self.matrix.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) * uf.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
    }
}
