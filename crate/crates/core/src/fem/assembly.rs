use nalgebra::DMatrix;
use rayon::prelude::*;

use super::element::{monomial_derivatives, monomial_exponents, NDER};
use super::space::FeSpace;
use crate::elasticity::{MaterialParams, Vec2};
use crate::error::Result;
use crate::quadrature::TriangleRule;

/// Symmetric bilinear form `hessian * int H:H' + laplacian * int lap lap'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Form {
    pub hessian: f64,
    pub laplacian: f64,
}

impl Form {
    /// `int H(u) : H(w)`.
    pub const HESSIAN: Form = Form { hessian: 1.0, laplacian: 0.0 };

    /// Complementary-energy form: `(1 + nu) / E * int (H:H' - nu lap lap')`.
    /// Half its diagonal is the stored energy of an Airy potential.
    pub fn energy(mat: &MaterialParams) -> Form {
        let c = (1.0 + mat.poisson_ratio) / mat.young_modulus;
        Form { hessian: c, laplacian: -c * mat.poisson_ratio }
    }
}

/// Element stiffness in the local dof ordering of [`FeSpace::element_dofs`].
pub fn element_matrix(space: &FeSpace, t: usize, form: Form) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let basis = space.element_basis(t)?;
    let (ids, _) = space.element_dofs(t);
    let exps = monomial_exponents(space.kind.degree());
    let nm = exps.len();
    let rule = TriangleRule::for_degree(2 * (space.kind.degree() - 2));
    let pts = space.mesh.triangle_points(t);
    let mut gram = DMatrix::<f64>::zeros(nm, nm);
    let mut d = Vec::new();
    for (x, w) in rule.map(&pts) {
        monomial_derivatives(&exps, &basis.center, basis.scale, &x, &mut d);
        for i in 0..nm {
            let (a11, a12, a22) = (d[i * NDER + 3], d[i * NDER + 4], d[i * NDER + 5]);
            if a11 == 0.0 && a12 == 0.0 && a22 == 0.0 {
                continue;
            }
            for j in 0..=i {
                let (b11, b12, b22) = (d[j * NDER + 3], d[j * NDER + 4], d[j * NDER + 5]);
                let hh = a11 * b11 + 2.0 * a12 * b12 + a22 * b22;
                let ll = (a11 + a22) * (b11 + b22);
                gram[(i, j)] += w * (form.hessian * hh + form.laplacian * ll);
            }
        }
    }
    gram.fill_upper_triangle_with_lower_triangle();
    let k = basis.coef.transpose() * &gram * &basis.coef;
    Ok((ids, k))
}

/// `int f phi_k` for every dof.
pub fn load_vector(space: &FeSpace, f: &(dyn Fn(&Vec2) -> f64 + Sync)) -> Result<Vec<f64>> {
    let exps = monomial_exponents(space.kind.degree());
    let rule = TriangleRule::for_degree(2 * space.kind.degree() + 4);
    let parts: Vec<(Vec<usize>, Vec<f64>)> = (0..space.mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let basis = space.element_basis(t)?;
            let (ids, _) = space.element_dofs(t);
            let mut mom = vec![0.0; exps.len()];
            let mut d = Vec::new();
            for (x, w) in rule.map(&space.mesh.triangle_points(t)) {
                let fx = f(&x) * w;
                monomial_derivatives(&exps, &basis.center, basis.scale, &x, &mut d);
                for (m, v) in mom.iter_mut().enumerate() {
                    *v += fx * d[m * NDER];
                }
            }
            let local = (0..ids.len()).map(|k| (0..exps.len()).map(|m| basis.coef[(m, k)] * mom[m]).sum()).collect();
            Ok((ids, local))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; space.num_dofs()];
    for (ids, vals) in parts {
        for (i, v) in ids.into_iter().zip(vals) {
            out[i] += v;
        }
    }
    Ok(out)
}

/// Lower triangle of a symmetric sparse matrix in compressed columns.
#[derive(Debug, Clone)]
pub struct LowerCsc {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl LowerCsc {
    /// Pattern over the dofs with `index[d] != NONE`, coupled through shared
    /// elements.
    pub(crate) fn pattern(space: &FeSpace, index: &[usize]) -> Self {
        let n = index.iter().filter(|&&i| i != NONE).count();
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut scratch = Vec::new();
        for (d, &i) in index.iter().enumerate() {
            if i == NONE {
                continue;
            }
            scratch.clear();
            for t in space.dof_support(d) {
                let (ids, _) = space.element_dofs(t);
                scratch.extend(ids.into_iter().map(|g| index[g]).filter(|&j| j != NONE && j >= i));
            }
            scratch.sort_unstable();
            scratch.dedup();
            cols[i] = scratch.clone();
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        for c in cols {
            row_idx.extend(c);
            col_ptr.push(row_idx.len());
        }
        let values = vec![0.0; row_idx.len()];
        Self { n, col_ptr, row_idx, values }
    }

    pub(crate) fn add(&mut self, row: usize, col: usize, v: f64) {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        let seg = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
        let k = seg.binary_search(&r).expect("entry outside sparsity pattern");
        self.values[self.col_ptr[c] + k] += v;
    }

    /// `y = A x` using the symmetric completion.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                let v = self.values[k];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

pub(crate) const NONE: usize = usize::MAX;

/// Element matrices computed in parallel batches and handed to `sink` in
/// element order.
pub(crate) fn for_each_element_matrix(
    space: &FeSpace,
    form: Form,
    mut sink: impl FnMut(&[usize], &DMatrix<f64>),
) -> Result<()> {
    const BATCH: usize = 2048;
    let nt = space.mesh.num_triangles();
    let mut start = 0;
    while start < nt {
        let end = (start + BATCH).min(nt);
        let mats: Vec<_> = (start..end)
            .into_par_iter()
            .map(|t| element_matrix(space, t, form))
            .collect::<Result<_>>()?;
        for (ids, k) in &mats {
            sink(ids, k);
        }
        start = end;
    }
    Ok(())
}

/// Global matrix of `form` over all dofs.
pub fn assemble(space: &FeSpace, form: Form) -> Result<LowerCsc> {
    let index: Vec<usize> = (0..space.num_dofs()).collect();
    let mut a = LowerCsc::pattern(space, &index);
    for_each_element_matrix(space, form, |ids, k| {
        for (i, &gi) in ids.iter().enumerate() {
            for (j, &gj) in ids.iter().enumerate() {
                if gi >= gj {
                    a.add(gi, gj, k[(i, j)]);
                }
            }
        }
    })?;
    Ok(a)
}
