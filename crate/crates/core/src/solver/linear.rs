//! Sparse direct solves through faer's LU with partial pivoting.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Conj, Mat};

use crate::error::{Error, Result};
use crate::fem::CsrMatrix;

/// Sparse LU solver that reuses its symbolic analysis while the pattern is
/// unchanged.
/// Pattern (row pointers, column indices) with its symbolic analysis.
type Analysis = (Vec<usize>, Vec<usize>, SymbolicSparseColMat<usize>, SymbolicLu<usize>);

#[derive(Default)]
pub struct SparseLu {
    cached: Option<Analysis>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("analysed", &self.cached.is_some()).finish()
    }
}

impl SparseLu {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves `A x = b`.
    ///
    /// The CSR arrays of `A` are the CSC arrays of `Aᵀ`; `Aᵀ` is factored and
    /// the transposed solve is applied.
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.dim();
        if b.len() != n {
            return Err(Error::LinearSolve(format!("rhs has length {}, matrix is {n}x{n}", b.len())));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        if let Some(k) = a.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::LinearSolve(format!("non-finite matrix entry at position {k}")));
        }
        let stale = self
            .cached
            .as_ref()
            .is_none_or(|(rp, ci, _, _)| rp != a.row_ptr() || ci != a.col_idx());
        if stale {
            let sym = SymbolicSparseColMat::new_checked(n, n, a.row_ptr().to_vec(), None, a.col_idx().to_vec());
            let lu = SymbolicLu::try_new(sym.as_ref()).map_err(|e| Error::LinearSolve(format!("symbolic analysis failed: {e:?}")))?;
            self.cached = Some((a.row_ptr().to_vec(), a.col_idx().to_vec(), sym, lu));
        }
        let (_, _, sym, symbolic) = self.cached.as_ref().expect("analysed above");
        let at = SparseColMatRef::new(sym.as_ref(), &a.values);
        let lu = Lu::try_new_with_symbolic(symbolic.clone(), at)
            .map_err(|e| Error::LinearSolve(format!("numeric factorization failed: {e:?}")))?;
        let mut rhs = Mat::<f64>::zeros(n, 1);
        for (i, v) in b.iter().enumerate() {
            rhs[(i, 0)] = *v;
        }
        lu.solve_transpose_in_place_with_conj(Conj::No, rhs.as_mut());
        let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::LinearSolve(format!(
                "solution is not finite at equation {i} (zero pivot or singular tangent)"
            )));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_unsymmetric_system() {
        let a = CsrMatrix::from_triplets(
            3,
            &[
                (0, 0, 4.0),
                (0, 1, 1.0),
                (1, 0, 2.0),
                (1, 1, 3.0),
                (1, 2, -1.0),
                (2, 1, 0.5),
                (2, 2, 2.0),
            ],
        );
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let mut lu = SparseLu::new();
        for _ in 0..2 {
            let x = lu.solve(&a, &b).unwrap();
            for (u, v) in x.iter().zip(x_true) {
                assert!((u - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_matrix_is_an_error() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(SparseLu::new().solve(&a, &[1.0, 2.0]).is_err());
    }
}
