//! Sparse Cholesky backend reusing one symbolic analysis across refactorizations.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Side};

use crate::error::{Error, Result};

use super::sparse::CsrMatrix;

/// Symbolic factorization of a fixed symmetric pattern.
pub struct CholeskySolver {
    symbolic: SymbolicLlt<usize>,
    n: usize,
}

/// Numeric factor tied to a [`CholeskySolver`].
pub struct CholeskyFactor {
    llt: Llt<usize, f64>,
    n: usize,
}

impl CholeskySolver {
    pub fn new(pattern: &CsrMatrix) -> Result<Self> {
        let sym = symbolic_view(pattern);
        let symbolic = SymbolicLlt::try_new(sym, Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("symbolic factorization failed: {e:?}")))?;
        Ok(CholeskySolver {
            symbolic,
            n: pattern.n,
        })
    }

    /// Factorizes a matrix with the pattern given at construction.
    pub fn factor(&self, mat: &CsrMatrix) -> Result<CholeskyFactor> {
        if mat.n != self.n {
            return Err(Error::SingularSystem("pattern dimension changed".into()));
        }
        let view = SparseColMatRef::new(symbolic_view(mat), &mat.values);
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), view, Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("matrix is not positive definite: {e:?}")))?;
        Ok(CholeskyFactor { llt, n: mat.n })
    }
}

impl CholeskyFactor {
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.n);
        let m = MatMut::from_column_major_slice_mut(rhs, self.n, 1);
        self.llt.solve_in_place_with_conj(Conj::No, m);
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// A symmetric CSR matrix read as compressed columns.
fn symbolic_view(m: &CsrMatrix) -> SymbolicSparseColMatRef<'_, usize> {
    SymbolicSparseColMatRef::new_checked(m.n, m.n, &m.row_ptr, None, &m.col_idx)
}
