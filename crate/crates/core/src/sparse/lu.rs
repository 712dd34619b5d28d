use std::sync::{Arc, Once};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Mat;

use super::{SolveError, SparseMatrix};

/// Residual bound every solve must meet: `‖Ax − b‖∞ ≤ RESIDUAL_TOL (1 + ‖b‖∞)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Beyond this bound (after one refinement step) a solve is an error.
pub const RESIDUAL_HARD_LIMIT: f64 = 1e-6;

static SEQUENTIAL: Once = Once::new();

fn force_sequential() {
    // bit-reproducible factorizations
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Reusable symbolic analysis (fill-reducing ordering and elimination
/// structure) of one sparsity pattern.
#[derive(Clone, Debug)]
pub struct LuPattern {
    symbolic: SymbolicLu<usize>,
    row_ptr: Arc<Vec<usize>>,
    col_idx: Arc<Vec<usize>>,
}

impl LuPattern {
    pub fn analyze(a: &SparseMatrix) -> Result<Self, SolveError> {
        force_sequential();
        if a.nrows() != a.ncols() {
            return Err(SolveError::Shape {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        // The CSR arrays of A are the CSC arrays of Aᵀ; we factorize Aᵀ and use
        // transposed solves.
        let sym = SymbolicSparseColMatRef::new_checked(a.ncols(), a.nrows(), a.row_ptr(), None, a.col_idx());
        let symbolic = SymbolicLu::try_new(sym).map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
        Ok(Self {
            symbolic,
            row_ptr: Arc::new(a.row_ptr().to_vec()),
            col_idx: Arc::new(a.col_idx().to_vec()),
        })
    }

    pub fn matches(&self, a: &SparseMatrix) -> bool {
        a.row_ptr() == self.row_ptr.as_slice() && a.col_idx() == self.col_idx.as_slice()
    }
}

/// Direct sparse LU factorization with a residual-checked solve.
pub struct SparseLu {
    matrix: SparseMatrix,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl SparseLu {
    pub fn factorize(a: &SparseMatrix) -> Result<Self, SolveError> {
        let pattern = LuPattern::analyze(a)?;
        Self::factorize_with(&pattern, a.clone())
    }

    /// Numeric factorization reusing a symbolic analysis of the same pattern.
    pub fn factorize_with(pattern: &LuPattern, a: SparseMatrix) -> Result<Self, SolveError> {
        force_sequential();
        if !pattern.matches(&a) {
            return Err(SolveError::Factorization(
                "matrix pattern differs from the analyzed pattern".into(),
            ));
        }
        let sym = SymbolicSparseColMatRef::new_checked(a.ncols(), a.nrows(), a.row_ptr(), None, a.col_idx());
        let at = SparseColMatRef::new(sym, a.values());
        let lu = Lu::try_new_with_symbolic(pattern.symbolic.clone(), at).map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => SolveError::Singular(format!(
                "structurally singular at pivot {index}"
            )),
            other => SolveError::Factorization(format!("{other:?}")),
        })?;
        let out = Self { matrix: a, lu };
        out.probe()?;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    fn probe(&self) -> Result<(), SolveError> {
        let b = self.matrix.mul_vec(&vec![1.0; self.dim()]);
        let x = self.solve_raw(&b);
        let r = self.residual_norm(&x, &b);
        if x.iter().all(|v| v.is_finite()) && r <= RESIDUAL_HARD_LIMIT * (1.0 + inf_norm(&b)) {
            Ok(())
        } else {
            Err(SolveError::Singular(format!(
                "numerically singular matrix (probe residual {r:e})"
            )))
        }
    }

    fn solve_raw(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        self.lu.solve_transpose_in_place(rhs.as_mut());
        (0..n).map(|i| rhs[(i, 0)]).collect()
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = b.to_vec();
        self.matrix.mul_vec_add(-1.0, x, &mut r);
        r
    }

    fn residual_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        inf_norm(&self.residual(x, b))
    }

    /// Solves `A x = b`, checks the residual, and applies one step of
    /// iterative refinement when the first solve misses [`RESIDUAL_TOL`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        if b.len() != self.dim() {
            return Err(SolveError::Shape {
                expected: self.dim(),
                found: b.len(),
            });
        }
        let scale = 1.0 + inf_norm(b);
        let mut x = self.solve_raw(b);
        let mut r = self.residual(&x, b);
        if inf_norm(&r) > RESIDUAL_TOL * scale {
            let dx = self.solve_raw(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
            r = self.residual(&x, b);
        }
        let rn = inf_norm(&r);
        if !(rn <= RESIDUAL_HARD_LIMIT * scale) {
            return Err(SolveError::Residual {
                residual: rn,
                bound: RESIDUAL_HARD_LIMIT * scale,
            });
        }
        if rn > RESIDUAL_TOL * scale {
            log::warn!("solve residual {rn:e} above {:e} after refinement", RESIDUAL_TOL * scale);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            x[k] = (b[k] - (k + 1..n).map(|j| a[k][j] * x[j]).sum::<f64>()) / a[k][k];
        }
        x
    }

    #[test]
    fn one_by_one() {
        let lu = SparseLu::factorize(&SparseMatrix::from_triplets(1, 1, &[(0, 0, 2.0)])).unwrap();
        assert_eq!(lu.solve(&[4.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn random_spd_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20;
        let mut g = vec![vec![0.0; n]; n];
        for row in g.iter_mut() {
            for v in row.iter_mut() {
                if rng.gen_bool(0.25) {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| g[k][i] * g[k][j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &trip);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = SparseLu::factorize(&a).unwrap().solve(&b).unwrap();
        let oracle = dense_solve(a.to_dense(), b.clone());
        let mut r = b.clone();
        a.mul_vec_add(-1.0, &x, &mut r);
        assert!(inf_norm(&r) <= 1e-10);
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn nonsymmetric_indefinite_with_zero_diagonal() {
        let a = SparseMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (0, 2, 1.0), (1, 1, 3.0), (1, 0, 2.0), (2, 0, 1.0)]);
        let x = SparseLu::factorize(&a).unwrap().solve(&[2.0, 5.0, 1.0]).unwrap();
        let oracle = dense_solve(a.to_dense(), vec![2.0, 5.0, 1.0]);
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() <= 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(SparseLu::factorize(&a), Err(SolveError::Singular(_))));
        let empty_row = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        assert!(SparseLu::factorize(&empty_row).is_err());
    }

    #[test]
    fn shape_mismatch() {
        let lu = SparseLu::factorize(&SparseMatrix::identity(3)).unwrap();
        assert!(matches!(lu.solve(&[1.0]), Err(SolveError::Shape { expected: 3, found: 1 })));
    }

    #[test]
    fn pattern_reuse_refactorizes_new_values() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let pattern = LuPattern::analyze(&a).unwrap();
        let mut b = a.clone();
        b.values_mut().iter_mut().for_each(|v| *v *= 2.0);
        let x = SparseLu::factorize_with(&pattern, b).unwrap().solve(&[6.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        let other = SparseMatrix::identity(2);
        assert!(SparseLu::factorize_with(&pattern, other).is_err());
    }
}
