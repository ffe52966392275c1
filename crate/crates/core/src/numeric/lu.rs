use super::{DenseMatrix, NumericError};

/// Pivots smaller than this are treated as exact zeros.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// LU factorization with partial pivoting, `P·A = L·U`, packed in place.
#[derive(Debug, Clone)]
pub struct Lu {
    packed: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &DenseMatrix) -> Result<Self, NumericError> {
        if !m.is_square() {
            return Err(NumericError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (pivot_row, pivot) = (k..n)
                .map(|i| (i, a[(i, k)]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty pivot search");
            if pivot.abs() < SINGULAR_PIVOT {
                return Err(NumericError::Singular {
                    column: k,
                    pivot: pivot.abs(),
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(pivot_row, j)];
                    a[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
            }
            for i in k + 1..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        a[(i, j)] -= factor * a[(k, j)];
                    }
                }
            }
        }
        Ok(Self { packed: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.packed[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.packed[(i, j)] * x[j];
            }
            x[i] /= self.packed[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.perm.len();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// Inverse of a square matrix via LU with partial pivoting.
pub fn invert(m: &DenseMatrix) -> Result<DenseMatrix, NumericError> {
    Ok(Lu::factor(m)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grounded() -> DenseMatrix {
        DenseMatrix::from_rows(&[
            [2.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn grounded_laplacian_inverse_multiplies_back() {
        let h = grounded();
        let inv = invert(&h).unwrap();
        let id = DenseMatrix::identity(4);
        assert!(h.matmul(&inv).unwrap().max_abs_diff(&id) <= 1e-10);
        assert!(inv.matmul(&h).unwrap().max_abs_diff(&id) <= 1e-10);
    }

    #[test]
    fn identity_inverts_to_identity() {
        let id = DenseMatrix::identity(4);
        assert_eq!(invert(&id).unwrap(), id);
    }

    #[test]
    fn laplacian_with_zero_row_is_singular() {
        let l = DenseMatrix::from_rows(&[
            [1.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(invert(&l), Err(NumericError::Singular { .. })));
    }

    #[test]
    fn non_square_is_rejected() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(invert(&m), Err(NumericError::NotSquare { .. })));
    }

    #[test]
    fn solve_matches_inverse() {
        let h = grounded();
        let lu = Lu::factor(&h).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = lu.solve(&b);
        let back = h.mul_vec(&x).unwrap();
        for (u, v) in back.iter().zip(b) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
