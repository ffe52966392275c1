//! Eigenvalues of small dense real matrices.
//!
//! Pipeline: permutation balancing isolates eigenvalues that can be read off
//! the diagonal, the remaining block is reduced to upper Hessenberg form by
//! stabilized elimination, and the Hessenberg block is driven to quasi-upper
//! triangular form by Francis double-shift QR.

use num_complex::Complex64;

use super::{DenseMatrix, NumericError};

pub const MAX_DIMENSION: usize = 32;
pub const MAX_SWEEPS: usize = 10_000;

/// All eigenvalues of `m`, sorted ascending by real part then imaginary part.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>, NumericError> {
    if !m.is_square() {
        return Err(NumericError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n > MAX_DIMENSION {
        return Err(NumericError::TooLarge {
            dim: n,
            max: MAX_DIMENSION,
        });
    }
    let mut a: Vec<Vec<f64>> = m.to_rows();
    let (low, high) = isolate(&mut a);

    let mut values: Vec<Complex64> = (0..low)
        .chain(high + 1..n)
        .map(|i| Complex64::new(a[i][i], 0.0))
        .collect();

    if low <= high {
        let mut block: Vec<Vec<f64>> = (low..=high).map(|i| a[i][low..=high].to_vec()).collect();
        hessenberg(&mut block);
        values.extend(hqr(&mut block)?);
    }

    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(values)
}

fn swap_rows_cols(a: &mut [Vec<f64>], i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

/// Permutes rows/columns so that `a` is block upper triangular with the
/// active block at `[low, high]`. Returns `(low, high)`; an empty active
/// block is signalled by `low > high`.
fn isolate(a: &mut [Vec<f64>]) -> (usize, usize) {
    let n = a.len();
    let mut high = n - 1;
    let mut low = 0usize;

    // Rows with no off-diagonal entry inside the active columns move down.
    'rows: loop {
        for j in (0..=high).rev() {
            if (0..=high).all(|i| i == j || a[j][i] == 0.0) {
                swap_rows_cols(a, j, high);
                if high == 0 {
                    return (1, 0);
                }
                high -= 1;
                continue 'rows;
            }
        }
        break;
    }

    // Columns with no off-diagonal entry inside the active rows move left.
    'cols: loop {
        for j in low..=high {
            if (low..=high).all(|i| i == j || a[i][j] == 0.0) {
                swap_rows_cols(a, j, low);
                if low == high {
                    return (high + 1, high);
                }
                low += 1;
                continue 'cols;
            }
        }
        break;
    }
    (low, high)
}

/// Reduction to upper Hessenberg form by Gaussian elimination with pivoting.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x = 0.0f64;
        let mut pivot = m;
        for j in m..n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                pivot = j;
            }
        }
        if pivot != m {
            a.swap(pivot, m);
            for row in a.iter_mut() {
                row.swap(pivot, m);
            }
        }
        if x != 0.0 {
            for i in m + 1..n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut() {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut().take(i.saturating_sub(1)) {
            *v = 0.0;
        }
    }
}

fn with_sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>, NumericError> {
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let eps = f64::EPSILON;
    let mut anorm = 0.0;
    for (i, row) in a.iter().enumerate() {
        for v in row.iter().skip(i.saturating_sub(1)) {
            anorm += v.abs();
        }
    }

    let mut sweeps = 0usize;
    let mut shift_acc = 0.0;
    let mut nn = n as isize - 1;

    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            // Locate a negligible subdiagonal element.
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = a[nu][nu];
            if l == nu {
                out.push(Complex64::new(x + shift_acc, 0.0));
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += shift_acc;
                if q >= 0.0 {
                    z = p + with_sign(z, p);
                    let first = x + z;
                    let second = if z != 0.0 { x - w / z } else { first };
                    out.push(Complex64::new(first, 0.0));
                    out.push(Complex64::new(second, 0.0));
                } else {
                    out.push(Complex64::new(x + p, -z));
                    out.push(Complex64::new(x + p, z));
                }
                nn -= 2;
                break;
            }

            if sweeps >= MAX_SWEEPS {
                return Err(NumericError::NoConvergence { sweeps });
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                shift_acc += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }

            // Double QR step on rows l..=nn and columns m..=nn.
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k + 1 != nu { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = with_sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = nu.min(k + 3);
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        let mut pp = x * row[k] + y * row[k + 1];
                        if k + 1 != nu {
                            pp += z * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k + 1] -= pp * q;
                        row[k] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals(v: &[Complex64]) -> Vec<f64> {
        v.iter().map(|c| c.re).collect()
    }

    #[test]
    fn paper_laplacian_spectrum() {
        let l = DenseMatrix::from_rows(&[
            [1.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 1.0],
        ])
        .unwrap();
        let ev = eigenvalues(&l).unwrap();
        let expected = [0.0, 1.0, 1.0, 1.0];
        for (got, want) in ev.iter().zip(expected) {
            assert!((got.re - want).abs() <= 1e-9, "{ev:?}");
            assert!(got.im.abs() <= 1e-9);
        }
    }

    #[test]
    fn diagonal_matrix() {
        let d = DenseMatrix::diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(reals(&eigenvalues(&d).unwrap()), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn identity_spectrum() {
        let ev = eigenvalues(&DenseMatrix::identity(5)).unwrap();
        assert!(ev.iter().all(|c| (c.re - 1.0).abs() < 1e-15 && c.im == 0.0));
    }

    #[test]
    fn rotation_has_complex_pair() {
        let m = DenseMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let ev = eigenvalues(&m).unwrap();
        assert!((ev[0].im + 1.0).abs() < 1e-12);
        assert!((ev[1].im - 1.0).abs() < 1e-12);
        assert!(ev[0].re.abs() < 1e-12);
    }

    #[test]
    fn dense_companion_matrix() {
        // Roots of (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24.
        let m = DenseMatrix::from_rows(&[
            [10.0, -35.0, 50.0, -24.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let ev = eigenvalues(&m).unwrap();
        for (got, want) in ev.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got.re - want).abs() < 1e-8, "{ev:?}");
        }
    }

    #[test]
    fn oversized_input_is_rejected() {
        let m = DenseMatrix::identity(MAX_DIMENSION + 1);
        assert!(matches!(eigenvalues(&m), Err(NumericError::TooLarge { .. })));
    }
}
