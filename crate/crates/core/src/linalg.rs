//! Small dense linear-algebra kernels: LU determinants (real and complex),
//! a Hessenberg fast path for determinant families det(I − λM), and
//! Gauss-Legendre nodes. Matrices are row-major `Vec<T>` slabs.

use num_complex::Complex64;

/// Determinant of a complex matrix by LU with partial pivoting.
/// The matrix is consumed as scratch. Returns None when a pivot underflows.
pub(crate) fn det_complex(mut a: Vec<Complex64>, n: usize) -> Option<Complex64> {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let v = a[row * n + col].norm_sqr();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
        }
        if !det.is_finite() {
            return None;
        }
    }
    Some(det)
}

/// Determinant of a real matrix by LU with partial pivoting (scratch input).
pub(crate) fn det_real(mut a: Vec<f64>, n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col + 1..n {
                a[row * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Solve A x = b for real A by LU with partial pivoting; A is scratch.
pub(crate) fn solve_real(mut a: Vec<f64>, n: usize, b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col + 1..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in col + 1..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

/// Reduce a complex matrix to upper Hessenberg form by Householder
/// similarity transforms (determinant-preserving).
pub(crate) fn hessenberg_complex(a: &mut [Complex64], n: usize) {
    debug_assert_eq!(a.len(), n * n);
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let mut norm2 = 0.0;
        for row in k + 1..n {
            norm2 += a[row * n + k].norm_sqr();
        }
        if norm2 == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let alpha = if x0.norm_sqr() == 0.0 {
            Complex64::new(-norm2.sqrt(), 0.0)
        } else {
            -x0 / x0.norm() * norm2.sqrt()
        };
        // v = x - alpha e1, normalized
        let mut vnorm2 = 0.0;
        for row in k + 1..n {
            let val = if row == k + 1 {
                a[row * n + k] - alpha
            } else {
                a[row * n + k]
            };
            v[row] = val;
            vnorm2 += val.norm_sqr();
        }
        if vnorm2 < 1e-300 {
            continue;
        }
        let inv = 1.0 / vnorm2.sqrt();
        for item in v.iter_mut().take(n).skip(k + 1) {
            *item *= inv;
        }
        // left update: rows k+1.., all columns >= k
        for col in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for row in k + 1..n {
                s += v[row].conj() * a[row * n + col];
            }
            s *= 2.0;
            for row in k + 1..n {
                a[row * n + col] -= v[row] * s;
            }
        }
        // right update: all rows, columns k+1..
        for row in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for col in k + 1..n {
                s += a[row * n + col] * v[col];
            }
            s *= 2.0;
            for col in k + 1..n {
                a[row * n + col] -= s * v[col].conj();
            }
        }
        // clear the annihilated entries explicitly
        a[(k + 1) * n + k] = alpha;
        for row in k + 2..n {
            a[row * n + k] = Complex64::new(0.0, 0.0);
        }
    }
}

/// det(I − λH) for an upper-Hessenberg H, by Gaussian elimination with
/// row pivoting restricted to the single subdiagonal; O(n²) per λ.
pub(crate) fn det_i_minus_lambda_hessenberg(
    h: &[Complex64],
    n: usize,
    lambda: Complex64,
    scratch: &mut Vec<Complex64>,
) -> Complex64 {
    scratch.clear();
    scratch.resize(n * n, Complex64::new(0.0, 0.0));
    for row in 0..n {
        let lo = row.saturating_sub(1);
        for col in lo..n {
            let mut v = -lambda * h[row * n + col];
            if row == col {
                v += 1.0;
            }
            scratch[row * n + col] = v;
        }
    }
    let a = scratch;
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        if col + 1 < n && a[(col + 1) * n + col].norm_sqr() > a[col * n + col].norm_sqr() {
            piv = col + 1;
        }
        if piv != col {
            for k in col..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        if d.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        det *= d;
        if col + 1 < n {
            let f = a[(col + 1) * n + col] / d;
            if f.norm_sqr() != 0.0 {
                for k in col + 1..n {
                    let v = a[col * n + k];
                    a[(col + 1) * n + k] -= f * v;
                }
            }
        }
    }
    det
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence from the Chebyshev initial guess.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
