//! Small dense complex-matrix helpers shared by the verification suites.
//!
//! Windows stay below a few hundred K-types, so everything is dense
//! `nalgebra::DMatrix<Complex64>`; band structure is asserted, not exploited.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn czero(n: usize, m: usize) -> CMat {
    CMat::zeros(n, m)
}

pub fn ceye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Maximum absolute entry over a row/column index mask, with its location.
/// Returns ((row, col), value); (0, 0, 0.0) for an empty mask.
pub fn max_abs_on(m: &CMat, rows: &[usize], cols: &[usize]) -> ((usize, usize), f64) {
    let mut best = 0.0;
    let mut at = (0usize, 0usize);
    for &r in rows {
        for &c in cols {
            let v = m[(r, c)].norm();
            if v > best {
                best = v;
                at = (r, c);
            }
        }
    }
    (at, best)
}

/// Maximum absolute entry over the whole matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator norm (largest singular value) of the submatrix selected by the
/// index masks.
pub fn operator_norm_on(m: &CMat, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let mut sub = CMat::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            sub[(i, j)] = m[(r, c)];
        }
    }
    operator_norm(&sub)
}

/// Operator norm (largest singular value).
pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Operator norm of a square matrix acting on the weighted inner-product
/// space with the given diagonal weights: largest singular value of
/// `D^(1/2) A D^(-1/2)`.
pub fn weighted_operator_norm(a: &CMat, weights: &[f64]) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, weights.len());
    let mut scaled = a.clone();
    for r in 0..n {
        for c in 0..n {
            scaled[(r, c)] *= (weights[r] / weights[c]).sqrt();
        }
    }
    operator_norm(&scaled)
}

/// Adjoint with respect to the weighted inner product
/// `<v, w> = sum_k weights[k] conj(v_k) w_k`: returns `D^-1 A^H D`.
///
/// Computed entrywise through weight ratios so that exponentially small
/// boundary weights never leave the ratio form.
pub fn weighted_adjoint(a: &CMat, weights: &[f64]) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "weighted adjoint needs a square matrix");
    assert_eq!(n, weights.len());
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(r, c)] = a[(c, r)].conj() * (weights[c] / weights[r]);
        }
    }
    out
}

/// Least-squares slope of log(y) against log(x); used for convergence-order
/// fits.  Non-positive samples are skipped.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weighted_adjoint_round_trip() {
        let mut a = czero(3, 3);
        a[(0, 1)] = Complex64::new(1.0, 2.0);
        a[(2, 0)] = Complex64::new(-0.5, 0.25);
        let w = [1.0, 4.0, 0.25];
        let b = weighted_adjoint(&weighted_adjoint(&a, &w), &w);
        assert!(max_abs(&(a - b)) < 1e-15);
    }

    #[test]
    fn operator_norm_of_scaled_unit() {
        let mut a = czero(2, 2);
        a[(0, 1)] = Complex64::new(0.0, -3.0);
        assert_relative_eq!(operator_norm(&a), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn loglog_slope_recovers_order() {
        let xs = [1e-1, 1e-2, 1e-3, 1e-4];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert_relative_eq!(loglog_slope(&xs, &ys), 2.0, max_relative = 1e-10);
    }
}
