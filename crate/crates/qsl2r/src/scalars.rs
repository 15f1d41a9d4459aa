//! Scalar arithmetic of the deformation: q-integers, the coefficient eta,
//! and the chart reparametrization used near q = 1.
//!
//! All limits (q -> 1, t -> 0) are taken by explicit branches with analytic
//! closed forms.  Direct evaluation of `(q^n - q^-n)/(q - q^-1)` loses up to
//! half the mantissa once `|q - 1|` drops below ~1e-8, so a short Taylor
//! expansion in `ln q` covers the transition band.

use num_complex::Complex64;

use crate::{Error, Result};

/// Exact-limit switch threshold for `t -> 0` and `q -> 1` branches.
pub const LIMIT_EPS: f64 = 1e-12;
/// Upper edge of the Taylor transition band.
pub const SERIES_BAND: f64 = 1e-8;

/// A base point (q, t) of the two-parameter family.
///
/// `q` is the quantization parameter, `t` the Mackey parameter.  The derived
/// quantity `qt = q^t` is the effective deformation parameter of the fiber
/// and is stored alongside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationPoint {
    q: f64,
    t: f64,
    qt: f64,
}

impl DeformationPoint {
    pub fn new(q: f64, t: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() || !t.is_finite() {
            return Err(Error::Domain(format!("deformation point needs q > 0, got q={q}, t={t}")));
        }
        Ok(Self { q, t, qt: (t * q.ln()).exp() })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The effective deformation parameter `q^t`.
    pub fn qt(&self) -> f64 {
        self.qt
    }

    /// True on the classical line q = 1.
    pub fn is_classical(&self) -> bool {
        self.q == 1.0
    }

    /// True on the contracted line t = 0.
    pub fn is_contracted(&self) -> bool {
        self.t == 0.0
    }
}

/// The q-integer `[n]_q = (q^n - q^-n)/(q - q^-1)`, with `[n]_1 = n`.
pub fn qint(n: i64, q: f64) -> f64 {
    debug_assert!(q > 0.0, "qint needs q > 0");
    let u = q.ln();
    let nf = n as f64;
    let dev = (q - 1.0).abs();
    if dev < LIMIT_EPS {
        nf
    } else if dev < SERIES_BAND {
        // sinh(nu)/sinh(u) expanded to three terms in u^2.
        let u2 = u * u;
        let n2 = nf * nf;
        nf * (1.0 + (n2 - 1.0) * u2 / 6.0 + (n2 - 1.0) * (3.0 * n2 - 7.0) * u2 * u2 / 360.0)
    } else {
        ((nf * u).sinh()) / u.sinh()
    }
}

/// `[2]_q = q + 1/q` without cancellation concerns.
pub fn qint2(q: f64) -> f64 {
    q + 1.0 / q
}

/// The difference `[n]_q - [m]_q` in cancellation-free form for `|n - m| <= 2`.
///
/// `[n]_q` grows like `q^|n|`; at window edges the naive difference of two
/// such values wipes out the result, while the closed forms below stay at
/// full precision.  Falls back to the direct difference off the bands.
pub fn qint_gap(n: i64, m: i64, q: f64) -> f64 {
    match n - m {
        0 => 0.0,
        2 => qpow(q, n - 1) + qpow(q, 1 - n),
        -2 => -(qpow(q, n + 1) + qpow(q, -n - 1)),
        _ => qint(n, q) - qint(m, q),
    }
}

/// The combination `q*[n]_q - q^-1*[m]_q` in cancellation-free form for
/// `|n - m| <= 2`; this is the scalar the bracket `q X theta - q^-1 theta X`
/// applies to a band entry X_{m,n}.
pub fn qint_weighted_gap(n: i64, m: i64, q: f64) -> f64 {
    match m - n {
        0 => qpow(q, n) - qpow(q, -n),
        2 => -qint2(q) * qpow(q, -n - 1),
        -2 => qint2(q) * qpow(q, n - 1),
        _ => q * qint(n, q) - qint(m, q) / q,
    }
}

/// Integer power of a positive real, exact at exponent 0.
pub fn qpow(q: f64, n: i64) -> f64 {
    if n == 0 {
        1.0
    } else {
        (n as f64 * q.ln()).exp()
    }
}

/// The analytic coefficient `eta(q, t) = (q^t - q^-t)/t`, with the limit
/// `eta(q, 0) = 2 ln q`.
pub fn eta(q: f64, t: f64) -> f64 {
    debug_assert!(q > 0.0, "eta needs q > 0");
    let u = q.ln();
    let at = t.abs();
    if at < LIMIT_EPS {
        2.0 * u
    } else if at < SERIES_BAND {
        let tu2 = (t * u) * (t * u);
        2.0 * u * (1.0 + tu2 / 6.0 + tu2 * tu2 / 120.0)
    } else {
        // sinh avoids the cancellation of exp(tu) - exp(-tu) at small tu
        2.0 * (t * u).sinh() / t
    }
}

/// The chart map `lambda -> q^lambda = exp(lambda ln q)` of the principal
/// component near q = 1, defined for purely imaginary `lambda` with
/// `|lambda ln q| < pi`.
pub fn pri_chart(q: f64, lambda: Complex64) -> Result<Complex64> {
    if !(q > 0.0) || q == 1.0 {
        return Err(Error::Domain(format!("pri_chart needs q > 0, q != 1, got q={q}")));
    }
    if lambda.re.abs() > 1e-14 || lambda.im < 0.0 {
        return Err(Error::Domain(format!(
            "pri_chart needs lambda purely imaginary with Im >= 0, got {lambda}"
        )));
    }
    let u = q.ln();
    if (lambda.im * u).abs() >= std::f64::consts::PI {
        return Err(Error::Domain(format!(
            "pri_chart needs |lambda ln q| < pi, got {:.6}",
            (lambda.im * u).abs()
        )));
    }
    Ok((lambda * u).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn qint_small_cases() {
        assert_relative_eq!(qint(2, 2.0), 2.5, max_relative = 1e-15);
        assert_eq!(qint(0, 1.7), 0.0);
        assert_relative_eq!(qint(3, 2.0), 5.25, max_relative = 1e-15);
        assert_eq!(qint(5, 1.0), 5.0);
    }

    #[test]
    fn qint_transition_band_matches_series() {
        // In the band the series and the (noisy) direct formula agree to the
        // cancellation floor.
        for &dev in &[1e-9, 1e-10, 5e-9] {
            let q: f64 = 1.0 + dev;
            let direct = (7.0 * q.ln()).sinh() / q.ln().sinh();
            assert_relative_eq!(qint(7, q), direct, max_relative = 1e-6);
            // and it is smooth against the exact limit
            assert_relative_eq!(qint(7, q), 7.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn eta_cases() {
        assert_relative_eq!(eta(2.0, 0.0), 2.0 * 2.0_f64.ln(), max_relative = 1e-15);
        assert_eq!(eta(1.0, 3.7), 0.0);
        assert_relative_eq!(eta(2.0, 1.0), 1.5, max_relative = 1e-15);
    }

    #[test]
    fn eta_continuous_at_zero() {
        // sampling t = 10^-k against the limit 2 ln q
        let q: f64 = 2.0;
        let lim = 2.0 * q.ln();
        let mut last_err = f64::INFINITY;
        for k in 1..=9 {
            let t = 10f64.powi(-k);
            let err = (eta(q, t) - lim).abs();
            assert!(err < last_err * 1.5 + 1e-13, "eta not settling at t=1e-{k}");
            last_err = err;
        }
        assert!(last_err < 1e-12);
    }

    #[test]
    fn pri_chart_values() {
        let i = Complex64::new(0.0, 1.0);
        let v = pri_chart(std::f64::consts::E, i * std::f64::consts::FRAC_PI_2).unwrap();
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.im, 1.0, epsilon = 1e-15);

        let v = pri_chart(2.0, Complex64::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);

        let v = pri_chart(2.0, i).unwrap();
        assert_relative_eq!(v.re, 2.0_f64.ln().cos(), epsilon = 1e-15);
        assert_relative_eq!(v.im, 2.0_f64.ln().sin(), epsilon = 1e-15);
    }

    #[test]
    fn pri_chart_domain_errors() {
        let i = Complex64::new(0.0, 1.0);
        assert!(pri_chart(1.0, i).is_err());
        assert!(pri_chart(std::f64::consts::E, i * 3.2).is_err());
        assert!(pri_chart(2.0, Complex64::new(0.5, 1.0)).is_err());
        assert!(pri_chart(2.0, -i).is_err());
    }

    #[test]
    fn deformation_point_stores_qt() {
        let p = DeformationPoint::new(2.0, 0.5).unwrap();
        assert_relative_eq!(p.qt(), 2f64.sqrt(), max_relative = 1e-15);
        assert!(DeformationPoint::new(-1.0, 0.0).is_err());
        assert!(DeformationPoint::new(0.0, 1.0).is_err());
    }

    #[test]
    fn gap_forms_match_direct_at_moderate_n() {
        let q = 1.3;
        for n in -10..=10i64 {
            for m in [n - 2, n, n + 2] {
                assert_relative_eq!(
                    qint_gap(n, m, q),
                    qint(n, q) - qint(m, q),
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    qint_weighted_gap(n, m, q),
                    q * qint(n, q) - qint(m, q) / q,
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
            }
        }
    }

    proptest! {
        #[test]
        fn qint_odd_in_n(n in -40i64..40, q in 0.2f64..5.0) {
            let a = qint(-n, q);
            let b = -qint(n, q);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())));
        }

        #[test]
        fn qint_symmetric_in_q_inverse(n in -40i64..40, q in 0.2f64..5.0) {
            let a = qint(n, q);
            let b = qint(n, 1.0 / q);
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }

        #[test]
        fn eta_even_in_t(q in 0.2f64..5.0, t in -3.0f64..3.0) {
            let a = eta(q, t);
            let b = eta(q, -t);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn eta_over_q_minus_one_bounded_near_one(t in -2.0f64..2.0, dev in 1e-6f64..0.5) {
            // eta/(q-1) stays bounded and nonzero on punctured neighborhoods of q = 1.
            for q in [1.0 + dev, 1.0 - dev * 0.4] {
                let r = eta(q, t) / (q - 1.0);
                prop_assert!(r.is_finite());
                prop_assert!(r > 0.1 && r < 10.0, "eta/(q-1) = {r} out of range at q={q}, t={t}");
            }
        }
    }
}
