//! Shared oracles for the integration suites.  These recompute expected
//! values through routes independent of the code paths they certify.

use num_complex::Complex64;
use qsl2r::modgen::{build_principal_q, Sign, TruncatedModule};
use qsl2r::scalars::{qpow, DeformationPoint};

/// Unitarity-recursion oracle for the discrete-series weights.
///
/// The half-line window of the principal module at the reducible parameter
/// `lambda = sigma qt^n` carries a unique invariant inner product once the
/// lowest K-type weight is normalized to the principal value
/// `2/(qt^(n+1) + qt^(-n-1))`.  The remaining weights are forced by the
/// adjointness of the generator matrices: requiring the weight-adjoint of X
/// to coincide with the solved X* at each band entry gives the recursion
///
///   w(m+2) = w(m) * X*[m, m+2] / conj(X[m+2, m]).
///
/// The closed product formula of the production code never enters.
pub fn discrete_weight_oracle(qt: f64, n: u32, sigma: Sign, m_max: i64) -> Vec<(i64, f64)> {
    let base = DeformationPoint::new(qt, 1.0).expect("valid base");
    let lambda = Complex64::from(sigma.as_f64() * qpow(qt, n as i64));
    let parity = qsl2r::modgen::Parity::of_discrete_order(n);
    let module =
        build_principal_q(base, parity, lambda, m_max + 2).expect("reducible principal module");

    let mut out = Vec::new();
    for sign in [1i64, -1] {
        let first = sign * (n as i64 + 1);
        let mut w = 2.0 / (qpow(qt, n as i64 + 1) + qpow(qt, -(n as i64) - 1));
        out.push((first, w));
        let mut k = first;
        loop {
            let next = k + 2 * sign;
            if next.abs() > m_max {
                break;
            }
            w *= weight_ratio(&module, k, next);
            out.push((next, w));
            k = next;
        }
    }
    out.sort_by_key(|e| e.0);
    out
}

/// The ratio w(to)/w(from) forced by D^-1 X^H D = X* at the (from, to) band
/// entry of the module's generator matrices.
fn weight_ratio(module: &TruncatedModule, from: i64, to: i64) -> f64 {
    let pf = module.pos(from).expect("window covers from");
    let pt = module.pos(to).expect("window covers to");
    let x_entry = module.x()[(pt, pf)];
    let xs_entry = module.x_star()[(pf, pt)];
    assert!(
        x_entry.norm() > 1e-300,
        "ladder entry vanished between {from} and {to}; recursion undefined"
    );
    let ratio = xs_entry / x_entry.conj();
    assert!(
        ratio.im.abs() <= 1e-12 * (1.0 + ratio.re.abs()),
        "weight ratio must be real, got {ratio}"
    );
    ratio.re
}
