//! Verification of defining relations and unitarity for truncated modules,
//! restricted to the truncation interior.
//!
//! Residuals are max-absolute-entry over the interior mask, which localizes
//! a failure to a (row, col) pair of K-types.  Relations that multiply by
//! theta are evaluated entrywise with cancellation-free q-integer gaps:
//! `[n]_qt` reaches 1e18 at the edge of an N = 60 window with qt = 2, and a
//! naive product would leave O(100) of rounding noise where the identity
//! holds exactly.

use num_complex::Complex64;

use crate::linalg::{ceye, max_abs_on, weighted_adjoint, CMat};
use crate::modgen::{Family, TruncatedModule, INTERIOR_MARGIN};
use crate::scalars::{qint2, qint_gap, qint_weighted_gap};
use crate::{Error, Result};

/// Default tolerance for the q-deformed relation suite.
pub const TOL_Q_RELATIONS: f64 = 1e-10;
/// Default tolerance for the limit-algebra relation suites.
pub const TOL_LIMIT_RELATIONS: f64 = 1e-12;
/// Default tolerance for unitarity.
pub const TOL_UNITARITY: f64 = 1e-10;

/// Residual of one relation over the truncation interior.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub relation: String,
    pub max_abs_residual: f64,
    /// (row K-type, col K-type) of the worst entry.
    pub worst_entry: (i64, i64),
    pub interior_size: usize,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_residual < tol
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{},{},{}",
            self.relation, self.max_abs_residual, self.worst_entry.0, self.worst_entry.1,
            self.interior_size
        )
    }
}

fn report(m: &TruncatedModule, relation: &str, residual: &CMat) -> ResidualReport {
    let interior = m.interior(INTERIOR_MARGIN);
    let ((r, c), worst) = max_abs_on(residual, &interior, &interior);
    ResidualReport {
        relation: relation.to_string(),
        max_abs_residual: worst,
        worst_entry: (m.window()[r], m.window()[c]),
        interior_size: interior.len(),
    }
}

/// `q A theta - q^-1 theta A` evaluated entrywise through stable q-integer
/// gaps, for theta diagonal with `[n]_qt` eigenvalues along `window`.
pub(crate) fn theta_bracket_weighted_on(window: &[i64], a: &CMat, qt: f64) -> CMat {
    let dim = window.len();
    let mut out = crate::linalg::czero(dim, dim);
    for (r, &kr) in window.iter().enumerate() {
        for (c, &kc) in window.iter().enumerate() {
            let v = a[(r, c)];
            if v != Complex64::ZERO {
                out[(r, c)] = v * qint_weighted_gap(kc, kr, qt);
            }
        }
    }
    out
}

/// `A theta - theta A` through stable gaps.
pub(crate) fn theta_bracket_on(window: &[i64], a: &CMat, qt: f64) -> CMat {
    let dim = window.len();
    let mut out = crate::linalg::czero(dim, dim);
    for (r, &kr) in window.iter().enumerate() {
        for (c, &kc) in window.iter().enumerate() {
            let v = a[(r, c)];
            if v != Complex64::ZERO {
                out[(r, c)] = v * qint_gap(kc, kr, qt);
            }
        }
    }
    out
}

fn theta_bracket_weighted(m: &TruncatedModule, a: &CMat, qt: f64) -> CMat {
    theta_bracket_weighted_on(m.window(), a, qt)
}

fn theta_bracket(m: &TruncatedModule, a: &CMat, qt: f64) -> CMat {
    theta_bracket_on(m.window(), a, qt)
}

/// Checks the six defining relations of the q-deformed enveloping algebra on
/// a principal or discrete q-module; one report per relation.
pub fn check_relations_uq(m: &TruncatedModule, _tol: f64) -> Result<Vec<ResidualReport>> {
    match m.family() {
        Family::PrincipalQ | Family::DiscreteQ => {}
        other => {
            return Err(Error::FamilyMismatch {
                expected: "principal_q or discrete_q".into(),
                got: other.name().into(),
            })
        }
    }
    let q = m.base().qt();
    let (x, xs, z) = (m.x(), m.x_star(), m.z());
    let q2 = Complex64::from(q * q);
    let eye = ceye(m.dim());

    let reports = vec![
        report(m, "xz_commutation", &(x * z - (z * x) * q2)),
        report(m, "sphere_xxs", &(x * xs + (z * z) * q2 - &eye)),
        report(
            m,
            "sphere_xsx",
            &(xs * x + (z * z) * Complex64::from(1.0 / (q * q)) - &eye),
        ),
        report(
            m,
            "theta_x_bracket",
            &(theta_bracket_weighted(m, x, q) - z * Complex64::from(qint2(q))),
        ),
        report(m, "z_theta_bracket", &(theta_bracket(m, z, q) - (x - xs))),
        report(
            m,
            "z_self_adjoint",
            &(weighted_adjoint(z, m.weights()) - z),
        ),
    ];
    Ok(reports)
}

/// Checks the relation set of the limit algebra matching the family:
/// motion-group, groupoid, or classical sl2 (through the x = H/2, z = iE
/// dictionary at t = 1).
pub fn check_relations_limit(m: &TruncatedModule, _tol: f64) -> Result<Vec<ResidualReport>> {
    let (x, xs, z) = (m.x(), m.x_star(), m.z());
    let eye = ceye(m.dim());
    let two = Complex64::from(2.0);
    let reports = match m.family() {
        Family::Motion => vec![
            report(m, "xz_commute", &(x * z - z * x)),
            report(m, "theta_x_bracket", &(theta_bracket(m, x, 1.0) - z * two)),
            report(m, "theta_z_bracket", &(theta_bracket(m, z, 1.0) - x * two)),
            report(m, "x_skew_adjoint", &(weighted_adjoint(x, m.weights()) + x)),
            report(m, "z_self_adjoint", &(weighted_adjoint(z, m.weights()) - z)),
        ],
        Family::Groupoid => vec![
            report(m, "xz_commute", &(x * z - z * x)),
            report(m, "xxs_commute", &(x * xs - xs * x)),
            report(m, "sphere", &(x * xs + z * z - &eye)),
            report(m, "theta_x_bracket", &(theta_bracket(m, x, 1.0) - z * two)),
            report(m, "z_theta_bracket", &(theta_bracket(m, z, 1.0) - (x - xs))),
            report(m, "z_self_adjoint", &(weighted_adjoint(z, m.weights()) - z)),
        ],
        Family::ClassicalPrincipal => vec![
            // sl2 brackets in dictionary form: x theta - theta x = 2z - theta,
            // z theta - theta z = x - x* = 2x, z x - x z = -z.
            report(
                m,
                "theta_x_bracket",
                &(theta_bracket(m, x, 1.0) - (z * two - m.theta())),
            ),
            report(m, "z_theta_bracket", &(theta_bracket(m, z, 1.0) - (x - xs))),
            report(m, "zx_bracket", &(z * x - x * z + z)),
        ],
        other => {
            return Err(Error::FamilyMismatch {
                expected: "motion, groupoid or classical_principal".into(),
                got: other.name().into(),
            })
        }
    };
    Ok(reports)
}

/// Dispatches to the relation suite matching the module family.
pub fn check_relations(m: &TruncatedModule, tol: f64) -> Result<Vec<ResidualReport>> {
    match m.family() {
        Family::PrincipalQ | Family::DiscreteQ => check_relations_uq(m, tol),
        _ => check_relations_limit(m, tol),
    }
}

/// Verifies that the stored inner-product weights make the module unitary:
/// theta is self-adjoint, Z is self-adjoint, and the weight-adjoint of X is
/// the builder's X*.
pub fn check_unitarity(m: &TruncatedModule, _tol: f64) -> ResidualReport {
    let d = m.weights();
    let r_theta = report(
        m,
        "unitarity",
        &(weighted_adjoint(m.theta(), d) - m.theta()),
    );
    let r_z = report(m, "unitarity", &(weighted_adjoint(m.z(), d) - m.z()));
    // skew families store x* = -x; the adjoint identity is the same equation
    let r_x = report(m, "unitarity", &(weighted_adjoint(m.x(), d) - m.x_star()));
    let mut worst = r_theta;
    for r in [r_z, r_x] {
        if r.max_abs_residual > worst.max_abs_residual {
            worst = r;
        }
    }
    worst
}
