//! The analytic family of induced modules over the (q, t) plane and its
//! specializations.
//!
//! An analytic spectral parameter is a function lambda(q, t) equal to 1 on
//! the line q = 1.  At every base point the family specializes to one of the
//! four fiber types (q-deformed principal, groupoid, classical principal,
//! motion), and the renormalized ladder operators s_n, s_n^± act on basis
//! vectors by scalars kappa with closed-form boundary values.  Everything is
//! checked pointwise; the function ring itself is never represented.

use num_complex::Complex64;

use crate::algcheck::{theta_bracket_on, theta_bracket_weighted_on};
use crate::linalg::{ceye, max_abs_on, CMat};
use crate::modgen::{
    build_classical_principal, build_groupoid, build_motion, build_principal_q, Family, Parity,
    TKind, TruncatedModule, INTERIOR_MARGIN,
};
use crate::scalars::{eta, qint2, qpow, DeformationPoint};
use crate::{Error, Result};

/// Finite-difference step for the q-derivative at q = 1.
pub const FD_STEP: f64 = 1e-5;
/// Classification threshold: a point with |q - 1| below this sits on the
/// classical line, |t| below it on the contracted line.
pub const BOUNDARY_EPS: f64 = 1e-12;

/// An analytic spectral parameter lambda(q, t), invertible, equal to 1
/// wherever q = 1.  The invariant is asserted on a 17-point grid at
/// construction; an exact q-derivative callable may be supplied to bypass
/// finite differences.
pub struct AnalyticLambda {
    name: String,
    f: Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync>,
    exact_dq: Option<Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync>>,
}

impl AnalyticLambda {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let lam = Self { name: name.into(), f: Box::new(f), exact_dq: None };
        for k in 0..17 {
            let t = -2.0 + 0.25 * k as f64;
            let v = lam.eval(1.0, t);
            if (v - Complex64::ONE).norm() > 1e-14 {
                return Err(Error::Domain(format!(
                    "analytic lambda '{}' must equal 1 on the line q = 1; got {v} at t = {t}",
                    lam.name
                )));
            }
        }
        Ok(lam)
    }

    pub fn with_exact_derivative(
        mut self,
        dq: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.exact_dq = Some(Box::new(dq));
        self
    }

    /// The family `lambda = q^(i mu t)`, unitary for real mu.
    pub fn power_imag(mu: f64) -> Self {
        Self::new(format!("koppa^(i*{mu}*tau)"), move |q: f64, t: f64| {
            (Complex64::new(0.0, mu * t) * q.ln()).exp()
        })
        .expect("power family satisfies the boundary invariant")
    }

    /// The family `lambda = q^(n0 t)`, real positive; reducible fibers.
    pub fn power_real(n0: f64) -> Self {
        Self::new(format!("koppa^({n0}*tau)"), move |q: f64, t: f64| {
            Complex64::from((n0 * t * q.ln()).exp())
        })
        .expect("power family satisfies the boundary invariant")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, q: f64, t: f64) -> Complex64 {
        (self.f)(q, t)
    }

    /// The q-derivative at (q, t): exact if supplied, otherwise a central
    /// difference with one Richardson extrapolation step.
    pub fn d_koppa(&self, q: f64, t: f64) -> Complex64 {
        if let Some(dq) = &self.exact_dq {
            return dq(q, t);
        }
        let diff = |h: f64| (self.eval(q + h, t) - self.eval(q - h, t)) / Complex64::from(2.0 * h);
        let d1 = diff(FD_STEP);
        let d2 = diff(FD_STEP / 2.0);
        (d2 * Complex64::from(4.0) - d1) / Complex64::from(3.0)
    }
}

fn on_classical_line(q: f64) -> bool {
    (q - 1.0).abs() < BOUNDARY_EPS
}

fn on_contracted_line(t: f64) -> bool {
    t.abs() < BOUNDARY_EPS
}

/// The scalars by which the renormalized ladder operators act on the basis
/// vector of K-type n: returns (kappa_n, kappa_plus, kappa_minus).
pub fn kappa(q: f64, t: f64, n: i64, lam: &AnalyticLambda) -> (Complex64, Complex64, Complex64) {
    let two = Complex64::from(2.0);
    match (on_classical_line(q), on_contracted_line(t)) {
        (false, false) => {
            let qt = (t * q.ln()).exp();
            let lv = lam.eval(q, t);
            let li = lv.inv();
            let e = Complex64::from(eta(q, t));
            let kn = (lv + li - qint2(qt)) / e;
            let kp = (lv * qpow(qt, 1 + n) - li * qpow(qt, -1 - n)) / e;
            let km = (lv * qpow(qt, 1 - n) - li * qpow(qt, -1 + n)) / e;
            (kn, kp, km)
        }
        (false, true) => {
            let h = Complex64::from(2.0 * q.ln());
            let lv = lam.eval(q, 0.0);
            let li = lv.inv();
            ((lv + li - two) / h, (lv - li) / h, (lv - li) / h)
        }
        (true, false) => {
            let d = lam.d_koppa(1.0, t);
            let kp = d + Complex64::from(t * (1 + n) as f64);
            let km = d + Complex64::from(t * (1 - n) as f64);
            (Complex64::ZERO, kp, km)
        }
        (true, true) => {
            let d = lam.d_koppa(1.0, 0.0);
            (Complex64::ZERO, d, d)
        }
    }
}

/// Builds the specialization target of the analytic family at (q, t): the
/// module the family degenerates to according to the four-case table.
pub fn specialization_target(
    lam: &AnalyticLambda,
    parity: Parity,
    q: f64,
    t: f64,
    n_bound: i64,
) -> Result<TruncatedModule> {
    match (on_classical_line(q), on_contracted_line(t)) {
        (false, false) => {
            let base = DeformationPoint::new(q, t)?;
            build_principal_q(base, parity, lam.eval(q, t), n_bound)
        }
        (false, true) => build_groupoid(lam.eval(q, 0.0), parity, n_bound),
        (true, false) => {
            let big_lambda = lam.d_koppa(1.0, t) / Complex64::from(t);
            build_classical_principal(big_lambda, parity, n_bound)
        }
        (true, true) => build_motion(lam.d_koppa(1.0, 0.0), parity, n_bound),
    }
}

/// The matrices of the renormalized ladder operators s_n, s_n^+, s_n^-
/// acting on `module`, which must match the fiber type of (q, t).
pub fn s_operator_images(
    q: f64,
    t: f64,
    n: i64,
    module: &TruncatedModule,
) -> Result<(CMat, CMat, CMat)> {
    let expect = |fam: Family| -> Result<()> {
        if module.family() == fam {
            Ok(())
        } else {
            Err(Error::FamilyMismatch {
                expected: fam.name().into(),
                got: module.family().name().into(),
            })
        }
    };
    let dim = module.dim();
    match (on_classical_line(q), on_contracted_line(t)) {
        (false, false) => {
            if module.family() != Family::PrincipalQ && module.family() != Family::DiscreteQ {
                return Err(Error::FamilyMismatch {
                    expected: "principal_q or discrete_q".into(),
                    got: module.family().name().into(),
                });
            }
            if (module.base().q() - q).abs() > 1e-12 || (module.base().t() - t).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "module base ({}, {}) does not match point ({q}, {t})",
                    module.base().q(),
                    module.base().t()
                )));
            }
            let e = Complex64::from(eta(q, t));
            let qt = module.base().qt();
            let s_n = (module.t_op(n, TKind::Diag) - ceye(dim) * Complex64::from(qint2(qt))) / e;
            let s_p = module.t_op(n, TKind::Up) / e;
            let s_m = module.t_op(n, TKind::Down) / e;
            Ok((s_n, s_p, s_m))
        }
        (false, true) => {
            expect(Family::Groupoid)?;
            let h = Complex64::from(2.0 * q.ln());
            let s_n = (module.t_op(n, TKind::Diag) - ceye(dim) * Complex64::from(2.0)) / h;
            Ok((s_n, module.t_op(n, TKind::Up) / h, module.t_op(n, TKind::Down) / h))
        }
        (true, false) => {
            expect(Family::ClassicalPrincipal)?;
            // s^+- = t(H -+ i(E+F) +- (n - theta)); the diagonal correction
            // flips sign with the ladder direction (on the K-type-n vector
            // itself it vanishes either way)
            let shift = ceye(dim) * Complex64::from(n as f64) - module.theta();
            let tc = Complex64::from(t);
            let s_p = (module.t_op(n, TKind::Up) + &shift) * tc;
            let s_m = (module.t_op(n, TKind::Down) - &shift) * tc;
            Ok((crate::linalg::czero(dim, dim), s_p, s_m))
        }
        (true, true) => {
            expect(Family::Motion)?;
            Ok((
                crate::linalg::czero(dim, dim),
                module.t_op(n, TKind::Up),
                module.t_op(n, TKind::Down),
            ))
        }
    }
}

/// The images of the analytic generators (x, x*, z, theta) on `module`
/// through the specialization dictionary of its fiber type.
pub fn xz_images(q: f64, t: f64, module: &TruncatedModule) -> Result<(CMat, CMat, CMat, CMat)> {
    let dim = module.dim();
    let theta = module.theta().clone();
    match module.family() {
        Family::PrincipalQ | Family::DiscreteQ => {
            let e = Complex64::from(eta(q, t));
            Ok((
                (module.x() - ceye(dim)) / e,
                (module.x_star() - ceye(dim)) / e,
                module.z() / e,
                theta,
            ))
        }
        Family::Groupoid => {
            let h = Complex64::from(2.0 * q.ln());
            Ok((
                (module.x() - ceye(dim)) / h,
                (module.x_star() - ceye(dim)) / h,
                module.z() / h,
                theta,
            ))
        }
        Family::ClassicalPrincipal => {
            let tc = Complex64::from(t);
            Ok((module.x() * tc, module.x_star() * tc, module.z() * tc, theta))
        }
        Family::Motion => Ok((
            module.x().clone(),
            module.x_star().clone(),
            module.z().clone(),
            theta,
        )),
    }
}

/// Residuals of the five defining relations of the analytic algebra on the
/// specialized images, max-abs over the interior.
pub fn a_relation_residuals(
    q: f64,
    t: f64,
    module: &TruncatedModule,
) -> Result<Vec<(String, f64)>> {
    let (x, xs, z, _) = xz_images(q, t, module)?;
    let window = module.window();
    let interior = module.interior(INTERIOR_MARGIN);
    let qt = module.base().qt();
    let e = Complex64::from(eta(q, t));
    let tc = Complex64::from(t);
    let q2 = Complex64::from(qt * qt);
    let worst = |m: &CMat| max_abs_on(m, &interior, &interior).1;

    // koppa^tau x theta - koppa^-tau theta x = [2] z - tau theta
    let r1 = theta_bracket_weighted_on(window, &x, qt)
        - (&z * Complex64::from(qint2(qt)) - module.theta() * tc);
    // z theta - theta z = x - x*
    let r2 = theta_bracket_on(window, &z, qt) - (&x - &xs);
    // koppa^tau z x - koppa^-tau x z = -tau z
    let r3 = &z * &x * Complex64::from(qt) - &x * &z * Complex64::from(1.0 / qt) + &z * tc;
    // x x* + koppa^2tau z^2 = x* x + koppa^-2tau z^2
    let zz = &z * &z;
    let r4 = &x * &xs + &zz * q2 - (&xs * &x + &zz / q2);
    // x + x* + eta (x x* + koppa^2tau z^2) = 0
    let r5 = &x + &xs + (&x * &xs + &zz * q2) * e;

    Ok(vec![
        ("x_theta_bracket".into(), worst(&r1)),
        ("z_theta_bracket".into(), worst(&r2)),
        ("zx_twist".into(), worst(&r3)),
        ("sphere_balance".into(), worst(&r4)),
        ("star_constraint".into(), worst(&r5)),
    ])
}

/// Relation tolerance at a base point: the dictionary divides by eta twice,
/// so rounding noise is amplified by eta^-2 near the classical line.
pub fn a_relation_tolerance(q: f64, t: f64) -> f64 {
    if on_classical_line(q) {
        1e-9
    } else {
        let e = eta(q, t);
        (1e-12 / (e * e)).max(1e-9)
    }
}

/// Per-point result of a specialization check.
#[derive(Debug, Clone)]
pub struct SpecializationPoint {
    pub q: f64,
    pub t: f64,
    pub family: Family,
    pub max_kappa_err: f64,
    pub max_relation_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SpecializationReport {
    pub lambda_name: String,
    pub points: Vec<SpecializationPoint>,
}

impl SpecializationReport {
    pub fn pass(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,t,family,max_kappa_err,max_relation_residual,pass\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{}\n",
                p.q,
                p.t,
                p.family.name(),
                p.max_kappa_err,
                p.max_relation_residual,
                p.pass
            ));
        }
        out
    }
}

/// For each grid point, builds the specialization target and checks that the
/// s-operators act on every interior basis vector by the kappa scalars, and
/// that the five analytic relations hold on the specialized images.
pub fn verify_specialization(
    lam: &AnalyticLambda,
    parity: Parity,
    grid: &[(f64, f64)],
    n_bound: i64,
    kappa_tol: f64,
) -> Result<SpecializationReport> {
    let mut points = Vec::new();
    for &(q, t) in grid {
        let module = specialization_target(lam, parity, q, t, n_bound)?;
        let interior = module.interior(INTERIOR_MARGIN);
        let mut kappa_err = 0.0f64;
        for &p in &interior {
            let n = module.window()[p];
            let (s_n, s_p, s_m) = s_operator_images(q, t, n, &module)?;
            let (kn, kp, km) = kappa(q, t, n, lam);
            for (img, scalar, shift) in [(&s_n, kn, 0i64), (&s_p, kp, 2), (&s_m, km, -2)] {
                // the action on the K-type-n vector is the full column n
                for r in 0..module.dim() {
                    let expect =
                        if module.window()[r] == n + shift { scalar } else { Complex64::ZERO };
                    let err = (img[(r, p)] - expect).norm();
                    kappa_err = kappa_err.max(err);
                }
            }
        }
        let relations = a_relation_residuals(q, t, &module)?;
        let max_rel = relations.iter().map(|r| r.1).fold(0.0, f64::max);
        let pass = kappa_err < kappa_tol && max_rel < a_relation_tolerance(q, t);
        points.push(SpecializationPoint {
            q,
            t,
            family: module.family(),
            max_kappa_err: kappa_err,
            max_relation_residual: max_rel,
            pass,
        });
    }
    Ok(SpecializationReport { lambda_name: lam.name().to_string(), points })
}

/// Largest entrywise gap between the s-operator images at two base points
/// with a common window, over the operator indices `ns`; used for measuring
/// convergence toward the boundary rows.
pub fn s_images_max_gap(
    lam: &AnalyticLambda,
    parity: Parity,
    at: (f64, f64),
    target: (f64, f64),
    ns: &[i64],
    n_bound: i64,
) -> Result<f64> {
    let m_at = specialization_target(lam, parity, at.0, at.1, n_bound)?;
    let m_tg = specialization_target(lam, parity, target.0, target.1, n_bound)?;
    if m_at.window() != m_tg.window() {
        return Err(Error::Domain("windows of compared fibers differ".into()));
    }
    let interior = m_at.interior(INTERIOR_MARGIN);
    let mut gap = 0.0f64;
    for &n in ns {
        let a = s_operator_images(at.0, at.1, n, &m_at)?;
        let b = s_operator_images(target.0, target.1, n, &m_tg)?;
        for (ma, mb) in [(&a.0, &b.0), (&a.1, &b.1), (&a.2, &b.2)] {
            let (_, g) = max_abs_on(&(ma - mb), &interior, &interior);
            gap = gap.max(g);
        }
    }
    Ok(gap)
}

/// Checks that the discrete branch of the analytic family (lambda = q^(n0 t))
/// specializes with the correct invariant windows in all four quadrants:
/// half-line submodules away from t = 0, character sums on the boundary.
pub fn verify_discrete_family(n0: u32, q: f64, t: f64, n_bound: i64) -> Result<bool> {
    use crate::modgen::{discrete_window, Sign};
    // finite-difference derivative noise (~1e-10) would smear the exactly
    // reducible boundary fibers; the power family has a closed derivative
    let nf = n0 as f64;
    let lam = AnalyticLambda::power_real(nf).with_exact_derivative(move |q: f64, t: f64| {
        Complex64::from(nf * t * ((nf * t - 1.0) * q.ln()).exp())
    });
    let parity = Parity::of_discrete_order(n0);
    let module = specialization_target(&lam, parity, q, t, n_bound)?;
    let plus = discrete_window(n0, Sign::Plus, n_bound);
    let minus = discrete_window(n0, Sign::Minus, n_bound);
    let ok = if on_contracted_line(t) {
        // boundary fibers split into one-dimensional character blocks
        plus.iter().chain(&minus).all(|&m| module.invariant_closure(m, 1e-12) == vec![m])
    } else {
        module.invariant_closure(n0 as i64 + 1, 1e-12) == plus
            && module.invariant_closure(-(n0 as i64) - 1, 1e-12) == minus
    };
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::loglog_slope;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_boundary_invariant_enforced() {
        assert!(AnalyticLambda::new("bad", |q, _| Complex64::from(q + 1.0)).is_err());
        assert!(AnalyticLambda::new("good", |_, _| Complex64::ONE).is_ok());
    }

    #[test]
    fn finite_difference_derivative_matches_exact() {
        let mu = 1.7;
        let lam = AnalyticLambda::power_imag(mu);
        for t in [-1.0, 0.3, 2.0] {
            // d/dq of q^(i mu t) at q = 1 is i mu t
            let fd = lam.d_koppa(1.0, t);
            let exact = Complex64::new(0.0, mu * t);
            assert!((fd - exact).norm() < 1e-9, "fd = {fd}, exact = {exact}");
        }
    }

    #[test]
    fn kappa_example_at_classical_line() {
        // lambda = koppa^(i tau), q = 1, t = 0.1, n = 2: kappa+ = 0.1i + 0.3
        let lam = AnalyticLambda::power_imag(1.0);
        let (kn, kp, _) = kappa(1.0, 0.1, 2, &lam);
        assert_eq!(kn, Complex64::ZERO);
        assert!((kp - Complex64::new(0.3, 0.1)).norm() < 1e-6);
    }

    #[test]
    fn kappa_vanishes_where_lambda_is_one() {
        let lam = AnalyticLambda::power_imag(2.0);
        let q = 2.0;
        let (kn0, kp0, km0) = kappa(q, 0.0, 4, &lam);
        assert!((kn0.norm() + kp0.norm() + km0.norm()) < 1e-12, "lambda(q,0) = 1 kills kappa");
    }

    #[test]
    fn specialization_families_across_quadrants() {
        let lam = AnalyticLambda::power_imag(1.0);
        let m = specialization_target(&lam, Parity::Even, 2.0, 0.5, 12).unwrap();
        assert_eq!(m.family(), Family::PrincipalQ);
        let m = specialization_target(&lam, Parity::Even, 2.0, 0.0, 12).unwrap();
        assert_eq!(m.family(), Family::Groupoid);
        let m = specialization_target(&lam, Parity::Even, 1.0, 0.5, 12).unwrap();
        assert_eq!(m.family(), Family::ClassicalPrincipal);
        let m = specialization_target(&lam, Parity::Even, 1.0, 0.0, 12).unwrap();
        assert_eq!(m.family(), Family::Motion);
    }

    #[test]
    fn s_image_vanishes_at_motion_point() {
        let lam = AnalyticLambda::power_imag(1.0);
        let m = specialization_target(&lam, Parity::Even, 1.0, 0.0, 10).unwrap();
        let (s_n, _, _) = s_operator_images(1.0, 0.0, 0, &m).unwrap();
        assert_eq!(crate::linalg::max_abs(&s_n), 0.0);
    }

    #[test]
    fn groupoid_diag_scalar_at_contracted_line() {
        // s_n acts by h^-1(lambda + 1/lambda - 2); with lambda(q, 0) = 1 the
        // scalar is 0, and the full column must vanish
        let lam = AnalyticLambda::power_imag(2.5);
        let q = 3.0;
        let m = specialization_target(&lam, Parity::Odd, q, 0.0, 14).unwrap();
        let (s_n, _, _) = s_operator_images(q, 0.0, 3, &m).unwrap();
        let p = m.pos(3).unwrap();
        for r in 0..m.dim() {
            assert!(s_n[(r, p)].norm() < 1e-14);
        }
    }

    #[test]
    fn specialization_report_passes_on_small_grid() {
        let lam = AnalyticLambda::power_imag(1.0);
        let grid = [(2.0, 0.7), (2.0, 0.0), (1.0, 0.7), (1.0, 0.0), (0.5, -0.4)];
        let rep = verify_specialization(&lam, Parity::Even, &grid, 20, 1e-9).unwrap();
        for p in &rep.points {
            assert!(
                p.pass,
                "({}, {}) family {} kappa_err {:.3e} rel {:.3e}",
                p.q,
                p.t,
                p.family.name(),
                p.max_kappa_err,
                p.max_relation_residual
            );
        }
        assert!(rep.to_csv().starts_with("q,t,family,"));
    }

    #[test]
    fn convergence_to_contracted_line_is_first_order() {
        let lam = AnalyticLambda::power_imag(1.0);
        let ts = [1e-1, 1e-2, 1e-3, 1e-4];
        let errs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                s_images_max_gap(&lam, Parity::Even, (2.0, t), (2.0, 0.0), &[0, 2, -4], 16).unwrap()
            })
            .collect();
        let slope = loglog_slope(&ts, &errs);
        assert!((0.9..=1.1).contains(&slope), "slope = {slope}, errs = {errs:?}");
    }

    #[test]
    fn convergence_to_classical_line_is_first_order() {
        let lam = AnalyticLambda::power_imag(1.0);
        let devs = [1e-2, 1e-3, 1e-4, 1e-5];
        let errs: Vec<f64> = devs
            .iter()
            .map(|&d| {
                s_images_max_gap(&lam, Parity::Even, (1.0 + d, 0.8), (1.0, 0.8), &[0, 2, -4], 16)
                    .unwrap()
            })
            .collect();
        let slope = loglog_slope(&devs, &errs);
        assert!((0.9..=1.1).contains(&slope), "slope = {slope}, errs = {errs:?}");
    }

    #[test]
    fn discrete_branch_windows() {
        for (q, t) in [(2.0, 1.0), (2.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.7, -0.5)] {
            assert!(verify_discrete_family(2, q, t, 16).unwrap(), "failed at ({q}, {t})");
            assert!(verify_discrete_family(1, q, t, 16).unwrap(), "failed at ({q}, {t})");
        }
    }

    #[test]
    fn kappa_scalar_consistency_generic_point() {
        // at generic points the boundary table and the direct evaluation glue
        let lam = AnalyticLambda::power_imag(1.5);
        let (q, t): (f64, f64) = (1.7, 0.6);
        let qt: f64 = (t * q.ln()).exp();
        let lv = lam.eval(q, t);
        let (kn, kp, km) = kappa(q, t, 3, &lam);
        let e = eta(q, t);
        assert_relative_eq!((kn * e).re, (lv + lv.inv()).re - qint2(qt), epsilon = 1e-12);
        assert!(((kp * e) - (lv * qpow(qt, 4) - lv.inv() * qpow(qt, -4))).norm() < 1e-12);
        assert!(((km * e) - (lv * qpow(qt, -2) - lv.inv() * qpow(qt, 2))).norm() < 1e-12);
    }
}
