//! Generator sections of the continuous field of C*-algebras over the
//! parameter space, and their numerical certificates: continuity along
//! declared paths, vanishing at infinity on the discrete components, and
//! equivariance under the coordinate projections at t = 0.
//!
//! A generator section is one of the elements `f e_n` with f in
//! {1, T, T+, T-}: at every point of S it acts as a scalar multiple of a
//! weighted rank-one operator between K-type lines, with the scalar given by
//! the ladder coefficients of the fiber.  On the classical line q = 1 the
//! diagonal section degenerates to twice the K-type projection and the
//! shift sections vanish.

use num_complex::Complex64;

use crate::linalg::{czero, max_abs, operator_norm_on, CMat};
use crate::modgen::{weights_discrete, weights_principal, Parity, Sign};
use crate::paramspace::{classify, constraint_blocks, jmap_order, Component, SpectralPoint};
use crate::scalars::{pri_chart, qpow, DeformationPoint};
use crate::{Error, Result};

/// Interior margin for section blocks (same convention as the modules).
pub const MARGIN: i64 = 4;

/// Which generator the section carries on the K-type line n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    /// The K-type projection e_n itself.
    Projection,
    /// T e_n: diagonal ladder.
    Diag,
    /// T+ e_n: shift up by 2.
    Up,
    /// T- e_n: shift down by 2.
    Down,
}

impl SectionKind {
    pub fn shift(self) -> i64 {
        match self {
            SectionKind::Projection | SectionKind::Diag => 0,
            SectionKind::Up => 2,
            SectionKind::Down => -2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SectionKind::Projection => "proj",
            SectionKind::Diag => "t_diag",
            SectionKind::Up => "t_up",
            SectionKind::Down => "t_down",
        }
    }
}

/// A generator section identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionId {
    pub kind: SectionKind,
    pub n: i64,
}

impl SectionId {
    pub fn new(kind: SectionKind, n: i64) -> Self {
        Self { kind, n }
    }

    pub fn name(&self) -> String {
        format!("{}({})", self.kind.name(), self.n)
    }
}

/// The window of K-types of the fiber at `s`, truncated to |k| <= n_bound.
pub fn fiber_window(s: &SpectralPoint, n_bound: i64) -> Vec<i64> {
    classify(s).ktypes.window(n_bound)
}

/// The squared-norm weights of the fiber at `s` along its window.
pub fn fiber_weights(s: &SpectralPoint, n_bound: i64) -> Vec<f64> {
    let qt = s.location.qt();
    match s.component {
        Component::Pri { parity } => weights_principal(qt, parity, n_bound),
        Component::Dis { n, sign, .. } => weights_discrete(qt, n, sign, n_bound),
    }
}

/// The matrix of the weighted rank-one operator sending the K-type-n line to
/// the K-type-m line on the fiber at `s`: zero unless both K-types belong to
/// the fiber.  In the K-type basis this is an elementary matrix; its norm
/// with respect to the fiber weights is |zeta_m| / |zeta_n|.
pub fn rank_one(s: &SpectralPoint, n: i64, m: i64, n_bound: i64) -> CMat {
    let window = fiber_window(s, n_bound);
    let dim = window.len();
    let mut out = czero(dim, dim);
    let kt = classify(s).ktypes;
    if kt.contains(n) && kt.contains(m) {
        if let (Some(col), Some(row)) =
            (window.iter().position(|&k| k == n), window.iter().position(|&k| k == m))
        {
            out[(row, col)] = Complex64::ONE;
        }
    }
    out
}

/// The scalar carried by the section at the point `s`.
pub fn section_scalar(s: &SpectralPoint, id: SectionId) -> Complex64 {
    if s.location.is_classical() {
        // classical fibers: T -> 2 e_n, T^+- -> 0
        return match id.kind {
            SectionKind::Projection => Complex64::ONE,
            SectionKind::Diag => Complex64::from(2.0),
            SectionKind::Up | SectionKind::Down => Complex64::ZERO,
        };
    }
    let lambda = classify(s).lambda;
    let li = lambda.inv();
    if s.location.t() == 0.0 {
        match id.kind {
            SectionKind::Projection => Complex64::ONE,
            SectionKind::Diag => lambda + li,
            SectionKind::Up | SectionKind::Down => lambda - li,
        }
    } else {
        let qe = s.location.qt();
        match id.kind {
            SectionKind::Projection => Complex64::ONE,
            SectionKind::Diag => lambda + li,
            SectionKind::Up => lambda * qpow(qe, 1 + id.n) - li * qpow(qe, -1 - id.n),
            SectionKind::Down => lambda * qpow(qe, 1 - id.n) - li * qpow(qe, -1 + id.n),
        }
    }
}

/// Evaluates the section at any point of S: scalar times rank-one block.
pub fn section_matrix(s: &SpectralPoint, id: SectionId, n_bound: i64) -> CMat {
    rank_one(s, id.n, id.n + id.kind.shift(), n_bound) * section_scalar(s, id)
}

/// Evaluates a ladder section on a q-fiber (q != 1); thin wrapper around
/// [`section_matrix`] with the domain restriction made explicit.
pub fn section_t(s: &SpectralPoint, n: i64, kind: SectionKind, n_bound: i64) -> Result<CMat> {
    if s.location.is_classical() {
        return Err(Error::Domain("ladder sections of the q-fiber need q != 1".into()));
    }
    Ok(section_matrix(s, SectionId::new(kind, n), n_bound))
}

/// A sampled operator field along a declared path.
pub struct SectionSample {
    pub id: SectionId,
    /// (path parameter, point, block, weights), ordered by parameter.
    pub samples: Vec<(f64, SpectralPoint, CMat, Vec<f64>)>,
}

/// Samples a section along a path given as (parameter, point) pairs; all
/// points must lie in a common trivialization chart (same component kind,
/// same parity or order, identical windows).
pub fn sample_section(
    id: SectionId,
    path: &[(f64, SpectralPoint)],
    n_bound: i64,
) -> Result<SectionSample> {
    if path.len() < 2 {
        return Err(Error::ChartViolation("a path needs at least two samples".into()));
    }
    let window0 = fiber_window(&path[0].1, n_bound);
    for (_, p) in path {
        let same = match (&path[0].1.component, &p.component) {
            (Component::Pri { parity: a }, Component::Pri { parity: b }) => a == b,
            (
                Component::Dis { sigma: s1, n: n1, sign: g1 },
                Component::Dis { sigma: s2, n: n2, sign: g2 },
            ) => s1 == s2 && n1 == n2 && g1 == g2,
            _ => false,
        };
        if !same || fiber_window(p, n_bound) != window0 {
            return Err(Error::ChartViolation(
                "path samples leave the common trivialization chart".into(),
            ));
        }
    }
    let samples = path
        .iter()
        .map(|&(u, p)| (u, p, section_matrix(&p, id, n_bound), fiber_weights(&p, n_bound)))
        .collect();
    Ok(SectionSample { id, samples })
}

/// One row of a continuity report.
#[derive(Debug, Clone)]
pub struct ContinuityRow {
    pub param: f64,
    pub norm: f64,
    pub jump: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub section: String,
    pub rows: Vec<ContinuityRow>,
    pub max_jump: f64,
    /// max over segments of jump / parameter step.
    pub fitted_modulus: f64,
}

impl ContinuityReport {
    pub fn to_csv(&self, tol: f64) -> String {
        let mut out = String::from("path_param,norm,jump,pass\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:e},{:e},{}\n", r.param, r.norm, r.jump, r.jump <= tol));
        }
        out
    }
}

/// Conjugates consecutive samples into the trivialization of the first path
/// point (diagonal norm-ratio isometries) and measures the operator-norm
/// jumps between neighbours on the interior.
pub fn certify_continuity(sample: &SectionSample, n_bound: i64) -> Result<ContinuityReport> {
    let (_, p0, _, w0) = &sample.samples[0];
    let window = fiber_window(p0, n_bound);
    let interior: Vec<usize> = window
        .iter()
        .enumerate()
        .filter(|(_, &k)| k.abs() <= n_bound - MARGIN)
        .map(|(i, _)| i)
        .collect();

    let conjugated: Vec<CMat> = sample
        .samples
        .iter()
        .map(|(_, _, block, w)| {
            let mut out = block.clone();
            for r in 0..out.nrows() {
                for c in 0..out.ncols() {
                    // v a v^-1 with v = diag(sqrt(w/w0))
                    out[(r, c)] *= ((w[r] / w0[r]) * (w0[c] / w[c])).sqrt();
                }
            }
            out
        })
        .collect();

    let mut rows = Vec::new();
    let mut max_jump = 0.0f64;
    let mut fitted: f64 = 0.0;
    for k in 0..sample.samples.len() {
        let norm = operator_norm_on(&conjugated[k], &interior, &interior);
        let jump = if k + 1 < sample.samples.len() {
            let j = operator_norm_on(&(&conjugated[k + 1] - &conjugated[k]), &interior, &interior);
            let du = (sample.samples[k + 1].0 - sample.samples[k].0).abs();
            if du > 0.0 {
                fitted = fitted.max(j / du);
            }
            j
        } else {
            0.0
        };
        max_jump = max_jump.max(jump);
        rows.push(ContinuityRow { param: sample.samples[k].0, norm, jump });
    }
    Ok(ContinuityReport { section: sample.id.name(), rows, max_jump, fitted_modulus: fitted })
}

/// The five declared continuity paths of the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardPath {
    /// Even principal arc at fixed (q, t) = (2, 1).
    EvenArc,
    /// Odd principal arc (interior) at (2, 1).
    OddArc,
    /// t crossing 0 at fixed q = 2, lambda = i.
    TCross,
    /// q crossing 1 at fixed t = 1 in the chart coordinate lambda = 0.7i.
    QChart,
    /// t crossing 0 along the discrete component of order (2, +) at q = 2.
    DisTCross,
}

impl StandardPath {
    pub fn all() -> [StandardPath; 5] {
        [Self::EvenArc, Self::OddArc, Self::TCross, Self::QChart, Self::DisTCross]
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::EvenArc => "even-arc",
            Self::OddArc => "odd-arc",
            Self::TCross => "t-cross",
            Self::QChart => "q-chart",
            Self::DisTCross => "dis-t-cross",
        }
    }

    /// A section that varies nontrivially along this path.
    pub fn section(self) -> SectionId {
        match self {
            Self::EvenArc => SectionId::new(SectionKind::Diag, 0),
            Self::OddArc => SectionId::new(SectionKind::Up, 1),
            Self::TCross => SectionId::new(SectionKind::Up, 0),
            Self::QChart => SectionId::new(SectionKind::Up, 0),
            Self::DisTCross => SectionId::new(SectionKind::Up, 3),
        }
    }

    /// Realizes the path at the given resolution (segments + 1 samples).
    pub fn realize(self, segments: usize) -> Result<Vec<(f64, SpectralPoint)>> {
        let segments = segments.max(2);
        let mut path = Vec::with_capacity(segments + 1);
        for j in 0..=segments {
            let u = j as f64 / segments as f64;
            let point = match self {
                Self::EvenArc => {
                    let angle = std::f64::consts::PI * u;
                    SpectralPoint::principal(
                        Parity::Even,
                        DeformationPoint::new(2.0, 1.0)?,
                        Complex64::from_polar(1.0, angle),
                    )?
                }
                Self::OddArc => {
                    let angle = 0.1 + (std::f64::consts::PI - 0.2) * u;
                    SpectralPoint::principal(
                        Parity::Odd,
                        DeformationPoint::new(2.0, 1.0)?,
                        Complex64::from_polar(1.0, angle),
                    )?
                }
                Self::TCross => SpectralPoint::principal(
                    Parity::Even,
                    DeformationPoint::new(2.0, -0.4 + 0.8 * u)?,
                    Complex64::new(0.0, 1.0),
                )?,
                Self::QChart => {
                    // symmetric in ln q around q = 1, fixed chart coordinate
                    let lnq = 0.8f64.ln() * (1.0 - 2.0 * u);
                    let q = lnq.exp();
                    let coord = Complex64::new(0.0, 0.7);
                    let lambda = if (q - 1.0).abs() < 1e-14 {
                        coord
                    } else {
                        pri_chart(q, coord)?
                    };
                    let q = if (q - 1.0).abs() < 1e-14 { 1.0 } else { q };
                    SpectralPoint::principal(
                        Parity::Even,
                        DeformationPoint::new(q, 1.0)?,
                        lambda,
                    )?
                }
                Self::DisTCross => SpectralPoint::discrete(
                    Sign::Plus,
                    2,
                    Sign::Plus,
                    DeformationPoint::new(2.0, -0.4 + 0.8 * u)?,
                )?,
            };
            path.push((u, point));
        }
        Ok(path)
    }
}

/// Max jump of the standard section along the standard path at each
/// resolution; the log-log slope against the step size certifies continuity.
pub fn refinement_slope(which: StandardPath, levels: &[usize], n_bound: i64) -> Result<(f64, Vec<(f64, f64)>)> {
    let id = which.section();
    let mut pts = Vec::new();
    for &segments in levels {
        let path = which.realize(segments)?;
        let sample = sample_section(id, &path, n_bound)?;
        let report = certify_continuity(&sample, n_bound)?;
        pts.push((1.0 / segments as f64, report.max_jump));
    }
    let slope = crate::linalg::loglog_slope(
        &pts.iter().map(|p| p.0).collect::<Vec<_>>(),
        &pts.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    Ok((slope, pts))
}

/// One row of a vanishing report.
#[derive(Debug, Clone)]
pub struct VanishingRow {
    pub section: String,
    pub point: String,
    pub expected_zero: bool,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct VanishingReport {
    pub rows: Vec<VanishingRow>,
}

impl VanishingReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn checked(&self) -> usize {
        self.rows.len()
    }
}

/// Verifies that the section vanishes on exactly the discrete points whose
/// K-type set misses its support, exhaustively over orders up to n_max.
pub fn check_vanishing(id: SectionId, q: f64, t: f64, n_max: u32) -> Result<VanishingReport> {
    let loc = DeformationPoint::new(q, t)?;
    if loc.is_classical() {
        return Err(Error::Domain("vanishing checks live on the q != 1 fibers".into()));
    }
    let n_bound = n_max as i64 + id.n.abs() + 2 * MARGIN;
    let mut rows = Vec::new();
    for sigma in [Sign::Plus, Sign::Minus] {
        for order in 1..=n_max {
            for sign in [Sign::Plus, Sign::Minus] {
                let s = SpectralPoint::discrete(sigma, order, sign, loc)?;
                let kt = classify(&s).ktypes;
                let expected_zero =
                    !kt.contains(id.n) || !kt.contains(id.n + id.kind.shift());
                let value = section_matrix(&s, id, n_bound);
                let is_zero = max_abs(&value) == 0.0;
                rows.push(VanishingRow {
                    section: id.name(),
                    point: format!(
                        "Dis[sigma={:+},n={order},{}]@({q},{t})",
                        sigma.as_f64() as i8,
                        sign.symbol()
                    ),
                    expected_zero,
                    ok: is_zero == expected_zero,
                });
            }
        }
    }
    Ok(VanishingReport { rows })
}

/// One matched pair in an equivariance report.
#[derive(Debug, Clone)]
pub struct JEquivRow {
    pub section: String,
    pub sigma: i8,
    pub order: (u32, char),
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct JEquivReport {
    pub rows: Vec<JEquivRow>,
    pub max_residual: f64,
}

impl JEquivReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

/// Checks the intertwining identity J sigma_source = sigma_target J at t = 0
/// for every matched (continuous, discrete) pair with equal character and
/// parity, over orders 0..=n_max (order 0 targets the constraint blocks of
/// the reducible fiber itself).
pub fn check_j_equivariance(id: SectionId, q: f64, n_max: u32) -> Result<JEquivReport> {
    let loc = DeformationPoint::new(q, 0.0)?;
    if loc.is_classical() {
        return Err(Error::Domain("the projection pairs are formed over q != 1".into()));
    }
    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    for sigma in [Sign::Plus, Sign::Minus] {
        for order in 0..=n_max {
            // windows only need to cover the section support and the lowest
            // K-types of this order
            let n_bound = (id.n.abs() + 2).max(order as i64 + 3) + 2 * MARGIN;
            let parity = Parity::of_discrete_order(order);
            let source =
                SpectralPoint::principal(parity, loc, Complex64::from(sigma.as_f64()))?;
            let sigma_src = section_matrix(&source, id, n_bound);
            let src_window = fiber_window(&source, n_bound);
            for sign in [Sign::Plus, Sign::Minus] {
                let j = jmap_order(order, sign, parity, n_bound)?;
                let sigma_tgt = if order == 0 {
                    // restriction of the source block to the half-line window
                    let tw = &j.target_window;
                    let mut out = czero(tw.len(), tw.len());
                    for (r, &kr) in tw.iter().enumerate() {
                        for (c, &kc) in tw.iter().enumerate() {
                            let rr = src_window.iter().position(|&k| k == kr).unwrap();
                            let cc = src_window.iter().position(|&k| k == kc).unwrap();
                            out[(r, c)] = sigma_src[(rr, cc)];
                        }
                    }
                    out
                } else {
                    let target = SpectralPoint::discrete(sigma, order, sign, loc)?;
                    section_matrix(&target, id, n_bound)
                };
                let residual = max_abs(&(&j.matrix * &sigma_src - sigma_tgt * &j.matrix));
                max_residual = max_residual.max(residual);
                rows.push(JEquivRow {
                    section: id.name(),
                    sigma: sigma.as_f64() as i8,
                    order: (order, if sign == Sign::Plus { '+' } else { '-' }),
                    residual,
                });
            }
        }
    }
    Ok(JEquivReport { rows, max_residual })
}

/// Worst off-block entry of the generator sections at the reducible odd
/// points (t != 0, character +-1): the sections must respect the constraint
/// blocks there.
pub fn check_block_diagonality(q: f64, t: f64, n_bound: i64) -> Result<f64> {
    let loc = DeformationPoint::new(q, t)?;
    if loc.is_classical() || t == 0.0 {
        return Err(Error::Domain(
            "block-diagonality concerns the reducible odd points at q != 1, t != 0".into(),
        ));
    }
    let mut worst = 0.0f64;
    for sigma in [Sign::Plus, Sign::Minus] {
        let s = SpectralPoint::principal(Parity::Odd, loc, Complex64::from(sigma.as_f64()))?;
        let blocks = constraint_blocks(&s, n_bound);
        let window = fiber_window(&s, n_bound);
        let block_of = |k: i64| blocks.iter().position(|b| b.contains(&k));
        for n in window.iter().copied().filter(|k| k.abs() <= n_bound - MARGIN) {
            for kind in [SectionKind::Projection, SectionKind::Diag, SectionKind::Up, SectionKind::Down] {
                let m = section_matrix(&s, SectionId::new(kind, n), n_bound);
                for (r, &kr) in window.iter().enumerate() {
                    for (c, &kc) in window.iter().enumerate() {
                        if block_of(kr) != block_of(kc) {
                            worst = worst.max(m[(r, c)].norm());
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Sup over the fiber at (q, t) of the weighted operator norm of the
/// section; the function (q, t) -> sup must be continuous for continuous
/// fields, which the tests probe on small grids.
pub fn sup_norm_over_fiber(
    id: SectionId,
    q: f64,
    t: f64,
    lambda_angles: &[f64],
    n_max: u32,
    n_bound: i64,
) -> Result<f64> {
    let loc = DeformationPoint::new(q, t)?;
    let mut sup = 0.0f64;
    for parity in [Parity::Even, Parity::Odd] {
        for &a in lambda_angles {
            let coord = if loc.is_classical() {
                Complex64::new(0.0, a)
            } else {
                Complex64::from_polar(1.0, a)
            };
            let s = SpectralPoint::principal(parity, loc, coord)?;
            let m = section_matrix(&s, id, n_bound);
            sup = sup.max(crate::linalg::weighted_operator_norm(&m, &fiber_weights(&s, n_bound)));
        }
    }
    for sigma in [Sign::Plus, Sign::Minus] {
        if sigma == Sign::Minus && loc.is_classical() {
            continue;
        }
        for order in 1..=n_max {
            for sign in [Sign::Plus, Sign::Minus] {
                let s = SpectralPoint::discrete(sigma, order, sign, loc)?;
                let m = section_matrix(&s, id, n_bound);
                sup = sup
                    .max(crate::linalg::weighted_operator_norm(&m, &fiber_weights(&s, n_bound)));
            }
        }
    }
    Ok(sup)
}
