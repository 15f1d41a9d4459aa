//! Builders for truncated unitary matrix models of every module family:
//! q-deformed principal and discrete series, classical principal series,
//! motion-group modules and groupoid modules.
//!
//! A module lives on a finite window of K-types (integers of fixed parity,
//! step 2, |n| <= N).  The rotation generator theta acts diagonally with
//! eigenvalue `[n]_qt`; the remaining generators are banded with support on
//! bands {-2, 0, +2}.  Deformed families are produced by inverting the
//! change of variables between the (X, X*, Z) generators and the ladder
//! triple (T, T+, T-) whose action on basis vectors is known in closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{czero, max_abs_on, CMat};
use crate::scalars::{qint, qint2, qpow, DeformationPoint};
use crate::{Error, Result};

/// Default tolerance for submodule invariance at reducible parameters.
pub const INVARIANCE_TOL: f64 = 1e-12;
/// Default interior margin: band-2 operators corrupt this many outermost
/// K-types of a truncated window.
pub const INTERIOR_MARGIN: i64 = 4;

/// K-type parity of a module window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn from_sign(s: i8) -> Result<Self> {
        match s {
            1 => Ok(Parity::Even),
            -1 => Ok(Parity::Odd),
            _ => Err(Error::Domain(format!("parity sign must be +-1, got {s}"))),
        }
    }

    /// Parity of the window containing K-type `k`.
    pub fn of_ktype(k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn contains(self, k: i64) -> bool {
        Parity::of_ktype(k) == self
    }

    /// Parity `(-1)^(n+1)` of the discrete family of order n.
    pub fn of_discrete_order(n: u32) -> Self {
        if n % 2 == 1 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Sign of a discrete-series branch (which half-line of K-types).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// Order (n, +-) of a discrete-series module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteOrder {
    pub n: u32,
    pub sign: Sign,
}

/// The five families of truncated modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    PrincipalQ,
    DiscreteQ,
    ClassicalPrincipal,
    Motion,
    Groupoid,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::PrincipalQ => "principal_q",
            Family::DiscreteQ => "discrete_q",
            Family::ClassicalPrincipal => "classical_principal",
            Family::Motion => "motion",
            Family::Groupoid => "groupoid",
        }
    }
}

/// The window of K-types of fixed parity inside [-N, N], ascending.
pub fn parity_window(parity: Parity, n_bound: i64) -> Vec<i64> {
    let mut w = Vec::new();
    let mut k = -n_bound;
    if !parity.contains(k) {
        k += 1;
    }
    while k <= n_bound {
        w.push(k);
        k += 2;
    }
    w
}

/// The discrete window {±m : m - n odd, n < m <= N}, ascending.
pub fn discrete_window(n: u32, sign: Sign, n_bound: i64) -> Vec<i64> {
    let mut w: Vec<i64> = ((n as i64 + 1)..=n_bound)
        .filter(|m| (m - n as i64).rem_euclid(2) == 1)
        .map(|m| match sign {
            Sign::Plus => m,
            Sign::Minus => -m,
        })
        .collect();
    w.sort_unstable();
    w
}

/// Principal-series squared norms `w_n = 2/(qt^n + qt^-n)` along the window.
pub fn weights_principal(qt: f64, parity: Parity, n_bound: i64) -> Vec<f64> {
    parity_window(parity, n_bound)
        .iter()
        .map(|&n| 2.0 / (qpow(qt, n) + qpow(qt, -n)))
        .collect()
}

/// Discrete-series squared norms along `discrete_window(n, sign, n_bound)`.
///
/// The closed product runs over odd l with 3 <= l <= |m| - n; the product is
/// empty at the lowest K-type |m| = n + 1, whose weight is the plain
/// principal value `2/(qt^(n+1) + qt^-(n+1))`.  This normalization is pinned
/// against the unitarity-recursion oracle in the test suite.
pub fn weights_discrete(qt: f64, n: u32, sign: Sign, n_bound: i64) -> Vec<f64> {
    discrete_window(n, sign, n_bound)
        .iter()
        .map(|&k| discrete_weight_at(qt, n, k.unsigned_abs() as i64))
        .collect()
}

/// The weight of the K-type ±m (m = |k| > n) of a discrete module of order n.
pub fn discrete_weight_at(qt: f64, n: u32, m_abs: i64) -> f64 {
    let mut w = 2.0 / (qpow(qt, m_abs) + qpow(qt, -m_abs));
    let mut l = 3i64;
    while l <= m_abs - n as i64 {
        w *= qint(l - 1, qt) / qint(l - 1 + 2 * n as i64, qt);
        l += 2;
    }
    w
}

/// Generator matrices recovered from ladder coefficients.
pub struct RealizedGenerators {
    pub x: CMat,
    pub x_star: CMat,
    pub z: CMat,
    /// Worst 3x3 condition number encountered across the window.
    pub max_condition: f64,
}

/// Inverts the change of variables between (X, X*, Z) and the ladder triple
/// (T, T+, T-) band by band.
///
/// For each K-type n and each target band b in {-2, 0, +2}, the band-b
/// components of the T-columns are linear in the band-b components of the
/// (X, X*, Z) columns through one n-dependent 3x3 matrix; solving it yields
/// banded X and Z.  The solved X* is returned as well: it is the module
/// image of the algebra element X*, which coincides with the weight-adjoint
/// of X exactly when the module is unitary.
pub fn realize_xztheta_from_t(
    t_diag: &dyn Fn(i64) -> Complex64,
    t_up: &dyn Fn(i64) -> Complex64,
    t_down: &dyn Fn(i64) -> Complex64,
    qt: f64,
    window: &[i64],
) -> Result<RealizedGenerators> {
    let dim = window.len();
    let mut x = czero(dim, dim);
    let mut x_star = czero(dim, dim);
    let mut z = czero(dim, dim);
    let pos = |k: i64| window.iter().position(|&w| w == k);
    let mut max_condition: f64 = 0.0;

    for (col, &n) in window.iter().enumerate() {
        let m = nalgebra::Matrix3::new(
            1.0 / qt,
            qt,
            qpow(qt, n) - qpow(qt, -n),
            qpow(qt, n),
            -qpow(qt, -n),
            -qint2(qt),
            qpow(qt, -n),
            -qpow(qt, n),
            qint2(qt),
        );
        let sv = m.svd(false, false).singular_values;
        let cond = sv.max() / sv.min();
        if !cond.is_finite() || cond > 1e12 {
            return Err(Error::IllConditioned { ktype: n, cond });
        }
        max_condition = max_condition.max(cond);
        let lu = m.cast::<Complex64>().lu();

        for (band, rhs) in [
            (0i64, nalgebra::Vector3::new(t_diag(n), Complex64::ZERO, Complex64::ZERO)),
            (2, nalgebra::Vector3::new(Complex64::ZERO, t_up(n), Complex64::ZERO)),
            (-2, nalgebra::Vector3::new(Complex64::ZERO, Complex64::ZERO, t_down(n))),
        ] {
            let sol = lu.solve(&rhs).ok_or(Error::IllConditioned { ktype: n, cond })?;
            if let Some(row) = pos(n + band) {
                x[(row, col)] = sol[0];
                x_star[(row, col)] = sol[1];
                z[(row, col)] = sol[2];
            }
        }
    }

    Ok(RealizedGenerators { x, x_star, z, max_condition })
}

/// A finite window of K-types carrying banded generator matrices and
/// positive norm weights: a truncated unitary module.
#[derive(Debug, Clone)]
pub struct TruncatedModule {
    family: Family,
    base: DeformationPoint,
    parity: Parity,
    lambda: Complex64,
    order: Option<DiscreteOrder>,
    n_bound: i64,
    window: Vec<i64>,
    weights: Vec<f64>,
    gen_theta: CMat,
    gen_x: CMat,
    gen_x_star: CMat,
    gen_z: CMat,
}

/// Which ladder operator to assemble from the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TKind {
    Diag,
    Up,
    Down,
}

impl TruncatedModule {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn base(&self) -> DeformationPoint {
        self.base
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn order(&self) -> Option<DiscreteOrder> {
        self.order
    }

    pub fn n_bound(&self) -> i64 {
        self.n_bound
    }

    pub fn window(&self) -> &[i64] {
        &self.window
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    pub fn theta(&self) -> &CMat {
        &self.gen_theta
    }

    pub fn x(&self) -> &CMat {
        &self.gen_x
    }

    /// The module image of the algebra element X* (solved, not adjoint-derived).
    pub fn x_star(&self) -> &CMat {
        &self.gen_x_star
    }

    pub fn z(&self) -> &CMat {
        &self.gen_z
    }

    /// Position of a K-type in the window.
    pub fn pos(&self, ktype: i64) -> Option<usize> {
        self.window.iter().position(|&k| k == ktype)
    }

    /// Window positions unaffected by truncation artifacts: |k| <= N - margin.
    pub fn interior(&self, margin: i64) -> Vec<usize> {
        self.window
            .iter()
            .enumerate()
            .filter(|(_, &k)| k.abs() <= self.n_bound - margin)
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest |entry| outside the bands {-2, 0, +2} across all generators.
    pub fn max_off_band(&self) -> f64 {
        let mut worst = 0.0f64;
        for g in [&self.gen_theta, &self.gen_x, &self.gen_x_star, &self.gen_z] {
            for (r, &kr) in self.window.iter().enumerate() {
                for (c, &kc) in self.window.iter().enumerate() {
                    let band = kr - kc;
                    let off_band = band != 0 && band.abs() != 2;
                    let off_diag_theta = std::ptr::eq(g, &self.gen_theta) && band != 0;
                    if off_band || off_diag_theta {
                        worst = worst.max(g[(r, c)].norm());
                    }
                }
            }
        }
        worst
    }

    /// Assembles the ladder operator of the given kind at index `n` from the
    /// stored generators, in the change of variables proper to the family.
    pub fn t_op(&self, n: i64, kind: TKind) -> CMat {
        let x = &self.gen_x;
        let xs = &self.gen_x_star;
        let z = &self.gen_z;
        match self.family {
            Family::PrincipalQ | Family::DiscreteQ => {
                let q = self.base.qt();
                match kind {
                    TKind::Diag => {
                        x / Complex64::from(q)
                            + xs * Complex64::from(q)
                            + z * Complex64::from(qpow(q, n) - qpow(q, -n))
                    }
                    TKind::Up => {
                        x * Complex64::from(qpow(q, n))
                            - xs * Complex64::from(qpow(q, -n))
                            - z * Complex64::from(qint2(q))
                    }
                    TKind::Down => {
                        x * Complex64::from(qpow(q, -n))
                            - xs * Complex64::from(qpow(q, n))
                            + z * Complex64::from(qint2(q))
                    }
                }
            }
            Family::Groupoid => match kind {
                TKind::Diag => x + xs,
                TKind::Up => x - xs - z * Complex64::from(2.0),
                TKind::Down => x - xs + z * Complex64::from(2.0),
            },
            Family::Motion => match kind {
                // delta T^+- = 2(delta X -+ delta Z); no diagonal ladder here.
                TKind::Diag => czero(self.dim(), self.dim()),
                TKind::Up => (x - z) * Complex64::from(2.0),
                TKind::Down => (x + z) * Complex64::from(2.0),
            },
            Family::ClassicalPrincipal => {
                // ladder A^+- = H -+ i(E + F) = 2x -+ (2z - theta), stored at t = 1
                let two_z_minus_theta = z * Complex64::from(2.0) - &self.gen_theta;
                match kind {
                    TKind::Diag => czero(self.dim(), self.dim()),
                    TKind::Up => x * Complex64::from(2.0) - &two_z_minus_theta,
                    TKind::Down => x * Complex64::from(2.0) + &two_z_minus_theta,
                }
            }
        }
    }

    /// The coordinate subspace generated by `seed` under the (thresholded)
    /// action of all four generator matrices, as a sorted list of K-types.
    pub fn invariant_closure(&self, seed: i64, tol: f64) -> Vec<i64> {
        let Some(start) = self.pos(seed) else {
            return Vec::new();
        };
        let dim = self.dim();
        let mut in_set = vec![false; dim];
        in_set[start] = true;
        let mut frontier = vec![start];
        while let Some(col) = frontier.pop() {
            for g in [&self.gen_theta, &self.gen_x, &self.gen_x_star, &self.gen_z] {
                for row in 0..dim {
                    if !in_set[row] && g[(row, col)].norm() > tol {
                        in_set[row] = true;
                        frontier.push(row);
                    }
                }
            }
        }
        self.window
            .iter()
            .enumerate()
            .filter(|(i, _)| in_set[*i])
            .map(|(_, &k)| k)
            .collect()
    }

    pub fn to_doc(&self) -> ModuleDoc {
        let entries = |m: &CMat| {
            let mut v = Vec::new();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let z = m[(r, c)];
                    if z != Complex64::ZERO {
                        v.push((r, c, z.re, z.im));
                    }
                }
            }
            v
        };
        ModuleDoc {
            family: self.family.name().to_string(),
            q: self.base.q(),
            t: self.base.t(),
            epsilon: self.parity.sign(),
            lambda: [self.lambda.re, self.lambda.im],
            order: self.order.map(|o| OrderDoc { n: o.n, sign: o.sign.symbol().to_string() }),
            window: self.window.clone(),
            weights: self.weights.clone(),
            matrices: MatricesDoc {
                theta: entries(&self.gen_theta),
                x: entries(&self.gen_x),
                z: entries(&self.gen_z),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("module serialization cannot fail")
    }

    /// Rebuilds a module from its serialized form.  X* is reconstructed as
    /// the weight-adjoint of X for the unitary families and as -X for the
    /// skew families; serialized non-unitarizable modules are not supported.
    pub fn from_doc(doc: &ModuleDoc) -> Result<Self> {
        let family = match doc.family.as_str() {
            "principal_q" => Family::PrincipalQ,
            "discrete_q" => Family::DiscreteQ,
            "classical_principal" => Family::ClassicalPrincipal,
            "motion" => Family::Motion,
            "groupoid" => Family::Groupoid,
            other => return Err(Error::Domain(format!("unknown family '{other}'"))),
        };
        let dim = doc.window.len();
        if doc.weights.len() != dim {
            return Err(Error::Domain("weights/window length mismatch".into()));
        }
        let fill = |entries: &[(usize, usize, f64, f64)]| -> Result<CMat> {
            let mut m = czero(dim, dim);
            for &(r, c, re, im) in entries {
                if r >= dim || c >= dim {
                    return Err(Error::Domain(format!("matrix entry ({r},{c}) outside window")));
                }
                m[(r, c)] = Complex64::new(re, im);
            }
            Ok(m)
        };
        let gen_theta = fill(&doc.matrices.theta)?;
        let gen_x = fill(&doc.matrices.x)?;
        let gen_z = fill(&doc.matrices.z)?;
        let gen_x_star = match family {
            Family::Motion | Family::ClassicalPrincipal => -&gen_x,
            _ => crate::linalg::weighted_adjoint(&gen_x, &doc.weights),
        };
        let order = match &doc.order {
            None => None,
            Some(o) => Some(DiscreteOrder {
                n: o.n,
                sign: match o.sign.as_str() {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    other => return Err(Error::Domain(format!("bad sign '{other}'"))),
                },
            }),
        };
        Ok(TruncatedModule {
            family,
            base: DeformationPoint::new(doc.q, doc.t)?,
            parity: Parity::from_sign(doc.epsilon)?,
            lambda: Complex64::new(doc.lambda[0], doc.lambda[1]),
            order,
            n_bound: doc.window.iter().map(|k| k.abs()).max().unwrap_or(0),
            window: doc.window.clone(),
            weights: doc.weights.clone(),
            gen_theta,
            gen_x,
            gen_x_star,
            gen_z,
        })
    }
}

/// Serialized form of a module; field order is part of the format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleDoc {
    pub family: String,
    pub q: f64,
    pub t: f64,
    pub epsilon: i8,
    pub lambda: [f64; 2],
    pub order: Option<OrderDoc>,
    pub window: Vec<i64>,
    pub weights: Vec<f64>,
    pub matrices: MatricesDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderDoc {
    pub n: u32,
    pub sign: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatricesDoc {
    pub theta: Vec<(usize, usize, f64, f64)>,
    #[serde(rename = "X")]
    pub x: Vec<(usize, usize, f64, f64)>,
    #[serde(rename = "Z")]
    pub z: Vec<(usize, usize, f64, f64)>,
}

fn diag_theta(window: &[i64], qt: f64) -> CMat {
    let dim = window.len();
    let mut th = czero(dim, dim);
    for (i, &n) in window.iter().enumerate() {
        th[(i, i)] = Complex64::from(qint(n, qt));
    }
    th
}

/// q-deformed principal series at deformation point `base` (q != 1, t != 0),
/// parity `parity` and spectral parameter `lambda != 0`.
pub fn build_principal_q(
    base: DeformationPoint,
    parity: Parity,
    lambda: Complex64,
    n_bound: i64,
) -> Result<TruncatedModule> {
    if lambda.norm() < 1e-300 {
        return Err(Error::Domain("principal series needs lambda != 0".into()));
    }
    if base.q() == 1.0 || base.t() == 0.0 {
        return Err(Error::Domain(format!(
            "q-deformed principal series lives at q != 1, t != 0; got q={}, t={}",
            base.q(),
            base.t()
        )));
    }
    if n_bound < 2 {
        return Err(Error::Domain("window bound must be at least 2".into()));
    }
    let qt = base.qt();
    let li = lambda.inv();
    let window = parity_window(parity, n_bound);
    let realized = realize_xztheta_from_t(
        &|_| lambda + li,
        &|n| lambda * qpow(qt, 1 + n) - li * qpow(qt, -1 - n),
        &|n| lambda * qpow(qt, 1 - n) - li * qpow(qt, -1 + n),
        qt,
        &window,
    )?;
    Ok(TruncatedModule {
        family: Family::PrincipalQ,
        base,
        parity,
        lambda,
        order: None,
        n_bound,
        weights: weights_principal(qt, parity, n_bound),
        gen_theta: diag_theta(&window, qt),
        window,
        gen_x: realized.x,
        gen_x_star: realized.x_star,
        gen_z: realized.z,
    })
}

/// q-deformed discrete series D^(sign)(sigma, n): the invariant half-line
/// window of the principal series at the reducible parameter
/// `lambda = sigma qt^n`.
pub fn build_discrete_q(
    base: DeformationPoint,
    sigma: Sign,
    n: u32,
    sign: Sign,
    n_bound: i64,
) -> Result<TruncatedModule> {
    if base.qt() == 1.0 {
        return Err(Error::Domain(
            "discrete q-series needs q^t != 1 (classical discrete series are not built here)"
                .into(),
        ));
    }
    let qt = base.qt();
    let parity = Parity::of_discrete_order(n);
    let lambda = Complex64::from(sigma.as_f64() * qpow(qt, n as i64));
    let full = build_principal_q(base, parity, lambda, n_bound)?;
    let sub_window = discrete_window(n, sign, n_bound);
    if sub_window.is_empty() {
        return Err(Error::Domain(format!(
            "discrete window of order ({n}, {}) is empty at N={n_bound}",
            sign.symbol()
        )));
    }

    // The half-line must be genuinely invariant; any leakage above tolerance
    // means the ladder coefficients were transcribed wrongly.
    let sub_pos: Vec<usize> = sub_window.iter().map(|&k| full.pos(k).unwrap()).collect();
    let out_pos: Vec<usize> = (0..full.dim()).filter(|p| !sub_pos.contains(p)).collect();
    for g in [&full.gen_x, &full.gen_x_star, &full.gen_z, &full.gen_theta] {
        let ((r, _), leak) = max_abs_on(g, &out_pos, &sub_pos);
        if leak > INVARIANCE_TOL {
            return Err(Error::InvarianceViolation {
                ktype: full.window[r],
                leakage: leak,
                tol: INVARIANCE_TOL,
            });
        }
    }

    let restrict = |m: &CMat| {
        let d = sub_pos.len();
        let mut out = czero(d, d);
        for (i, &r) in sub_pos.iter().enumerate() {
            for (j, &c) in sub_pos.iter().enumerate() {
                out[(i, j)] = m[(r, c)];
            }
        }
        out
    };

    Ok(TruncatedModule {
        family: Family::DiscreteQ,
        base,
        parity,
        lambda,
        order: Some(DiscreteOrder { n, sign }),
        n_bound,
        weights: weights_discrete(qt, n, sign, n_bound),
        gen_theta: restrict(&full.gen_theta),
        gen_x: restrict(&full.gen_x),
        gen_x_star: restrict(&full.gen_x_star),
        gen_z: restrict(&full.gen_z),
        window: sub_window,
    })
}

/// Classical principal series (q = 1): theta acts by n, the ladder operators
/// H -+ i(E+F) act with coefficient (lambda + 1 +- n) and shift n by +-2.
/// Generators are stored through the t = 1 dictionary x = H/2, z = iE.
pub fn build_classical_principal(
    lambda: Complex64,
    parity: Parity,
    n_bound: i64,
) -> Result<TruncatedModule> {
    if n_bound < 2 {
        return Err(Error::Domain("window bound must be at least 2".into()));
    }
    let window = parity_window(parity, n_bound);
    let dim = window.len();
    let pos = |k: i64| window.iter().position(|&w| w == k);
    let mut x = czero(dim, dim);
    let mut z = czero(dim, dim);
    for (col, &n) in window.iter().enumerate() {
        let up = lambda + Complex64::from((1 + n) as f64);
        let down = lambda + Complex64::from((1 - n) as f64);
        if let Some(r) = pos(n + 2) {
            x[(r, col)] += up / Complex64::from(4.0);
            z[(r, col)] -= up / Complex64::from(4.0);
        }
        if let Some(r) = pos(n - 2) {
            x[(r, col)] += down / Complex64::from(4.0);
            z[(r, col)] += down / Complex64::from(4.0);
        }
        z[(col, col)] += Complex64::from(n as f64 / 2.0);
    }
    let base = DeformationPoint::new(1.0, 1.0)?;
    Ok(TruncatedModule {
        family: Family::ClassicalPrincipal,
        base,
        parity,
        lambda,
        order: None,
        n_bound,
        weights: vec![1.0; dim],
        gen_theta: diag_theta(&window, 1.0),
        window,
        gen_x_star: -&x,
        gen_x: x,
        gen_z: z,
    })
}

/// Motion-group module (q = 1, t = 0): delta T^+- shift by +-2 with
/// coefficient lambda in i R_+.
pub fn build_motion(lambda: Complex64, parity: Parity, n_bound: i64) -> Result<TruncatedModule> {
    if lambda.re.abs() > 1e-12 || lambda.im < 0.0 {
        return Err(Error::Domain(format!(
            "motion module needs lambda in i*R_+, got {lambda}"
        )));
    }
    if n_bound < 2 {
        return Err(Error::Domain("window bound must be at least 2".into()));
    }
    let window = parity_window(parity, n_bound);
    let dim = window.len();
    let pos = |k: i64| window.iter().position(|&w| w == k);
    let mut x = czero(dim, dim);
    let mut z = czero(dim, dim);
    let quarter = lambda / Complex64::from(4.0);
    for (col, &n) in window.iter().enumerate() {
        if let Some(r) = pos(n + 2) {
            x[(r, col)] += quarter;
            z[(r, col)] -= quarter;
        }
        if let Some(r) = pos(n - 2) {
            x[(r, col)] += quarter;
            z[(r, col)] += quarter;
        }
    }
    let base = DeformationPoint::new(1.0, 0.0)?;
    Ok(TruncatedModule {
        family: Family::Motion,
        base,
        parity,
        lambda,
        order: None,
        n_bound,
        weights: vec![1.0; dim],
        gen_theta: diag_theta(&window, 1.0),
        window,
        gen_x_star: -&x,
        gen_x: x,
        gen_z: z,
    })
}

/// Groupoid module (q != 1, t = 0): theta acts by n, T by lambda + 1/lambda,
/// T^+- shift by +-2 with coefficient lambda - 1/lambda; lambda on the unit
/// circle.  The fiber does not depend on q; the base records (2, 0).
pub fn build_groupoid(lambda: Complex64, parity: Parity, n_bound: i64) -> Result<TruncatedModule> {
    if (lambda.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "groupoid module needs |lambda| = 1, got |lambda| = {}",
            lambda.norm()
        )));
    }
    if n_bound < 2 {
        return Err(Error::Domain("window bound must be at least 2".into()));
    }
    let window = parity_window(parity, n_bound);
    let dim = window.len();
    let pos = |k: i64| window.iter().position(|&w| w == k);
    let li = lambda.inv();
    let half_t = (lambda + li) / Complex64::from(2.0);
    let quarter_s = (lambda - li) / Complex64::from(4.0);
    let mut x = czero(dim, dim);
    let mut x_star = czero(dim, dim);
    let mut z = czero(dim, dim);
    for (col, &n) in window.iter().enumerate() {
        x[(col, col)] = half_t;
        x_star[(col, col)] = half_t;
        if let Some(r) = pos(n + 2) {
            x[(r, col)] += quarter_s;
            x_star[(r, col)] -= quarter_s;
            z[(r, col)] -= quarter_s;
        }
        if let Some(r) = pos(n - 2) {
            x[(r, col)] += quarter_s;
            x_star[(r, col)] -= quarter_s;
            z[(r, col)] += quarter_s;
        }
    }
    let base = DeformationPoint::new(2.0, 0.0)?;
    Ok(TruncatedModule {
        family: Family::Groupoid,
        base,
        parity,
        lambda,
        order: None,
        n_bound,
        weights: vec![1.0; dim],
        gen_theta: diag_theta(&window, 1.0),
        window,
        gen_x: x,
        gen_x_star: x_star,
        gen_z: z,
    })
}
