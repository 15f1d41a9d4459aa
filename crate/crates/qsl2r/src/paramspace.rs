//! The parameter space S of the continuous field: component bookkeeping,
//! the infinitesimal character Lambda, parity, K-type sets, the constraint
//! block decomposition, coordinate projections between fibers, spectrum
//! enumeration with minimal K-types, and closure-relation graphs.
//!
//! S is a disjoint union of principal components Pri_eps (continuous
//! spectral parameter) and discrete components Dis_{sigma,n}^± (one point
//! per location).  At each fixed location (q, t) the points of S label the
//! irreducible representations of the fiber algebra, with reducible
//! boundary points split by the constraint blocks.

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::CMat;
use crate::modgen::{discrete_window, parity_window, Parity, Sign};
use crate::scalars::{qpow, DeformationPoint};
use crate::{Error, Result};

/// Reality threshold for the infinitesimal character (constraint cases).
const REAL_EPS: f64 = 1e-12;

/// A connected component tag of the parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Pri { parity: Parity },
    Dis { sigma: Sign, n: u32, sign: Sign },
}

/// A point of the parameter space S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub component: Component,
    pub location: DeformationPoint,
    /// Spectral coordinate of principal points: on the unit circle away from
    /// q = 1, purely imaginary on the classical line.  Absent for discrete
    /// points.
    pub pri_coord: Option<Complex64>,
}

impl SpectralPoint {
    pub fn principal(
        parity: Parity,
        location: DeformationPoint,
        lambda: Complex64,
    ) -> Result<Self> {
        if location.is_classical() {
            if lambda.re.abs() > 1e-12 {
                return Err(Error::InvalidPoint(format!(
                    "principal coordinate at q = 1 must be purely imaginary, got {lambda}"
                )));
            }
        } else if (lambda.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPoint(format!(
                "principal coordinate at q != 1 must lie on the unit circle, got {lambda}"
            )));
        }
        Ok(Self { component: Component::Pri { parity }, location, pri_coord: Some(lambda) })
    }

    pub fn discrete(sigma: Sign, n: u32, sign: Sign, location: DeformationPoint) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidPoint("discrete components have order n >= 1".into()));
        }
        if sigma == Sign::Minus && location.is_classical() {
            return Err(Error::InvalidPoint(
                "sigma = -1 discrete components do not exist over q = 1".into(),
            ));
        }
        Ok(Self { component: Component::Dis { sigma, n, sign }, location, pri_coord: None })
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.component, Component::Pri { .. })
    }
}

/// The set of K-types of a point of S.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KTypeSet {
    /// All integers of one parity.
    FullParity(Parity),
    /// The half-line {±m : m > n, m - n odd}.
    HalfLine { n: u32, sign: Sign },
}

impl KTypeSet {
    pub fn contains(&self, k: i64) -> bool {
        match *self {
            KTypeSet::FullParity(p) => p.contains(k),
            KTypeSet::HalfLine { n, sign } => {
                let m = match sign {
                    Sign::Plus => k,
                    Sign::Minus => -k,
                };
                m > n as i64 && (m - n as i64).rem_euclid(2) == 1
            }
        }
    }

    /// The window of K-types truncated to |k| <= n_bound, ascending.
    pub fn window(&self, n_bound: i64) -> Vec<i64> {
        match *self {
            KTypeSet::FullParity(p) => parity_window(p, n_bound),
            KTypeSet::HalfLine { n, sign } => discrete_window(n, sign, n_bound),
        }
    }
}

/// Derived data of a spectral point: infinitesimal character, parity and
/// K-type set.
#[derive(Debug, Clone, Copy)]
pub struct Classification {
    pub lambda: Complex64,
    pub parity: Parity,
    pub ktypes: KTypeSet,
}

/// Computes (Lambda, parity, K-types) of a point.
///
/// On the classical line the principal character is lambda/t for t != 0; at
/// the corner (1, 0) the coordinate itself is used (the motion-group label).
pub fn classify(s: &SpectralPoint) -> Classification {
    let t = s.location.t();
    match s.component {
        Component::Pri { parity } => {
            let coord = s.pri_coord.expect("principal points carry a coordinate");
            let lambda = if !s.location.is_classical() {
                coord
            } else if t != 0.0 {
                coord / Complex64::from(t)
            } else {
                coord
            };
            Classification { lambda, parity, ktypes: KTypeSet::FullParity(parity) }
        }
        Component::Dis { sigma, n, sign } => {
            let lambda = if !s.location.is_classical() {
                Complex64::from(sigma.as_f64() * qpow(s.location.qt(), n as i64))
            } else if t != 0.0 {
                Complex64::from(n as f64)
            } else {
                Complex64::ZERO
            };
            Classification {
                lambda,
                parity: Parity::of_discrete_order(n),
                ktypes: KTypeSet::HalfLine { n, sign },
            }
        }
    }
}

/// The constraint block decomposition of the fiber at `s`, as a list of
/// K-type subsets truncated to |k| <= n_bound.
///
/// Odd continuous points away from t = 0 with real character split into the
/// two half-lines; any point on t = 0 with real character splits into
/// singletons; everywhere else the decomposition is trivial.
pub fn constraint_blocks(s: &SpectralPoint, n_bound: i64) -> Vec<Vec<i64>> {
    let c = classify(s);
    let real_char = c.lambda.im.abs() < REAL_EPS;
    let t_zero = s.location.t() == 0.0;
    if t_zero && real_char {
        c.ktypes.window(n_bound).into_iter().map(|k| vec![k]).collect()
    } else if !t_zero && real_char && c.parity == Parity::Odd && s.is_continuous() {
        vec![discrete_window(0, Sign::Plus, n_bound), discrete_window(0, Sign::Minus, n_bound)]
    } else {
        vec![c.ktypes.window(n_bound)]
    }
}

/// The coordinate projection from the full parity window onto the discrete
/// window of order (n, sign): rows indexed by the target window, columns by
/// the source window, entries 0/1.
pub struct JMap {
    pub target_window: Vec<i64>,
    pub source_window: Vec<i64>,
    pub matrix: CMat,
}

/// Builds the projection of order (n, sign) out of a continuous fiber.
/// Order n = 0 is allowed: it projects onto a constraint block of the
/// source fiber itself rather than onto a separate component of S.
pub fn jmap_order(n: u32, sign: Sign, source_parity: Parity, n_bound: i64) -> Result<JMap> {
    if Parity::of_discrete_order(n) != source_parity {
        return Err(Error::InvalidPoint(format!(
            "projection of order ({n}, {}) does not match source parity",
            sign.symbol()
        )));
    }
    let target_window = discrete_window(n, sign, n_bound);
    let source_window = parity_window(source_parity, n_bound);
    let mut matrix = crate::linalg::czero(target_window.len(), source_window.len());
    for (r, &k) in target_window.iter().enumerate() {
        if let Some(c) = source_window.iter().position(|&s| s == k) {
            matrix[(r, c)] = Complex64::ONE;
        }
    }
    Ok(JMap { target_window, source_window, matrix })
}

/// The projection J(target, source) between two points of S at t = 0 with
/// equal location, character and parity.
pub fn jmap(target: &SpectralPoint, source: &SpectralPoint, n_bound: i64) -> Result<JMap> {
    let Component::Dis { n, sign, .. } = target.component else {
        return Err(Error::InvalidPoint("projection target must be a discrete point".into()));
    };
    if !source.is_continuous() {
        return Err(Error::InvalidPoint("projection source must be a continuous point".into()));
    }
    if target.location.t() != 0.0 || source.location.t() != 0.0 {
        return Err(Error::InvalidPoint("projections live over t = 0".into()));
    }
    if (target.location.q() - source.location.q()).abs() > 1e-12 {
        return Err(Error::InvalidPoint("projection endpoints must share their location".into()));
    }
    let ct = classify(target);
    let cs = classify(source);
    if (ct.lambda - cs.lambda).norm() > 1e-12 || ct.parity != cs.parity {
        return Err(Error::InvalidPoint(
            "projection endpoints must have equal character and parity".into(),
        ));
    }
    jmap_order(n, sign, cs.parity, n_bound)
}

/// The four fiber algebras whose spectra are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Algebra {
    QReduced,
    Groupoid,
    ClassicalReduced,
    Motion,
}

impl Algebra {
    pub fn name(self) -> &'static str {
        match self {
            Algebra::QReduced => "q_reduced",
            Algebra::Groupoid => "groupoid",
            Algebra::ClassicalReduced => "classical_reduced",
            Algebra::Motion => "motion",
        }
    }
}

/// A label for an irreducible representation of one of the fiber algebras.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumLabel {
    PrincipalQ { parity: Parity, lambda: Complex64 },
    DiscreteQ { sigma: Sign, n: u32, sign: Sign },
    GroupoidCont { lambda: Complex64, parity: Parity },
    GroupoidChar { sigma: Sign, m: i64 },
    ClassicalPrincipal { parity: Parity, lambda: Complex64 },
    ClassicalDiscrete { n: u32, sign: Sign },
    MotionCont { lambda: Complex64, parity: Parity },
    MotionChar { m: i64 },
}

impl SpectrumLabel {
    pub fn algebra(&self) -> Algebra {
        match self {
            SpectrumLabel::PrincipalQ { .. } | SpectrumLabel::DiscreteQ { .. } => Algebra::QReduced,
            SpectrumLabel::GroupoidCont { .. } | SpectrumLabel::GroupoidChar { .. } => {
                Algebra::Groupoid
            }
            SpectrumLabel::ClassicalPrincipal { .. } | SpectrumLabel::ClassicalDiscrete { .. } => {
                Algebra::ClassicalReduced
            }
            SpectrumLabel::MotionCont { .. } | SpectrumLabel::MotionChar { .. } => Algebra::Motion,
        }
    }

    /// Rejects labels excluded from the spectrum (reducible parameters of
    /// the continuous families are not irreducible representations).
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectrumLabel::PrincipalQ { parity, lambda } => {
                if parity == Parity::Odd && lambda.im.abs() < REAL_EPS {
                    return Err(Error::InvalidLabel(
                        "odd principal labels exclude lambda = +-1".into(),
                    ));
                }
                Ok(())
            }
            SpectrumLabel::GroupoidCont { lambda, .. } => {
                if lambda.im.abs() < REAL_EPS {
                    return Err(Error::InvalidLabel(
                        "continuous groupoid labels exclude lambda = +-1".into(),
                    ));
                }
                Ok(())
            }
            SpectrumLabel::ClassicalPrincipal { parity, lambda } => {
                if parity == Parity::Odd && lambda.norm() < REAL_EPS {
                    return Err(Error::InvalidLabel(
                        "odd classical principal labels exclude lambda = 0".into(),
                    ));
                }
                Ok(())
            }
            SpectrumLabel::MotionCont { lambda, .. } => {
                if lambda.norm() < REAL_EPS {
                    return Err(Error::InvalidLabel(
                        "continuous motion labels exclude lambda = 0".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The full set of K-types of the representation.
    pub fn ktypes(&self) -> KTypeSet {
        match *self {
            SpectrumLabel::PrincipalQ { parity, .. }
            | SpectrumLabel::GroupoidCont { parity, .. }
            | SpectrumLabel::ClassicalPrincipal { parity, .. }
            | SpectrumLabel::MotionCont { parity, .. } => KTypeSet::FullParity(parity),
            SpectrumLabel::DiscreteQ { n, sign, .. }
            | SpectrumLabel::ClassicalDiscrete { n, sign } => KTypeSet::HalfLine { n, sign },
            SpectrumLabel::GroupoidChar { m, .. } | SpectrumLabel::MotionChar { m } => {
                // a character has the single K-type m
                KTypeSet::HalfLine {
                    n: (m.abs() - 1).max(0) as u32,
                    sign: if m >= 0 { Sign::Plus } else { Sign::Minus },
                }
            }
        }
    }

    /// The K-types of a character label are just {m}; half-line sets for the
    /// discrete series; the full parity class for continuous labels.
    pub fn ktype_window(&self, n_bound: i64) -> Vec<i64> {
        match *self {
            SpectrumLabel::GroupoidChar { m, .. } | SpectrumLabel::MotionChar { m } => vec![m],
            _ => self.ktypes().window(n_bound),
        }
    }

    /// The set of K-types of minimal absolute value.
    pub fn min_ktypes(&self) -> Vec<i64> {
        match *self {
            SpectrumLabel::PrincipalQ { parity, .. }
            | SpectrumLabel::GroupoidCont { parity, .. }
            | SpectrumLabel::ClassicalPrincipal { parity, .. }
            | SpectrumLabel::MotionCont { parity, .. } => match parity {
                Parity::Even => vec![0],
                Parity::Odd => vec![-1, 1],
            },
            SpectrumLabel::DiscreteQ { n, sign, .. }
            | SpectrumLabel::ClassicalDiscrete { n, sign } => match sign {
                Sign::Plus => vec![n as i64 + 1],
                Sign::Minus => vec![-(n as i64) - 1],
            },
            SpectrumLabel::GroupoidChar { m, .. } => vec![m],
            SpectrumLabel::MotionChar { m } => vec![m],
        }
    }

    /// Deterministic text form usable as a set/map key.
    pub fn key(&self) -> String {
        let ang = |l: Complex64| format!("{:.12}", l.arg());
        match *self {
            SpectrumLabel::PrincipalQ { parity, lambda } => {
                format!("PriQ[eps={:+},theta={}]", parity.sign(), ang(lambda))
            }
            SpectrumLabel::DiscreteQ { sigma, n, sign } => {
                format!("DisQ[sigma={:+},n={n},{}]", sigma.as_f64() as i8, sign.symbol())
            }
            SpectrumLabel::GroupoidCont { lambda, parity } => {
                format!("GCont[eps={:+},theta={}]", parity.sign(), ang(lambda))
            }
            SpectrumLabel::GroupoidChar { sigma, m } => {
                format!("GChar[sigma={:+},m={m}]", sigma.as_f64() as i8)
            }
            SpectrumLabel::ClassicalPrincipal { parity, lambda } => {
                format!("ClPri[eps={:+},im={:.12}]", parity.sign(), lambda.im)
            }
            SpectrumLabel::ClassicalDiscrete { n, sign } => {
                format!("ClDis[n={n},{}]", sign.symbol())
            }
            SpectrumLabel::MotionCont { lambda, parity } => {
                format!("MoCont[eps={:+},im={:.12}]", parity.sign(), lambda.im)
            }
            SpectrumLabel::MotionChar { m } => format!("MoChar[m={m}]"),
        }
    }
}

/// A labeled spectrum point with its minimal K-type set.
#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub label: SpectrumLabel,
    pub min_ktypes: Vec<i64>,
}

/// Angles of the lambda grid on the upper half circle: `resolution` points
/// including both endpoints.
pub fn circle_grid(resolution: usize) -> Vec<f64> {
    let r = resolution.max(2);
    (0..r).map(|j| std::f64::consts::PI * j as f64 / (r - 1) as f64).collect()
}

/// Enumerates the spectrum of a fiber algebra at desk scale: continuous
/// families sampled on a lambda grid, discrete labels up to order `n_max`
/// (characters up to |m| <= n_max).
pub fn enumerate_spectrum(
    algebra: Algebra,
    lambda_grid_resolution: usize,
    n_max: u32,
) -> Vec<SpectrumPoint> {
    let mut out = Vec::new();
    let mut push = |label: SpectrumLabel| {
        if label.validate().is_ok() {
            out.push(SpectrumPoint { min_ktypes: label.min_ktypes(), label });
        }
    };
    let angles = circle_grid(lambda_grid_resolution);
    let imag_grid: Vec<Complex64> = (0..lambda_grid_resolution)
        .map(|j| Complex64::new(0.0, 3.0 * j as f64 / (lambda_grid_resolution.max(2) - 1) as f64))
        .collect();
    match algebra {
        Algebra::QReduced => {
            for parity in [Parity::Even, Parity::Odd] {
                for &a in &angles {
                    push(SpectrumLabel::PrincipalQ {
                        parity,
                        lambda: Complex64::from_polar(1.0, a),
                    });
                }
            }
            for sigma in [Sign::Plus, Sign::Minus] {
                for n in 0..=n_max {
                    for sign in [Sign::Plus, Sign::Minus] {
                        push(SpectrumLabel::DiscreteQ { sigma, n, sign });
                    }
                }
            }
        }
        Algebra::Groupoid => {
            for parity in [Parity::Even, Parity::Odd] {
                for &a in &angles {
                    push(SpectrumLabel::GroupoidCont {
                        lambda: Complex64::from_polar(1.0, a),
                        parity,
                    });
                }
            }
            for sigma in [Sign::Plus, Sign::Minus] {
                for m in -(n_max as i64)..=(n_max as i64) {
                    push(SpectrumLabel::GroupoidChar { sigma, m });
                }
            }
        }
        Algebra::ClassicalReduced => {
            for parity in [Parity::Even, Parity::Odd] {
                for &l in &imag_grid {
                    push(SpectrumLabel::ClassicalPrincipal { parity, lambda: l });
                }
            }
            for n in 0..=n_max {
                for sign in [Sign::Plus, Sign::Minus] {
                    push(SpectrumLabel::ClassicalDiscrete { n, sign });
                }
            }
        }
        Algebra::Motion => {
            for parity in [Parity::Even, Parity::Odd] {
                for &l in &imag_grid {
                    push(SpectrumLabel::MotionCont { lambda: l, parity });
                }
            }
            for m in -(n_max as i64)..=(n_max as i64) {
                push(SpectrumLabel::MotionChar { m });
            }
        }
    }
    out
}

/// A node of a closure graph: either the approach to an endpoint of a
/// continuous family, or an individual spectrum label.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosureNode {
    /// The continuous family of the given parity approaching lambda -> sigma.
    FamilyEnd { parity: Parity, sigma: Sign },
    Point(SpectrumLabel),
}

impl ClosureNode {
    pub fn key(&self) -> String {
        match self {
            ClosureNode::FamilyEnd { parity, sigma } => {
                format!("End[eps={:+},sigma={:+}]", parity.sign(), sigma.as_f64() as i8)
            }
            ClosureNode::Point(l) => l.key(),
        }
    }
}

/// Closure relations of the spectrum: an edge a -> b means b lies in the
/// closure of the family a.
#[derive(Debug, Clone)]
pub struct ClosureGraph {
    pub algebra: Algebra,
    pub nodes: Vec<ClosureNode>,
    /// Indices into `nodes`.
    pub edges: Vec<(usize, usize)>,
}

impl ClosureGraph {
    pub fn node_index(&self, key: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.key() == key)
    }

    pub fn successors(&self, from: &str) -> Vec<String> {
        match self.node_index(from) {
            None => Vec::new(),
            Some(i) => self
                .edges
                .iter()
                .filter(|(a, _)| *a == i)
                .map(|(_, b)| self.nodes[*b].key())
                .collect(),
        }
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.successors(from).iter().any(|k| k == to)
    }

    pub fn incoming_count(&self, to: &str) -> usize {
        match self.node_index(to) {
            None => 0,
            Some(i) => self.edges.iter().filter(|(_, b)| *b == i).count(),
        }
    }

    /// Adjacency-list JSON export: {"nodes": [...], "edges": [[from, to]]}.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            nodes: Vec<String>,
            edges: &'a Vec<(usize, usize)>,
        }
        serde_json::to_string(&Doc {
            nodes: self.nodes.iter().map(|n| n.key()).collect(),
            edges: &self.edges,
        })
        .expect("graph serialization cannot fail")
    }
}

/// Computes the closure graph of the q-reduced or groupoid spectrum at desk
/// scale from the constraint blocks: a spectrum point lies in the closure of
/// a family end exactly when its block at the limit fiber is contained in a
/// block of the nearby fibers.  Nothing is hard-coded; the prose description
/// of the topology is cross-checked in the acceptance suite.
pub fn closure_graph(algebra: Algebra, q: f64, t: f64, n_max: u32) -> Result<ClosureGraph> {
    let loc = DeformationPoint::new(q, t)?;
    match algebra {
        Algebra::QReduced if !loc.is_classical() && t != 0.0 => {}
        Algebra::Groupoid if !loc.is_classical() && t == 0.0 => {}
        Algebra::QReduced | Algebra::Groupoid => {
            return Err(Error::Domain(format!(
                "closure graph of {} needs a matching location, got ({q}, {t})",
                algebra.name()
            )))
        }
        _ => {
            return Err(Error::Domain(
                "closure graphs are computed for the q-reduced and groupoid spectra".into(),
            ))
        }
    }

    let n_bound = 2 * n_max as i64 + 4;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();

    match algebra {
        Algebra::QReduced => {
            for sigma in [Sign::Plus, Sign::Minus] {
                for n in 0..=n_max {
                    for sign in [Sign::Plus, Sign::Minus] {
                        nodes.push(ClosureNode::Point(SpectrumLabel::DiscreteQ {
                            sigma,
                            n,
                            sign,
                        }));
                    }
                }
            }
            // even endpoints are spectrum members reachable by their family
            for sigma in [Sign::Plus, Sign::Minus] {
                nodes.push(ClosureNode::Point(SpectrumLabel::PrincipalQ {
                    parity: Parity::Even,
                    lambda: Complex64::from(sigma.as_f64()),
                }));
            }
        }
        Algebra::Groupoid => {
            for sigma in [Sign::Plus, Sign::Minus] {
                for m in -(n_max as i64)..=(n_max as i64) {
                    nodes.push(ClosureNode::Point(SpectrumLabel::GroupoidChar { sigma, m }));
                }
            }
        }
        _ => unreachable!(),
    }

    for parity in [Parity::Even, Parity::Odd] {
        for sigma in [Sign::Plus, Sign::Minus] {
            let end = ClosureNode::FamilyEnd { parity, sigma };
            nodes.push(end.clone());
            let from = nodes.len() - 1;

            let limit = SpectralPoint::principal(parity, loc, Complex64::from(sigma.as_f64()))?;
            let nearby =
                SpectralPoint::principal(parity, loc, Complex64::from_polar(1.0, 0.5f64.atan()))?;
            let limit_blocks = constraint_blocks(&limit, n_bound);
            let nearby_blocks = constraint_blocks(&nearby, n_bound);

            for block in &limit_blocks {
                let included =
                    nearby_blocks.iter().any(|nb| block.iter().all(|k| nb.contains(k)));
                if !included {
                    continue;
                }
                if let Some(label) = block_label(algebra, parity, sigma, block, n_bound) {
                    let key = label.key();
                    if let Some(to) = nodes
                        .iter()
                        .position(|n| matches!(n, ClosureNode::Point(l) if l.key() == key))
                    {
                        edges.push((from, to));
                    }
                    // blocks beyond desk scale have no node and are skipped
                }
            }
        }
    }

    Ok(ClosureGraph { algebra, nodes, edges })
}

/// The spectrum label attached to one constraint block of a limit fiber.
fn block_label(
    algebra: Algebra,
    parity: Parity,
    sigma: Sign,
    block: &[i64],
    n_bound: i64,
) -> Option<SpectrumLabel> {
    match algebra {
        Algebra::QReduced => {
            if block == parity_window(parity, n_bound) {
                Some(SpectrumLabel::PrincipalQ { parity, lambda: Complex64::from(sigma.as_f64()) })
            } else if block == discrete_window(0, Sign::Plus, n_bound) {
                Some(SpectrumLabel::DiscreteQ { sigma, n: 0, sign: Sign::Plus })
            } else if block == discrete_window(0, Sign::Minus, n_bound) {
                Some(SpectrumLabel::DiscreteQ { sigma, n: 0, sign: Sign::Minus })
            } else {
                None
            }
        }
        Algebra::Groupoid => {
            if block.len() == 1 {
                Some(SpectrumLabel::GroupoidChar { sigma, m: block[0] })
            } else {
                None
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn loc(q: f64, t: f64) -> DeformationPoint {
        DeformationPoint::new(q, t).unwrap()
    }

    #[test]
    fn classify_discrete_points() {
        // order (1, +) at (2, 1): Lambda = 2
        let s = SpectralPoint::discrete(Sign::Plus, 1, Sign::Plus, loc(2.0, 1.0)).unwrap();
        let c = classify(&s);
        assert!((c.lambda - Complex64::from(2.0)).norm() < 1e-14);
        assert_eq!(c.parity, Parity::Even);

        // order (2, -) at (1, 0): Lambda = 0, K-types {-3, -5, ...}
        let s = SpectralPoint::discrete(Sign::Plus, 2, Sign::Minus, loc(1.0, 0.0)).unwrap();
        let c = classify(&s);
        assert_eq!(c.lambda, Complex64::ZERO);
        assert_eq!(c.ktypes.window(9), vec![-9, -7, -5, -3]);
        assert!(c.ktypes.contains(-5) && !c.ktypes.contains(5) && !c.ktypes.contains(-2));
    }

    #[test]
    fn classify_principal_points() {
        let i = Complex64::new(0.0, 1.0);
        let s = SpectralPoint::principal(Parity::Odd, loc(2.0, 1.0), i).unwrap();
        let c = classify(&s);
        assert_eq!(c.lambda, i);
        assert_eq!(c.parity, Parity::Odd);
        assert_eq!(c.ktypes, KTypeSet::FullParity(Parity::Odd));

        // q = 1, t != 0: Lambda = lambda / t
        let s = SpectralPoint::principal(Parity::Even, loc(1.0, 0.5), i * 2.0).unwrap();
        assert!((classify(&s).lambda - i * 4.0).norm() < 1e-14);

        // corner: Lambda is the coordinate itself
        let s = SpectralPoint::principal(Parity::Even, loc(1.0, 0.0), i * 2.0).unwrap();
        assert!((classify(&s).lambda - i * 2.0).norm() < 1e-14);
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(SpectralPoint::discrete(Sign::Minus, 1, Sign::Plus, loc(1.0, 1.0)).is_err());
        assert!(SpectralPoint::discrete(Sign::Plus, 0, Sign::Plus, loc(2.0, 1.0)).is_err());
        assert!(
            SpectralPoint::principal(Parity::Even, loc(2.0, 1.0), Complex64::from(2.0)).is_err()
        );
        assert!(
            SpectralPoint::principal(Parity::Even, loc(1.0, 1.0), Complex64::from(0.5)).is_err()
        );
    }

    #[test]
    fn constraint_block_cases() {
        // odd continuous, t != 0, real character: two half-lines
        let s =
            SpectralPoint::principal(Parity::Odd, loc(2.0, 1.0), Complex64::from(1.0)).unwrap();
        let blocks = constraint_blocks(&s, 7);
        assert_eq!(blocks, vec![vec![1, 3, 5, 7], vec![-7, -5, -3, -1]]);

        // even continuous with non-real character: trivial
        let s = SpectralPoint::principal(Parity::Even, loc(2.0, 1.0), Complex64::new(0.0, 1.0))
            .unwrap();
        assert_eq!(constraint_blocks(&s, 6).len(), 1);

        // discrete at t = 0: singleton blocks
        let s = SpectralPoint::discrete(Sign::Plus, 1, Sign::Plus, loc(2.0, 0.0)).unwrap();
        let blocks = constraint_blocks(&s, 8);
        assert_eq!(blocks, vec![vec![2], vec![4], vec![6], vec![8]]);
    }

    fn pos_in(w: &[i64], k: i64) -> usize {
        w.iter().position(|&s| s == k).unwrap()
    }

    #[test]
    fn jmap_is_indicator_projection() {
        // parity -1 source: J_{0,+} keeps zeta_1, kills zeta_{-1}
        let j = jmap_order(0, Sign::Plus, Parity::Odd, 7).unwrap();
        assert_eq!(
            j.matrix[(pos_in(&j.target_window, 1), pos_in(&j.source_window, 1))],
            Complex64::ONE
        );
        for r in 0..j.target_window.len() {
            assert_eq!(j.matrix[(r, pos_in(&j.source_window, -1))], Complex64::ZERO);
        }

        // J_{2,-} keeps zeta_{-5}
        let j = jmap_order(2, Sign::Minus, Parity::Odd, 9).unwrap();
        assert_eq!(
            j.matrix[(pos_in(&j.target_window, -5), pos_in(&j.source_window, -5))],
            Complex64::ONE
        );

        // J J^T is the identity on the target window (orthogonal projector)
        let p = &j.matrix * j.matrix.transpose();
        for r in 0..j.target_window.len() {
            for c in 0..j.target_window.len() {
                let expect = if r == c { Complex64::ONE } else { Complex64::ZERO };
                assert_eq!(p[(r, c)], expect);
            }
        }
    }

    #[test]
    fn jmap_preconditions() {
        let src =
            SpectralPoint::principal(Parity::Odd, loc(2.0, 0.0), Complex64::from(1.0)).unwrap();
        let tgt = SpectralPoint::discrete(Sign::Plus, 2, Sign::Plus, loc(2.0, 0.0)).unwrap();
        assert!(jmap(&tgt, &src, 10).is_ok());

        let tgt_off = SpectralPoint::discrete(Sign::Plus, 2, Sign::Plus, loc(3.0, 0.0)).unwrap();
        assert!(jmap(&tgt_off, &src, 10).is_err());

        let src_t =
            SpectralPoint::principal(Parity::Odd, loc(2.0, 1.0), Complex64::from(1.0)).unwrap();
        assert!(jmap(&tgt, &src_t, 10).is_err());

        // parity mismatch: order 1 target has even parity
        let tgt_even = SpectralPoint::discrete(Sign::Plus, 1, Sign::Plus, loc(2.0, 0.0)).unwrap();
        assert!(jmap(&tgt_even, &src, 10).is_err());
    }

    #[test]
    fn jmap_intertwines_groupoid_module_actions() {
        use crate::modgen::{build_groupoid, TKind};
        // at t = 0 with matching character and parity, the projection
        // intertwines the full fiber action with the character-sum action
        let n_bound = 12;
        for sigma in [1.0f64, -1.0] {
            for order in [1u32, 2, 3] {
                let parity = Parity::of_discrete_order(order);
                let source = build_groupoid(Complex64::from(sigma), parity, n_bound).unwrap();
                for sign in [Sign::Plus, Sign::Minus] {
                    let j = jmap_order(order, sign, parity, n_bound).unwrap();
                    let tw = &j.target_window;
                    for (idx, op) in [
                        source.theta().clone(),
                        source.t_op(0, TKind::Diag),
                        source.t_op(0, TKind::Up),
                        source.t_op(0, TKind::Down),
                    ]
                    .iter()
                    .enumerate()
                    {
                        // target action: restriction of the source operator
                        // to the discrete window (a character sum)
                        let mut tgt = crate::linalg::czero(tw.len(), tw.len());
                        for (r, &kr) in tw.iter().enumerate() {
                            for (c, &kc) in tw.iter().enumerate() {
                                let rr = j.source_window.iter().position(|&k| k == kr).unwrap();
                                let cc = j.source_window.iter().position(|&k| k == kc).unwrap();
                                tgt[(r, c)] = op[(rr, cc)];
                            }
                        }
                        let resid =
                            crate::linalg::max_abs(&(&j.matrix * op - tgt * &j.matrix));
                        assert!(
                            resid < 1e-12,
                            "generator {idx} leaks {resid:.3e} at sigma={sigma}, order={order}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_enumeration_counts() {
        let n_max = 2;
        let qr = enumerate_spectrum(Algebra::QReduced, 9, n_max);
        // even: 9 points, odd: 7 (endpoints excluded), discrete: 2*2*3
        assert_eq!(qr.len(), 9 + 7 + 12);
        assert!(qr.iter().any(|p| matches!(p.label, SpectrumLabel::DiscreteQ { n: 2, .. })));

        let gr = enumerate_spectrum(Algebra::Groupoid, 9, n_max);
        // cont: 7 + 7, chars: 2 * 5
        assert_eq!(gr.len(), 14 + 10);

        let d = SpectrumLabel::DiscreteQ { sigma: Sign::Plus, n: 2, sign: Sign::Plus };
        assert_eq!(d.min_ktypes(), vec![3]);
        let o =
            SpectrumLabel::PrincipalQ { parity: Parity::Odd, lambda: Complex64::new(0.0, 1.0) };
        assert_eq!(o.min_ktypes(), vec![-1, 1]);
    }

    #[test]
    fn excluded_labels() {
        assert!(SpectrumLabel::PrincipalQ { parity: Parity::Odd, lambda: Complex64::from(1.0) }
            .validate()
            .is_err());
        assert!(SpectrumLabel::PrincipalQ { parity: Parity::Even, lambda: Complex64::from(-1.0) }
            .validate()
            .is_ok());
    }

    #[test]
    fn q_reduced_closure_structure() {
        let g = closure_graph(Algebra::QReduced, 2.0, 1.0, 3).unwrap();
        assert!(g.has_edge("End[eps=-1,sigma=+1]", "DisQ[sigma=+1,n=0,+]"));
        assert!(g.has_edge("End[eps=-1,sigma=+1]", "DisQ[sigma=+1,n=0,-]"));
        assert!(g.has_edge("End[eps=-1,sigma=-1]", "DisQ[sigma=-1,n=0,-]"));
        let even_end =
            SpectrumLabel::PrincipalQ { parity: Parity::Even, lambda: Complex64::from(1.0) };
        assert!(g.has_edge("End[eps=+1,sigma=+1]", &even_end.key()));
        // higher discrete labels are isolated
        assert_eq!(g.incoming_count("DisQ[sigma=+1,n=2,+]"), 0);
        assert_eq!(g.incoming_count("DisQ[sigma=-1,n=1,-]"), 0);

        // counting: 4(n_max + 1) discrete labels, exactly 4 of them glued
        let discrete: Vec<_> = g
            .nodes
            .iter()
            .filter(|n| matches!(n, ClosureNode::Point(SpectrumLabel::DiscreteQ { .. })))
            .collect();
        assert_eq!(discrete.len(), 16);
        let glued = g
            .nodes
            .iter()
            .filter(|n| match n {
                ClosureNode::Point(l @ SpectrumLabel::DiscreteQ { .. }) => {
                    g.incoming_count(&l.key()) > 0
                }
                _ => false,
            })
            .count();
        assert_eq!(glued, 4);
    }

    #[test]
    fn groupoid_closure_parity_rule() {
        let g = closure_graph(Algebra::Groupoid, 2.0, 0.0, 4).unwrap();
        // odd family end at sigma = 1 reaches odd characters only
        assert!(g.has_edge("End[eps=-1,sigma=+1]", "GChar[sigma=+1,m=3]"));
        assert!(g.has_edge("End[eps=-1,sigma=+1]", "GChar[sigma=+1,m=-1]"));
        assert!(!g.has_edge("End[eps=-1,sigma=+1]", "GChar[sigma=+1,m=2]"));
        assert!(g.has_edge("End[eps=+1,sigma=-1]", "GChar[sigma=-1,m=0]"));
        assert!(!g.has_edge("End[eps=+1,sigma=+1]", "GChar[sigma=-1,m=0]"));
    }

    #[test]
    fn closure_graph_location_checks() {
        assert!(closure_graph(Algebra::QReduced, 2.0, 0.0, 2).is_err());
        assert!(closure_graph(Algebra::Groupoid, 2.0, 1.0, 2).is_err());
        assert!(closure_graph(Algebra::Motion, 1.0, 0.0, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn blocks_partition_the_window(
            odd in any::<bool>(),
            angle in 0.0f64..std::f64::consts::PI,
            t_zero in any::<bool>(),
        ) {
            let parity = if odd { Parity::Odd } else { Parity::Even };
            let t = if t_zero { 0.0 } else { 1.0 };
            let lambda = Complex64::from_polar(1.0, angle);
            let s = SpectralPoint::principal(parity, loc(2.0, t), lambda).unwrap();
            let blocks = constraint_blocks(&s, 11);
            let mut all: Vec<i64> = blocks.concat();
            all.sort_unstable();
            prop_assert_eq!(all, parity_window(parity, 11));
            let total: usize = blocks.iter().map(|b| b.len()).sum();
            let mut dedup: Vec<i64> = blocks.concat();
            dedup.sort_unstable();
            dedup.dedup();
            prop_assert_eq!(total, dedup.len());
        }
    }
}
