//! The Mackey embedding and bijection for the q-deformed group at fixed
//! q != 1: norm-ratio isometries between fibers, the induced maps alpha_t at
//! matrix level, the pullback decompositions of alpha_0, the bijection mu
//! between the q-reduced and groupoid spectra, and its verification suite
//! (bijectivity, inductive re-derivation, minimal K-types, continuity on
//! closure edges, and the inverse-discontinuity witness).

use num_complex::Complex64;
use serde::Serialize;

use crate::fieldsec::{fiber_weights, section_matrix, section_scalar, SectionId, SectionKind};
use crate::linalg::CMat;
use crate::modgen::{Parity, Sign};
use crate::paramspace::{
    closure_graph, enumerate_spectrum, Algebra, ClosureNode, SpectralPoint,
    SpectrumLabel,
};
use crate::scalars::DeformationPoint;
use crate::{Error, Result};

/// The diagonal norm-ratio isometry from the fiber at `s` to the matching
/// fiber of the reference level t = 1 over the same q: entries are the
/// square roots of the weight ratios.
pub fn v_isometry(s: &SpectralPoint, reference_q: f64, n_bound: i64) -> Result<Vec<f64>> {
    let reference = DeformationPoint::new(reference_q, 1.0)?;
    let source = fiber_weights(s, n_bound);
    let target_point = match s.component {
        crate::paramspace::Component::Pri { parity } => SpectralPoint::principal(
            parity,
            reference,
            // same window; the coordinate is irrelevant for weights
            Complex64::new(0.0, 1.0),
        )?,
        crate::paramspace::Component::Dis { sigma, n, sign } => {
            SpectralPoint::discrete(sigma, n, sign, reference)?
        }
    };
    let target = fiber_weights(&target_point, n_bound);
    Ok(source.iter().zip(&target).map(|(s, t)| (s / t).sqrt()).collect())
}

/// A groupoid-side generator element f e_n with f in {1, T, T+, T-}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupoidGenerator {
    pub kind: SectionKind,
    pub n: i64,
}

/// The matrix of alpha_t on one generator, in the irreducible continuous
/// block labeled (Lambda, parity) of the reference fiber at (q, 1):
/// evaluates the generator on the (q, t)-fiber and conjugates by the
/// norm-ratio isometry.
pub fn alpha_t_image(
    g: GroupoidGenerator,
    q: f64,
    t: f64,
    lambda: Complex64,
    parity: Parity,
    n_bound: i64,
) -> Result<CMat> {
    if q == 1.0 {
        return Err(Error::Domain("the embedding is defined for fixed q != 1".into()));
    }
    let fiber = SpectralPoint::principal(parity, DeformationPoint::new(q, t)?, lambda)?;
    let block = section_matrix(&fiber, SectionId::new(g.kind, g.n), n_bound);
    let v = v_isometry(&fiber, q, n_bound)?;
    let mut out = block;
    for r in 0..out.nrows() {
        for c in 0..out.ncols() {
            out[(r, c)] *= v[r] / v[c];
        }
    }
    Ok(out)
}

/// The Mackey bijection on spectrum labels: continuous q-principal labels go
/// to the continuous groupoid family, the even endpoints to the K-fixed
/// characters at m = 0, and the discrete series of order n to the characters
/// at m = +-(n + 1).
pub fn mu(x: &SpectrumLabel) -> Result<SpectrumLabel> {
    x.validate()?;
    match *x {
        SpectrumLabel::PrincipalQ { parity, lambda } => {
            if lambda.im.abs() > 1e-12 {
                Ok(SpectrumLabel::GroupoidCont { lambda, parity })
            } else {
                // parity odd at lambda = +-1 was rejected by validate()
                let sigma = if lambda.re >= 0.0 { Sign::Plus } else { Sign::Minus };
                Ok(SpectrumLabel::GroupoidChar { sigma, m: 0 })
            }
        }
        SpectrumLabel::DiscreteQ { sigma, n, sign } => Ok(SpectrumLabel::GroupoidChar {
            sigma,
            m: match sign {
                Sign::Plus => n as i64 + 1,
                Sign::Minus => -(n as i64) - 1,
            },
        }),
        _ => Err(Error::InvalidLabel(
            "the bijection is defined on the q-reduced spectrum".into(),
        )),
    }
}

/// The decomposition of the pullback of an irreducible along the embedding
/// at t = 0, truncated to characters with |m| <= m_cap.
pub fn pullback_decomposition(x: &SpectrumLabel, m_cap: u32) -> Result<Vec<SpectrumLabel>> {
    x.validate()?;
    match *x {
        SpectrumLabel::PrincipalQ { parity, lambda } => {
            if lambda.im.abs() > 1e-12 {
                Ok(vec![SpectrumLabel::GroupoidCont { lambda, parity }])
            } else {
                let sigma = if lambda.re >= 0.0 { Sign::Plus } else { Sign::Minus };
                // the even endpoint pulls back to all even characters
                Ok((-(m_cap as i64)..=m_cap as i64)
                    .filter(|m| m.rem_euclid(2) == 0)
                    .map(|m| SpectrumLabel::GroupoidChar { sigma, m })
                    .collect())
            }
        }
        SpectrumLabel::DiscreteQ { sigma, n, sign } => Ok((-(m_cap as i64)..=m_cap as i64)
            .filter(|&m| {
                let signed = match sign {
                    Sign::Plus => m,
                    Sign::Minus => -m,
                };
                signed > n as i64 && (signed - n as i64).rem_euclid(2) == 1
            })
            .map(|m| SpectrumLabel::GroupoidChar { sigma, m })
            .collect()),
        _ => Err(Error::InvalidLabel(
            "pullbacks are computed for the q-reduced spectrum".into(),
        )),
    }
}

/// The bijection tabulated over the desk-scale spectrum.
#[derive(Debug, Clone)]
pub struct MuTable {
    pub entries: Vec<(SpectrumLabel, SpectrumLabel)>,
}

impl MuTable {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row(String, String);
        let rows: Vec<Row> =
            self.entries.iter().map(|(a, b)| Row(a.key(), b.key())).collect();
        serde_json::to_string(&rows).expect("table serialization cannot fail")
    }
}

/// Tabulates mu over the desk-scale q-reduced spectrum.
pub fn mu_table(lambda_grid_resolution: usize, n_max: u32) -> Result<MuTable> {
    let mut entries = Vec::new();
    for p in enumerate_spectrum(Algebra::QReduced, lambda_grid_resolution, n_max) {
        entries.push((p.label, mu(&p.label)?));
    }
    Ok(MuTable { entries })
}

/// Outcome of the full bijection verification.
#[derive(Debug, Clone)]
pub struct MuReport {
    pub labels_checked: usize,
    pub bijective: bool,
    pub inductive_rederivation_consistent: bool,
    pub min_ktypes_preserved: bool,
    pub continuous_on_closure_edges: bool,
    pub inverse_discontinuity_witness: Option<(String, String)>,
    pub containment_holds: bool,
}

impl MuReport {
    pub fn pass(&self) -> bool {
        self.bijective
            && self.inductive_rederivation_consistent
            && self.min_ktypes_preserved
            && self.continuous_on_closure_edges
            && self.inverse_discontinuity_witness.is_some()
            && self.containment_holds
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,pass\n");
        out.push_str(&format!("bijective,{}\n", self.bijective));
        out.push_str(&format!("inductive_rederivation,{}\n", self.inductive_rederivation_consistent));
        out.push_str(&format!("min_ktypes_preserved,{}\n", self.min_ktypes_preserved));
        out.push_str(&format!("closure_continuity,{}\n", self.continuous_on_closure_edges));
        out.push_str(&format!(
            "inverse_discontinuity_witness,{}\n",
            self.inverse_discontinuity_witness.is_some()
        ));
        out.push_str(&format!("pullback_containment,{}\n", self.containment_holds));
        out
    }
}

/// Verifies the bijection at desk scale: set bijectivity against the
/// groupoid spectrum, the inductive re-derivation from the pullback
/// decompositions, minimal-K-type preservation, continuity on every closure
/// edge, an inverse-discontinuity witness, and the defining containment
/// mu(x) in the pullback decomposition of x.
pub fn verify_mu(q: f64, n_max: u32, lambda_grid_resolution: usize) -> Result<MuReport> {
    let source = enumerate_spectrum(Algebra::QReduced, lambda_grid_resolution, n_max);
    // the images of order-n discrete labels are characters at |m| = n + 1
    let target = enumerate_spectrum(Algebra::Groupoid, lambda_grid_resolution, n_max + 1);

    // (a) bijectivity as key sets
    let mut image: Vec<String> = Vec::with_capacity(source.len());
    for p in &source {
        image.push(mu(&p.label)?.key());
    }
    let mut image_sorted = image.clone();
    image_sorted.sort();
    let injective = image_sorted.windows(2).all(|w| w[0] != w[1]);
    let mut target_keys: Vec<String> = target.iter().map(|p| p.label.key()).collect();
    target_keys.sort();
    let bijective = injective && image_sorted == target_keys;

    // (b) re-derive mu on characters by the elimination order of increasing
    // |m| and compare: at each step exactly one unassigned label must carry
    // the character in its pullback decomposition.
    let m_cap = n_max + 1;
    let mut assigned: Vec<(String, String)> = Vec::new();
    let mut consistent = true;
    let char_carriers = |sigma: Sign, m: i64, taken: &[(String, String)]| -> Vec<SpectrumLabel> {
        let mut carriers = Vec::new();
        // candidates: the even endpoint and all discrete labels of order < |m|
        let endpoint = SpectrumLabel::PrincipalQ {
            parity: Parity::Even,
            lambda: Complex64::from(sigma.as_f64()),
        };
        let mut candidates = vec![endpoint];
        for n in 0..=n_max {
            for sign in [Sign::Plus, Sign::Minus] {
                candidates.push(SpectrumLabel::DiscreteQ { sigma, n, sign });
            }
        }
        for cand in candidates {
            if taken.iter().any(|(k, _)| *k == cand.key()) {
                continue;
            }
            if let Ok(dec) = pullback_decomposition(&cand, m_cap) {
                if dec
                    .iter()
                    .any(|l| matches!(l, SpectrumLabel::GroupoidChar { sigma: s2, m: m2 } if *s2 == sigma && *m2 == m))
                {
                    carriers.push(cand);
                }
            }
        }
        carriers
    };
    'outer: for abs_m in 0..=m_cap as i64 {
        let ms: Vec<i64> = if abs_m == 0 { vec![0] } else { vec![abs_m, -abs_m] };
        for m in ms {
            for sigma in [Sign::Plus, Sign::Minus] {
                let carriers = char_carriers(sigma, m, &assigned);
                if carriers.len() != 1 {
                    consistent = false;
                    break 'outer;
                }
                let derived = carriers[0];
                let expected = mu(&derived)?;
                let got = SpectrumLabel::GroupoidChar { sigma, m };
                if expected.key() != got.key() {
                    consistent = false;
                    break 'outer;
                }
                assigned.push((derived.key(), got.key()));
            }
        }
    }

    // (c) minimal-K-type preservation on every label
    let mut min_ktypes_preserved = true;
    for p in &source {
        if mu(&p.label)?.min_ktypes() != p.label.min_ktypes() {
            min_ktypes_preserved = false;
        }
    }

    // (d) continuity on closure edges: every edge family-end -> b of the
    // q-reduced graph must map to an edge onto mu(b) in the groupoid graph
    let g_q = closure_graph(Algebra::QReduced, q, 1.0, n_max)?;
    let g_g = closure_graph(Algebra::Groupoid, q, 0.0, n_max + 1)?;
    let mut continuous = true;
    for (a, b) in &g_q.edges {
        let ClosureNode::FamilyEnd { parity, sigma } = &g_q.nodes[*a] else {
            continue;
        };
        let ClosureNode::Point(label) = &g_q.nodes[*b] else {
            continue;
        };
        // mu maps the family of this parity to the groupoid family of the
        // same parity; the image edge must exist at the same endpoint
        let end_key = ClosureNode::FamilyEnd { parity: *parity, sigma: *sigma }.key();
        let image_key = mu(label)?.key();
        if !g_g.has_edge(&end_key, &image_key) {
            continuous = false;
        }
    }

    // (e) inverse discontinuity: a character glued to the continuous
    // groupoid family whose preimage is isolated in the q-reduced spectrum
    let mut witness = None;
    for sigma in [Sign::Plus, Sign::Minus] {
        for n in 1..=n_max {
            let pre = SpectrumLabel::DiscreteQ { sigma, n, sign: Sign::Plus };
            let img = mu(&pre)?;
            let glued_in_groupoid = g_g.incoming_count(&img.key()) > 0;
            let isolated_in_q = g_q.incoming_count(&pre.key()) == 0;
            if glued_in_groupoid && isolated_in_q {
                witness = Some((img.key(), pre.key()));
                break;
            }
        }
    }

    // (f) the defining containment mu(x) in the pullback decomposition
    let mut containment = true;
    for p in &source {
        let image = mu(&p.label)?;
        let dec = pullback_decomposition(&p.label, m_cap)?;
        if !dec.iter().any(|l| l.key() == image.key()) {
            containment = false;
        }
    }

    Ok(MuReport {
        labels_checked: source.len(),
        bijective,
        inductive_rederivation_consistent: consistent,
        min_ktypes_preserved,
        continuous_on_closure_edges: continuous,
        inverse_discontinuity_witness: witness,
        containment_holds: containment,
    })
}

/// Checks that alpha_t behaves as a morphism at matrix level on a grid of
/// generator pairs: images of products computed through the fiber modules
/// match products of images.  Returns the worst residual.
pub fn alpha_morphism_residual(
    q: f64,
    t: f64,
    lambda: Complex64,
    parity: Parity,
    n_bound: i64,
) -> Result<f64> {
    let fiber = SpectralPoint::principal(parity, DeformationPoint::new(q, t)?, lambda)?;
    let v = v_isometry(&fiber, q, n_bound)?;
    let window = crate::fieldsec::fiber_window(&fiber, n_bound);
    let mut worst = 0.0f64;
    let kinds = [SectionKind::Projection, SectionKind::Diag, SectionKind::Up, SectionKind::Down];
    for &n in window.iter().filter(|k| k.abs() <= n_bound - 6) {
        for ka in kinds {
            for kb in kinds {
                // (f e_a)(g e_n) is nonzero only when e_a meets the target
                // line of g e_n; the product is then (f g) e_n supported on
                // one matrix entry.
                let a = GroupoidGenerator { kind: ka, n: n + kb.shift() };
                let b = GroupoidGenerator { kind: kb, n };
                let ia = alpha_t_image(a, q, t, lambda, parity, n_bound)?;
                let ib = alpha_t_image(b, q, t, lambda, parity, n_bound)?;
                let product = ia * ib;

                // the same product through the fiber scalars, conjugated once
                let scalar = section_scalar(&fiber, SectionId::new(ka, a.n))
                    * section_scalar(&fiber, SectionId::new(kb, n));
                let target = n + ka.shift() + kb.shift();
                let mut direct =
                    crate::fieldsec::rank_one(&fiber, n, target, n_bound) * scalar;
                for r in 0..direct.nrows() {
                    for c in 0..direct.ncols() {
                        direct[(r, c)] *= v[r] / v[c];
                    }
                }
                worst = worst.max(crate::linalg::max_abs(&(product - direct)));
            }
        }
    }
    Ok(worst)
}
