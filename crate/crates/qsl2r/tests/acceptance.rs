//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! The criteria are property-based at desk scale: relation and unitarity
//! residuals over parameter grids, the discrete-weight oracle, boundary
//! convergence orders, submodule windows, the field-section certificates,
//! the Mackey bijection, and the K-theory skeleton.

mod common;

use std::time::Instant;

use num_complex::Complex64;
use qsl2r::afield::{kappa, s_images_max_gap, verify_specialization, AnalyticLambda};
use qsl2r::algcheck::{check_relations_limit, check_relations_uq, check_unitarity};
use qsl2r::fieldsec::{
    check_block_diagonality, check_j_equivariance, check_vanishing, refinement_slope, SectionId,
    SectionKind, StandardPath,
};
use qsl2r::ktheory::{k_summary, stratify, verify_rank_claim, wm};
use qsl2r::linalg::loglog_slope;
use qsl2r::mackey::verify_mu;
use qsl2r::modgen::{
    build_classical_principal, build_discrete_q, build_groupoid, build_motion, build_principal_q,
    discrete_weight_at, discrete_window, Parity, Sign,
};
use qsl2r::paramspace::{circle_grid, closure_graph, Algebra, SpectrumLabel};
use qsl2r::scalars::{qpow, DeformationPoint};

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!("acceptance {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion} failed: {detail}");
}

/// Criterion 1: defining relations across the deformed and limit families.
#[test]
fn criterion_1_relation_suite() {
    let start = Instant::now();
    let angles = circle_grid(25);
    let mut worst_q = 0.0f64;
    for qt in [0.5, 0.8, 1.25, 2.0] {
        let base = DeformationPoint::new(qt, 1.0).unwrap();
        for &a in &angles {
            let lambda = Complex64::from_polar(1.0, a);
            for parity in [Parity::Even, Parity::Odd] {
                let m = build_principal_q(base, parity, lambda, 60).unwrap();
                for r in check_relations_uq(&m, 1e-10).unwrap() {
                    worst_q = worst_q.max(r.max_abs_residual);
                }
            }
        }
    }

    let mut worst_limit = 0.0f64;
    for parity in [Parity::Even, Parity::Odd] {
        for im in [0.5, 1.0, 2.0] {
            let m = build_motion(Complex64::new(0.0, im), parity, 60).unwrap();
            for r in check_relations_limit(&m, 1e-12).unwrap() {
                worst_limit = worst_limit.max(r.max_abs_residual);
            }
            let c = build_classical_principal(Complex64::new(0.0, im), parity, 60).unwrap();
            for r in check_relations_limit(&c, 1e-12).unwrap() {
                worst_limit = worst_limit.max(r.max_abs_residual);
            }
        }
        for &a in circle_grid(9).iter() {
            let g = build_groupoid(Complex64::from_polar(1.0, a), parity, 60).unwrap();
            for r in check_relations_limit(&g, 1e-12).unwrap() {
                worst_limit = worst_limit.max(r.max_abs_residual);
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_q < 1e-10 && worst_limit < 1e-12 && elapsed < 10.0;
    verdict(
        "criterion 1 (relation suite)",
        pass,
        &format!("q-residual {worst_q:.3e}, limit residual {worst_limit:.3e}, {elapsed:.2} s"),
    );
}

/// Criterion 2: unitarity passes exactly on the tempered lists and fails on
/// the off-circle controls.
#[test]
fn criterion_2_unitarity_suite() {
    let base = DeformationPoint::new(2.0, 1.0).unwrap();
    let mut worst_tempered = 0.0f64;

    for &a in circle_grid(9).iter() {
        let lambda = Complex64::from_polar(1.0, a);
        for parity in [Parity::Even, Parity::Odd] {
            if parity == Parity::Odd && lambda.im.abs() < 1e-12 {
                continue; // not in the spectrum
            }
            let m = build_principal_q(base, parity, lambda, 40).unwrap();
            worst_tempered = worst_tempered.max(check_unitarity(&m, 1e-10).max_abs_residual);
            let g = build_groupoid(lambda, parity, 40).unwrap();
            worst_tempered = worst_tempered.max(check_unitarity(&g, 1e-10).max_abs_residual);
        }
    }
    for sigma in [Sign::Plus, Sign::Minus] {
        for n in [0, 1, 2, 5] {
            for sign in [Sign::Plus, Sign::Minus] {
                let d = build_discrete_q(base, sigma, n, sign, 40).unwrap();
                worst_tempered = worst_tempered.max(check_unitarity(&d, 1e-10).max_abs_residual);
            }
        }
    }
    for parity in [Parity::Even, Parity::Odd] {
        let mo = build_motion(Complex64::new(0.0, 1.5), parity, 40).unwrap();
        worst_tempered = worst_tempered.max(check_unitarity(&mo, 1e-12).max_abs_residual);
        let cl = build_classical_principal(Complex64::new(0.0, 0.9), parity, 40).unwrap();
        worst_tempered = worst_tempered.max(check_unitarity(&cl, 1e-12).max_abs_residual);
    }

    // controls: the same module off the circle must fail grossly
    let mut weakest_control = f64::INFINITY;
    for radius in [0.9, 1.1] {
        for a in [std::f64::consts::FRAC_PI_3, 1.9] {
            let lambda = Complex64::from_polar(radius, a);
            let m = build_principal_q(base, Parity::Even, lambda, 40).unwrap();
            weakest_control = weakest_control.min(check_unitarity(&m, 1e-10).max_abs_residual);
        }
    }

    let pass = worst_tempered < 1e-10 && weakest_control > 1e-2;
    verdict(
        "criterion 2 (unitarity suite)",
        pass,
        &format!("tempered residual {worst_tempered:.3e}, weakest control {weakest_control:.3e}"),
    );
}

/// Criterion 3: the closed discrete-weight formula equals the
/// unitarity-recursion oracle.
#[test]
fn criterion_3_discrete_weight_oracle() {
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for qt in [0.5, 2.0] {
        for n in 0..=10u32 {
            for sigma in [Sign::Plus, Sign::Minus] {
                let oracle = common::discrete_weight_oracle(qt, n, sigma, 60);
                for (k, w_oracle) in oracle {
                    let w_closed = discrete_weight_at(qt, n, k.abs());
                    let rel = (w_closed - w_oracle).abs() / w_oracle;
                    worst = worst.max(rel);
                    compared += 1;
                }
            }
        }
    }
    let pass = worst < 1e-12 && compared > 1000;
    verdict(
        "criterion 3 (discrete-weight oracle)",
        pass,
        &format!("worst relative gap {worst:.3e} over {compared} weights"),
    );
}

/// Criterion 4: the analytic family converges to the boundary rows at first
/// order, and the finite-difference kappa values match the closed table.
#[test]
fn criterion_4_specialization_suite() {
    let ns = [0i64, 2, -4];
    let mut slopes = Vec::new();
    for mu in [0.0, 1.0, 2.5] {
        let lam = AnalyticLambda::power_imag(mu);

        let ts = [1e-1, 1e-2, 1e-3, 1e-4];
        let errs_t: Vec<f64> = ts
            .iter()
            .map(|&t| {
                s_images_max_gap(&lam, Parity::Even, (2.0, t), (2.0, 0.0), &ns, 20).unwrap()
            })
            .collect();
        slopes.push(("t", mu, loglog_slope(&ts, &errs_t)));

        let devs = [1e-2, 1e-3, 1e-4, 1e-5];
        let errs_q: Vec<f64> = devs
            .iter()
            .map(|&d| {
                s_images_max_gap(&lam, Parity::Even, (1.0 + d, 0.8), (1.0, 0.8), &ns, 20).unwrap()
            })
            .collect();
        slopes.push(("q", mu, loglog_slope(&devs, &errs_q)));
    }
    let slopes_ok = slopes.iter().all(|(_, _, s)| (0.9..=1.1).contains(s));

    // pointwise specialization checks at the table rows
    let lam = AnalyticLambda::power_imag(1.0);
    let grid =
        [(2.0, 0.7), (2.0, 0.0), (1.0, 0.7), (1.0, 0.0), (0.5, -0.4), (1.25, 0.0), (1.0, -0.5)];
    let report = verify_specialization(&lam, Parity::Even, &grid, 24, 1e-8).unwrap();

    // finite-difference kappa against the closed boundary values
    let mut worst_fd = 0.0f64;
    for mu in [0.0, 1.0, 2.5] {
        let lam = AnalyticLambda::power_imag(mu);
        for t in [0.3, 1.0, -0.7] {
            for n in [-4i64, -1, 0, 3] {
                let (kn, kp, km) = kappa(1.0, t, n, &lam);
                let d_exact = Complex64::new(0.0, mu * t);
                worst_fd = worst_fd.max(kn.norm());
                worst_fd =
                    worst_fd.max((kp - (d_exact + Complex64::from(t * (1 + n) as f64))).norm());
                worst_fd =
                    worst_fd.max((km - (d_exact + Complex64::from(t * (1 - n) as f64))).norm());
            }
        }
        let (_, kp0, _) = kappa(1.0, 0.0, 2, &lam);
        worst_fd = worst_fd.max(kp0.norm()); // derivative vanishes at the corner
    }

    let pass = slopes_ok && report.pass() && worst_fd < 1e-6;
    verdict(
        "criterion 4 (specialization/kappa suite)",
        pass,
        &format!(
            "slopes {:?}, table rows pass = {}, kappa fd gap {worst_fd:.3e}",
            slopes.iter().map(|s| (s.0, s.1, (s.2 * 1e3).round() / 1e3)).collect::<Vec<_>>(),
            report.pass()
        ),
    );
}

/// Criterion 5: invariant half-line windows at the reducible parameters.
#[test]
fn criterion_5_submodule_structure() {
    let n_bound = 40;
    let mut worst_leak = 0.0f64;
    let mut windows_ok = true;
    for qt in [0.5, 2.0] {
        let base = DeformationPoint::new(qt, 1.0).unwrap();
        for sigma in [Sign::Plus, Sign::Minus] {
            for n in 0..=8u32 {
                let lambda = Complex64::from(sigma.as_f64() * qpow(qt, n as i64));
                let parity = Parity::of_discrete_order(n);
                let m = build_principal_q(base, parity, lambda, n_bound).unwrap();

                let plus = discrete_window(n, Sign::Plus, n_bound);
                let minus = discrete_window(n, Sign::Minus, n_bound);
                windows_ok &= m.invariant_closure(n as i64 + 1, 1e-12) == plus;
                windows_ok &= m.invariant_closure(-(n as i64) - 1, 1e-12) == minus;

                // explicit leakage out of each half-line
                for window in [&plus, &minus] {
                    let in_pos: Vec<usize> =
                        window.iter().map(|&k| m.pos(k).unwrap()).collect();
                    let out_pos: Vec<usize> =
                        (0..m.dim()).filter(|p| !in_pos.contains(p)).collect();
                    for g in [m.x(), m.x_star(), m.z(), m.theta()] {
                        let (_, leak) = qsl2r::linalg::max_abs_on(g, &out_pos, &in_pos);
                        worst_leak = worst_leak.max(leak);
                    }
                }
            }
        }
    }
    let pass = windows_ok && worst_leak < 1e-12;
    verdict(
        "criterion 5 (submodule structure)",
        pass,
        &format!("windows match = {windows_ok}, worst leakage {worst_leak:.3e}"),
    );
}

/// Criterion 6: field suite — equivariance, vanishing, continuity along the
/// declared paths, and constraint block-diagonality.
#[test]
fn criterion_6_field_suite() {
    // J-equivariance, exhaustive to order 30
    let mut worst_j = 0.0f64;
    for kind in [SectionKind::Projection, SectionKind::Diag, SectionKind::Up, SectionKind::Down] {
        for n in -30i64..=30 {
            let rep = check_j_equivariance(SectionId::new(kind, n), 2.0, 30).unwrap();
            worst_j = worst_j.max(rep.max_residual);
        }
    }

    // vanishing at infinity, exhaustive to order 50
    let mut vanishing_ok = true;
    let mut vanishing_checked = 0usize;
    for kind in [SectionKind::Projection, SectionKind::Diag, SectionKind::Up, SectionKind::Down] {
        for n in -50i64..=50 {
            let rep = check_vanishing(SectionId::new(kind, n), 2.0, 1.0, 50).unwrap();
            vanishing_ok &= rep.pass();
            vanishing_checked += rep.checked();
        }
    }

    // continuity along the five declared paths
    let mut slopes = Vec::new();
    for which in StandardPath::all() {
        let (slope, _) = refinement_slope(which, &[8, 16, 32, 64], 16).unwrap();
        slopes.push((which.name(), slope));
    }
    let slopes_ok = slopes.iter().all(|(_, s)| *s >= 0.9);

    // constraint block-diagonality at the reducible odd points
    let block_leak = check_block_diagonality(2.0, 1.0, 24).unwrap();

    let pass = worst_j < 1e-12 && vanishing_ok && slopes_ok && block_leak < 1e-12;
    verdict(
        "criterion 6 (field suite)",
        pass,
        &format!(
            "j-residual {worst_j:.3e}, vanishing ok = {vanishing_ok} ({vanishing_checked} points), slopes {slopes:?}, block leakage {block_leak:.3e}"
        ),
    );
}

/// Criterion 7: the Mackey bijection at full desk scale.
#[test]
fn criterion_7_mackey_suite() {
    let start = Instant::now();
    let report = verify_mu(2.0, 50, 721).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    // the witness pair named by the criterion: the character at m = 3 is
    // glued to the continuous groupoid family while its preimage of order
    // (2, +) is isolated
    let g_q = closure_graph(Algebra::QReduced, 2.0, 1.0, 50).unwrap();
    let g_g = closure_graph(Algebra::Groupoid, 2.0, 0.0, 51).unwrap();
    let char13 = SpectrumLabel::GroupoidChar { sigma: Sign::Plus, m: 3 };
    let d12 = SpectrumLabel::DiscreteQ { sigma: Sign::Plus, n: 2, sign: Sign::Plus };
    let witness_ok =
        g_g.incoming_count(&char13.key()) > 0 && g_q.incoming_count(&d12.key()) == 0;

    let pass = report.pass() && witness_ok && elapsed < 5.0;
    verdict(
        "criterion 7 (mackey suite)",
        pass,
        &format!(
            "labels {} bijective = {} rederivation = {} min-K = {} closure = {} witness = {witness_ok} containment = {} in {elapsed:.2} s",
            report.labels_checked,
            report.bijective,
            report.inductive_rederivation_consistent,
            report.min_ktypes_preserved,
            report.continuous_on_closure_edges,
            report.containment_holds
        ),
    );
}

/// Criterion 8: K-theory skeleton at full desk scale.
#[test]
fn criterion_8_ktheory_skeleton() {
    let ledger = stratify(2.0, 50, 721).unwrap();
    let strata_ok = ledger.exhaustive && ledger.mu_invariant;

    // the partition is genuine: every row lands in exactly one stratum and
    // the W_m of that stratum is exactly its minimal-K-type set
    let mut partition_ok = true;
    for row in ledger.q_rows.iter().chain(&ledger.groupoid_rows) {
        let mut w = wm(row.stratum).unwrap();
        w.sort_unstable();
        let mut mk = row.min_ktypes.clone();
        mk.sort_unstable();
        partition_ok &= w == mk;
    }

    let rank_pairs = verify_rank_claim(2.0, 50, 25).unwrap();

    let summary = k_summary(2.0, 50).unwrap();
    let formula_ok = summary.k0_formula.contains("Z + Z^3 +") && summary.k1_is_zero;
    let counts_ok = summary.discrete_label_count == 4 * 51 && summary.consistent;

    let pass = strata_ok && partition_ok && rank_pairs > 0 && formula_ok && counts_ok;
    verdict(
        "criterion 8 (k-theory skeleton)",
        pass,
        &format!(
            "strata ok = {strata_ok}, partition ok = {partition_ok}, rank pairs = {rank_pairs}, formula = '{}', discrete labels = {}",
            summary.k0_formula, summary.discrete_label_count
        ),
    );
}
