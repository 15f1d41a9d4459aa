//! Command-line front end: builds truncated modules, runs the verification
//! suites, sweeps parameter grids, and emits JSON/CSV reports.
//!
//! Exit status: 0 when all requested checks pass, 1 on a check failure,
//! 2 on invalid configuration, 3 on an internal error.  Every file output
//! starts with a header line carrying the resolved configuration, and
//! identical configurations produce byte-identical outputs.

use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use qsl2r::afield::{verify_specialization, AnalyticLambda};
use qsl2r::algcheck::{
    check_relations, check_unitarity, TOL_Q_RELATIONS, TOL_UNITARITY,
};
use qsl2r::fieldsec::{
    check_block_diagonality, check_j_equivariance, check_vanishing, refinement_slope, SectionId,
    SectionKind, StandardPath,
};
use qsl2r::ktheory::{k_summary, stratify, verify_rank_claim};
use qsl2r::mackey::{mu_table, verify_mu};
use qsl2r::modgen::{
    build_classical_principal, build_discrete_q, build_groupoid, build_motion, build_principal_q,
    Parity, Sign, TruncatedModule,
};
use qsl2r::paramspace::{circle_grid, closure_graph, Algebra};
use qsl2r::scalars::DeformationPoint;

#[derive(Parser)]
#[command(name = "qsl2r", about = "Truncated matrix models and verification suites for the two-parameter deformation of SL(2,R)", version)]
struct Cli {
    /// Worker pool size for sweeps (default: number of cores; the
    /// QSL2R_THREADS environment variable overrides the default).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed recorded in output headers for reproducibility of sampled runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one truncated module and emit its JSON document.
    Build(BuildArgs),
    /// Run a verification suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Sweep a parameter grid and emit a CSV report.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Field-section certificates: equivariance, vanishing, continuity.
    #[command(subcommand)]
    Field(FieldCmd),
    /// The Mackey bijection and its verification.
    #[command(subcommand)]
    Mackey(MackeyCmd),
    /// Minimal-K-type strata and the K-group summary.
    #[command(subcommand)]
    Ktheory(KtheoryCmd),
}

#[derive(Args)]
struct BuildArgs {
    /// principal-q | discrete-q | classical | motion | groupoid
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Parity +1 or -1.
    #[arg(long, default_value_t = 1)]
    epsilon: i8,
    /// Spectral parameter as "re,im".
    #[arg(long, default_value = "0,1")]
    lambda: String,
    /// sigma of a discrete family: +1 or -1.
    #[arg(long, default_value_t = 1)]
    sigma: i8,
    /// Order of a discrete family.
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Branch of a discrete family: + or -.
    #[arg(long, default_value = "+")]
    sign: String,
    /// Window bound N.
    #[arg(long, default_value_t = 60)]
    bound: i64,
    /// Output path, or - for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Defining relations of one module; CSV of residuals.
    Relations {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value = "0,1")]
        lambda: String,
        #[arg(long, default_value_t = 1)]
        epsilon: i8,
        #[arg(long, default_value_t = 60)]
        bound: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Unitarity of one module.
    Unitarity {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value = "0,1")]
        lambda: String,
        #[arg(long, default_value_t = 1)]
        epsilon: i8,
        #[arg(long, default_value_t = 60)]
        bound: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Invariant half-line windows at the reducible parameters.
    Submodules {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        #[arg(long, default_value_t = 40)]
        bound: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Relation residuals over a (qt, lambda-angle) grid.
    Relations {
        /// Effective deformation parameters, comma separated.
        #[arg(long, default_value = "0.5,0.8,1.25,2")]
        qt: String,
        /// Angle grid on the upper half circle as start:stop:count.
        #[arg(long, default_value_t = 25)]
        lambda_points: usize,
        #[arg(long, default_value_t = 60)]
        bound: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Specialization of the analytic family toward the boundary rows.
    Specialization {
        /// Exponent mu of the family lambda = koppa^(i mu tau).
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Geometric t grid as start:stop:count.
        #[arg(long, default_value = "1e-1:1e-4:4")]
        tgrid: String,
        #[arg(long, default_value_t = 24)]
        bound: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Subcommand)]
enum FieldCmd {
    /// Equivariance under the coordinate projections at t = 0.
    Jequiv {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 30)]
        n_max: u32,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Vanishing at infinity on the discrete components.
    Vanishing {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 50)]
        n_max: u32,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Continuity certification along a declared path.
    Continuity {
        /// even-arc | odd-arc | t-cross | q-chart | dis-t-cross | all
        #[arg(long, default_value = "all")]
        path: String,
        /// Refinement levels (path segments), comma separated.
        #[arg(long, default_value = "8,16,32,64")]
        levels: String,
        #[arg(long, default_value_t = 16)]
        bound: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Constraint block-diagonality at the reducible odd points.
    Blocks {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 20)]
        bound: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Subcommand)]
enum MackeyCmd {
    /// Tabulate the bijection as JSON pairs.
    MuTable {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 50)]
        n_max: u32,
        #[arg(long, default_value_t = 721)]
        grid: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Full verification of the bijection.
    Verify {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 50)]
        n_max: u32,
        #[arg(long, default_value_t = 721)]
        grid: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Closure-relation graph of a spectrum as adjacency-list JSON.
    Closure {
        /// q-reduced | groupoid
        #[arg(long, default_value = "q-reduced")]
        algebra: String,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Subcommand)]
enum KtheoryCmd {
    /// K-type ledger of both spectra as CSV.
    Stratify {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 50)]
        n_max: u32,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// The K-group summary with its cross-checks.
    Summary {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 50)]
        n_max: u32,
        /// Also verify the rank-one claim on a reduced lambda grid.
        #[arg(long, default_value_t = false)]
        rank_claim: bool,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

fn parse_complex(s: &str) -> anyhow::Result<Complex64> {
    if let Some((re, im)) = s.split_once(',') {
        Ok(Complex64::new(re.trim().parse()?, im.trim().parse()?))
    } else {
        Ok(Complex64::new(s.trim().parse()?, 0.0))
    }
}

/// Decimal command-line input meant to lie on the unit circle is snapped
/// onto it (|lambda| within 1e-3 of 1); deliberately off-circle parameters
/// such as the |lambda| = 0.9, 1.1 negative controls pass through.
fn snap_to_circle(lambda: Complex64) -> Complex64 {
    let r = lambda.norm();
    if r > 0.0 && (r - 1.0).abs() <= 1e-3 {
        lambda / Complex64::from(r)
    } else {
        lambda
    }
}

fn parse_sign(s: &str) -> anyhow::Result<Sign> {
    match s.trim() {
        "+" | "+1" | "plus" => Ok(Sign::Plus),
        "-" | "-1" | "minus" => Ok(Sign::Minus),
        other => bail!("cannot parse sign '{other}'"),
    }
}

fn parse_sigma(s: i8) -> anyhow::Result<Sign> {
    match s {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        other => bail!("sigma must be +-1, got {other}"),
    }
}

/// Geometric grid "start:stop:count".
fn parse_geometric_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be start:stop:count, got '{s}'");
    }
    let start: f64 = parts[0].parse()?;
    let stop: f64 = parts[1].parse()?;
    let count: usize = parts[2].parse()?;
    if count < 2 || start <= 0.0 || stop <= 0.0 {
        bail!("geometric grid needs positive endpoints and count >= 2");
    }
    let ratio = (stop / start).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|j| start * ratio.powi(j as i32)).collect())
}

fn write_out(path: &str, contents: &str) -> anyhow::Result<()> {
    if path == "-" {
        print!("{contents}");
        std::io::stdout().flush()?;
    } else {
        std::fs::write(path, contents).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

fn header(seed: u64, resolved: &str) -> String {
    format!("# qsl2r seed={seed} {resolved}\n")
}

/// The interior margin is fixed at 4 window rows; window bounds must leave
/// a nonempty interior.
fn validate_bound(bound: i64) -> anyhow::Result<()> {
    if bound <= 2 * qsl2r::modgen::INTERIOR_MARGIN {
        bail!("window bound must exceed twice the interior margin (bound > 8)");
    }
    Ok(())
}

fn validate_tol(tol: f64) -> anyhow::Result<()> {
    if !(tol > 0.0) {
        bail!("tolerances must be positive");
    }
    Ok(())
}

/// Runs the requested command; Ok(true) = all checks passed.
fn run(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Build(args) => {
            let module = build_from_args(args)?;
            let mut doc = header(
                cli.seed,
                &format!(
                    "build family={} q={} t={} epsilon={} lambda={} n={} sign={} bound={}",
                    args.family, args.q, args.t, args.epsilon, args.lambda, args.n, args.sign,
                    args.bound
                ),
            );
            doc.push_str(&module.to_json());
            doc.push('\n');
            write_out(&args.out, &doc)?;
            Ok(true)
        }
        Command::Verify(cmd) => run_verify(cli, cmd),
        Command::Sweep(cmd) => run_sweep(cli, cmd),
        Command::Field(cmd) => run_field(cli, cmd),
        Command::Mackey(cmd) => run_mackey(cli, cmd),
        Command::Ktheory(cmd) => run_ktheory(cli, cmd),
    }
}

fn build_from_args(args: &BuildArgs) -> anyhow::Result<TruncatedModule> {
    validate_bound(args.bound)?;
    let lambda = snap_to_circle(parse_complex(&args.lambda)?);
    let parity = Parity::from_sign(args.epsilon)?;
    let module = match args.family.as_str() {
        "principal-q" => {
            build_principal_q(DeformationPoint::new(args.q, args.t)?, parity, lambda, args.bound)?
        }
        "discrete-q" => build_discrete_q(
            DeformationPoint::new(args.q, args.t)?,
            parse_sigma(args.sigma)?,
            args.n,
            parse_sign(&args.sign)?,
            args.bound,
        )?,
        "classical" => build_classical_principal(lambda, parity, args.bound)?,
        "motion" => build_motion(lambda, parity, args.bound)?,
        "groupoid" => build_groupoid(lambda, parity, args.bound)?,
        other => bail!("unknown family '{other}'"),
    };
    Ok(module)
}

fn run_verify(cli: &Cli, cmd: &VerifyCmd) -> anyhow::Result<bool> {
    match cmd {
        VerifyCmd::Relations { q, t, lambda, epsilon, bound, out } => {
            validate_bound(*bound)?;
            let lambda_c = snap_to_circle(parse_complex(lambda)?);
            let parity = Parity::from_sign(*epsilon)?;
            let module =
                build_principal_q(DeformationPoint::new(*q, *t)?, parity, lambda_c, *bound)?;
            let reports = check_relations(&module, TOL_Q_RELATIONS)?;
            let mut doc = header(
                cli.seed,
                &format!("verify relations q={q} t={t} lambda={lambda} epsilon={epsilon} bound={bound}"),
            );
            doc.push_str("relation_id,residual,row,col,interior_size\n");
            let mut pass = true;
            for r in &reports {
                doc.push_str(&r.csv_row());
                doc.push('\n');
                pass &= r.passes(TOL_Q_RELATIONS);
            }
            write_out(out, &doc)?;
            Ok(pass)
        }
        VerifyCmd::Unitarity { q, t, lambda, epsilon, bound, out } => {
            validate_bound(*bound)?;
            let lambda_c = snap_to_circle(parse_complex(lambda)?);
            let parity = Parity::from_sign(*epsilon)?;
            let module =
                build_principal_q(DeformationPoint::new(*q, *t)?, parity, lambda_c, *bound)?;
            let r = check_unitarity(&module, TOL_UNITARITY);
            let mut doc = header(
                cli.seed,
                &format!("verify unitarity q={q} t={t} lambda={lambda} epsilon={epsilon} bound={bound}"),
            );
            doc.push_str("relation_id,residual,row,col,interior_size\n");
            doc.push_str(&r.csv_row());
            doc.push('\n');
            write_out(out, &doc)?;
            Ok(r.passes(TOL_UNITARITY))
        }
        VerifyCmd::Submodules { q, t, n_max, bound, out } => {
            let base = DeformationPoint::new(*q, *t)?;
            let mut doc = header(
                cli.seed,
                &format!("verify submodules q={q} t={t} n_max={n_max} bound={bound}"),
            );
            doc.push_str("sigma,n,windows_match,pass\n");
            let mut pass = true;
            for sigma in [Sign::Plus, Sign::Minus] {
                for n in 0..=*n_max {
                    let lambda = Complex64::from(
                        sigma.as_f64() * qsl2r::scalars::qpow(base.qt(), n as i64),
                    );
                    let parity = Parity::of_discrete_order(n);
                    let module = build_principal_q(base, parity, lambda, *bound)?;
                    let upper = module.invariant_closure(n as i64 + 1, 1e-12);
                    let lower = module.invariant_closure(-(n as i64) - 1, 1e-12);
                    let ok = upper == qsl2r::modgen::discrete_window(n, Sign::Plus, *bound)
                        && lower == qsl2r::modgen::discrete_window(n, Sign::Minus, *bound);
                    pass &= ok;
                    doc.push_str(&format!("{:+},{n},{ok},{ok}\n", sigma.as_f64() as i8));
                }
            }
            write_out(out, &doc)?;
            Ok(pass)
        }
    }
}

fn run_sweep(cli: &Cli, cmd: &SweepCmd) -> anyhow::Result<bool> {
    match cmd {
        SweepCmd::Relations { qt, lambda_points, bound, out } => {
            let qts: Vec<f64> = qt
                .split(',')
                .map(|s| s.trim().parse::<f64>().context("parsing qt list"))
                .collect::<anyhow::Result<_>>()?;
            let angles = circle_grid(*lambda_points);
            let mut jobs = Vec::new();
            for &qtv in &qts {
                for &a in &angles {
                    for parity in [Parity::Even, Parity::Odd] {
                        jobs.push((qtv, a, parity));
                    }
                }
            }
            let rows: Vec<anyhow::Result<(String, bool)>> = jobs
                .par_iter()
                .map(|&(qtv, a, parity)| {
                    let base = DeformationPoint::new(qtv, 1.0)?;
                    let lambda = Complex64::from_polar(1.0, a);
                    let module = build_principal_q(base, parity, lambda, *bound)?;
                    let reports = check_relations(&module, TOL_Q_RELATIONS)?;
                    let worst = reports
                        .iter()
                        .map(|r| r.max_abs_residual)
                        .fold(0.0f64, f64::max);
                    let pass = worst < TOL_Q_RELATIONS;
                    Ok((
                        format!("{qtv},{a},{:+},{worst:e},{pass}", parity.sign()),
                        pass,
                    ))
                })
                .collect();
            let mut doc = header(
                cli.seed,
                &format!("sweep relations qt={qt} lambda_points={lambda_points} bound={bound}"),
            );
            doc.push_str("qt,angle,epsilon,max_residual,pass\n");
            let mut pass = true;
            for row in rows {
                let (line, ok) = row?;
                doc.push_str(&line);
                doc.push('\n');
                pass &= ok;
            }
            write_out(out, &doc)?;
            Ok(pass)
        }
        SweepCmd::Specialization { mu, q, tgrid, bound, out } => {
            let ts = parse_geometric_grid(tgrid)?;
            let lam = AnalyticLambda::power_imag(*mu);
            let ns = [0i64, 2, -4];
            let errs: Vec<f64> = ts
                .iter()
                .map(|&t| {
                    qsl2r::afield::s_images_max_gap(
                        &lam,
                        Parity::Even,
                        (*q, t),
                        (*q, 0.0),
                        &ns,
                        *bound,
                    )
                })
                .collect::<qsl2r::Result<_>>()?;
            let slope = qsl2r::linalg::loglog_slope(&ts, &errs);
            let grid: Vec<(f64, f64)> = ts.iter().map(|&t| (*q, t)).collect();
            let report = verify_specialization(&lam, Parity::Even, &grid, *bound, 1e-9)?;
            let mut doc = header(
                cli.seed,
                &format!("sweep specialization mu={mu} q={q} tgrid={tgrid} bound={bound}"),
            );
            doc.push_str("t,gap_to_boundary,kappa_err,relation_residual,pass\n");
            for ((p, &t), &e) in report.points.iter().zip(&ts).zip(&errs) {
                doc.push_str(&format!(
                    "{t},{e:e},{:e},{:e},{}\n",
                    p.max_kappa_err, p.max_relation_residual, p.pass
                ));
            }
            doc.push_str(&format!("# slope,{slope}\n"));
            write_out(out, &doc)?;
            Ok(report.pass() && (0.9..=1.1).contains(&slope))
        }
    }
}

fn run_field(cli: &Cli, cmd: &FieldCmd) -> anyhow::Result<bool> {
    match cmd {
        FieldCmd::Jequiv { q, n_max, tol, out } => {
            validate_tol(*tol)?;
            let kinds =
                [SectionKind::Projection, SectionKind::Diag, SectionKind::Up, SectionKind::Down];
            let ns: Vec<i64> = (-(*n_max as i64)..=*n_max as i64).collect();
            let jobs: Vec<SectionId> = kinds
                .iter()
                .flat_map(|&k| ns.iter().map(move |&n| SectionId::new(k, n)))
                .collect();
            let worst: Vec<f64> = jobs
                .par_iter()
                .map(|&id| check_j_equivariance(id, *q, *n_max).map(|r| r.max_residual))
                .collect::<qsl2r::Result<_>>()?;
            let max = worst.iter().cloned().fold(0.0f64, f64::max);
            let mut doc =
                header(cli.seed, &format!("field jequiv q={q} n_max={n_max} tol={tol}"));
            doc.push_str("section,max_residual,pass\n");
            for (id, w) in jobs.iter().zip(&worst) {
                doc.push_str(&format!("{},{w:e},{}\n", id.name(), w < tol));
            }
            write_out(out, &doc)?;
            Ok(max < *tol)
        }
        FieldCmd::Vanishing { q, t, n_max, out } => {
            let kinds =
                [SectionKind::Projection, SectionKind::Diag, SectionKind::Up, SectionKind::Down];
            let ns: Vec<i64> = (-(*n_max as i64)..=*n_max as i64).collect();
            let jobs: Vec<SectionId> = kinds
                .iter()
                .flat_map(|&k| ns.iter().map(move |&n| SectionId::new(k, n)))
                .collect();
            let results: Vec<(usize, bool)> = jobs
                .par_iter()
                .map(|&id| {
                    check_vanishing(id, *q, *t, *n_max).map(|r| (r.checked(), r.pass()))
                })
                .collect::<qsl2r::Result<_>>()?;
            let pass = results.iter().all(|r| r.1);
            let checked: usize = results.iter().map(|r| r.0).sum();
            let mut doc =
                header(cli.seed, &format!("field vanishing q={q} t={t} n_max={n_max}"));
            doc.push_str(&format!("sections,{}\npoints_checked,{checked}\npass,{pass}\n", jobs.len()));
            write_out(out, &doc)?;
            Ok(pass)
        }
        FieldCmd::Continuity { path, levels, bound, out } => {
            let levels: Vec<usize> = levels
                .split(',')
                .map(|s| s.trim().parse::<usize>().context("parsing levels"))
                .collect::<anyhow::Result<_>>()?;
            let paths: Vec<StandardPath> = if path == "all" {
                StandardPath::all().to_vec()
            } else {
                vec![StandardPath::all()
                    .into_iter()
                    .find(|p| p.name() == path)
                    .with_context(|| format!("unknown path '{path}'"))?]
            };
            let mut doc = header(
                cli.seed,
                &format!("field continuity path={path} levels={levels:?} bound={bound}"),
            );
            doc.push_str("path,section,step,max_jump,slope\n");
            let mut pass = true;
            for p in paths {
                let (slope, pts) = refinement_slope(p, &levels, *bound)?;
                for (h, j) in &pts {
                    doc.push_str(&format!("{},{},{h},{j:e},{slope}\n", p.name(), p.section().name()));
                }
                pass &= slope >= 0.9;
            }
            write_out(out, &doc)?;
            Ok(pass)
        }
        FieldCmd::Blocks { q, t, bound, out } => {
            let worst = check_block_diagonality(*q, *t, *bound)?;
            let pass = worst < 1e-12;
            let mut doc =
                header(cli.seed, &format!("field blocks q={q} t={t} bound={bound}"));
            doc.push_str(&format!("off_block_residual,pass\n{worst:e},{pass}\n"));
            write_out(out, &doc)?;
            Ok(pass)
        }
    }
}

fn run_mackey(cli: &Cli, cmd: &MackeyCmd) -> anyhow::Result<bool> {
    match cmd {
        MackeyCmd::MuTable { q, n_max, grid, out } => {
            let table = mu_table(*grid, *n_max)?;
            let mut doc = header(
                cli.seed,
                &format!("mackey mu-table q={q} n_max={n_max} grid={grid}"),
            );
            doc.push_str(&table.to_json());
            doc.push('\n');
            write_out(out, &doc)?;
            Ok(true)
        }
        MackeyCmd::Verify { q, n_max, grid, out } => {
            let report = verify_mu(*q, *n_max, *grid)?;
            let mut doc =
                header(cli.seed, &format!("mackey verify q={q} n_max={n_max} grid={grid}"));
            doc.push_str(&report.to_csv());
            write_out(out, &doc)?;
            Ok(report.pass())
        }
        MackeyCmd::Closure { algebra, q, n_max, out } => {
            let (alg, t) = match algebra.as_str() {
                "q-reduced" => (Algebra::QReduced, 1.0),
                "groupoid" => (Algebra::Groupoid, 0.0),
                other => bail!("unknown algebra '{other}'"),
            };
            let g = closure_graph(alg, *q, t, *n_max)?;
            let mut doc = header(
                cli.seed,
                &format!("mackey closure algebra={algebra} q={q} n_max={n_max}"),
            );
            doc.push_str(&g.to_json());
            doc.push('\n');
            write_out(out, &doc)?;
            Ok(true)
        }
    }
}

fn run_ktheory(cli: &Cli, cmd: &KtheoryCmd) -> anyhow::Result<bool> {
    match cmd {
        KtheoryCmd::Stratify { q, n_max, grid, out } => {
            let ledger = stratify(*q, *n_max, *grid)?;
            let mut doc = header(
                cli.seed,
                &format!("ktheory stratify q={q} n_max={n_max} grid={grid}"),
            );
            doc.push_str(&ledger.to_csv());
            write_out(out, &doc)?;
            Ok(ledger.exhaustive && ledger.mu_invariant)
        }
        KtheoryCmd::Summary { q, n_max, rank_claim, out } => {
            let summary = k_summary(*q, *n_max)?;
            let mut ok = summary.consistent && summary.k1_is_zero;
            let mut doc = header(
                cli.seed,
                &format!("ktheory summary q={q} n_max={n_max} rank_claim={rank_claim}"),
            );
            doc.push_str(&summary.to_csv());
            if *rank_claim {
                let checked = verify_rank_claim(*q, *n_max, 25)?;
                doc.push_str(&format!("rank_pairs_checked,{checked}\n"));
                ok &= checked > 0;
            }
            write_out(out, &doc)?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut pool = rayon::ThreadPoolBuilder::new();
    let threads = cli.threads.or_else(|| {
        std::env::var("QSL2R_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("internal error: {e}");
            return ExitCode::from(3);
        }
    };

    match pool.install(|| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("checks failed; the report rows carry the failing residuals and their worst (row, col) locations");
            ExitCode::from(1)
        }
        Err(e) => {
            // configuration and domain problems exit with 2
            let is_domain = e.downcast_ref::<qsl2r::Error>().is_some();
            eprintln!("error: {e}");
            if is_domain {
                ExitCode::from(2)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
