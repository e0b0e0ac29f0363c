use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qtrade_core::apps::{clone_fidelities_closed, strategy_table, PauliCloner};
use qtrade_core::channels::{build_isometry, kraus_from_isometry, Branch, CovariantChannel};
use qtrade_core::haar::Rng;
use qtrade_core::matcore::{herm_eig, ComplexMatrix, C64};
use qtrade_core::povm::{instrument_consistency, q0_from_seed, seed_p0_matrix, Instrument, InstrumentReport, SeedP0};
use qtrade_core::tradeoff::{
    alpha_range_end, estimation_fidelity, gamma_from_matrices, region_classify, tradeoff_curves_to, Region,
    TradeoffPoint,
};
use qtrade_core::verify::{self, grid, SuiteReport};

use crate::config::{resolve, Overrides, RunConfig};
use crate::output::{emit, fmt_f64, to_json, to_json_line, Csv, VERSION};
use crate::{AppsCmd, BranchArg, ChannelCmd, Cli, Command, Format, PovmCmd, ReportCmd, TradeoffCmd, VerifyCmd};

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

/// Runs the selected command. `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Verify(cmd) => run_verify(cli, cmd),
        Command::Tradeoff(cmd) => run_tradeoff(cli, cmd),
        Command::Channel(cmd) => run_channel(cli, cmd),
        Command::Povm(cmd) => run_povm(cli, cmd),
        Command::Apps(cmd) => run_apps(cli, cmd),
        Command::Report(cmd) => run_report(cli, cmd),
    }
}

fn config(cli: &Cli, samples: Option<usize>, d: Option<Vec<usize>>) -> Result<RunConfig> {
    resolve(
        cli.config.as_deref(),
        &Overrides {
            seed: cli.seed,
            samples,
            d,
            out_dir: None,
        },
    )
}

/// `--out` when given, otherwise `out_dir/<default_name>` when the config
/// names a directory other than the working one, otherwise stdout.
fn destination(cli: &Cli, cfg: &RunConfig, default_name: &str) -> Option<PathBuf> {
    cli.out.clone().or_else(|| {
        (cfg.out_dir != PathBuf::from(".")).then(|| cfg.out_dir.join(default_name))
    })
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(flatten)]
    body: T,
}

fn summarize(rep: &SuiteReport) {
    let ok = rep.checks.iter().filter(|c| c.passed).count();
    eprintln!(
        "{} d={}: {ok}/{} checks passed{}",
        rep.suite,
        rep.d,
        rep.checks.len(),
        rep.error.as_deref().map(|e| format!(" (error: {e})")).unwrap_or_default()
    );
    for c in rep.failures() {
        eprintln!(
            "  FAIL {}: value {} target {} tolerance {}",
            c.name,
            fmt_f64(c.value),
            fmt_f64(c.target),
            fmt_f64(c.tolerance)
        );
    }
}

fn run_verify(cli: &Cli, cmd: &VerifyCmd) -> Result<bool> {
    let (name, samples) = match cmd {
        VerifyCmd::Haar { samples, .. } => ("haar", *samples),
        VerifyCmd::Fidelity { .. } => ("fidelity", None),
        VerifyCmd::Channels { .. } => ("channels", None),
        VerifyCmd::Povm { samples, .. } => ("povm", *samples),
        VerifyCmd::Tradeoff { .. } => ("tradeoff", None),
    };
    let cfg = config(cli, samples, None)?;
    let tol = &cfg.tolerances;
    let report = match cmd {
        VerifyCmd::Haar { dim, .. } => verify::haar_suite(dim.d as usize, cfg.samples, cfg.seed, tol)?,
        VerifyCmd::Fidelity { dim, trials } => verify::fidelity_suite(dim.d as usize, *trials, cfg.seed, tol)?,
        VerifyCmd::Channels { dim, trials } => verify::channels_suite(dim.d as usize, *trials, cfg.seed, tol)?,
        VerifyCmd::Povm { dim, .. } => verify::povm_suite(dim.d as usize, cfg.samples, cfg.seed, tol)?,
        VerifyCmd::Tradeoff { dim } => verify::tradeoff_suite(dim.d as usize, cfg.seed, tol)?,
    };
    summarize(&report);
    let passed = report.passed;
    let text = to_json(&Envelope {
        version: VERSION,
        seed: None,
        body: &report,
    })?;
    emit(&text, destination(cli, &cfg, &format!("verify-{name}.json")).as_deref())?;
    Ok(passed)
}

#[derive(Serialize)]
struct Classification {
    class: Region,
}

fn run_tradeoff(cli: &Cli, cmd: &TradeoffCmd) -> Result<bool> {
    let cfg = config(cli, None, None)?;
    match cmd {
        TradeoffCmd::Curve { dim, points, alpha_end } => {
            let d = dim.d as usize;
            let end = alpha_end.unwrap_or_else(|| alpha_range_end(d));
            let curve = tradeoff_curves_to(d, *points, end, cfg.tolerances.region)?;
            let mut csv = Csv::new(
                &format!("d={d} points={points} alpha_end={} spacing=uniform-alpha", fmt_f64(end)),
                &["alpha", "f_t", "f_e_max", "f_e_min", "on_boundary"],
            );
            for p in &curve {
                csv.row(&[
                    fmt_f64(p.alpha),
                    fmt_f64(p.f_t),
                    fmt_f64(p.f_e_max),
                    fmt_f64(p.f_e_min),
                    p.on_boundary.to_string(),
                ]);
            }
            emit(&csv.into_string(), destination(cli, &cfg, &format!("tradeoff-curve-d{d}.csv")).as_deref())?;
            eprintln!("tradeoff curve d={d}: {} points", curve.len());
        }
        TradeoffCmd::Classify { dim, ft, fe } => {
            if !(ft.is_finite() && fe.is_finite()) {
                bail!("--ft and --fe must be finite");
            }
            let class = region_classify(
                &TradeoffPoint {
                    f_t: *ft,
                    f_e: *fe,
                    d: dim.d as usize,
                },
                cfg.tolerances.region,
            );
            emit(&to_json_line(&Classification { class })?, cli.out.as_deref())?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct ChannelDump {
    d: usize,
    alpha: f64,
    branch: Branch,
    c1: f64,
    c2: f64,
    /// `(x, y)` in `T(a) = x a + y Tr(a) I`.
    coefficients: (f64, f64),
    wc_fidelity: f64,
    choi_min_eigenvalue: f64,
    superoperator: ComplexMatrix,
    isometry: ComplexMatrix,
    kraus: Vec<ComplexMatrix>,
}

fn run_channel(cli: &Cli, cmd: &ChannelCmd) -> Result<bool> {
    let cfg = config(cli, None, None)?;
    let ChannelCmd::Dump { dim, alpha, format, branch } = cmd;
    let d = dim.d as usize;
    let ch = CovariantChannel::new(d, *alpha, (*branch).into())?;
    let v = build_isometry(&ch);
    let dump = ChannelDump {
        d,
        alpha: *alpha,
        branch: ch.branch(),
        c1: ch.c1(),
        c2: ch.c2(),
        coefficients: ch.coefficients(),
        wc_fidelity: ch.wc_fidelity_closed(),
        choi_min_eigenvalue: ch.choi_min_eigenvalue()?,
        superoperator: ch.superoperator(),
        kraus: kraus_from_isometry(&v),
        isometry: v.matrix().clone(),
    };
    let text = match format {
        Format::Json => to_json(&Envelope {
            version: VERSION,
            seed: None,
            body: &dump,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(
                &format!("d={d} alpha={} branch={:?}", fmt_f64(*alpha), ch.branch()).to_lowercase(),
                &["object", "index", "row", "col", "re", "im"],
            );
            let mut push = |name: &str, index: usize, m: &ComplexMatrix| {
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        let z = m[(i, j)];
                        csv.row(&[
                            name.to_string(),
                            index.to_string(),
                            i.to_string(),
                            j.to_string(),
                            fmt_f64(z.re),
                            fmt_f64(z.im),
                        ]);
                    }
                }
            };
            push("superoperator", 0, &dump.superoperator);
            push("isometry", 0, &dump.isometry);
            for (k, m) in dump.kraus.iter().enumerate() {
                push("kraus", k, m);
            }
            csv.into_string()
        }
    };
    let ext = if *format == Format::Json { "json" } else { "csv" };
    emit(&text, destination(cli, &cfg, &format!("channel-d{d}.{ext}")).as_deref())?;
    eprintln!(
        "channel d={d} alpha={alpha}: {} Kraus operators, min Choi eigenvalue {:.3e}",
        dump.kraus.len(),
        dump.choi_min_eigenvalue
    );
    Ok(true)
}

#[derive(Serialize)]
struct PovmCheck {
    d: usize,
    alpha: f64,
    seed_params: SeedP0,
    constraint_residual: f64,
    p0_min_eigenvalue: f64,
    p0_psd: bool,
    q0: ComplexMatrix,
    q0_min_eigenvalue: f64,
    q0_psd: bool,
    gamma: f64,
    f_e: f64,
    f_t: f64,
    instrument: InstrumentReport,
    passed: bool,
}

fn run_povm(cli: &Cli, cmd: &PovmCmd) -> Result<bool> {
    let PovmCmd::Check {
        dim,
        alpha,
        b,
        c,
        c_im,
        e,
        f,
        g,
        branch,
        samples,
    } = cmd;
    let cfg = config(cli, *samples, None)?;
    let tol = &cfg.tolerances;
    let d = dim.d as usize;
    let ch = CovariantChannel::new(d, *alpha, (*branch).into())?;
    let c = C64::new(*c, *c_im);
    let seed = match b {
        Some(b) => SeedP0::with_tolerance(d, *b, c, *e, *f, *g, tol.eig)?,
        None => SeedP0::solve_b(d, c, *e, *f, *g)?,
    };
    let p0_min = herm_eig(&seed_p0_matrix(&seed))?.min();
    let q0 = q0_from_seed(&ch, &seed)?;
    let q0_min = herm_eig(&q0)?.min();
    let gamma = gamma_from_matrices(&ch, &seed)?;
    let inst = Instrument::new(ch, seed)?;
    let mut rng = Rng::new(cfg.seed);
    let n = cfg.samples.min(20_000);
    let instrument = instrument_consistency(&inst, &mut rng, n, tol)?;
    let passed = p0_min >= -tol.psd && q0_min >= -tol.psd && instrument.passed;
    let report = PovmCheck {
        d,
        alpha: *alpha,
        seed_params: seed,
        constraint_residual: seed.constraint_residual(),
        p0_min_eigenvalue: p0_min,
        p0_psd: p0_min >= -tol.psd,
        q0,
        q0_min_eigenvalue: q0_min,
        q0_psd: q0_min >= -tol.psd,
        gamma,
        f_e: estimation_fidelity(gamma, d),
        f_t: ch.wc_fidelity_closed(),
        instrument,
        passed,
    };
    eprintln!(
        "povm check d={d} alpha={alpha}: gamma {:.12}, {}",
        gamma,
        if passed { "passed" } else { "FAILED" }
    );
    let text = to_json(&Envelope {
        version: VERSION,
        seed: Some(cfg.seed),
        body: &report,
    })?;
    emit(&text, destination(cli, &cfg, &format!("povm-check-d{d}.json")).as_deref())?;
    Ok(passed)
}

fn run_apps(cli: &Cli, cmd: &AppsCmd) -> Result<bool> {
    let cfg = config(cli, None, None)?;
    let (text, name) = match cmd {
        AppsCmd::Cloner { points } => {
            if *points < 2 {
                bail!("--points must be at least 2");
            }
            let mut csv = Csv::new(
                &format!("points={points} spacing=uniform-alpha"),
                &["alpha", "branch", "f_a", "f_b"],
            );
            for branch in [Branch::Plus, Branch::Minus] {
                for a in grid(0.0, 1.0, *points) {
                    let (f_a, f_b) = clone_fidelities_closed(&PauliCloner::new(a, branch)?);
                    let label = if branch == Branch::Plus { "plus" } else { "minus" };
                    csv.row(&[fmt_f64(a), label.to_string(), fmt_f64(f_a), fmt_f64(f_b)]);
                }
            }
            (csv.into_string(), "apps-cloner.csv")
        }
        AppsCmd::Transmit { points } => {
            if *points < 2 {
                bail!("--points must be at least 2");
            }
            let mut csv = Csv::new(
                &format!("points={points} spacing=uniform-p"),
                &["p", "alpha_star", "f_cl", "f_dir", "f_qm"],
            );
            for t in strategy_table(&grid(0.0, 1.0, *points))? {
                csv.row(&[
                    fmt_f64(t.p),
                    fmt_f64(t.alpha_star),
                    fmt_f64(t.f_cl),
                    fmt_f64(t.f_dir),
                    fmt_f64(t.f_qm),
                ]);
            }
            (csv.into_string(), "apps-transmit.csv")
        }
    };
    emit(&text, destination(cli, &cfg, name).as_deref())?;
    Ok(true)
}

fn run_report(cli: &Cli, cmd: &ReportCmd) -> Result<bool> {
    let ReportCmd::All { d, samples } = cmd;
    let dims = d.as_ref().map(|v| v.iter().map(|&x| x as usize).collect());
    let cfg = config(cli, *samples, dims)?;
    let report = verify::report_all(&cfg.d, cfg.samples, cfg.seed, &cfg.tolerances);
    for s in &report.suites {
        summarize(s);
    }
    let failed = report.suites.iter().filter(|s| !s.passed).count();
    eprintln!("{} of {} suites passed", report.suites.len() - failed, report.suites.len());
    let passed = report.passed;
    let text = to_json(&Envelope {
        version: VERSION,
        seed: None,
        body: &report,
    })?;
    emit(&text, destination(cli, &cfg, "report.json").as_deref())?;
    Ok(passed)
}
