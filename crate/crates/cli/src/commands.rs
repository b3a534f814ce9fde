//! Argument parsing and the five subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ultraflow::identities::{gamma2_report, lgamma_report};
use ultraflow::{
    check_gamma2, check_gamma2_eps, check_lgamma, check_lgamma_eps, deficit, figure1_rows, logsob_deficit,
    m_range, make_test_function, run_heat_flow, run_nonlinear_flow, run_regularized_flow, thresholds,
    DeficitReport, Error, FlowConfig, FlowKind, FlowTrace, GridFn, IdentityReport, Quadrature,
    RangeStatus, UltraParams,
};

use crate::fnspec;
use crate::output::{manifest_path, num, opt_num, write_figure1, write_trace, Report, RunManifest};
use crate::{CliError, CliResult, DEFAULT_NODES};

/// Residual above which `identities` reports a violation.
pub const IDENTITY_GATE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "ultraflow", version, about = "Ultraspherical flows, inequalities and admissible exponents")]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Quadrature nodes.
    #[arg(long, global = true, env = "ULTRAFLOW_NODES", default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Heat,
    Nonlinear,
    Regularized,
}

impl From<KindArg> for FlowKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Heat => FlowKind::Heat,
            KindArg::Nonlinear => FlowKind::Nonlinear,
            KindArg::Regularized => FlowKind::Regularized,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thresholds, discriminant and admissible ranges at (n, p).
    Range {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        p: f64,
    },
    /// CSV of m_minus, m_plus against p.
    Figure1 {
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 1.05)]
        p_min: f64,
        /// Defaults to 2* when n > 2 and to 10 otherwise.
        #[arg(long)]
        p_max: Option<f64>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deficit of the interpolation inequality (log-Sobolev at p = 2).
    Verify {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        p: f64,
        /// Function of z, e.g. "1+0.1*z" or "fab(1,0.5)".
        #[arg(long = "fn")]
        function: String,
        /// Constant in front of the entropy term; defaults to n.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Runs a flow and writes its trace as CSV plus a JSON manifest.
    Flow {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Initial datum as a function of z.
        #[arg(long, default_value = "1+0.01*z+0.05*z^2")]
        u0: String,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        h0: f64,
        #[arg(long, default_value_t = 1.0)]
        h1: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Worst residuals of the integration-by-parts identities over seeded trials.
    Identities {
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use test functions without u′(±1) = 0 and skip the boundary check.
        #[arg(long)]
        no_neumann: bool,
    },
}

/// Runs one parsed command, writing human or JSON output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    if cli.nodes < 2 {
        return Err(CliError::Usage(format!("--nodes must be at least 2, got {}", cli.nodes)));
    }
    match &cli.command {
        Command::Range { n, p } => range(cli, out, *n, *p),
        Command::Figure1 {
            n,
            p_min,
            p_max,
            steps,
            out: path,
        } => figure1(cli, out, *n, *p_min, *p_max, *steps, path.as_ref()),
        Command::Verify { n, p, function, lambda } => verify(cli, out, *n, *p, function, *lambda),
        Command::Flow { .. } => flow(cli, out),
        Command::Identities {
            n,
            eps,
            trials,
            seed,
            no_neumann,
        } => identities(cli, out, *n, *eps, *trials, *seed, *no_neumann),
    }
}

/// JSON number, or a string for infinities.
fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn emit_json(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn status_label(s: RangeStatus) -> &'static str {
    match s {
        RangeStatus::Interval => "interval",
        RangeStatus::DoubleRoot => "double-root",
        RangeStatus::Empty => "empty",
        RangeStatus::Degenerate => "degenerate",
    }
}

fn range(cli: &Cli, out: &mut dyn Write, n: f64, p: f64) -> CliResult<()> {
    let r = m_range(n, p)?;
    let intervals: Vec<(f64, f64)> = r.beta.intervals.iter().map(|i| (i.lo, i.hi)).collect();
    if cli.json {
        let v = json!({
            "n": n,
            "p": p,
            "p_sharp": jnum(r.p_sharp),
            "p_crit": jnum(r.p_crit),
            "A": r.a,
            "B": r.b,
            "C": r.c,
            "disc": r.disc,
            "m_minus": r.m_minus,
            "m_plus": r.m_plus,
            "status": status_label(r.status),
            "beta_intervals": intervals.iter().map(|(lo, hi)| json!([jnum(*lo), jnum(*hi)])).collect::<Vec<_>>(),
            "excluded_beta": r.excluded_beta,
            "beta_upper": r.beta_upper,
        });
        return emit_json(out, &v);
    }
    let mut rep = Report::default();
    rep.num("n", n)
        .num("p", p)
        .num("p_sharp", r.p_sharp)
        .num("p_crit", r.p_crit)
        .num("A", r.a)
        .num("B", r.b)
        .num("C", r.c)
        .num("B^2-AC", r.disc)
        .line("m_minus", opt_num(r.m_minus))
        .line("m_plus", opt_num(r.m_plus))
        .line("status", status_label(r.status));
    let beta = if intervals.is_empty() {
        "empty".to_string()
    } else {
        intervals
            .iter()
            .map(|(lo, hi)| format!("[{}, {}]", num(*lo), num(*hi)))
            .collect::<Vec<_>>()
            .join(" u ")
    };
    rep.line("beta", beta);
    write!(out, "{}", rep.render())?;
    if r.status == RangeStatus::Degenerate {
        writeln!(out, "note: special case A = B = 0; delta is identically 1 and no beta is admissible here")?;
    }
    Ok(())
}

fn figure1(
    cli: &Cli,
    out: &mut dyn Write,
    n: f64,
    p_min: f64,
    p_max: Option<f64>,
    steps: usize,
    path: Option<&PathBuf>,
) -> CliResult<()> {
    let (_, p_crit) = thresholds(n);
    let p_max = p_max.unwrap_or(if p_crit.is_finite() { p_crit } else { 10.0 });
    let rows = figure1_rows(n, p_min, p_max, steps)?;
    match path {
        Some(path) => {
            write_figure1(&rows, BufWriter::new(File::create(path)?))?;
            let mut m = RunManifest::new("figure1", 0);
            m.param("n", n)
                .param("p_min", p_min)
                .param("p_max", p_max)
                .param("steps", steps)
                .param("nodes", cli.nodes);
            m.outputs.push(path.display().to_string());
            m.write(&manifest_path(path))?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None if cli.json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "p": r.p,
                        "m_minus": r.m_minus,
                        "m_plus": r.m_plus,
                        "n_over_n_plus_2": r.m_dotted,
                        "n_minus_2_over_n": r.m_dashed,
                    })
                })
                .collect();
            emit_json(out, &Value::Array(v))?;
        }
        None => write_figure1(&rows, out)?,
    }
    Ok(())
}

fn sample_spec(src: &str, q: &Quadrature, n: f64) -> CliResult<GridFn> {
    let expr = fnspec::parse(src)?;
    let f = GridFn::sample(q, |z| expr.eval(z, n));
    if f.values().iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("'{src}' is not finite at every node")));
    }
    Ok(f)
}

fn verify(cli: &Cli, out: &mut dyn Write, n: f64, p: f64, src: &str, lambda: Option<f64>) -> CliResult<()> {
    let params = UltraParams::new(n, p)?;
    let q = Quadrature::plain(n, cli.nodes)?;
    let f = sample_spec(src, &q, n)?;
    let report: DeficitReport = if p == 2.0 {
        if lambda.is_some() {
            return Err(CliError::Usage("--lambda is fixed to n/2 at p = 2".into()));
        }
        logsob_deficit(&f, &q, &params)?
    } else {
        deficit(&f, &q, &params, lambda.unwrap_or(n))?
    };
    if cli.json {
        return emit_json(out, &serde_json::to_value(report)?);
    }
    let mut rep = Report::default();
    rep.line("inequality", if p == 2.0 { "log-Sobolev" } else { "interpolation" })
        .num("fisher", report.fisher)
        .num("entropy_term", report.entropy_term)
        .num("lambda", report.lambda_used)
        .num("deficit", report.deficit);
    write!(out, "{}", rep.render())?;
    Ok(())
}

/// Whether the theory predicts a non-increasing `F` for this run.
fn monotone_expected(cfg: &FlowConfig) -> CliResult<bool> {
    if cfg.lambda.is_some() {
        return Ok(false);
    }
    let prm = &cfg.params;
    Ok(match cfg.kind {
        FlowKind::Heat => prm.p() <= thresholds(prm.n()).0,
        _ => m_range(prm.n(), prm.p())?.admits_flow(prm.beta()),
    })
}

fn flow(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let Command::Flow {
        kind,
        n,
        p,
        beta,
        eps,
        t_end,
        dt,
        record_every,
        u0,
        lambda,
        h0,
        h1,
        out: path,
    } = &cli.command
    else {
        unreachable!("flow called with another command")
    };
    let kind = FlowKind::from(*kind);
    let mut params = UltraParams::new(*n, *p)?.with_beta(*beta)?;
    if kind == FlowKind::Regularized {
        params = params.with_eps(*eps)?;
    }
    let mut cfg = FlowConfig::new(kind, params)?
        .with_time(*dt, *t_end)
        .with_record_every(*record_every)
        .with_bounds(*h0, *h1);
    if let Some(l) = lambda {
        cfg = cfg.with_lambda(*l);
    }
    cfg.validate()?;
    let q = Quadrature::build(&cfg.params, cli.nodes, kind.measure())?;
    let start = sample_spec(u0, &q, *n)?;

    let result = match kind {
        FlowKind::Heat => run_heat_flow(&start, &q, &cfg),
        FlowKind::Nonlinear => run_nonlinear_flow(&start, &q, &cfg),
        FlowKind::Regularized => run_regularized_flow(&start, &q, &cfg),
    };
    let (trace, failure): (FlowTrace, Option<Error>) = match result {
        Ok(t) => (t, None),
        Err(Error::PositivityLost { time, min_u, partial }) => {
            ((*partial).clone(), Some(Error::PositivityLost { time, min_u, partial }))
        }
        Err(e) => return Err(e.into()),
    };

    write_trace(&trace, BufWriter::new(File::create(path)?))?;
    let mut m = RunManifest::new("flow", 0);
    m.param("kind", format!("{kind:?}").to_lowercase())
        .param("n", n)
        .param("p", p)
        .param("beta", cfg.params.beta())
        .param("eps", cfg.params.eps())
        .param("t_end", t_end)
        .param("dt", dt)
        .param("record_every", record_every)
        .param("u0", u0)
        .param("lambda", trace.lambda)
        .param("h0", h0)
        .param("h1", h1)
        .param("nodes", cli.nodes);
    m.outputs.push(path.display().to_string());
    m.write(&manifest_path(path))?;

    if let Some(e) = failure {
        return Err(e.into());
    }
    let rise = trace.worst_f_increase(1e-9, 1e-12);
    let gated = monotone_expected(&cfg)?;
    let summary = json!({
        "records": trace.len(),
        "lambda": trace.lambda,
        "mass_drift": trace.mass_drift(),
        "f_first": trace.f_values.first(),
        "f_last": trace.f_values.last(),
        "worst_f_increase": rise,
        "monotonicity_checked": gated,
        "bound_events": trace.bound_events.len(),
        "out": path.display().to_string(),
    });
    if cli.json {
        emit_json(out, &summary)?;
    } else {
        let mut rep = Report::default();
        rep.line("records", trace.len().to_string())
            .num("lambda", trace.lambda)
            .num("mass_drift", trace.mass_drift())
            .num("F_first", trace.f_values[0])
            .num("F_last", *trace.f_values.last().unwrap_or(&f64::NAN))
            .line("bound_events", trace.bound_events.len().to_string())
            .line("out", path.display().to_string());
        write!(out, "{}", rep.render())?;
    }
    if gated && rise > 0.0 {
        return Err(CliError::Violation(format!("F increased by {} beyond tolerance", num(rise))));
    }
    Ok(())
}

fn identities(
    cli: &Cli,
    out: &mut dyn Write,
    n: f64,
    eps: f64,
    trials: u64,
    seed: u64,
    no_neumann: bool,
) -> CliResult<()> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    // The identities do not involve p; any admissible value will do.
    let params = UltraParams::new(n, 3.0)?;
    let q = Quadrature::plain(n, cli.nodes)?;
    let mut worst: Vec<IdentityReport> = vec![];
    let mut keep = |r: IdentityReport| match worst.iter_mut().find(|w| w.identity_tag == r.identity_tag) {
        Some(w) if w.residual >= r.residual => {}
        Some(w) => *w = r,
        None => worst.push(r),
    };
    for s in seed..seed + trials {
        let u = make_test_function(s, &q, !no_neumann);
        if no_neumann {
            keep(gamma2_report(&u, &q, &params)?.with_seed(s));
            keep(lgamma_report(&u, &q, &params)?.with_seed(s));
        } else {
            keep(check_gamma2(&u, &q, &params)?.with_seed(s));
            keep(check_lgamma(&u, &q, &params)?.with_seed(s));
        }
    }
    if eps > 0.0 {
        let reg = params.with_eps(eps)?;
        let qe = Quadrature::regularized(n, eps, cli.nodes)?;
        for s in seed..seed + trials {
            let u = make_test_function(s, &qe, !no_neumann);
            keep(check_gamma2_eps(&u, &qe, &reg)?.with_seed(s));
            keep(check_lgamma_eps(&u, &qe, &reg)?.with_seed(s));
        }
    }
    if cli.json {
        let v: Vec<Value> = worst
            .iter()
            .map(|r| {
                json!({
                    "identity": r.identity_tag.label(),
                    "lhs": r.lhs,
                    "rhs": r.rhs,
                    "residual": r.residual,
                    "seed": r.seed,
                })
            })
            .collect();
        emit_json(out, &json!({ "n": n, "eps": eps, "trials": trials, "seed": seed, "worst": v }))?;
    } else {
        let mut rep = Report::default();
        for r in &worst {
            rep.line(
                r.identity_tag.label(),
                format!("{} (seed {})", num(r.residual), r.seed.unwrap_or_default()),
            );
        }
        write!(out, "{}", rep.render())?;
    }
    let bad: Vec<&str> = worst
        .iter()
        .filter(|r| r.residual.is_nan() || r.residual > IDENTITY_GATE)
        .map(|r| r.identity_tag.label())
        .collect();
    if !bad.is_empty() {
        return Err(CliError::Violation(format!(
            "residual above {} for {}",
            num(IDENTITY_GATE),
            bad.join(", ")
        )));
    }
    Ok(())
}

/// Writes to stdout; kept separate so tests can capture output instead.
pub fn run_to_stdout(cli: &Cli) -> CliResult<()> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    run(cli, &mut lock)
}
