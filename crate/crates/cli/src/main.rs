//! `fbl`: finite-blocklength bounds for lossy source coding.

mod config;
mod output;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbl_core::bounds::{binary, dms, BoundKind, Remainder};
use fbl_core::figures::{self, BoundFigure, CurvePoint, FigureId, PLAN_EPS, PLAN_EXCESS};
use fbl_core::oracle;
use fbl_core::solver::{distortion_bound, rate_bound, BoundId, SolveOptions};
use fbl_core::sources::{PlanMode, SourceModel};
use fbl_core::Error;
use output::{field, num};
use std::f64::consts::LN_2;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "fbl", version, about = "Finite-blocklength bounds for lossy source coding")]
struct Cli {
    /// Output file (bound, sweep, plan, verify) or directory (figure).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot (figure).
    #[arg(long, global = true)]
    svg: bool,
    /// Report rates in nats instead of bits.
    #[arg(long, global = true)]
    nats: bool,
    /// Seed for Monte Carlo checks.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one bound at one point.
    Bound(BoundArgs),
    /// Evaluate bounds over a blocklength range.
    Sweep(SweepArgs),
    /// Regenerate the data (and optionally a plot) of a reference figure.
    Figure(FigureArgs),
    /// Estimate the blocklength needed to get within a relative excess of the limit.
    Plan(PlanArgs),
    /// Run the oracle checks: exhaustive search, Monte Carlo, lossless scan.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SourceKind {
    /// Binary memoryless source.
    Bms,
    /// Discrete memoryless source with Hamming distortion.
    Dms,
    /// Binary erased source.
    Bes,
    /// Gaussian memoryless source with squared-error distortion.
    Gms,
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    #[arg(long, value_enum)]
    source: SourceKind,
    /// Bias of the binary source.
    #[arg(long)]
    p: Option<f64>,
    /// Comma-separated pmf of a discrete source.
    #[arg(long, value_delimiter = ',')]
    pmf: Option<Vec<f64>>,
    /// Erasure probability.
    #[arg(long)]
    delta: Option<f64>,
    /// Variance of the Gaussian source.
    #[arg(long)]
    sigma2: Option<f64>,
}

impl SourceArgs {
    fn model(&self) -> Result<SourceModel, CliError> {
        fn need<T: Clone>(v: &Option<T>, flag: &str, src: &str) -> Result<T, CliError> {
            v.clone()
                .ok_or_else(|| CliError::Usage(format!("--source {src} requires --{flag}")))
        }
        Ok(match self.source {
            SourceKind::Bms => SourceModel::bms(need(&self.p, "p", "bms")?)?,
            SourceKind::Dms => SourceModel::dms(&need(&self.pmf, "pmf", "dms")?)?,
            SourceKind::Bes => SourceModel::bes(need(&self.delta, "delta", "bes")?)?,
            SourceKind::Gms => SourceModel::gms(need(&self.sigma2, "sigma2", "gms")?)?,
        })
    }
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    /// Approximation remainder: zero, half-log-n, neg-half-log-n, upper-envelope.
    #[arg(long)]
    remainder: Option<String>,
    /// Round code sizes to integers.
    #[arg(long)]
    integer_m: bool,
}

impl SolveArgs {
    fn options(&self) -> Result<SolveOptions, CliError> {
        let remainder = match &self.remainder {
            None => None,
            Some(s) => Some(
                Remainder::parse(s)
                    .ok_or_else(|| CliError::Usage(format!("unknown remainder {s:?}")))?,
            ),
        };
        Ok(SolveOptions {
            integer_m: self.integer_m,
            remainder,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Blocklength.
    #[arg(long)]
    n: u64,
    /// Distortion level; the result is a rate.
    #[arg(long, conflicts_with = "rate", required_unless_present = "rate")]
    d: Option<f64>,
    /// Rate (bits, or nats with --nats); the result is a distortion.
    #[arg(long)]
    rate: Option<f64>,
    /// Target excess-distortion probability.
    #[arg(long)]
    eps: f64,
    /// Bound name, e.g. ebms-ach, bms-ht-conv, volume-converse, approx.
    #[arg(long)]
    bound: String,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Blocklength range `lo:hi:step` (inclusive).
    #[arg(long)]
    n: String,
    /// Distortion level.
    #[arg(long)]
    d: f64,
    /// Target excess-distortion probability.
    #[arg(long)]
    eps: f64,
    /// Comma-separated bound names, or `all`.
    #[arg(long, default_value = "all")]
    bounds: String,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// fig1 .. fig6, fig8, fig9.
    name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Fixed distortion, rate within the excess.
    Rate,
    /// Fixed rate, distortion within the excess.
    Distortion,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value_t = Mode::Rate)]
    mode: Mode,
    /// Distortion level (rate mode).
    #[arg(long)]
    d: Option<f64>,
    /// Rate (distortion mode; bits, or nats with --nats).
    #[arg(long)]
    rate: Option<f64>,
    /// Relative excess over the asymptotic limit.
    #[arg(long, default_value_t = 0.1)]
    excess: f64,
    /// Target excess-distortion probability.
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Monte Carlo trials per parameter set.
    #[arg(long, default_value_t = 200_000)]
    trials: u64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} verification check(s) failed")]
    Verify(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Verify(_) => 1,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::Unsupported(_) | Error::Bracket(_) => 2,
                Error::Budget { .. } => 3,
                Error::NonConvergence { .. } | Error::Monotonicity(_) | Error::NonFinite(_) => 4,
            },
        }
    }
}

struct Ctx {
    out: Option<PathBuf>,
    svg: bool,
    nats: bool,
    seed: u64,
}

impl Ctx {
    fn unit(&self) -> &'static str {
        if self.nats {
            "nats"
        } else {
            "bits"
        }
    }

    fn rate_out(&self, bits: f64) -> f64 {
        if self.nats {
            bits * LN_2
        } else {
            bits
        }
    }

    fn rate_in(&self, r: f64) -> f64 {
        if self.nats {
            r
        } else {
            r * LN_2
        }
    }
}

fn parse_bound(name: &str) -> Result<BoundId, CliError> {
    BoundId::parse(name).ok_or_else(|| {
        let all: Vec<&str> = BoundId::ALL.iter().map(|b| b.name()).collect();
        CliError::Usage(format!("unknown bound {name:?}; known: {}", all.join(", ")))
    })
}

fn parse_range(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("blocklength range must be lo:hi:step, got {text:?}"));
    let parts: Vec<u64> = text
        .split(':')
        .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let (lo, hi, step) = match parts[..] {
        [lo, hi, step] => (lo, hi, step),
        [lo, hi] => (lo, hi, 1),
        [n] => (n, n, 1),
        _ => return Err(bad()),
    };
    if lo == 0 || step == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).step_by(step as usize).collect())
}

fn params(src: &SourceModel) -> String {
    match src {
        SourceModel::Bms { p } => format!("p={}", num(*p)),
        SourceModel::Dms { pmf } => format!(
            "pmf={}",
            pmf.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
        ),
        SourceModel::Bes { delta } => format!("delta={}", num(*delta)),
        SourceModel::Gms { sigma2 } => format!("sigma2={}", num(*sigma2)),
    }
}

fn cmd_bound(ctx: &Ctx, a: &BoundArgs) -> Result<(), CliError> {
    let src = a.source.model()?;
    let id = parse_bound(&a.bound)?;
    let opts = a.solve.options()?;
    let unit = ctx.unit();
    let mut w = output::sink(ctx.out.as_deref())?;
    if let Some(r) = a.rate {
        let rate_nats = ctx.rate_in(r);
        let d = distortion_bound(&src, id, a.n, rate_nats, a.eps, opts)?;
        match a.format {
            Format::Csv => {
                writeln!(w, "source,params,n,rate_{unit},eps,bound,kind,d")?;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    src.name(),
                    field(&params(&src)),
                    a.n,
                    num(r),
                    num(a.eps),
                    id.name(),
                    id.kind().as_str(),
                    num(d)
                )?;
            }
            Format::Text => {
                writeln!(w, "source      {} ({})", src.name(), params(&src))?;
                writeln!(w, "n           {}", a.n)?;
                writeln!(w, "rate        {} {unit}/symbol", num(r))?;
                writeln!(w, "eps         {}", num(a.eps))?;
                writeln!(w, "bound       {} ({})", id.name(), id.kind().as_str())?;
                writeln!(w, "distortion  {}", num(d))?;
            }
        }
        return Ok(w.flush()?);
    }
    let d = a.d.expect("clap enforces d or rate");
    let v = rate_bound(&src, id, a.n, d, a.eps, opts)?;
    let diag: Vec<String> = v
        .diagnostics
        .iter()
        .map(|(k, x)| format!("{k}={}", num(*x)))
        .collect();
    match a.format {
        Format::Csv => {
            writeln!(
                w,
                "source,params,n,d,eps,bound,kind,rate_{unit},log_m_nats,diagnostics"
            )?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                src.name(),
                field(&params(&src)),
                v.n,
                num(d),
                num(a.eps),
                v.name,
                v.kind.as_str(),
                num(ctx.rate_out(v.rate_bits)),
                num(v.log_m_nats),
                field(&diag.join(";"))
            )?;
        }
        Format::Text => {
            writeln!(w, "source      {} ({})", src.name(), params(&src))?;
            writeln!(w, "n           {}", v.n)?;
            writeln!(w, "d           {}", num(d))?;
            writeln!(w, "eps         {}", num(a.eps))?;
            writeln!(w, "bound       {} ({})", v.name, v.kind.as_str())?;
            writeln!(w, "rate        {} {unit}/symbol", num(ctx.rate_out(v.rate_bits)))?;
            writeln!(w, "log M       {} nats", num(v.log_m_nats))?;
            for line in diag {
                writeln!(w, "  {line}")?;
            }
        }
    }
    Ok(w.flush()?)
}

fn write_bound_csv(
    w: &mut dyn Write,
    ctx: &Ctx,
    points: &[figures::BoundPoint],
) -> Result<(), CliError> {
    writeln!(w, "n,bound,kind,rate_{}", ctx.unit())?;
    for p in points {
        match (p.kind, p.rate_bits) {
            (Some(k), Some(r)) => writeln!(
                w,
                "{},{},{},{}",
                p.n,
                p.bound.name(),
                k.as_str(),
                num(ctx.rate_out(r))
            )?,
            _ => writeln!(w, "{},{},error,", p.n, p.bound.name())?,
        }
    }
    Ok(())
}

fn report_errors(points: &[figures::BoundPoint]) {
    for p in points {
        if let Some(e) = &p.error {
            eprintln!("n={} {}: {e}", p.n, p.bound.name());
        }
    }
}

fn cmd_sweep(ctx: &Ctx, a: &SweepArgs) -> Result<(), CliError> {
    let src = a.source.model()?;
    let grid = parse_range(&a.n)?;
    let bounds = if a.bounds == "all" {
        BoundId::for_source(&src)
    } else {
        a.bounds
            .split(',')
            .map(|s| parse_bound(s.trim()))
            .collect::<Result<Vec<_>, _>>()?
    };
    let points = figures::sweep(&src, a.d, a.eps, &bounds, &grid, a.solve.options()?);
    report_errors(&points);
    let mut w = output::sink(ctx.out.as_deref())?;
    write_bound_csv(&mut w, ctx, &points)?;
    Ok(w.flush()?)
}

fn bound_panel(ctx: &Ctx, fig: &BoundFigure, points: &[figures::BoundPoint]) -> svg::Panel {
    let series = fig
        .bounds
        .iter()
        .map(|&b| svg::Series {
            name: b.name().to_string(),
            points: points
                .iter()
                .filter(|p| p.bound == b)
                .map(|p| (p.n as f64, p.rate_bits.map_or(f64::NAN, |r| ctx.rate_out(r))))
                .collect(),
        })
        .collect();
    svg::Panel {
        title: fig.title.to_string(),
        x_label: "blocklength n".into(),
        y_label: format!("rate ({}/symbol)", ctx.unit()),
        x_log: true,
        y_log: false,
        series,
    }
}

fn curve_panels(ctx: &Ctx, id: FigureId, rows: &[CurvePoint]) -> Vec<svg::Panel> {
    let rd = svg::Series {
        name: "R(d)".into(),
        points: rows.iter().map(|r| (r.d, ctx.rate_out(r.rate_bits))).collect(),
    };
    let lengths = PLAN_EPS
        .iter()
        .enumerate()
        .map(|(i, e)| svg::Series {
            name: format!("eps = {}", num(*e)),
            points: rows.iter().map(|r| (r.d, r.blocklength[i])).collect(),
        })
        .collect();
    vec![
        svg::Panel {
            title: format!("{}: rate-distortion function", id.name()),
            x_label: "distortion d".into(),
            y_label: format!("rate ({}/symbol)", ctx.unit()),
            x_log: false,
            y_log: false,
            series: vec![rd],
        },
        svg::Panel {
            title: format!(
                "{}: blocklength for rate {} R(d)",
                id.name(),
                num(1.0 + PLAN_EXCESS)
            ),
            x_label: "distortion d".into(),
            y_label: "required blocklength".into(),
            x_log: false,
            y_log: true,
            series: lengths,
        },
    ]
}

fn cmd_figure(ctx: &Ctx, a: &FigureArgs) -> Result<(), CliError> {
    let id = FigureId::parse(&a.name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown figure {:?}; known: fig1, fig2, fig3, fig4, fig5, fig6, fig8, fig9",
            a.name
        ))
    })?;
    let dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}.csv", id.name()));
    let mut w = output::sink(Some(&csv_path))?;
    let panels = if let Some(fig) = figures::bound_figure(id) {
        let points = figures::bound_figure_data(&fig);
        report_errors(&points);
        write_bound_csv(&mut w, ctx, &points)?;
        vec![bound_panel(ctx, &fig, &points)]
    } else {
        let (src, grid) = figures::curve_figure(id).expect("curve figure");
        let rows = figures::curve_figure_data(&src, &grid)?;
        let unit = ctx.unit();
        let sq = if ctx.nats { 1.0 } else { 1.0 / (LN_2 * LN_2) };
        let mut header = format!("d,rate_{unit},dispersion_{unit}2");
        for e in PLAN_EPS {
            header += &format!(",n_eps_{}", num(e));
        }
        writeln!(w, "{header}")?;
        for r in &rows {
            let mut line = format!(
                "{},{},{}",
                num(r.d),
                num(ctx.rate_out(r.rate_bits)),
                num(r.dispersion_bits2 * (LN_2 * LN_2) * sq)
            );
            for n in &r.blocklength {
                line += &format!(",{}", num(*n));
            }
            writeln!(w, "{line}")?;
        }
        curve_panels(ctx, id, &rows)
    };
    w.flush()?;
    eprintln!("wrote {}", csv_path.display());
    if ctx.svg {
        let svg_path = dir.join(format!("{}.svg", id.name()));
        std::fs::write(&svg_path, svg::render(&panels))?;
        eprintln!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn cmd_plan(ctx: &Ctx, a: &PlanArgs) -> Result<(), CliError> {
    let src = a.source.model()?;
    let (mode, target, shown) = match a.mode {
        Mode::Rate => {
            let d = a
                .d
                .ok_or_else(|| CliError::Usage("--mode rate requires --d".into()))?;
            (PlanMode::Rate, d, format!("d = {}", num(d)))
        }
        Mode::Distortion => {
            let r = a
                .rate
                .ok_or_else(|| CliError::Usage("--mode distortion requires --rate".into()))?;
            (
                PlanMode::Distortion,
                ctx.rate_in(r),
                format!("rate = {} {}", num(r), ctx.unit()),
            )
        }
    };
    let plan = src.required_blocklength(mode, target, a.excess, a.eps)?;
    let mut w = output::sink(ctx.out.as_deref())?;
    match a.format {
        Format::Csv => {
            writeln!(
                w,
                "source,params,mode,target,excess,eps,n,source_factor,reliability_factor,zero_dispersion"
            )?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                src.name(),
                field(&params(&src)),
                match a.mode {
                    Mode::Rate => "rate",
                    Mode::Distortion => "distortion",
                },
                num(target),
                num(a.excess),
                num(a.eps),
                num(plan.n),
                num(plan.source_factor),
                num(plan.reliability_factor),
                plan.zero_dispersion
            )?;
        }
        Format::Text => {
            writeln!(w, "source              {} ({})", src.name(), params(&src))?;
            writeln!(w, "target              {shown}, excess {}, eps {}", num(a.excess), num(a.eps))?;
            writeln!(w, "source factor       {}  (dispersion / limit^2)", num(plan.source_factor))?;
            writeln!(w, "reliability factor  {}  ((Q^-1(eps) / excess)^2)", num(plan.reliability_factor))?;
            writeln!(w, "blocklength         {}", num(plan.n))?;
            if plan.zero_dispersion {
                writeln!(w, "zero dispersion: the second-order estimate gives no blocklength penalty")?;
            }
        }
    }
    Ok(w.flush()?)
}

fn cmd_verify(ctx: &Ctx, a: &VerifyArgs) -> Result<(), CliError> {
    let mut w = output::sink(ctx.out.as_deref())?;
    let mut failures = 0;
    let mut check = |w: &mut dyn Write, ok: bool, line: String| -> std::io::Result<()> {
        if !ok {
            failures += 1;
        }
        writeln!(w, "{} {line}", if ok { "PASS" } else { "FAIL" })
    };

    // exhaustive search brackets every bound at tiny blocklengths
    let int = SolveOptions {
        integer_m: true,
        ..Default::default()
    };
    for n in 1..=oracle::BRUTE_FORCE_MAX_N {
        for p in [0.3, 0.5] {
            for d in [0.0, 0.25] {
                for eps in [0.05, 0.2] {
                    let src = SourceModel::bms(p)?;
                    let ln_mstar = (oracle::brute_force_mstar(p, n, d, eps)? as f64).ln();
                    let mut bad = Vec::new();
                    let mut evaluated = 0;
                    for id in BoundId::for_source(&src) {
                        if id == BoundId::Approx {
                            continue;
                        }
                        if let Ok(b) = rate_bound(&src, id, n, d, eps, int) {
                            evaluated += 1;
                            let ok = match b.kind {
                                BoundKind::Converse => b.log_m_nats <= ln_mstar + 1e-12,
                                _ => ln_mstar <= b.log_m_nats + 1e-12,
                            };
                            if !ok {
                                bad.push(id.name());
                            }
                        }
                    }
                    check(
                        &mut w,
                        bad.is_empty(),
                        format!(
                            "exhaustive n={n} p={p} d={d} eps={eps}: M* = {}, {evaluated} bounds bracket it{}",
                            num(ln_mstar.exp().round()),
                            if bad.is_empty() {
                                String::new()
                            } else {
                                format!(", violated by {}", bad.join(" "))
                            }
                        ),
                    )?;
                }
            }
        }
    }

    // random-coding bounds are exact for equiprobable sources
    let sets: [(u32, u64, f64, u64); 6] = [
        (2, 8, 0.125, 4),
        (2, 10, 0.2, 8),
        (2, 6, 1.0 / 6.0, 2),
        (3, 5, 0.2, 6),
        (4, 4, 0.25, 5),
        (3, 6, 1.0 / 3.0, 3),
    ];
    for (i, &(m, n, d, size)) in sets.iter().enumerate() {
        let pmf = vec![1.0 / m as f64; m as usize];
        let lm = (size as f64).ln();
        let exact = if m == 2 {
            binary::ebms_achievability(n, d, lm)?
        } else {
            dms::edms_achievability(n, d, lm, m)?
        };
        let est = oracle::mc_random_coding(&pmf, &pmf, n, d, size, a.trials, ctx.seed + i as u64)?;
        let z = (est.eps_hat - exact).abs() / est.stderr.max(f64::MIN_POSITIVE);
        check(
            &mut w,
            z <= 3.0,
            format!(
                "monte carlo m={m} n={n} d={} M={size}: {} vs exact {} ({} standard errors)",
                num(d),
                num(est.eps_hat),
                num(exact),
                num(z)
            ),
        )?;
    }

    // lossless minimum code size against exhaustive search
    for &(p, n, eps) in &[(0.3, 3u64, 0.2), (0.5, 4, 0.05), (0.4, 4, 0.3)] {
        let brute = oracle::brute_force_mstar(p, n, 0.0, eps)?;
        let scan = oracle::lossless_mstar(&[1.0 - p, p], n, eps)?;
        check(
            &mut w,
            scan.m_star == brute as f64,
            format!("lossless p={p} n={n} eps={eps}: scan {} vs exhaustive {brute}", num(scan.m_star)),
        )?;
    }
    w.flush()?;
    if failures > 0 {
        return Err(CliError::Verify(failures));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let ctx = Ctx {
        out: cli.out,
        svg: cli.svg,
        nats: cli.nats,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Bound(a) => cmd_bound(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Figure(a) => cmd_figure(&ctx, a),
        Command::Plan(a) => cmd_plan(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
    }
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::config_path(&args) {
        match config::load(Path::new(&path)) {
            Ok(cfg) => args = config::merge(args, &cfg),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("10:30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_range("5:7").unwrap(), vec![5, 6, 7]);
        assert_eq!(parse_range("9").unwrap(), vec![9]);
        assert!(parse_range("0:10:1").is_err());
        assert!(parse_range("10:5:1").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(Error::Domain("x".into())).exit_code(), 2);
        let budget = Error::Budget {
            what: "types",
            needed: 1e8,
            cap: 1e7,
        };
        assert_eq!(CliError::Core(budget).exit_code(), 3);
        let slow = Error::NonConvergence {
            what: "q",
            achieved: 1.0,
            wanted: 0.1,
        };
        assert_eq!(CliError::Core(slow).exit_code(), 4);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
