//! Command-line front end: exact sweeps, CHSH runs, pre-measurement reports
//! and sampled event streams.

pub mod angle;
pub mod format;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use biphoton::coherence::{chsh, sweep_correlation, ChshSettings};
use biphoton::montecarlo::{bell_experiment, estimate_correlation, sample_events, sweep_monte_carlo, EventRecord};
use biphoton::optics::{output_state, rto_joint_distribution, PhaseSettings, Port, Visibility};
use biphoton::premeasure::{correlation_report, premeasure, CorrelationReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::ThreadPool;
use serde::Serialize;

use crate::angle::{parse_angle, parse_angle_list};
use crate::format::{num, rounded, rounded_opt, sig9};

#[derive(Debug, Parser)]
#[command(name = "biphoton", version, about = "Two-photon interferometer and pre-measurement simulator")]
pub struct Cli {
    /// Worker threads for parallel sampling (0 = all cores); results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact correlation and singles over a grid of phase differences Δ = φ_A − φ_B.
    Sweep(SweepArgs),
    /// Singles-only view of `sweep`.
    Marginals(GridArgs),
    /// CHSH value, exact and sampled.
    Bell(BellArgs),
    /// Object–detector pre-measurement correlation report.
    Premeasure(PremeasureArgs),
    /// Stream of sampled coincidence events as JSON lines.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// First grid point (radians; accepts e.g. pi/4).
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub delta_min: f64,
    /// Last grid point, included.
    #[arg(long, default_value = "pi", value_parser = parse_angle, allow_hyphen_values = true)]
    pub delta_max: f64,
    /// Number of grid points (at least 2).
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    #[arg(long, default_value = "1", value_parser = parse_visibility)]
    pub visibility: Visibility,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add sampled columns E_hat,stderr using N events per point and SEED.
    #[arg(long, value_name = "N,SEED", value_parser = parse_mc)]
    pub mc: Option<(usize, u64)>,
}

#[derive(Debug, Args)]
pub struct BellArgs {
    /// Four settings a,a',b,b' (radians).
    #[arg(long, value_parser = parse_chsh_angles, allow_hyphen_values = true, conflicts_with = "optimal")]
    pub angles: Option<ChshSettings>,
    /// Use a=0, a'=pi/2, b=pi/4, b'=-pi/4.
    #[arg(long)]
    pub optimal: bool,
    #[arg(long, default_value = "1", value_parser = parse_visibility)]
    pub visibility: Visibility,
    /// Events per setting.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PremeasureArgs {
    /// Relative phase of the object superposition.
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the pre-measurement state as JSON to this file.
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_a: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_b: f64,
    #[arg(long, default_value = "1", value_parser = parse_visibility)]
    pub visibility: Visibility,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the two-photon state at the detectors as JSON to this file.
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
}

fn parse_visibility(s: &str) -> Result<Visibility, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid visibility '{s}'"))?;
    Visibility::new(v).map_err(|e| e.to_string())
}

fn parse_mc(s: &str) -> Result<(usize, u64), String> {
    let bad = || format!("invalid --mc '{s}' (expected N,SEED with N >= 2)");
    let (n, seed) = s.split_once(',').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let seed: u64 = seed.trim().parse().map_err(|_| bad())?;
    if n < 2 {
        return Err(bad());
    }
    Ok((n, seed))
}

fn parse_chsh_angles(s: &str) -> Result<ChshSettings, String> {
    match parse_angle_list(s)?.as_slice() {
        &[a, a_prime, b, b_prime] => Ok(ChshSettings { a, a_prime, b, b_prime }),
        other => Err(format!("--angles needs four values, got {}", other.len())),
    }
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or values; exit status 2.
    Usage(String),
    /// I/O or internal error; exit status 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<biphoton::Error> for Failure {
    fn from(e: biphoton::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Run a parsed command. Primary output goes to `--output` or `stdout`;
/// summaries and verdict tables go to `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("cannot start worker threads")?;
    match &cli.command {
        Command::Sweep(args) => cmd_sweep(&pool, &args.grid, args.mc, stdout),
        Command::Marginals(args) => cmd_marginals(&pool, args, stdout),
        Command::Bell(args) => cmd_bell(&pool, args, stdout),
        Command::Premeasure(args) => cmd_premeasure(args, stdout, stderr),
        Command::Sample(args) => cmd_sample(args, stdout, stderr),
    }
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Failure>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("cannot open output {}", p.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().with_context(|| format!("cannot write {}", p.display()))?;
            Ok(())
        }
        None => {
            let mut w = BufWriter::new(stdout);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn grid_points(args: &GridArgs) -> Result<Vec<f64>, Failure> {
    if args.steps < 2 {
        return Err(Failure::Usage(format!("--steps must be at least 2, got {}", args.steps)));
    }
    if args.delta_max <= args.delta_min {
        return Err(Failure::Usage(format!(
            "--delta-max ({}) must exceed --delta-min ({})",
            args.delta_max, args.delta_min
        )));
    }
    let span = args.delta_max - args.delta_min;
    let last = (args.steps - 1) as f64;
    Ok((0..args.steps)
        .map(|i| {
            if i == args.steps - 1 {
                args.delta_max
            } else {
                args.delta_min + span * i as f64 / last
            }
        })
        .collect())
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(with = "rounded")]
    delta: f64,
    #[serde(rename = "E_exact", with = "rounded")]
    e_exact: f64,
    #[serde(with = "rounded")]
    p_pp: f64,
    #[serde(with = "rounded")]
    p_pm: f64,
    #[serde(with = "rounded")]
    p_mp: f64,
    #[serde(with = "rounded")]
    p_mm: f64,
    #[serde(rename = "pA_plus", with = "rounded")]
    pa_plus: f64,
    #[serde(rename = "pB_plus", with = "rounded")]
    pb_plus: f64,
    #[serde(rename = "E_hat", with = "rounded_opt", skip_serializing_if = "Option::is_none")]
    e_hat: Option<f64>,
    #[serde(with = "rounded_opt", skip_serializing_if = "Option::is_none")]
    stderr: Option<f64>,
}

impl SweepRow {
    const HEADER: &'static str = "delta,E_exact,p_pp,p_pm,p_mp,p_mm,pA_plus,pB_plus";

    fn csv(&self) -> String {
        let mut fields = vec![
            self.delta,
            self.e_exact,
            self.p_pp,
            self.p_pm,
            self.p_mp,
            self.p_mm,
            self.pa_plus,
            self.pb_plus,
        ];
        fields.extend(self.e_hat);
        fields.extend(self.stderr);
        fields.into_iter().map(num).collect::<Vec<_>>().join(",")
    }
}

#[derive(Serialize)]
struct MarginalRow {
    #[serde(with = "rounded")]
    delta: f64,
    #[serde(rename = "pA_plus", with = "rounded")]
    pa_plus: f64,
    #[serde(rename = "pA_minus", with = "rounded")]
    pa_minus: f64,
    #[serde(rename = "pB_plus", with = "rounded")]
    pb_plus: f64,
    #[serde(rename = "pB_minus", with = "rounded")]
    pb_minus: f64,
}

fn write_rows<T: Serialize>(
    w: &mut dyn Write,
    format: OutputFormat,
    header: &str,
    rows: &[T],
    csv: impl Fn(&T) -> String,
) -> Result<(), Failure> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{header}")?;
            for r in rows {
                writeln!(w, "{}", csv(r))?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, rows).context("serializing rows")?;
            writeln!(w)?;
        }
        OutputFormat::Jsonl => {
            for r in rows {
                serde_json::to_writer(&mut *w, r).context("serializing row")?;
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

fn cmd_sweep(
    pool: &ThreadPool,
    args: &GridArgs,
    mc: Option<(usize, u64)>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let grid = grid_points(args)?;
    let exact = pool.install(|| sweep_correlation(&grid, args.visibility))?;
    let sampled = match mc {
        Some((n, seed)) => Some(pool.install(|| sweep_monte_carlo(&grid, args.visibility, n, seed))?),
        None => None,
    };
    let rows: Vec<SweepRow> = (0..grid.len())
        .map(|i| {
            let t = exact.joints[i].table();
            let est = sampled.as_ref().map(|s| s[i]);
            SweepRow {
                delta: grid[i],
                e_exact: exact.correlations[i],
                p_pp: t[0][0],
                p_pm: t[0][1],
                p_mp: t[1][0],
                p_mm: t[1][1],
                pa_plus: exact.singles[i].a_plus,
                pb_plus: exact.singles[i].b_plus,
                e_hat: est.map(|e| e.estimate),
                stderr: est.map(|e| e.stderr),
            }
        })
        .collect();
    let header = if mc.is_some() {
        format!("{},E_hat,stderr", SweepRow::HEADER)
    } else {
        SweepRow::HEADER.to_owned()
    };
    with_output(args.output.as_deref(), stdout, |w| {
        write_rows(w, args.format, &header, &rows, SweepRow::csv)
    })
}

fn cmd_marginals(pool: &ThreadPool, args: &GridArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let grid = grid_points(args)?;
    let exact = pool.install(|| sweep_correlation(&grid, args.visibility))?;
    let rows: Vec<MarginalRow> = grid
        .iter()
        .zip(&exact.singles)
        .map(|(&delta, m)| MarginalRow {
            delta,
            pa_plus: m.a_plus,
            pa_minus: m.a_minus,
            pb_plus: m.b_plus,
            pb_minus: m.b_minus,
        })
        .collect();
    with_output(args.output.as_deref(), stdout, |w| {
        write_rows(w, args.format, "delta,pA_plus,pA_minus,pB_plus,pB_minus", &rows, |r| {
            [r.delta, r.pa_plus, r.pa_minus, r.pb_plus, r.pb_minus]
                .map(num)
                .join(",")
        })
    })
}

#[derive(Serialize)]
struct AnglesOut {
    #[serde(with = "rounded")]
    a: f64,
    #[serde(with = "rounded")]
    a_prime: f64,
    #[serde(with = "rounded")]
    b: f64,
    #[serde(with = "rounded")]
    b_prime: f64,
}

#[derive(Serialize)]
struct BellOut {
    angles: AnglesOut,
    #[serde(with = "rounded")]
    visibility: f64,
    #[serde(rename = "S_exact", with = "rounded")]
    s_exact: f64,
    #[serde(rename = "S_hat", with = "rounded")]
    s_hat: f64,
    #[serde(with = "rounded")]
    stderr: f64,
    n_per_setting: u64,
    seed: u64,
    violation: bool,
}

fn cmd_bell(pool: &ThreadPool, args: &BellArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let settings = match (args.angles, args.optimal) {
        (Some(s), _) => s,
        (None, true) => ChshSettings::optimal(),
        (None, false) => {
            return Err(Failure::Usage("bell needs --angles a,a',b,b' or --optimal".into()))
        }
    };
    let s_exact = chsh(&settings, args.visibility);
    let n = usize::try_from(args.samples).map_err(|_| Failure::Usage("--samples too large".into()))?;
    let sampled = pool.install(|| bell_experiment(&settings, args.visibility, n, args.seed))?;
    let out = BellOut {
        angles: AnglesOut {
            a: settings.a,
            a_prime: settings.a_prime,
            b: settings.b,
            b_prime: settings.b_prime,
        },
        visibility: args.visibility.value(),
        s_exact,
        s_hat: sampled.s.estimate,
        stderr: sampled.s.stderr,
        n_per_setting: args.samples,
        seed: args.seed,
        violation: sampled.s.estimate - 2.0 > 3.0 * sampled.s.stderr,
    };
    with_output(args.output.as_deref(), stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, &out).context("serializing report")?;
        writeln!(w)?;
        Ok(())
    })
}

#[derive(Serialize)]
struct DetectorRow<T> {
    ready: T,
    #[serde(rename = "D1")]
    d1: T,
    #[serde(rename = "D2")]
    d2: T,
}

#[derive(Serialize)]
struct ObjectTable<T> {
    #[serde(rename = "A1")]
    a1: DetectorRow<T>,
    #[serde(rename = "A2")]
    a2: DetectorRow<T>,
}

#[derive(Serialize)]
struct SubsystemCoherence {
    #[serde(rename = "rho_A", with = "rounded")]
    rho_a: f64,
    #[serde(rename = "rho_D", with = "rounded")]
    rho_d: f64,
}

#[derive(Serialize)]
struct ComplexOut {
    #[serde(with = "rounded")]
    re: f64,
    #[serde(with = "rounded")]
    im: f64,
    #[serde(with = "rounded")]
    modulus: f64,
    #[serde(with = "rounded")]
    phase: f64,
}

#[derive(Serialize)]
struct Verdict {
    joint_existence: &'static str,
    biconditional: &'static str,
}

#[derive(Serialize)]
struct PremeasureOut {
    #[serde(with = "rounded")]
    theta: f64,
    joint_probs: ObjectTable<f64>,
    conditional_probs: ObjectTable<Option<f64>>,
    subsystem_coherence: SubsystemCoherence,
    correlation_coherence: ComplexOut,
    #[serde(with = "rounded")]
    both_clicked_prob: f64,
    #[serde(with = "rounded")]
    iff_violation_prob: f64,
    verdict: Verdict,
}

const VERDICT_TOL: f64 = 1e-12;

/// Joint existence is refuted when no weight lies outside the correlated dyads;
/// the biconditional holds when every defined `P(Di|Ai)` is one and nothing violates it.
fn verdicts(r: &CorrelationReport) -> (bool, bool) {
    let joint_existence = r.both_clicked_prob > VERDICT_TOL;
    let conditionals_ok = [(0, 1), (1, 2)]
        .iter()
        .all(|&(a, d)| r.conditional_probs[a][d].is_none_or(|p| (p - 1.0).abs() < VERDICT_TOL));
    let biconditional = conditionals_ok && r.iff_violation_prob < VERDICT_TOL && r.ready_prob() < VERDICT_TOL;
    (joint_existence, biconditional)
}

fn table<T: Copy, U>(rows: &[[T; 3]; 2], f: impl Fn(T) -> U) -> ObjectTable<U> {
    let row = |r: &[T; 3]| DetectorRow {
        ready: f(r[0]),
        d1: f(r[1]),
        d2: f(r[2]),
    };
    ObjectTable {
        a1: row(&rows[0]),
        a2: row(&rows[1]),
    }
}

fn cmd_premeasure(args: &PremeasureArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let psi = premeasure(args.theta);
    let report = correlation_report(&psi)?;
    if let Some(path) = &args.dump_state {
        dump_state(path, &psi)?;
    }
    let (joint_existence, biconditional) = verdicts(&report);
    let label = |holds: bool, yes: &'static str, no: &'static str| if holds { yes } else { no };
    let z = report.correlation_coherence;
    let out = PremeasureOut {
        theta: args.theta,
        joint_probs: table(&report.joint_probs, sig9),
        conditional_probs: table(&report.conditional_probs, |p| p.map(sig9)),
        subsystem_coherence: SubsystemCoherence {
            rho_a: report.subsystem_coherence.0,
            rho_d: report.subsystem_coherence.1,
        },
        correlation_coherence: ComplexOut {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
            phase: z.arg(),
        },
        both_clicked_prob: report.both_clicked_prob,
        iff_violation_prob: report.iff_violation_prob,
        verdict: Verdict {
            joint_existence: label(joint_existence, "supported", "refuted"),
            biconditional: label(biconditional, "holds", "violated"),
        },
    };
    with_output(args.output.as_deref(), stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, &out).context("serializing report")?;
        writeln!(w)?;
        Ok(())
    })?;

    writeln!(stderr, "{:<44} {:<14} {:<14}", "reading of the pre-measurement state", "P(offending)", "verdict")?;
    writeln!(
        stderr,
        "{:<44} {:<14} {:<14}",
        "joint existence: A1D1 AND A2D2 both realized",
        num(report.both_clicked_prob),
        out.verdict.joint_existence
    )?;
    writeln!(
        stderr,
        "{:<44} {:<14} {:<14}",
        "biconditional: Ai IF AND ONLY IF Di",
        num(report.iff_violation_prob),
        out.verdict.biconditional
    )?;
    writeln!(
        stderr,
        "l1 coherence rho_A={} rho_D={}; |<A1 D1|rho|A2 D2>|={} phase={}",
        num(report.subsystem_coherence.0),
        num(report.subsystem_coherence.1),
        num(z.norm()),
        num(z.arg())
    )?;
    Ok(())
}

fn dump_state(path: &Path, psi: &biphoton::linalg::StateVector) -> Result<(), Failure> {
    let file = File::create(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, psi).context("serializing state")?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EventOut {
    trial: u64,
    #[serde(with = "rounded")]
    phi_a: f64,
    #[serde(with = "rounded")]
    phi_b: f64,
    a: &'static str,
    b: &'static str,
}

impl From<&EventRecord> for EventOut {
    fn from(e: &EventRecord) -> Self {
        EventOut {
            trial: e.trial,
            phi_a: e.settings.phi_a(),
            phi_b: e.settings.phi_b(),
            a: e.outcome_a.symbol(),
            b: e.outcome_b.symbol(),
        }
    }
}

fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let settings = PhaseSettings::new(args.phi_a, args.phi_b);
    if let Some(path) = &args.dump_state {
        dump_state(path, &output_state(settings))?;
    }
    let j = rto_joint_distribution(settings, args.visibility);
    let n = usize::try_from(args.samples).map_err(|_| Failure::Usage("--samples too large".into()))?;
    let events: Vec<EventRecord> = sample_events(&j, n, args.seed)?.collect();
    with_output(args.output.as_deref(), stdout, |w| {
        for e in &events {
            serde_json::to_writer(&mut *w, &EventOut::from(e)).context("serializing event")?;
            writeln!(w)?;
        }
        Ok(())
    })?;

    let mut counts = [0u64; 4];
    for e in &events {
        counts[e.outcome_a.index() * 2 + e.outcome_b.index()] += 1;
    }
    let labels = Port::ALL.iter().flat_map(|a| Port::ALL.iter().map(move |b| format!("{}{}", a.symbol(), b.symbol())));
    let counts_text: Vec<String> = labels.zip(counts).map(|(l, c)| format!("{l}={c}")).collect();
    let estimate = match estimate_correlation(&events) {
        Ok(r) => format!("E_hat={} stderr={}", num(r.estimate), num(r.stderr)),
        Err(_) => "E_hat undefined (fewer than 2 events)".to_owned(),
    };
    writeln!(stderr, "n={} {} {}", events.len(), counts_text.join(" "), estimate)?;
    Ok(())
}
