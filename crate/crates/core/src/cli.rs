//! Command-line front end: `run`, `check`, `oracle`, `certificate`, `gen`.
//!
//! Exit codes: 0 success, 1 a property or check failed, 2 usage or
//! configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::colouring::{
    generate, ClassedExplicit, Colour, ColouringError, ExplicitColouring, GeneratorSpec, RestrictedColouring,
};
use crate::engine::{
    density_summary, read_jsonl, write_csv, write_jsonl, DensitySummary, EngineError, EngineState, ReserveClock,
    RoundTrace,
};
use crate::invariants::{
    check_run_with, check_trace, verify_certificate, CertificateError, PairPlan, RoundChecker, SuiteReport,
    THRESHOLD_PRINTED,
};
use crate::oracle::{
    enumerate_small, gg_bound_holds, longest_mono_path, max_pathforest_coverage, two_path_bound_holds, Enumeration,
    OracleError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const SWEEP: [f64; 5] = [0.01, 0.05, 0.1, 0.25, 0.49];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl From<ColouringError> for CliError {
    fn from(e: ColouringError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Consistency { .. } | EngineError::Invariant(_) => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CertificateError> for CliError {
    fn from(e: CertificateError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "monopath",
    version,
    about = "Online monochromatic path-forests on restricted 2-colourings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the engine and write its trace.
    Run(RunArgs),
    /// Check a trace file, or a fresh run with every check enabled.
    Check(CheckArgs),
    /// Exact small-instance solvers and engine comparisons.
    Oracle(OracleArgs),
    /// Verify the numeric certificate for one or more epsilons.
    Certificate(CertificateArgs),
    /// Write a generated colouring as JSON.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Random,
    Block,
    AllRed,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Restricted colouring JSON file.
    #[arg(long, value_name = "FILE")]
    pub colouring: Option<PathBuf>,
    /// Generator family.
    #[arg(long, value_enum, conflicts_with = "colouring")]
    pub gen: Option<GenKind>,
    /// Probability that a vertex is red (random).
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Exception probability per forward pair inside the window.
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    #[arg(long, default_value_t = 32)]
    pub window: usize,
    /// Class block lengths (block).
    #[arg(long, value_delimiter = ',', default_value = "3,5")]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 3000)]
    pub horizon: usize,
    /// Generator seed. PF_SEED, when set, takes precedence.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SourceArgs {
    fn spec(&self) -> Option<GeneratorSpec> {
        self.gen.map(|g| match g {
            GenKind::Random => GeneratorSpec::Random {
                p: self.p,
                q: self.q,
                window: self.window,
            },
            GenKind::Block => GeneratorSpec::Block {
                lengths: self.lengths.clone(),
                q: self.q,
                window: self.window,
            },
            GenKind::AllRed => GeneratorSpec::AllOneColour,
        })
    }

    fn base_seed(&self) -> Result<u64, CliError> {
        match std::env::var("PF_SEED") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("PF_SEED = {s:?} is not an unsigned integer"))),
            Err(_) => Ok(self.seed),
        }
    }

    fn has_source(&self) -> bool {
        self.colouring.is_some() || self.gen.is_some()
    }

    fn load(&self, seed: u64) -> Result<RestrictedColouring, CliError> {
        match (&self.colouring, self.spec()) {
            (Some(path), _) => Ok(RestrictedColouring::load(path)?),
            (None, Some(spec)) => Ok(generate(&spec, seed, self.horizon)?),
            (None, None) => Err(CliError::Usage("one of --colouring or --gen is required".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Checks {
    None,
    Round,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClockArg {
    FirstEqual,
    Redefinition,
}

impl From<ClockArg> for ReserveClock {
    fn from(c: ClockArg) -> Self {
        match c {
            ClockArg::FirstEqual => ReserveClock::FirstEqual,
            ClockArg::Redefinition => ReserveClock::Redefinition,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub ell: usize,
    #[arg(long)]
    pub rounds: usize,
    #[arg(long, value_enum, default_value_t = Checks::None)]
    pub checks: Checks,
    /// Round a reserve is dated to when classifying Y and Z vertices.
    #[arg(long, value_enum, default_value_t = ClockArg::FirstEqual)]
    pub reserve_clock: ClockArg,
    /// JSON Lines trace output. `{seed}` is replaced by the seed.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// CSV trace output. `{seed}` is replaced by the seed.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Failed check reports as JSON Lines.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Number of consecutive seeds to run, starting at the seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Worker threads for multi-seed runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Print a progress line to stderr every 100 rounds.
    #[arg(long)]
    pub progress: bool,
    /// First round counted by the late-round density statistics.
    #[arg(long, default_value_t = 100)]
    pub k0: usize,
    /// The summary reports the first round with ratio at least 0.82019 - eps.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Trace file (JSON Lines) to check instead of a fresh run.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["colouring", "gen"])]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub ell: usize,
    /// Rounds of the fresh run.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = ClockArg::FirstEqual)]
    pub reserve_clock: ClockArg,
    /// Failed check reports as JSON Lines.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["gg", "two_path", "explicit", "compare"])))]
pub struct OracleArgs {
    /// Check that some colour has a path on at least ⌈2n/3⌉ vertices.
    #[arg(long)]
    pub gg: bool,
    /// Check that the longest red and blue paths have at least n vertices together.
    #[arg(long)]
    pub two_path: bool,
    /// Print the longest path of each colour of an explicit colouring.
    #[arg(long, value_name = "FILE")]
    pub explicit: Option<PathBuf>,
    /// Compare engine coverage with the exact optimum on every prefix.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub n: Option<usize>,
    /// Every colouring of K_n.
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    /// Number of seeded random colourings of K_n.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub ell: Option<usize>,
    /// Rounds compared.
    #[arg(long, default_value_t = 12)]
    pub rounds: usize,
}

#[derive(Debug, Args)]
pub struct CertificateArgs {
    /// Comma-separated epsilons in (0, 1/2).
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub eps: Vec<f64>,
    /// Use the sweep 0.01, 0.05, 0.1, 0.25, 0.49.
    #[arg(long, conflicts_with = "eps")]
    pub sweep: bool,
    /// Print full reports as JSON Lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Write a random explicit colouring of K_N instead.
    #[arg(long, value_name = "N", conflicts_with_all = ["colouring", "gen"])]
    pub explicit: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Check(a) => cmd_check(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Certificate(a) => cmd_certificate(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
    }
}

// -------------------------------------------------------------------------
// run
// -------------------------------------------------------------------------

struct Outcome {
    trace: Vec<RoundTrace>,
    report: Option<SuiteReport>,
}

fn execute(
    c: &RestrictedColouring,
    ell: usize,
    rounds: usize,
    checks: Checks,
    clock: ReserveClock,
    progress: Option<&str>,
) -> Result<Outcome, CliError> {
    if rounds == 0 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    let mut state = EngineState::init_with(c, ell, clock)?;
    let mut checker = (checks != Checks::None).then(|| RoundChecker::new(ell));
    let mut trace = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let line = state.step()?;
        if let Some(ch) = checker.as_mut() {
            ch.observe(&state, &line);
        }
        if let Some(label) = progress {
            if line.t % 100 == 0 {
                eprintln!("{label}round {}: cR {} cB {}", line.t, line.c_red, line.c_blue);
            }
        }
        trace.push(line);
    }
    let report = checker.map(|ch| match checks {
        Checks::Full => ch.finish(&state),
        _ => ch.finish_rounds(&state),
    });
    Ok(Outcome { trace, report })
}

fn seeded_path(template: &Path, seed: u64) -> PathBuf {
    PathBuf::from(template.to_string_lossy().replace("{seed}", &seed.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_outputs(a: &RunArgs, seed: u64, o: &Outcome) -> Result<(), CliError> {
    if let Some(p) = &a.trace {
        let mut w = create(&seeded_path(p, seed))?;
        write_jsonl(&o.trace, &mut w)?;
        w.flush()?;
    }
    if let Some(p) = &a.csv {
        let mut w = create(&seeded_path(p, seed))?;
        write_csv(&o.trace, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn summary_line(d: &DensitySummary) -> String {
    let opt = |x: Option<usize>| x.map_or("none".to_string(), |t| t.to_string());
    format!(
        "sup ratio {:.4} at t={}, sup ratio t>={} {}, final ratio {:.4}, first t with ratio >= {:.5}: {} (t>={}: {})",
        d.sup,
        d.sup_at,
        d.k0,
        d.sup_from_k0.map_or("none".to_string(), |s| format!("{s:.4}")),
        d.last,
        d.target,
        opt(d.first_at_target),
        d.k0,
        opt(d.first_at_target_from_k0),
    )
}

type SeedResult = Result<(DensitySummary, Option<SuiteReport>), CliError>;

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if a.seeds == 0 || a.jobs == 0 {
        return Err(CliError::Usage("--seeds and --jobs must be at least 1".into()));
    }
    if !a.source.has_source() {
        return Err(CliError::Usage("one of --colouring or --gen is required".into()));
    }
    if a.seeds > 1 {
        if a.source.colouring.is_some() {
            return Err(CliError::Usage("--seeds needs a generated colouring".into()));
        }
        for p in a.trace.iter().chain(&a.csv) {
            if !p.to_string_lossy().contains("{seed}") {
                return Err(CliError::Usage(format!(
                    "{} must contain {{seed}} with --seeds",
                    p.display()
                )));
            }
        }
    }
    let base = a.source.base_seed()?;
    let seeds: Vec<u64> = (0..a.seeds).map(|i| base + i).collect();
    let clock = ReserveClock::from(a.reserve_clock);
    let target = THRESHOLD_PRINTED - a.eps;

    let results: Vec<Mutex<Option<SeedResult>>> = seeds.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(&seed) = seeds.get(i) else { break };
        let label = if seeds.len() > 1 {
            format!("seed {seed}: ")
        } else {
            String::new()
        };
        let r = a.source.load(seed).and_then(|c| {
            let o = execute(
                &c,
                a.ell,
                a.rounds,
                a.checks,
                clock,
                a.progress.then_some(label.as_str()),
            )?;
            write_outputs(a, seed, &o)?;
            Ok((density_summary(&o.trace, a.k0, target), o.report))
        });
        *results[i].lock().unwrap() = Some(r);
    };
    std::thread::scope(|s| {
        for _ in 1..a.jobs.min(seeds.len()) {
            s.spawn(work);
        }
        work();
    });

    let mut failed = false;
    let mut reports = Vec::new();
    for (seed, slot) in seeds.iter().zip(results) {
        let (d, report) = slot.into_inner().unwrap().expect("every seed ran")?;
        let mut line = format!("seed {seed} ell {} rounds {}: {}", a.ell, a.rounds, summary_line(&d));
        if let Some(r) = report {
            if r.passed() {
                line.push_str(", checks pass");
            } else {
                failed = true;
                line.push_str(&format!(", checks FAIL {:?}", r.failing_properties()));
            }
            reports.push(r);
        }
        writeln!(out, "{line}")?;
    }
    if let Some(p) = &a.report {
        write_failures(p, reports.iter())?;
    }
    Ok(if failed { EXIT_FAILURE } else { EXIT_OK })
}

fn write_failures<'r>(path: &Path, reports: impl Iterator<Item = &'r SuiteReport>) -> Result<(), CliError> {
    let mut w = create(path)?;
    for r in reports {
        for f in &r.failures {
            writeln!(w, "{}", serde_json::to_string(f).expect("report serializes"))?;
        }
    }
    w.flush()?;
    Ok(())
}

// -------------------------------------------------------------------------
// check
// -------------------------------------------------------------------------

fn print_report(r: &SuiteReport, out: &mut dyn Write) -> io::Result<()> {
    writeln!(
        out,
        "{:<28} {:>10} {:>10} {:>8}",
        "property", "evaluated", "considered", "failed"
    )?;
    for (k, s) in &r.stats {
        writeln!(out, "{k:<28} {:>10} {:>10} {:>8}", s.evaluated, s.considered, s.failed)?;
    }
    for (k, s) in &r.informational {
        writeln!(
            out,
            "{:<28} {:>10} {:>10} {:>8}",
            format!("(info) {k}"),
            s.evaluated,
            s.considered,
            s.failed
        )?;
    }
    for m in &r.monitors {
        writeln!(
            out,
            "monitor {}: fired {}, resolved {}, inconclusive {}, max delay {}",
            m.name, m.fired, m.resolved, m.inconclusive, m.max_delay
        )?;
    }
    for f in r.failures.iter().take(10) {
        writeln!(
            out,
            "  {} at t={}{}: lhs {} rhs {} ({})",
            f.property,
            f.round,
            f.t_prime.map_or(String::new(), |tp| format!(", t'={tp}")),
            f.lhs,
            f.rhs,
            f.detail
        )?;
    }
    Ok(())
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let report = match &a.trace {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let trace = read_jsonl(BufReader::new(file))?;
            if trace.is_empty() {
                return Err(CliError::Usage(format!("{} holds an empty trace", path.display())));
            }
            check_trace(&trace, a.ell)
        }
        None => {
            let rounds = a
                .rounds
                .ok_or_else(|| CliError::Usage("--rounds is required without --trace".into()))?;
            let c = a.source.load(a.source.base_seed()?)?;
            check_run_with(&c, a.ell, rounds, a.reserve_clock.into(), PairPlan::default())?.report
        }
    };
    print_report(&report, out)?;
    if let Some(p) = &a.report {
        write_failures(p, std::iter::once(&report))?;
    }
    if report.passed() {
        writeln!(out, "PASS")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "FAIL {:?}", report.failing_properties())?;
        Ok(EXIT_FAILURE)
    }
}

// -------------------------------------------------------------------------
// oracle
// -------------------------------------------------------------------------

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if a.gg || a.two_path {
        let n = a.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
        let mode = match (a.exhaustive, a.samples) {
            (true, _) => Enumeration::Exhaustive,
            (false, Some(samples)) => Enumeration::Sampled {
                samples,
                seed: a.source.base_seed()?,
            },
            (false, None) => return Err(CliError::Usage("one of --exhaustive or --samples is required".into())),
        };
        let pred = if a.gg { gg_bound_holds } else { two_path_bound_holds };
        let res = enumerate_small(n, mode, pred)?;
        return match res.counterexample {
            None => {
                writeln!(out, "no counterexample ({} colourings of K_{n} checked)", res.checked)?;
                Ok(EXIT_OK)
            }
            Some(c) => {
                writeln!(out, "counterexample: {}", c.to_json())?;
                Ok(EXIT_FAILURE)
            }
        };
    }
    if let Some(path) = &a.explicit {
        let c = ExplicitColouring::load(path)?;
        for r in longest_mono_path(&c)? {
            writeln!(out, "{}", r.to_json())?;
        }
        return Ok(EXIT_OK);
    }

    // engine against the exact optimum
    let ell = a
        .ell
        .ok_or_else(|| CliError::Usage("--ell is required with --compare".into()))?;
    let c = a.source.load(a.source.base_seed()?)?;
    let o = execute(&c, ell, a.rounds, Checks::None, ReserveClock::default(), None)?;
    let reach = c.max_forward_reach();
    let mut ok = true;
    for line in &o.trace {
        let n = (line.t + reach).min(c.horizon());
        let explicit = c.to_explicit(n)?;
        let classes = c.classes_prefix(n);
        let ce = ClassedExplicit {
            colouring: &explicit,
            classes: &classes,
        };
        let mut parts = Vec::new();
        for colour in Colour::BOTH {
            let best = max_pathforest_coverage(&ce, colour, line.t)?.best;
            let got = line.c(colour);
            ok &= got <= best;
            parts.push(format!(
                "c{} {got} {} oracle {best}",
                colour.as_char(),
                if got <= best { "<=" } else { ">" }
            ));
        }
        writeln!(out, "t {}: {}", line.t, parts.join(", "))?;
    }
    if ok {
        writeln!(out, "c_t <= oracle for all t")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "engine coverage exceeds the oracle")?;
        Ok(EXIT_FAILURE)
    }
}

// -------------------------------------------------------------------------
// certificate
// -------------------------------------------------------------------------

fn cmd_certificate(a: &CertificateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let eps: Vec<f64> = if a.sweep { SWEEP.to_vec() } else { a.eps.clone() };
    let reports = eps
        .iter()
        .map(|&e| verify_certificate(e))
        .collect::<Result<Vec<_>, _>>()?;
    let mut all = true;
    for r in &reports {
        all &= r.passed();
        if a.json {
            writeln!(out, "{}", serde_json::to_string(r).expect("report serializes"))?;
            continue;
        }
        writeln!(
            out,
            "epsilon {}: alpha {:.15}, threshold {:.15}, yTA = {:?}",
            r.epsilon, r.alpha, r.threshold, r.y_t_a
        )?;
        for c in &r.checks {
            writeln!(
                out,
                "  {:<24} {:>12.3e} tol {:.0e} {}",
                c.name,
                c.value,
                c.tolerance,
                if c.passed { "ok" } else { "FAIL" }
            )?;
        }
    }
    Ok(if all { EXIT_OK } else { EXIT_FAILURE })
}

// -------------------------------------------------------------------------
// gen
// -------------------------------------------------------------------------

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let seed = a.source.base_seed()?;
    let json = match a.explicit {
        Some(n) => ExplicitColouring::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).to_json(),
        None => {
            if a.source.gen.is_none() {
                return Err(CliError::Usage("--gen or --explicit is required".into()));
            }
            a.source.load(seed)?.to_json()
        }
    };
    match &a.out {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => writeln!(out, "{json}")?,
    }
    Ok(EXIT_OK)
}
