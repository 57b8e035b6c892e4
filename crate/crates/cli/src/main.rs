use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lrc_core::circuit::LogicalCircuit;
use lrc_core::code::{builtin_code, code_from_json, StabilizerCode};
use lrc_core::compiler::{instantiate, Mode, RandomizationPolicy};
use lrc_core::verifier::{
    check_measurement_rc, check_sampling_equivalence, derive_seed, reports_to_csv, reports_to_json,
    run_check, run_toffoli_example, MeasurementRcOptions, ReadoutNoise, VerificationReport,
    VerifyOptions, CHECKS, DEFAULT_SEED,
};
use lrc_core::LrcError;

#[derive(Parser, Debug)]
#[command(
    name = "lrc",
    version,
    about = "Logical randomized compiling: verification, compilation and experiments"
)]
struct Cli {
    /// Master seed; every random draw is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall-clock runtimes in reports. Off by default so output is reproducible.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification checks and write a report.
    Verify(VerifyArgs),
    /// Compile a circuit into randomized instances (one JSON object per line).
    Compile(CompileArgs),
    /// Transversal Toffoli example with an over-rotated first triple.
    Toffoli(ToffoliArgs),
    /// Randomized single-dit syndrome extraction under readout noise.
    Syndrome(SyndromeArgs),
    /// One-shot-per-instance sampling against the exact averaged distribution.
    Sample(SampleArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run every check.
    #[arg(long, conflicts_with = "check")]
    all: bool,
    /// Run the named check (repeatable).
    #[arg(long)]
    check: Vec<String>,
    /// Builtin code name or code JSON path for code-parametrized checks (repeatable).
    #[arg(long)]
    code: Vec<String>,
    /// Shots for the sampling check.
    #[arg(long)]
    shots: Option<u64>,
    /// Random circuits for the compiled-equals-bare check.
    #[arg(long)]
    circuits: Option<usize>,
}

#[derive(Args, Debug)]
struct CompileArgs {
    /// Circuit JSON.
    circuit: PathBuf,
    /// Policy JSON; `--seed` and `--mode` override its fields.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// `exhaustive` or `sampled=N`.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

#[derive(Args, Debug)]
struct ToffoliArgs {
    /// Over-rotation angle of the first triple.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    delta: f64,
}

#[derive(Args, Debug)]
struct SyndromeArgs {
    /// Coherent X rotation angle on the readout before measurement.
    #[arg(
        long,
        default_value_t = 0.2,
        allow_negative_numbers = true,
        conflicts_with = "flip"
    )]
    theta: f64,
    /// Use a stochastic bit flip with this probability instead.
    #[arg(long)]
    flip: Option<f64>,
    /// Coherent XII rotation on the block while the readout is measured.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    idle_theta: f64,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    /// Checks ran and at least one failed.
    Verification,
    /// Bad arguments or input files.
    Input(String),
}

impl From<LrcError> for Failure {
    fn from(e: LrcError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    if s == "exhaustive" {
        return Ok(Mode::Exhaustive);
    }
    match s.strip_prefix("sampled=").map(str::parse::<u64>) {
        Some(Ok(n)) if n > 0 => Ok(Mode::Sampled(n)),
        _ => Err(format!(
            "expected `exhaustive` or `sampled=N` with N > 0, got `{s}`"
        )),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_code(spec: &str) -> Result<StabilizerCode, Failure> {
    match builtin_code(spec) {
        Ok(code) => Ok(code),
        Err(LrcError::UnknownCode(_)) if Path::new(spec).exists() => {
            Ok(code_from_json(&read(Path::new(spec))?)?)
        }
        Err(e) => Err(e.into()),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}

/// Write the JSON document, or the reports as CSV, then turn failures into exit 1.
fn finish(cli: &Cli, reports: &[VerificationReport], json: String) -> Result<(), Failure> {
    let text = match cli.format {
        Format::Json => json,
        Format::Csv => reports_to_csv(reports),
    };
    emit(cli, &text)?;
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!(
            "FAIL {}: value {:e}, tolerance {:e}",
            r.check, r.value, r.tolerance
        );
    }
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn stamp_timing(
    reports: &mut [VerificationReport],
    cli: &Cli,
    start: std::time::Instant,
    seed: u64,
) {
    let ms = if cli.timings {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    for r in reports {
        r.runtime_ms = ms;
        r.seed = seed;
    }
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<(), Failure> {
    if !args.all && args.check.is_empty() {
        return Err(Failure::Input(
            "verify needs --all or at least one --check NAME".into(),
        ));
    }
    let mut opts = VerifyOptions {
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        timings: cli.timings,
        ..VerifyOptions::default()
    };
    if !args.code.is_empty() {
        opts.codes = Some(
            args.code
                .iter()
                .map(|c| load_code(c))
                .collect::<Result<_, _>>()?,
        );
    }
    if let Some(shots) = args.shots {
        opts.shots = shots;
    }
    if let Some(n) = args.circuits {
        opts.random_circuits = n;
    }
    let names: Vec<String> = if args.all {
        CHECKS.iter().map(|s| s.to_string()).collect()
    } else {
        args.check.clone()
    };
    if let Some(bad) = names.iter().find(|n| !CHECKS.contains(&n.as_str())) {
        return Err(Failure::Input(format!(
            "unknown check `{bad}`; known checks: {}",
            CHECKS.join(", ")
        )));
    }
    let mut reports = Vec::new();
    for name in &names {
        reports.extend(run_check(name, &opts)?);
    }
    let json = reports_to_json(&reports);
    finish(cli, &reports, json)
}

fn cmd_compile(cli: &Cli, args: &CompileArgs) -> Result<(), Failure> {
    if cli.format == Format::Csv {
        return Err(Failure::Input("compile only writes JSON".into()));
    }
    let circuit = LogicalCircuit::parse(&read(&args.circuit)?)?;
    let diagnostics = circuit.validate();
    if !diagnostics.is_empty() {
        let lines: Vec<String> = diagnostics
            .iter()
            .map(|d| match d.gadget {
                Some(g) => format!("gadget {g}: [{}] {}", d.rule, d.message),
                None => format!("[{}] {}", d.rule, d.message),
            })
            .collect();
        return Err(Failure::Input(format!(
            "invalid circuit\n  {}",
            lines.join("\n  ")
        )));
    }
    let mut policy = match &args.policy {
        Some(path) => RandomizationPolicy::parse(&read(path)?)?,
        None => RandomizationPolicy::exhaustive(DEFAULT_SEED),
    };
    if let Some(seed) = cli.seed {
        policy.seed = seed;
    }
    if let Some(mode) = args.mode {
        policy.mode = mode;
    }
    let (template, instances) = instantiate(&circuit, &policy)?;
    let mut out = String::new();
    for inst in &instances {
        out.push_str(
            &serde_json::to_string(&inst.to_json(&circuit, &template)).expect("json serializes"),
        );
        out.push('\n');
    }
    emit(cli, &out)?;
    eprintln!(
        "{} instances of {} (seed {})",
        instances.len(),
        template.instance_count(),
        policy.seed
    );
    Ok(())
}

fn cmd_toffoli(cli: &Cli, args: &ToffoliArgs) -> Result<(), Failure> {
    if !args.delta.is_finite() {
        return Err(Failure::Input(format!(
            "--delta must be finite, got {}",
            args.delta
        )));
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let start = std::time::Instant::now();
    let outcome = run_toffoli_example(args.delta, derive_seed(seed, "toffoli"))?;
    let mut reports = outcome.reports.clone();
    stamp_timing(&mut reports, cli, start, seed);
    let doc = json!({"seed": seed, "result": outcome, "reports": reports});
    finish(cli, &reports, pretty(&doc))
}

fn cmd_syndrome(cli: &Cli, args: &SyndromeArgs) -> Result<(), Failure> {
    let readout = match args.flip {
        Some(p) if (0.0..0.5).contains(&p) => ReadoutNoise::Flip(p),
        Some(p) => {
            return Err(Failure::Input(format!(
                "--flip must be in [0, 0.5), got {p}"
            )))
        }
        None if args.theta.is_finite() => ReadoutNoise::Coherent(args.theta),
        None => return Err(Failure::Input("--theta must be finite".into())),
    };
    if !args.idle_theta.is_finite() {
        return Err(Failure::Input("--idle-theta must be finite".into()));
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let start = std::time::Instant::now();
    let opts = MeasurementRcOptions {
        readout,
        idle_theta: args.idle_theta,
    };
    let (report, confusion) = check_measurement_rc(&opts, derive_seed(seed, "syndrome"))?;
    let mut reports = vec![report];
    stamp_timing(&mut reports, cli, start, seed);
    let doc = json!({"seed": seed, "confusion": confusion, "reports": reports});
    finish(cli, &reports, pretty(&doc))
}

fn cmd_sample(cli: &Cli, args: &SampleArgs) -> Result<(), Failure> {
    if args.shots == 0 {
        return Err(Failure::Input("--shots must be positive".into()));
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let start = std::time::Instant::now();
    let mut reports = vec![check_sampling_equivalence(
        args.shots,
        derive_seed(seed, "sampling"),
    )?];
    stamp_timing(&mut reports, cli, start, seed);
    let doc = json!({"seed": seed, "reports": reports});
    finish(cli, &reports, pretty(&doc))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Ok(v) = std::env::var("LRC_DENSE_LIMIT") {
        let limit = v.parse::<usize>().map_err(|_| {
            Failure::Input(format!(
                "LRC_DENSE_LIMIT must be a positive integer, got `{v}`"
            ))
        })?;
        lrc_core::linalg::set_dense_limit(limit);
    }
    match &cli.command {
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Compile(a) => cmd_compile(cli, a),
        Command::Toffoli(a) => cmd_toffoli(cli, a),
        Command::Syndrome(a) => cmd_syndrome(cli, a),
        Command::Sample(a) => cmd_sample(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
