//! Acceptance suite: one line per criterion, exit status 1 if any fails.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use lrc_core::verifier::{run_check, VerificationReport, VerifyOptions};

const SEED: u64 = 7;
const TOL: f64 = 1e-10;
const FIDELITY_TOL: f64 = 1e-12;
const THEOREM1_BUDGET: Duration = Duration::from_secs(5);
const TOFFOLI_BUDGET: Duration = Duration::from_secs(60);
const PRE_INTER_MIN: f64 = 0.19;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    summary: String,
}

fn worst(reports: &[VerificationReport]) -> f64 {
    reports.iter().map(|r| r.value).fold(0.0, f64::max)
}

fn checks(name: &str, opts: &VerifyOptions) -> (Vec<VerificationReport>, Duration) {
    let start = Instant::now();
    let reports = run_check(name, opts).unwrap_or_else(|e| panic!("{name}: {e}"));
    (reports, start.elapsed())
}

fn all_pass(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

fn failing(reports: &[VerificationReport]) -> String {
    let names: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    if names.is_empty() {
        String::new()
    } else {
        format!(" failing: {}", names.join(", "))
    }
}

fn upper(reports: &[VerificationReport], tol: f64, extra: &str) -> Outcome {
    let value = worst(reports);
    Outcome {
        pass: all_pass(reports) && value < tol,
        summary: format!("max {value:.3e} < {tol:e}{extra}{}", failing(reports)),
    }
}

fn theorem1(opts: &VerifyOptions) -> Outcome {
    let (reports, elapsed) = checks("theorem1", opts);
    let mut o = upper(&reports, TOL, &format!(" over {} codes", reports.len()));
    o.pass &= elapsed < THEOREM1_BUDGET;
    o.summary += &format!(
        ", {:.2} s < {} s",
        elapsed.as_secs_f64(),
        THEOREM1_BUDGET.as_secs()
    );
    o
}

fn orthogonality(opts: &VerifyOptions) -> Outcome {
    let (reports, _) = checks("orthogonality", opts);
    let mismatches = worst(&reports);
    Outcome {
        pass: all_pass(&reports) && mismatches == 0.0,
        summary: format!(
            "{mismatches} mismatched pairs over {} codes (exact)",
            reports.len()
        ),
    }
}

fn toffoli(opts: &VerifyOptions) -> Outcome {
    let (reports, elapsed) = checks("toffoli", opts);
    let get = |name: &str| {
        reports
            .iter()
            .find(|r| r.check == name)
            .unwrap_or_else(|| panic!("missing {name}"))
    };
    let fid = get("toffoli:fidelity_delta0");
    let pre = get("toffoli:pre_inter");
    let post = get("toffoli:post_inter");
    let pops = get("toffoli:populations");
    let pass = all_pass(&reports)
        && fid.value < FIDELITY_TOL
        && pre.value > PRE_INTER_MIN
        && post.value < TOL
        && pops.value < TOL
        && elapsed < TOFFOLI_BUDGET;
    Outcome {
        pass,
        summary: format!(
            "1-F {:.1e} < {FIDELITY_TOL:e}, pre {:.6} > {PRE_INTER_MIN}, post {:.1e} < {TOL:e}, populations {:.1e} < {TOL:e}, {:.1} s < {} s{}",
            fid.value,
            pre.value,
            post.value,
            pops.value,
            elapsed.as_secs_f64(),
            TOFFOLI_BUDGET.as_secs(),
            failing(&reports)
        ),
    }
}

fn sampling(opts: &VerifyOptions) -> Outcome {
    let (first, _) = checks("sampling", opts);
    let (second, _) = checks("sampling", opts);
    let r = &first[0];
    Outcome {
        pass: r.pass && first == second,
        summary: format!(
            "TVD {:.3e} < 3 sqrt(B/shots) = {:.3e} at {} shots, repeat identical: {}",
            r.value,
            r.tolerance,
            opts.shots,
            first == second
        ),
    }
}

fn run_twice(bin: &Path, dir: &Path, label: &str, args: &[&str]) -> Result<(), String> {
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.join(format!("{label}.{run}"));
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(&path)
            .env_remove("LRC_DENSE_LIMIT")
            .stderr(Stdio::null())
            .status()
            .map_err(|e| format!("{label}: {e}"))?;
        if !status.success() {
            return Err(format!("{label}: exit {status}"));
        }
        outputs.push(std::fs::read(&path).map_err(|e| format!("{label}: {e}"))?);
    }
    if outputs[0] == outputs[1] {
        Ok(())
    } else {
        Err(format!("{label}: outputs differ"))
    }
}

fn determinism() -> Outcome {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_lrc"));
    let circuits = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../circuits");
    let small = circuits.join("bitflip3_reset_measure.json");
    let small = small.to_str().expect("utf-8 path");
    let memory = circuits.join("bitflip3_memory.json");
    let memory = memory.to_str().expect("utf-8 path");
    let qutrit = circuits.join("qutrit_syndrome.json");
    let qutrit = qutrit.to_str().expect("utf-8 path");
    let dir = std::env::temp_dir().join(format!("lrc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let seed = SEED.to_string();
    let s = seed.as_str();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        (
            "verify_json",
            vec![
                "verify",
                "--check",
                "theorem1",
                "--check",
                "orthogonality",
                "--check",
                "tgate",
                "--seed",
                s,
            ],
        ),
        (
            "verify_csv",
            vec![
                "verify", "--check", "syndrome", "--check", "clifford", "--format", "csv",
                "--seed", s,
            ],
        ),
        (
            "compile_exhaustive",
            vec!["compile", small, "--mode", "exhaustive", "--seed", s],
        ),
        (
            "compile_sampled",
            vec!["compile", memory, "--mode", "sampled=100", "--seed", s],
        ),
        (
            "compile_qutrit",
            vec!["compile", qutrit, "--mode", "sampled=100", "--seed", s],
        ),
        ("toffoli", vec!["toffoli", "--delta", "0.1", "--seed", s]),
        ("syndrome", vec!["syndrome", "--seed", s]),
        ("sample", vec!["sample", "--seed", s]),
    ];
    let errors: Vec<String> = runs
        .iter()
        .filter_map(|(label, args)| run_twice(&bin, &dir, label, args).err())
        .collect();
    let _ = std::fs::remove_dir_all(&dir);
    Outcome {
        pass: errors.is_empty(),
        summary: if errors.is_empty() {
            format!(
                "{} command lines byte-identical across two runs",
                runs.len()
            )
        } else {
            errors.join("; ")
        },
    }
}

fn main() {
    let opts = VerifyOptions {
        seed: SEED,
        ..VerifyOptions::default()
    };
    let criteria: Vec<Criterion> = vec![
        ("theorem 1 channel identity", Box::new(|| theorem1(&opts))),
        ("character orthogonality", Box::new(|| orthogonality(&opts))),
        (
            "theorem 2 corrected twirl",
            Box::new(|| {
                let (r, _) = checks("theorem2", &opts);
                upper(&r, TOL, " over 10 draws, X on bitflip3 and T")
            }),
        ),
        ("toffoli example", Box::new(|| toffoli(&opts))),
        (
            "clifford path",
            Box::new(|| {
                let (r, _) = checks("clifford", &opts);
                upper(&r, TOL, " cospace off-diagonal over 5 draws")
            }),
        ),
        (
            "T dihedral path",
            Box::new(|| {
                let (r, _) = checks("tgate", &opts);
                upper(&r, TOL, " Pauli off-diagonal and |pX-pY| over 5 draws")
            }),
        ),
        (
            "syndrome extraction RC",
            Box::new(|| {
                let (r, _) = checks("syndrome", &opts);
                upper(
                    &r,
                    TOL,
                    " confusion, factorization and off-diagonal, readout X_0.2",
                )
            }),
        ),
        (
            "compiled equals bare",
            Box::new(|| {
                let (r, _) = checks("compiled_equals_bare", &opts);
                upper(
                    &r,
                    TOL,
                    &format!(" over {} random circuits", opts.random_circuits),
                )
            }),
        ),
        ("sampling equivalence", Box::new(|| sampling(&opts))),
        ("CLI determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{} ms]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.summary,
            start.elapsed().as_millis()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
