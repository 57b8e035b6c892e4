//! Executable checks of the protocol's guarantees, with structured reports.

mod checks;
pub mod metrics;
mod toffoli;

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::code::{builtin_code, StabilizerCode};
use crate::error::{LrcError, Result};

pub use checks::{
    check_clifford, check_compiled_equals_bare, check_idempotence, check_measurement_rc,
    check_orthogonality, check_sampling_equivalence, check_sandwich, check_tgate, check_theorem1,
    check_theorem2, MeasurementRcOptions, ReadoutNoise,
};
pub use metrics::{coherence_metrics, CoherenceReport, CospaceBasis};
pub use toffoli::{run_toffoli_example, ToffoliOutcome};

pub const DEFAULT_SEED: u64 = 7;

/// Codes exercised by code-parametrized checks when none is named.
pub const THEOREM_CODES: [&str; 4] = ["bitflip3", "phaseflip3", "qutrit_rep3", "five_one_three"];

/// Names accepted by [`run_check`], in suite order.
pub const CHECKS: [&str; 11] = [
    "theorem1",
    "orthogonality",
    "sandwich",
    "idempotence",
    "theorem2",
    "clifford",
    "tgate",
    "toffoli",
    "syndrome",
    "sampling",
    "compiled_equals_bare",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass when `value < tolerance`.
    Upper,
    /// Pass when `value > tolerance`.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub runtime_ms: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl VerificationReport {
    pub fn upper(check: impl Into<String>, value: f64, tolerance: f64, seed: u64) -> Self {
        VerificationReport {
            check: check.into(),
            pass: value < tolerance,
            value,
            tolerance,
            bound: Bound::Upper,
            runtime_ms: 0,
            seed,
            details: Value::Null,
        }
    }

    pub fn lower(check: impl Into<String>, value: f64, tolerance: f64, seed: u64) -> Self {
        VerificationReport {
            pass: value > tolerance,
            bound: Bound::Lower,
            ..Self::upper(check, value, tolerance, seed)
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

/// Seed for one check, derived from the master seed and the check name.
pub fn derive_seed(master: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Restricts code-parametrized checks to these codes.
    pub codes: Option<Vec<StabilizerCode>>,
    /// Record wall-clock runtimes (otherwise reported as 0 so output is reproducible).
    pub timings: bool,
    pub toffoli_delta: f64,
    pub shots: u64,
    pub random_circuits: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            codes: None,
            timings: false,
            toffoli_delta: 0.1,
            shots: 100_000,
            random_circuits: 100,
        }
    }
}

impl VerifyOptions {
    fn codes(&self, default: &[&str]) -> Result<Vec<StabilizerCode>> {
        match &self.codes {
            Some(codes) => Ok(codes.clone()),
            None => default.iter().map(|n| builtin_code(n)).collect(),
        }
    }
}

fn code_label(code: &StabilizerCode) -> String {
    code.name()
        .map(str::to_string)
        .unwrap_or_else(|| format!("custom[{},{},d={}]", code.n(), code.k(), code.d()))
}

/// Run one named check; some checks produce several reports. Each check
/// draws from a seed derived from the master seed and its name; reports
/// carry the master seed.
pub fn run_check(name: &str, opts: &VerifyOptions) -> Result<Vec<VerificationReport>> {
    let seed = derive_seed(opts.seed, name);
    // Clock reads only on request; `Instant` is unavailable in the browser.
    let start = opts.timings.then(Instant::now);
    let mut reports = match name {
        "theorem1" => opts
            .codes(&THEOREM_CODES)?
            .iter()
            .map(|c| check_theorem1(c, seed).map(|r| suffixed(r, c)))
            .collect::<Result<Vec<_>>>()?,
        "orthogonality" => {
            let mut names: Vec<&str> = crate::code::BUILTIN_CODES.to_vec();
            if !names.contains(&"trivial") {
                names.push("trivial");
            }
            opts.codes(&names)?
                .iter()
                .map(|c| check_orthogonality(c, seed).map(|r| suffixed(r, c)))
                .collect::<Result<Vec<_>>>()?
        }
        "sandwich" => opts
            .codes(&THEOREM_CODES)?
            .iter()
            .map(|c| check_sandwich(c, seed).map(|r| suffixed(r, c)))
            .collect::<Result<Vec<_>>>()?,
        "idempotence" => vec![check_idempotence(seed)?],
        "theorem2" => vec![check_theorem2(seed, 10)?],
        "clifford" => vec![check_clifford(seed, 5)?],
        "tgate" => vec![check_tgate(seed, 5)?],
        "toffoli" => run_toffoli_example(opts.toffoli_delta, seed)?.reports,
        "syndrome" => vec![check_measurement_rc(&MeasurementRcOptions::default(), seed)?.0],
        "sampling" => vec![check_sampling_equivalence(opts.shots, seed)?],
        "compiled_equals_bare" => vec![check_compiled_equals_bare(opts.random_circuits, seed)?],
        other => {
            return Err(LrcError::Domain(format!(
                "unknown check `{other}`; known checks: {}",
                CHECKS.join(", ")
            )))
        }
    };
    let ms = start.map_or(0, |s| s.elapsed().as_millis() as u64);
    for r in &mut reports {
        r.runtime_ms = ms;
        r.seed = opts.seed;
    }
    Ok(reports)
}

fn suffixed(mut r: VerificationReport, code: &StabilizerCode) -> VerificationReport {
    r.check = format!("{}:{}", r.check, code_label(code));
    r
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for name in CHECKS {
        out.extend(run_check(name, opts)?);
    }
    Ok(out)
}

pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize") + "\n"
}

pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("check,pass,value,tolerance,runtime_ms,seed\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{:e},{:e},{},{}\n",
            r.check, r.pass, r.value, r.tolerance, r.runtime_ms, r.seed
        ));
    }
    out
}
