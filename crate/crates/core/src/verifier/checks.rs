//! Individual verification checks.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::channel::Superoperator;
use crate::circuit::eval::{branches_max_diff, outcome_distribution, Evaluator, PhysOp, Record};
use crate::circuit::{
    lower_noise, realization_matrix, CodeSpec, ComplexMatrix, Gadget, GateSpec, LogicalCircuit,
    NoiseOp, Realization, Register, RegisterKind, TwirlGroupSpec, WeylTerm, SCHEMA_VERSION,
};
use crate::code::{builtin_code, character_sum, StabilizerCode};
use crate::compiler::{
    average_exact, averaged_instrument, compile, run_instance, Instrument, Mode,
    RandomizationPolicy, Toggles,
};
use crate::error::{LrcError, Result};
use crate::linalg::{expm_hermitian, kron, partial_trace_keep, trace, vectorize, Matrix, C64};
use crate::weyl::WeylOperator;

use super::metrics::{weyl_offdiagonal, CospaceBasis};
use super::VerificationReport;

pub(super) fn code_spec(code: &StabilizerCode) -> CodeSpec {
    match code.name() {
        Some(name) if builtin_code(name).is_ok() => CodeSpec::Builtin(name.to_string()),
        _ => CodeSpec::Definition(code.definition()),
    }
}

/// Incremental construction of circuits with consecutive qudit ranges.
pub(super) struct CircuitBuilder {
    pub circuit: LogicalCircuit,
    next: usize,
}

impl CircuitBuilder {
    pub fn new(d: u32) -> Self {
        CircuitBuilder {
            circuit: LogicalCircuit {
                schema_version: SCHEMA_VERSION,
                d,
                codes: BTreeMap::new(),
                registers: vec![],
                gadgets: vec![],
                classical_wires: vec![],
            },
            next: 0,
        }
    }

    pub fn block(mut self, name: &str, code: &StabilizerCode) -> Self {
        let key = code.name().unwrap_or(name).to_string();
        self.circuit.codes.insert(key.clone(), code_spec(code));
        self.circuit.registers.push(Register {
            name: name.into(),
            kind: RegisterKind::Logical,
            code: Some(key),
            qudits: (self.next..self.next + code.n()).collect(),
        });
        self.next += code.n();
        self
    }

    pub fn readout(mut self, name: &str) -> Self {
        self.circuit.registers.push(Register {
            name: name.into(),
            kind: RegisterKind::Readout,
            code: None,
            qudits: vec![self.next],
        });
        self.next += 1;
        self
    }

    pub fn gadget(mut self, g: Gadget) -> Self {
        self.push(g);
        self
    }

    pub fn push(&mut self, g: Gadget) {
        let wire = match &g {
            Gadget::Measure { wire, .. } | Gadget::Syndrome { wire, .. } => Some(wire.clone()),
            _ => None,
        };
        if let Some(w) = wire {
            self.circuit.classical_wires.push(w);
        }
        self.circuit.gadgets.push(g);
    }

    pub fn build(self) -> LogicalCircuit {
        self.circuit
    }
}

pub(super) fn reset(register: &str, state: Vec<u32>, noise: Vec<NoiseOp>) -> Gadget {
    Gadget::Reset {
        register: register.into(),
        state,
        noise,
    }
}

pub(super) fn unitary(
    registers: &[&str],
    realization: Realization,
    twirl: TwirlGroupSpec,
    noise: Vec<NoiseOp>,
) -> Gadget {
    Gadget::Unitary {
        registers: registers.iter().map(|s| s.to_string()).collect(),
        label: String::new(),
        realization,
        twirl,
        noise,
    }
}

fn gates(list: &[(&str, &[usize])]) -> Realization {
    Realization::Gates(
        list.iter()
            .map(|(g, s)| GateSpec {
                gate: g.to_string(),
                sites: s.to_vec(),
            })
            .collect(),
    )
}

/// Random Hermitian qubit Pauli on `n` qubits, optionally excluding the identity.
fn random_pauli(rng: &mut ChaCha8Rng, n: usize, nonidentity: bool) -> WeylOperator {
    loop {
        let x: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let z: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let ys = x
            .iter()
            .zip(&z)
            .filter(|(a, b)| **a == 1 && **b == 1)
            .count();
        let p = WeylOperator::new(2, x, z, ys as i64).expect("qubit Pauli");
        if !(nonidentity && p.is_identity_up_to_phase()) {
            return p;
        }
    }
}

/// Coherent rotation or random stochastic Pauli mixture on the whole footprint.
fn random_noise(rng: &mut ChaCha8Rng, n: usize, coherent: bool) -> NoiseOp {
    if coherent {
        NoiseOp::Rotation {
            sites: vec![],
            weyl: random_pauli(rng, n, true),
            theta: rng.gen_range(0.0..0.3),
        }
    } else {
        let p0: f64 = rng.gen_range(0.7..1.0);
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        let mut terms = vec![WeylTerm {
            weyl: WeylOperator::identity(2, n),
            p: p0,
        }];
        for wi in w {
            terms.push(WeylTerm {
                weyl: random_pauli(rng, n, true),
                p: (1.0 - p0) * wi / total,
            });
        }
        NoiseOp::StochasticWeyl {
            sites: vec![],
            terms,
        }
    }
}

/// `exp(-i theta H)` for `H` a random real combination of all non-identity Paulis.
fn random_coherent_unitary(rng: &mut ChaCha8Rng, n: usize) -> Result<Matrix> {
    let dim = 1usize << n;
    let mut h = Matrix::zeros(dim, dim);
    for p in crate::weyl::all_weyls_by_weight(2, n).into_iter().skip(1) {
        let ys = p
            .x()
            .iter()
            .zip(p.z())
            .filter(|(a, b)| **a == 1 && **b == 1)
            .count();
        let herm = p.with_phase(ys as i64);
        h += herm.to_matrix()? * C64::new(rng.gen_range(-1.0..1.0), 0.0);
    }
    // Unit mean-square eigenvalue.
    let h = &h * C64::new((dim as f64).sqrt() / h.norm(), 0.0);
    Ok(expm_hermitian(&h, rng.gen_range(0.05..0.3)))
}

/// Channel of a fixed list of operations on `n` qudits.
fn ops_channel(d: u32, n: usize, ops: &[PhysOp]) -> Result<Superoperator> {
    let ev = Evaluator::new(d, n, 0)?;
    let out = ev.run(ops, ev.channel_input()?)?;
    single_channel(crate::circuit::eval::branches_to_instrument(
        &out,
        ev.dim(),
    )?)
}

fn single_channel(inst: Instrument) -> Result<Superoperator> {
    let mut it = inst.into_values();
    match (it.next(), it.next()) {
        (Some(ch), None) => Ok(ch),
        _ => Err(LrcError::Domain(
            "expected a single unconditioned channel".into(),
        )),
    }
}

fn sum_of_cospace_channels(code: &StabilizerCode) -> Result<Superoperator> {
    let mut acc: Option<Matrix> = None;
    for i in 0..code.pure_errors().len() {
        let m = Superoperator::natural_rep(&code.cospace_projector_by_index(i)?)?.into_matrix();
        acc = Some(match acc {
            None => m,
            Some(a) => a + m,
        });
    }
    Superoperator::from_matrix(code.dim(), acc.expect("at least one cospace"))
}

fn stabilizer_average(code: &StabilizerCode) -> Result<Superoperator> {
    let channels = code
        .enumerate_stabilizers()
        .iter()
        .map(Superoperator::from_weyl)
        .collect::<Result<Vec<_>>>()?;
    Superoperator::average(&channels)
}

/// `E_S A(S)` against `sum_T A(Pi_T)`.
pub fn check_theorem1(code: &StabilizerCode, seed: u64) -> Result<VerificationReport> {
    let lhs = stabilizer_average(code)?;
    let rhs = sum_of_cospace_channels(code)?;
    Ok(
        VerificationReport::upper("theorem1", lhs.max_diff(&rhs), 1e-10, seed).with_details(
            json!({"dim": code.dim(), "stabilizers": code.enumerate_stabilizers().len()}),
        ),
    )
}

/// Character sums over all stabilizer pairs, compared exactly with `delta |S|`.
pub fn check_orthogonality(code: &StabilizerCode, seed: u64) -> Result<VerificationReport> {
    let stabs = code.enumerate_stabilizers();
    let order = stabs.len() as u64;
    let mut mismatches = 0u64;
    for (i, s) in stabs.iter().enumerate() {
        for (j, s2) in stabs.iter().enumerate() {
            let expected = if i == j { order } else { 0 };
            if character_sum(code, s, s2)? != expected {
                mismatches += 1;
            }
        }
    }
    Ok(
        VerificationReport::upper("orthogonality", mismatches as f64, 0.5, seed)
            .with_details(json!({"pairs": order * order})),
    )
}

/// Compiled stabilizer insertion, exhaustively averaged, against `sum_T A(Pi_T)`.
pub fn check_sandwich(code: &StabilizerCode, seed: u64) -> Result<VerificationReport> {
    let c = CircuitBuilder::new(code.d())
        .block("a", code)
        .gadget(Gadget::Idle {
            register: "a".into(),
            ticks: 0,
            noise: vec![],
        })
        .build();
    let policy = RandomizationPolicy::exhaustive(seed);
    let t = compile(&c, &policy)?;
    let avg = single_channel(averaged_instrument(&t)?)?;
    let rhs = sum_of_cospace_channels(code)?;
    Ok(
        VerificationReport::upper("sandwich", avg.max_diff(&rhs), 1e-10, seed)
            .with_details(json!({"instances": t.instance_count() as u64})),
    )
}

/// The cospace projection and logical twirls are idempotent.
pub fn check_idempotence(seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for name in ["bitflip3", "qutrit_rep3"] {
        let code = builtin_code(name)?;
        let proj = sum_of_cospace_channels(&code)?;
        worst = worst.max(proj.compose(&proj)?.max_diff(&proj));
    }
    let code = builtin_code("bitflip3")?;
    let u = random_coherent_unitary(&mut rng, 3)?;
    let ch = Superoperator::natural_rep(&u)?;
    let once = ch.twirl_weyl(code.logical_group())?;
    let twice = once.twirl_weyl(code.logical_group())?;
    worst = worst.max(twice.max_diff(&once));
    Ok(VerificationReport::upper("idempotence", worst, 1e-12, seed))
}

struct UnitaryCase {
    name: &'static str,
    code: StabilizerCode,
    realization: Realization,
    twirl: TwirlGroupSpec,
    group: Vec<Matrix>,
}

fn dihedral_group() -> Result<Vec<Matrix>> {
    let s = crate::circuit::gates::gate_matrix("s", 2)?;
    let mut out = Vec::new();
    let mut r = Matrix::identity(2, 2);
    for _ in 0..4 {
        for p in StabilizerCode::trivial(2, 1)?.logical_group() {
            out.push(&r * p.to_matrix()?);
        }
        r = &r * &s;
    }
    Ok(out)
}

fn theorem2_cases() -> Result<Vec<UnitaryCase>> {
    let bitflip = builtin_code("bitflip3")?;
    let group = bitflip
        .logical_group()
        .iter()
        .map(WeylOperator::to_matrix)
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        UnitaryCase {
            name: "logical_x_bitflip3",
            realization: Realization::Weyl(bitflip.logical_x(0).clone()),
            code: bitflip,
            twirl: TwirlGroupSpec::LogicalWeyl,
            group,
        },
        UnitaryCase {
            name: "t_gate",
            code: StabilizerCode::trivial(2, 1)?,
            realization: gates(&[("t", &[0])]),
            twirl: TwirlGroupSpec::Dihedral,
            group: dihedral_group()?,
        },
    ])
}

/// Averaged compiled gadget of a one-block unitary circuit.
fn averaged_gadget(
    code: &StabilizerCode,
    g: Gadget,
    toggles: Toggles,
    seed: u64,
) -> Result<Superoperator> {
    let c = CircuitBuilder::new(code.d())
        .block("a", code)
        .gadget(g)
        .build();
    let policy = RandomizationPolicy::exhaustive(seed).with_toggles(toggles);
    single_channel(averaged_instrument(&compile(&c, &policy)?)?)
}

fn no_stabilizers() -> Toggles {
    Toggles {
        stabilizers: false,
        ..Toggles::default()
    }
}

/// Exhaustively averaged noisy gadget against `A(U) o twirl(Delta_U)`.
pub fn check_theorem2(seed: u64, draws: usize) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut worst_sandwich: f64 = 0.0;
    let mut per_case = serde_json::Map::new();
    for case in theorem2_cases()? {
        let n = case.code.n();
        let d = case.code.d();
        let u = realization_matrix(&case.realization, n, d)?;
        let au = Superoperator::natural_rep(&u)?;
        let proj = sum_of_cospace_channels(&case.code)?;
        let mut case_worst: f64 = 0.0;
        for i in 0..draws {
            let noise = random_noise(&mut rng, n, i % 2 == 0);
            let footprint: Vec<usize> = (0..n).collect();
            let noise_ch = ops_channel(
                d,
                n,
                &lower_noise(std::slice::from_ref(&noise), &footprint, d)?,
            )?;
            let delta = Superoperator::factor_noise(&noise_ch.compose(&au)?, &u)?;
            let expected = au.compose(&delta.twirl(&case.group)?)?;
            let g = unitary(
                &["a"],
                case.realization.clone(),
                case.twirl.clone(),
                vec![noise],
            );
            let avg = averaged_gadget(&case.code, g.clone(), no_stabilizers(), seed)?;
            case_worst = case_worst.max(avg.max_diff(&expected));
            if !case.code.stabilizer_generators().is_empty() {
                let with_s = averaged_gadget(&case.code, g, Toggles::default(), seed)?;
                let sandwiched = proj.compose(&expected.compose(&proj)?)?;
                worst_sandwich = worst_sandwich.max(with_s.max_diff(&sandwiched));
            }
        }
        per_case.insert(case.name.into(), json!(case_worst));
        worst = worst.max(case_worst);
    }
    Ok(
        VerificationReport::upper("theorem2", worst.max(worst_sandwich), 1e-10, seed).with_details(
            json!({
                "draws": draws,
                "max_diff": per_case,
                "stabilizer_sandwich_max_diff": worst_sandwich,
            }),
        ),
    )
}

/// Averaged noise of a compiled logical Clifford is a stochastic Weyl map on the cospaces.
pub fn check_clifford(seed: u64, draws: usize) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code = builtin_code("bitflip3")?;
    let basis = CospaceBasis::new(&code)?;
    let realization = gates(&[("s", &[0])]);
    let u = realization_matrix(&realization, 3, 2)?;
    let undo = Superoperator::natural_rep(&u.adjoint())?;
    let mut worst: f64 = 0.0;
    let mut untwirled: f64 = f64::INFINITY;
    for _ in 0..draws {
        let noise = NoiseOp::Unitary {
            sites: vec![],
            matrix: ComplexMatrix::from_matrix(&random_coherent_unitary(&mut rng, 3)?),
        };
        let g = unitary(
            &["a"],
            realization.clone(),
            TwirlGroupSpec::LogicalWeyl,
            vec![noise],
        );
        let avg = averaged_gadget(&code, g.clone(), Toggles::default(), seed)?;
        worst = worst.max(basis.block_offdiagonal(&undo.compose(&avg)?));
        let plain = averaged_gadget(&code, g, Toggles::none(), seed)?;
        untwirled = untwirled.min(basis.block_offdiagonal(&undo.compose(&plain)?));
    }
    Ok(VerificationReport::upper("clifford", worst, 1e-10, seed)
        .with_details(json!({"draws": draws, "min_offdiagonal_without_lrc": untwirled})))
}

/// Dihedral twirl of a noisy T gate leaves Pauli noise with `p_X = p_Y`.
pub fn check_tgate(seed: u64, draws: usize) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code = StabilizerCode::trivial(2, 1)?;
    let realization = gates(&[("t", &[0])]);
    let u = realization_matrix(&realization, 1, 2)?;
    let undo = Superoperator::natural_rep(&u.adjoint())?;
    let paulis = ["I", "X", "Y", "Z"]
        .iter()
        .map(|p| WeylOperator::pauli(p))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    let mut rates = Vec::new();
    for _ in 0..draws {
        let noise = NoiseOp::Unitary {
            sites: vec![],
            matrix: ComplexMatrix::from_matrix(&random_coherent_unitary(&mut rng, 1)?),
        };
        let g = unitary(
            &["a"],
            realization.clone(),
            TwirlGroupSpec::Dihedral,
            vec![noise],
        );
        let avg = averaged_gadget(&code, g, Toggles::default(), seed)?;
        let delta = undo.compose(&avg)?;
        let p = delta.weyl_error_rates(&paulis)?;
        worst = worst
            .max(weyl_offdiagonal(&delta, &paulis)?)
            .max((p[1] - p[2]).abs());
        rates.push(p);
    }
    Ok(VerificationReport::upper("tgate", worst, 1e-10, seed)
        .with_details(json!({"pauli_rates_ixyz": rates})))
}

/// Readout noise model for the syndrome-extraction check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReadoutNoise {
    None,
    /// Coherent `X` rotation by the angle.
    Coherent(f64),
    /// Bit flip with the probability.
    Flip(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRcOptions {
    pub readout: ReadoutNoise,
    /// Coherent `XII` rotation in the idle window after readout.
    pub idle_theta: f64,
}

impl Default for MeasurementRcOptions {
    fn default() -> Self {
        MeasurementRcOptions {
            readout: ReadoutNoise::Coherent(0.2),
            idle_theta: 0.1,
        }
    }
}

impl ReadoutNoise {
    fn ops(&self) -> Vec<NoiseOp> {
        let x = WeylOperator::pauli("X").expect("pauli");
        match *self {
            ReadoutNoise::None => vec![],
            ReadoutNoise::Coherent(theta) => vec![NoiseOp::Rotation {
                sites: vec![],
                weyl: x,
                theta,
            }],
            ReadoutNoise::Flip(p) => vec![NoiseOp::StochasticWeyl {
                sites: vec![],
                terms: vec![
                    WeylTerm {
                        weyl: WeylOperator::pauli("I").expect("pauli"),
                        p: 1.0 - p,
                    },
                    WeylTerm { weyl: x, p },
                ],
            }],
        }
    }

    /// `C[r][s]`: probability of reporting `r` when the true syndrome dit is `s`.
    pub fn confusion(&self) -> [[f64; 2]; 2] {
        let flip = match *self {
            ReadoutNoise::None => 0.0,
            ReadoutNoise::Coherent(theta) => theta.sin().powi(2),
            ReadoutNoise::Flip(p) => p,
        };
        [[1.0 - flip, flip], [flip, 1.0 - flip]]
    }
}

/// Restrict a channel on block (x) readout, with the readout reset first, to the block.
fn block_channel(ch: &Superoperator, block_qubits: usize) -> Result<Superoperator> {
    let bd = 1usize << block_qubits;
    let mut zero = Matrix::zeros(2, 2);
    zero[(0, 0)] = C64::new(1.0, 0.0);
    let keep: Vec<usize> = (0..block_qubits).collect();
    let mut m = Matrix::zeros(bd * bd, bd * bd);
    for b in 0..bd {
        for a in 0..bd {
            let mut unit = Matrix::zeros(bd, bd);
            unit[(a, b)] = C64::new(1.0, 0.0);
            let out = ch.apply_matrix(&kron(&unit, &zero))?;
            let reduced = partial_trace_keep(&out, 2, block_qubits + 1, &keep);
            m.column_mut(b * bd + a).copy_from(&vectorize(&reduced));
        }
    }
    Superoperator::from_matrix(bd, m)
}

/// Exhaustively averaged single-dit extraction of `ZZI` on the bit-flip code
/// under readout noise. The instrument must factor as a confusion matrix on
/// the reported dit times a stochastic Weyl map on the block.
pub fn check_measurement_rc(
    opts: &MeasurementRcOptions,
    seed: u64,
) -> Result<(VerificationReport, [[f64; 2]; 2])> {
    let code = builtin_code("bitflip3")?;
    let idle = if opts.idle_theta != 0.0 {
        vec![NoiseOp::Rotation {
            sites: vec![],
            weyl: WeylOperator::pauli("XII")?,
            theta: opts.idle_theta,
        }]
    } else {
        vec![]
    };
    let c = CircuitBuilder::new(2)
        .block("a", &code)
        .readout("r")
        .gadget(reset("r", vec![], vec![]))
        .gadget(Gadget::Syndrome {
            register: "a".into(),
            generator: 0,
            readout: "r".into(),
            wire: "s".into(),
            noise: vec![],
            readout_noise: opts.readout.ops(),
            idle_noise: idle,
        })
        .build();
    let policy = RandomizationPolicy::exhaustive(seed);
    let t = compile(&c, &policy)?;
    let inst = averaged_instrument(&t)?;
    let mut per_outcome = Vec::new();
    for r in 0..2u32 {
        let ch = match inst.get(&vec![Some(r)]) {
            Some(ch) => block_channel(ch, 3)?,
            None => Superoperator::zero(8)?,
        };
        per_outcome.push(ch);
    }

    let basis_state = |bits: usize| {
        let mut m = Matrix::zeros(8, 8);
        m[(bits, bits)] = C64::new(1.0, 0.0);
        m
    };
    // |000> has ZZI dit 0 and |100> has dit 1.
    let inputs = [basis_state(0), basis_state(4)];
    let mut measured = [[0.0; 2]; 2];
    for (r, ch) in per_outcome.iter().enumerate() {
        for (s, rho) in inputs.iter().enumerate() {
            measured[r][s] = trace(&ch.apply_matrix(rho)?).re;
        }
    }
    let oracle = opts.readout.confusion();
    let mut conf_err: f64 = 0.0;
    for r in 0..2 {
        for s in 0..2 {
            conf_err = conf_err.max((measured[r][s] - oracle[r][s]).abs());
        }
    }

    let det = measured[0][0] * measured[1][1] - measured[0][1] * measured[1][0];
    if det.abs() < 1e-6 {
        return Err(LrcError::Domain("confusion matrix is singular".into()));
    }
    let inv = [
        [measured[1][1] / det, -measured[0][1] / det],
        [-measured[1][0] / det, measured[0][0] / det],
    ];
    let a = &code.stabilizer_generators()[0];
    let mut conditioned = Vec::new();
    for row in inv {
        let m = per_outcome[0].matrix() * C64::new(row[0], 0.0)
            + per_outcome[1].matrix() * C64::new(row[1], 0.0);
        conditioned.push(Superoperator::from_matrix(8, m)?);
    }
    let total = Superoperator::from_matrix(8, conditioned[0].matrix() + conditioned[1].matrix())?;
    let mut residual: f64 = 0.0;
    for (s, m) in conditioned.iter().enumerate() {
        let proj = Superoperator::natural_rep(&code.eigenprojector(a, s as u32)?)?;
        residual = residual.max(m.max_diff(&total.compose(&proj)?));
    }
    let offdiag = CospaceBasis::new(&code)?.block_offdiagonal(&total);
    let value = conf_err.max(residual).max(offdiag);
    let report = VerificationReport::upper("syndrome", value, 1e-10, seed).with_details(json!({
        "confusion": measured,
        "confusion_oracle": oracle,
        "confusion_error": conf_err,
        "factorization_residual": residual,
        "encoded_offdiagonal": offdiag,
        "instances": t.instance_count() as u64,
    }));
    Ok((report, measured))
}

/// Noisy reset, logical X and measurement on the bit-flip code.
pub(super) fn sampling_circuit() -> Result<LogicalCircuit> {
    let code = builtin_code("bitflip3")?;
    let rot = |sites: Vec<usize>, p: &str, theta: f64| -> Result<NoiseOp> {
        Ok(NoiseOp::Rotation {
            sites,
            weyl: WeylOperator::pauli(p)?,
            theta,
        })
    };
    Ok(CircuitBuilder::new(2)
        .block("a", &code)
        .gadget(reset("a", vec![], vec![rot(vec![0], "X", 0.3)?]))
        .gadget(unitary(
            &["a"],
            Realization::Weyl(code.logical_x(0).clone()),
            TwirlGroupSpec::LogicalWeyl,
            vec![rot(vec![0, 1], "XX", 0.4)?],
        ))
        .gadget(Gadget::Measure {
            register: "a".into(),
            observable: None,
            wire: "m".into(),
            noise: vec![rot(vec![2], "X", 0.25)?],
        })
        .build())
}

fn record_key(r: &Record) -> String {
    r.iter()
        .map(|v| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into()))
        .collect::<Vec<_>>()
        .join(",")
}

/// One shot per sampled compilation against the exactly averaged distribution.
pub fn check_sampling_equivalence(shots: u64, seed: u64) -> Result<VerificationReport> {
    let c = sampling_circuit()?;
    let t = compile(&c, &RandomizationPolicy::sampled(seed, shots))?;
    let ev = t.evaluator()?;
    let exact = outcome_distribution(&average_exact(&t, &ev, ev.zero_state_input()?)?);
    let mut shot_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5348_4f54);
    let mut cache: HashMap<Vec<u32>, Vec<(Record, f64)>> = HashMap::new();
    let mut counts: BTreeMap<Record, u64> = BTreeMap::new();
    for i in 0..shots {
        let a = t.sample_assignment(seed, i);
        let dist = match cache.get(&a) {
            Some(d) => d,
            None => {
                let out = run_instance(&t, &ev, ev.zero_state_input()?, &a)?;
                let d: Vec<_> = outcome_distribution(&out).into_iter().collect();
                cache.entry(a).or_insert(d)
            }
        };
        let u: f64 = shot_rng.gen();
        let mut acc = 0.0;
        let mut chosen = &dist[dist.len() - 1].0;
        for (rec, p) in dist {
            acc += p;
            if u < acc {
                chosen = rec;
                break;
            }
        }
        *counts.entry(chosen.clone()).or_default() += 1;
    }
    let mut keys: Vec<&Record> = exact.keys().chain(counts.keys()).collect();
    keys.sort();
    keys.dedup();
    let tvd = 0.5
        * keys
            .iter()
            .map(|k| {
                let e = counts.get(*k).copied().unwrap_or(0) as f64 / shots as f64;
                (e - exact.get(*k).copied().unwrap_or(0.0)).abs()
            })
            .sum::<f64>();
    let outcomes = (c.d as f64).powi(c.classical_wires.len() as i32);
    let bound = 3.0 * (outcomes / shots as f64).sqrt();
    let exact_json: BTreeMap<String, f64> =
        exact.iter().map(|(k, v)| (record_key(k), *v)).collect();
    let counts_json: BTreeMap<String, u64> =
        counts.iter().map(|(k, v)| (record_key(k), *v)).collect();
    Ok(
        VerificationReport::upper("sampling", tvd, bound, seed).with_details(json!({
            "shots": shots,
            "exact": exact_json,
            "counts": counts_json,
            "distinct_compilations": cache.len(),
        })),
    )
}

/// Random small circuit: resets of every register (not counted) followed by
/// `1..=max_gadgets` logical gadgets.
pub(super) fn random_circuit(rng: &mut ChaCha8Rng, max_gadgets: usize) -> Result<LogicalCircuit> {
    let family = ["bitflip3", "phaseflip3", "qutrit_rep3"]
        .choose(rng)
        .expect("nonempty");
    let code = builtin_code(family)?;
    let d = code.d();
    let mut b = CircuitBuilder::new(d).block("a", &code).readout("r");
    let state = vec![rng.gen_range(0..d)];
    b.push(reset("a", state, vec![]));
    let count = rng.gen_range(1..=max_gadgets);
    for i in 0..count {
        match rng.gen_range(0..5) {
            0 => {
                let group = code.logical_group();
                let w = group[rng.gen_range(0..group.len())].clone();
                b.push(unitary(
                    &["a"],
                    Realization::Weyl(w),
                    TwirlGroupSpec::LogicalWeyl,
                    vec![],
                ));
            }
            1 => {
                let real = if d == 2 && *family == "bitflip3" {
                    gates(&[(["s", "t"][rng.gen_range(0..2)], &[0])])
                } else {
                    gates(&[("x", &[0]), ("x", &[1]), ("x", &[2])])
                };
                let twirl = if rng.gen_bool(0.5) {
                    TwirlGroupSpec::LogicalWeyl
                } else {
                    TwirlGroupSpec::Trivial
                };
                b.push(unitary(&["a"], real, twirl, vec![]));
            }
            2 => b.push(Gadget::Idle {
                register: "a".into(),
                ticks: rng.gen_range(1..=2),
                noise: vec![],
            }),
            3 => {
                b.push(Gadget::Measure {
                    register: "a".into(),
                    observable: None,
                    wire: format!("m{i}"),
                    noise: vec![],
                });
                let state = vec![rng.gen_range(0..d)];
                b.push(reset("a", state, vec![]));
            }
            _ => {
                b.push(reset("r", vec![], vec![]));
                b.push(Gadget::Syndrome {
                    register: "a".into(),
                    generator: rng.gen_range(0..code.stabilizer_generators().len()),
                    readout: "r".into(),
                    wire: format!("s{i}"),
                    noise: vec![],
                    readout_noise: vec![],
                    idle_noise: vec![],
                });
            }
        }
    }
    Ok(b.build())
}

/// Instances compared per random circuit when exhaustive enumeration is too large.
const SAMPLED_INSTANCES: u64 = 256;
const EXHAUSTIVE_LIMIT: u128 = 4096;

/// Every compiled instance of random noise-free circuits reproduces the bare
/// circuit. Every circuit starts by resetting its block, so its channel is
/// `rho -> Tr(rho) sigma` and comparing outputs on one input state compares channels.
pub fn check_compiled_equals_bare(circuits: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut instances = 0u64;
    let mut exhaustive = 0usize;
    for i in 0..circuits {
        let c = random_circuit(&mut rng, 3)?;
        let bare_t = compile(&c, &RandomizationPolicy::bare())?;
        let ev = bare_t.evaluator()?;
        let bare = run_instance(&bare_t, &ev, ev.zero_state_input()?, &[])?;
        let probe = compile(&c, &RandomizationPolicy::exhaustive(seed))?;
        let circuit_seed = super::derive_seed(seed, &format!("circuit{i}"));
        let policy = if probe.instance_count() <= EXHAUSTIVE_LIMIT {
            exhaustive += 1;
            RandomizationPolicy::exhaustive(circuit_seed)
        } else {
            RandomizationPolicy::sampled(circuit_seed, SAMPLED_INSTANCES)
        };
        for a in probe.assignments(&policy)? {
            let out = run_instance(&probe, &ev, ev.zero_state_input()?, &a)?;
            worst = worst.max(branches_max_diff(&out, &bare));
            instances += 1;
        }
    }
    Ok(
        VerificationReport::upper("compiled_equals_bare", worst, 1e-10, seed).with_details(json!({
            "circuits": circuits,
            "exhaustive_circuits": exhaustive,
            "instances": instances,
            "sampled_instances_per_large_circuit": SAMPLED_INSTANCES,
            "mode_large": format!("{:?}", Mode::Sampled(SAMPLED_INSTANCES)),
        })),
    )
}
