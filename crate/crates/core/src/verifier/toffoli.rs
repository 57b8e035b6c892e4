//! Transversal Toffoli on three bit-flip blocks with an over-rotated first triple.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use crate::channel::rotation_unitary;
use crate::circuit::eval::Branches;
use crate::circuit::{
    ComplexMatrix, Gadget, GateSpec, LogicalCircuit, NoiseOp, Realization, TwirlGroupSpec,
};
use crate::code::builtin_code;
use crate::compiler::{
    average_assignments, average_exact, compile, RandomizationPolicy, ToggleOverride, Toggles,
};
use crate::error::Result;
use crate::linalg::{partial_trace_keep, Matrix};
use crate::weyl::WeylOperator;

use super::checks::{reset, unitary, CircuitBuilder};
use super::metrics::{coherence_metrics, syndrome_key, CoherenceReport};
use super::VerificationReport;

#[derive(Debug, Clone, Serialize)]
pub struct ToffoliOutcome {
    pub delta: f64,
    /// Fidelity of the noise-free run with `|1 1 0>` (encoded).
    pub fidelity_delta0: f64,
    /// Third block before stabilizer averaging.
    pub before: CoherenceReport,
    /// Third block after averaging over stabilizers on all three blocks.
    pub after: CoherenceReport,
    /// Third block after averaging over stabilizers on the third block only.
    pub after_third_only: CoherenceReport,
    pub instances: u64,
    #[serde(skip)]
    pub reports: Vec<VerificationReport>,
}

/// `sum_ij |ij><ij| (x) X_delta^{ij}` on three qubits.
fn controlled_controlled_rotation(delta: f64) -> Result<Matrix> {
    let xd = rotation_unitary(&WeylOperator::pauli("X")?, delta)?;
    let mut m = Matrix::identity(8, 8);
    m.view_mut((6, 6), (2, 2)).copy_from(&xd);
    Ok(m)
}

/// Resets to `|1 1 1>`, the transversal Toffoli, then optional stabilizer-only
/// idle gadgets on the listed blocks.
fn toffoli_circuit(delta: f64, averaged_blocks: &[&str]) -> Result<LogicalCircuit> {
    let code = builtin_code("bitflip3")?;
    let mut b = CircuitBuilder::new(2)
        .block("a", &code)
        .block("b", &code)
        .block("c", &code);
    for name in ["a", "b", "c"] {
        b.push(reset(name, vec![1], vec![]));
    }
    let noise = if delta == 0.0 {
        vec![]
    } else {
        vec![NoiseOp::Unitary {
            sites: vec![0, 3, 6],
            matrix: ComplexMatrix::from_matrix(&controlled_controlled_rotation(delta)?),
        }]
    };
    let ccx = (0..3)
        .map(|q| GateSpec {
            gate: "ccx".into(),
            sites: vec![q, q + 3, q + 6],
        })
        .collect();
    b.push(unitary(
        &["a", "b", "c"],
        Realization::Gates(ccx),
        TwirlGroupSpec::Trivial,
        noise,
    ));
    for name in averaged_blocks {
        b.push(Gadget::Idle {
            register: name.to_string(),
            ticks: 0,
            noise: vec![],
        });
    }
    Ok(b.build())
}

/// Stabilizer insertions only on the trailing idle gadgets.
fn policy(seed: u64) -> RandomizationPolicy {
    let mut toggles = Toggles::default();
    for g in 0..4 {
        toggles.overrides.insert(
            g,
            ToggleOverride {
                stabilizers: Some(false),
                ..ToggleOverride::default()
            },
        );
    }
    RandomizationPolicy::exhaustive(seed).with_toggles(toggles)
}

fn final_state(out: &Branches) -> Matrix {
    out.values().next().expect("one branch").0[0].clone()
}

fn third_block(rho: &Matrix) -> Matrix {
    partial_trace_keep(rho, 2, 9, &[6, 7, 8])
}

pub fn run_toffoli_example(delta: f64, seed: u64) -> Result<ToffoliOutcome> {
    let code = builtin_code("bitflip3")?;

    let ideal = compile(&toffoli_circuit(0.0, &[])?, &RandomizationPolicy::bare())?;
    let ev = ideal.evaluator()?;
    let rho0 = final_state(&ev.run(&ideal.concretize(&[])?, ev.zero_state_input()?)?);
    // |111 111 000>
    let fidelity = rho0[(0b111_111_000, 0b111_111_000)].re;

    let bare = compile(&toffoli_circuit(delta, &[])?, &RandomizationPolicy::bare())?;
    let rho = final_state(&ev.run(&bare.concretize(&[])?, ev.zero_state_input()?)?);
    let before = coherence_metrics(&third_block(&rho), &code)?;

    let p = policy(seed);
    let all = compile(&toffoli_circuit(delta, &["a", "b", "c"])?, &p)?;
    let averaged = final_state(&average_exact(&all, &ev, ev.zero_state_input()?)?);
    let after = coherence_metrics(&third_block(&averaged), &code)?;
    let literal = final_state(&average_assignments(
        &all,
        &ev,
        &ev.zero_state_input()?,
        all.assignments(&p)?,
    )?);
    let literal_diff = crate::linalg::max_abs_diff(&literal, &averaged);

    let third = compile(&toffoli_circuit(delta, &["c"])?, &p)?;
    let third_rho = final_state(&average_exact(&third, &ev, ev.zero_state_input()?)?);
    let after_third_only = coherence_metrics(&third_block(&third_rho), &code)?;

    let (c2, s2) = (delta.cos().powi(2), delta.sin().powi(2));
    let flipped = syndrome_key(
        &code,
        code.syndrome_of(&WeylOperator::pauli("XII")?)?.index(2),
    );
    let zero = syndrome_key(&code, 0);
    let mut expected = BTreeMap::new();
    for key in after.populations.keys() {
        expected.insert(key.clone(), 0.0);
    }
    expected.insert(zero.clone(), c2);
    *expected.entry(flipped.clone()).or_insert(0.0) += s2;
    let pop_err = after
        .populations
        .iter()
        .map(|(k, v)| (v - expected[k]).abs())
        .fold(0.0, f64::max);
    let third_err = after_third_only
        .populations
        .iter()
        .map(|(k, v)| (v - after.populations[k]).abs())
        .fold(
            (after.inter_cospace - after_third_only.inter_cospace).abs(),
            f64::max,
        );
    let pre_expected = (2.0 * delta).sin().abs();

    let details = json!({"delta": delta});
    let reports = vec![
        VerificationReport::upper("toffoli:fidelity_delta0", 1.0 - fidelity, 1e-12, seed)
            .with_details(details.clone()),
        VerificationReport::lower(
            "toffoli:pre_inter",
            before.inter_cospace,
            pre_expected - 1e-10,
            seed,
        )
        .with_details(json!({"delta": delta, "expected": pre_expected})),
        VerificationReport::upper("toffoli:post_inter", after.inter_cospace, 1e-10, seed)
            .with_details(details.clone()),
        VerificationReport::upper("toffoli:populations", pop_err, 1e-10, seed).with_details(
            json!({"delta": delta, "populations": after.populations, "expected": expected}),
        ),
        VerificationReport::upper("toffoli:third_block_only", third_err, 1e-10, seed)
            .with_details(details.clone()),
        VerificationReport::upper("toffoli:literal_average", literal_diff, 1e-10, seed)
            .with_details(json!({"delta": delta, "instances": all.instance_count() as u64})),
    ];
    Ok(ToffoliOutcome {
        delta,
        fidelity_delta0: fidelity,
        before,
        after,
        after_third_only,
        instances: all.instance_count() as u64,
        reports,
    })
}
