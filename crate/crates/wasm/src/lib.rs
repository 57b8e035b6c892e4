//! Browser bindings: each entry point returns a JSON string, or throws a message.

use serde_json::json;
use wasm_bindgen::prelude::*;

use lrc_core::channel::Superoperator;
use lrc_core::circuit::gates::gate_matrix;
use lrc_core::circuit::LogicalCircuit;
use lrc_core::compiler::{averaged_instrument, compile, RandomizationPolicy, Toggles};
use lrc_core::verifier::{
    check_measurement_rc, run_toffoli_example, MeasurementRcOptions, ReadoutNoise, DEFAULT_SEED,
};
use lrc_core::{LrcError, WeylOperator};

fn js_err(e: LrcError) -> JsError {
    JsError::new(&e.to_string())
}

fn finite(name: &str, v: f64) -> Result<(), JsError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(JsError::new(&format!("{name} must be a finite number")))
    }
}

/// Transversal Toffoli with the first triple over-rotated by `delta`: coherence
/// of the third block before and after stabilizer averaging.
#[wasm_bindgen]
pub fn toffoli(delta: f64) -> Result<String, JsError> {
    finite("delta", delta)?;
    let out = run_toffoli_example(delta, DEFAULT_SEED).map_err(js_err)?;
    Ok(json!({"outcome": out, "reports": out.reports}).to_string())
}

/// Confusion matrix of randomized syndrome extraction when the readout suffers
/// a coherent X rotation by `theta`.
#[wasm_bindgen]
pub fn readout_confusion(theta: f64) -> Result<String, JsError> {
    finite("theta", theta)?;
    let opts = MeasurementRcOptions {
        readout: ReadoutNoise::Coherent(theta),
        idle_theta: 0.0,
    };
    let (report, confusion) = check_measurement_rc(&opts, DEFAULT_SEED).map_err(js_err)?;
    Ok(json!({
        "confusion": confusion,
        "flip_probability": theta.sin().powi(2),
        "report": report,
    })
    .to_string())
}

fn t_gate_channel(axis: &WeylOperator, theta: f64, twirl: &str) -> lrc_core::Result<Superoperator> {
    let text = format!(
        r#"{{"schema_version":1,"d":2,"codes":{{"q":"trivial"}},
            "registers":[{{"name":"a","kind":"logical","code":"q","qudits":[0]}}],
            "gadgets":[{{"kind":"unitary","registers":["a"],"realization":{{"gates":[{{"gate":"t","sites":[0]}}]}},
                         "twirl":"{twirl}","noise":[{{"kind":"rotation","weyl":"{axis}","theta":{theta}}}]}}]}}"#,
        axis = axis.to_text(),
    );
    let circuit = LogicalCircuit::parse(&text)?;
    let policy = RandomizationPolicy::exhaustive(DEFAULT_SEED).with_toggles(Toggles {
        stabilizers: false,
        ..Toggles::default()
    });
    let inst = averaged_instrument(&compile(&circuit, &policy)?)?;
    let avg = inst
        .into_values()
        .next()
        .expect("no measurements, one branch");
    Superoperator::natural_rep(&gate_matrix("t", 2)?.adjoint())?.compose(&avg)
}

/// Noise of a T gate followed by a coherent rotation about `axis` (X, Y or Z),
/// with and without the dihedral twirl: Pauli rates and the largest
/// off-diagonal Pauli transfer entry.
#[wasm_bindgen]
pub fn t_gate_twirl(theta: f64, axis: &str) -> Result<String, JsError> {
    finite("theta", theta)?;
    if !matches!(axis, "X" | "Y" | "Z") {
        return Err(JsError::new("axis must be X, Y or Z"));
    }
    let paulis: Vec<WeylOperator> = ["I", "X", "Y", "Z"]
        .iter()
        .map(|p| WeylOperator::pauli(p))
        .collect::<lrc_core::Result<_>>()
        .map_err(js_err)?;
    let basis = paulis
        .iter()
        .map(WeylOperator::to_matrix)
        .collect::<lrc_core::Result<Vec<_>>>()
        .map_err(js_err)?;
    let axis = WeylOperator::pauli(axis).map_err(js_err)?;
    let mut doc = serde_json::Map::new();
    for twirl in ["trivial", "dihedral"] {
        let ch = t_gate_channel(&axis, theta, twirl).map_err(js_err)?;
        let ptm = ch.transfer_matrix(&basis);
        let mut off: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(ptm[(i, j)].norm());
                }
            }
        }
        let rates = ch.weyl_error_rates(&paulis).map_err(js_err)?;
        doc.insert(
            twirl.to_string(),
            json!({"rates_ixyz": rates, "max_offdiagonal": off}),
        );
    }
    Ok(serde_json::Value::Object(doc).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dihedral_twirl_equalizes_x_and_y() {
        let doc: serde_json::Value =
            serde_json::from_str(&t_gate_twirl(0.2, "X").unwrap()).unwrap();
        let r = &doc["dihedral"]["rates_ixyz"];
        assert!((r[1].as_f64().unwrap() - r[2].as_f64().unwrap()).abs() < 1e-12);
        assert!(doc["dihedral"]["max_offdiagonal"].as_f64().unwrap() < 1e-12);
        assert!(doc["trivial"]["max_offdiagonal"].as_f64().unwrap() > 0.1);
        // The twirl keeps the total error rate.
        let p_err = |k: &str| 1.0 - doc[k]["rates_ixyz"][0].as_f64().unwrap();
        assert!((p_err("dihedral") - p_err("trivial")).abs() < 1e-12);
        assert!((p_err("dihedral") - 0.2f64.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn readout_confusion_matches_flip_probability() {
        let doc: serde_json::Value =
            serde_json::from_str(&readout_confusion(0.3).unwrap()).unwrap();
        let p = 0.3f64.sin().powi(2);
        assert!((doc["confusion"][0][1].as_f64().unwrap() - p).abs() < 1e-10);
        assert_eq!(doc["report"]["pass"], true);
    }

    #[test]
    fn toffoli_without_rotation_is_clean() {
        let doc: serde_json::Value = serde_json::from_str(&toffoli(0.0).unwrap()).unwrap();
        assert!(doc["outcome"]["before"]["inter_cospace"].as_f64().unwrap() < 1e-12);
        assert!(doc["reports"]
            .as_array()
            .unwrap()
            .iter()
            .all(|r| r["pass"] == true));
    }
}
