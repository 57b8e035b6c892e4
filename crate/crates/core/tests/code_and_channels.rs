use lrc_core::channel::Superoperator;
use lrc_core::code::{
    all_cospace_projectors, builtin_code, code_from_json, projector_defect, BUILTIN_CODES,
};
use lrc_core::linalg::{expm_hermitian, max_abs, max_abs_diff, trace, Matrix};
use lrc_core::weyl::all_weyls_by_weight;
use lrc_core::WeylOperator;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn random_hermitian(dim: usize, entries: &[f64]) -> Matrix {
    let mut h = DMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        Complex64::new(entries[k % entries.len()], entries[(k + 1) % entries.len()])
    });
    h = &h + h.adjoint();
    h
}

/// Mixture of two random unitaries, enough to break every symmetry.
fn random_channel(dim: usize, entries: &[f64], p: f64) -> Superoperator {
    let u1 = expm_hermitian(&random_hermitian(dim, entries), 0.7);
    let u2 = expm_hermitian(&random_hermitian(dim, &entries[1..]), 1.3);
    let a = Superoperator::natural_rep(&u1).unwrap();
    let b = Superoperator::natural_rep(&u2).unwrap();
    Superoperator::from_matrix(
        dim,
        a.matrix() * Complex64::new(p, 0.0) + b.matrix() * Complex64::new(1.0 - p, 0.0),
    )
    .unwrap()
}

fn entries() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 17)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weyl_twirl_is_idempotent_and_pauli_diagonal(e in entries(), p in 0.0f64..1.0) {
        let ch = random_channel(4, &e, p);
        let group = all_weyls_by_weight(2, 2);
        let once = ch.twirl_weyl(&group).unwrap();
        let twice = once.twirl_weyl(&group).unwrap();
        prop_assert!(once.max_diff(&twice) < 1e-12);
        // Dense twirl is the oracle for the monomial fast path.
        let dense: Vec<Matrix> = group.iter().map(|w| w.to_matrix().unwrap()).collect();
        prop_assert!(once.max_diff(&ch.twirl(&dense).unwrap()) < 1e-12);
        prop_assert!(once.is_cptp(1e-10));
        let basis: Vec<Matrix> = group.iter().map(|w| w.to_matrix().unwrap()).collect();
        let ptm = once.transfer_matrix(&basis);
        for i in 0..ptm.nrows() {
            for j in 0..ptm.ncols() {
                if i != j {
                    prop_assert!(ptm[(i, j)].norm() < 1e-12);
                }
            }
        }
        let rates = once.weyl_error_rates(&group).unwrap();
        prop_assert!((rates.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(rates.iter().all(|&r| r > -1e-12));
    }

    #[test]
    fn composition_is_associative_and_trace_preserving(e in entries(), p in 0.0f64..1.0) {
        let a = random_channel(3, &e, p);
        let b = random_channel(3, &e[2..], 1.0 - p);
        let c = random_channel(3, &e[4..], 0.5);
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(left.max_diff(&right) < 1e-12);
        prop_assert!(left.trace_preservation_defect() < 1e-12);
        let rho = Matrix::from_diagonal_element(3, 3, Complex64::new(1.0 / 3.0, 0.0));
        let direct = a.apply_matrix(&b.apply_matrix(&rho).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&a.compose(&b).unwrap().apply_matrix(&rho).unwrap(), &direct) < 1e-12);
    }

    #[test]
    fn cospace_projectors_match_syndromes(code_ix in 0usize..4, w_ix in 0usize..64) {
        let code = builtin_code(["bitflip3", "phaseflip3", "qutrit_rep3", "five_one_three"][code_ix]).unwrap();
        let all = all_weyls_by_weight(code.d(), code.n());
        let e = &all[w_ix % all.len()];
        let idx = code.syndrome_of(e).unwrap().index(code.d());
        // E maps the code space into the cospace named by its syndrome.
        let pc = code.codespace_projector().unwrap();
        let em = e.to_matrix().unwrap();
        let moved = &em * &pc * em.adjoint();
        let target = code.cospace_projector_by_index(idx).unwrap();
        prop_assert!(max_abs_diff(&moved, &target) < 1e-12);
        prop_assert_eq!(code.pure_error_index(&code.pure_errors()[idx]).unwrap(), idx);
    }
}

#[test]
fn cospace_projectors_partition_the_space() {
    for name in BUILTIN_CODES {
        let code = builtin_code(name).unwrap();
        let projectors = all_cospace_projectors(&code).unwrap();
        let dim = code.dim();
        let r = code.stabilizer_generators().len();
        assert_eq!(
            projectors.len(),
            (code.d() as usize).pow(r as u32),
            "{name}"
        );
        let mut sum = Matrix::zeros(dim, dim);
        for (i, p) in &projectors {
            assert!(projector_defect(p) < 1e-12, "{name}");
            let rank = trace(p).re;
            assert!(
                (rank - (code.d() as f64).powi(code.k() as i32)).abs() < 1e-9,
                "{name}"
            );
            for (j, q) in &projectors {
                if i != j {
                    assert!(max_abs(&(p * q)) < 1e-12, "{name}");
                }
            }
            sum += p;
        }
        assert!(
            max_abs_diff(&sum, &Matrix::identity(dim, dim)) < 1e-12,
            "{name}"
        );
    }
}

#[test]
fn logical_operators_commute_with_stabilizers() {
    for name in BUILTIN_CODES {
        let code = builtin_code(name).unwrap();
        for l in code.logical_generators() {
            for s in code.stabilizer_generators() {
                assert!(l.commutes_with(s).unwrap(), "{name}: {l} vs {s}");
            }
        }
        let (x, z) = (code.logical_x(0), code.logical_z(0));
        assert_ne!(x.braiding_dit(z).unwrap(), 0, "{name}");
    }
}

#[test]
fn code_json_round_trip_and_rejection() {
    for name in BUILTIN_CODES {
        let code = builtin_code(name).unwrap();
        let text = serde_json::to_string(&code.definition()).unwrap();
        assert_eq!(
            code_from_json(&text).unwrap().definition(),
            code.definition()
        );
    }
    // Anticommuting stabilizers.
    let bad = r#"{"d":2,"n":1,"k":0,"stabilizer_generators":["0;1;0;2","0;0;1;2"],"pure_error_generators":[],"logical_generators":[]}"#;
    assert!(code_from_json(bad).is_err());
    let x = WeylOperator::pauli("X").unwrap();
    assert_eq!(x.to_text(), "0;1;0;2");
}
