use lrc_core::linalg::{max_abs_diff, root_of_unity, Matrix};
use lrc_core::{chi, WeylOperator};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn weyl(d: u32, n: usize) -> impl Strategy<Value = WeylOperator> {
    (
        proptest::collection::vec(0..d, n),
        proptest::collection::vec(0..d, n),
        0..(2 * i64::from(d)),
    )
        .prop_map(move |(x, z, e)| WeylOperator::new(d, x, z, e).unwrap())
}

/// Two operators on the same qudits, with d and n drawn first.
fn pair() -> impl Strategy<Value = (WeylOperator, WeylOperator)> {
    (prop_oneof![Just(2u32), Just(3u32)], 1usize..=3)
        .prop_flat_map(|(d, n)| (weyl(d, n), weyl(d, n)))
}

fn triple() -> impl Strategy<Value = (WeylOperator, WeylOperator, WeylOperator)> {
    (prop_oneof![Just(2u32), Just(3u32)], 1usize..=3)
        .prop_flat_map(|(d, n)| (weyl(d, n), weyl(d, n), weyl(d, n)))
}

/// Built from scratch: X|j> = |j+1>, Z|j> = w^j |j>, tensor products, then the phase.
fn dense(p: &WeylOperator) -> Matrix {
    let d = p.d() as usize;
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for q in 0..p.n() {
        let mut local = Matrix::zeros(d, d);
        for j in 0..d {
            let zphase = root_of_unity(2 * ((p.z()[q] as usize * j) % d) as u32, d as u32);
            local[((j + p.x()[q] as usize) % d, j)] = zphase;
        }
        m = m.kronecker(&local);
    }
    m * Complex64::from_polar(
        1.0,
        std::f64::consts::PI * f64::from(p.phase_exp()) / f64::from(p.d()),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matrix_form_matches_reference((p, _) in pair()) {
        prop_assert!(max_abs_diff(&p.to_matrix().unwrap(), &dense(&p)) < 1e-12);
    }

    #[test]
    fn products_close_and_match_matrices((p, q) in pair()) {
        let pq = p.mul(&q).unwrap();
        prop_assert!(max_abs_diff(&dense(&pq), &(dense(&p) * dense(&q))) < 1e-11);
    }

    #[test]
    fn braiding_phase_is_the_commutation_factor((p, q) in pair()) {
        let b = p.braiding_phase(&q).unwrap().value();
        let pm = dense(&p);
        let qm = dense(&q);
        // P Q P^dagger = conj(b) Q
        prop_assert!(max_abs_diff(&(&pm * &qm * pm.adjoint()), &(qm.clone() * b.conj())) < 1e-11);
        let dit = p.braiding_dit(&q).unwrap();
        prop_assert!((root_of_unity(2 * dit, p.d()) - b).norm() < 1e-12);
        prop_assert_eq!(p.commutes_with(&q).unwrap(), dit == 0);
    }

    #[test]
    fn braiding_is_a_bicharacter((p1, p2, q) in triple()) {
        let lhs = p1.mul(&p2).unwrap().braiding_phase(&q).unwrap();
        let rhs = p1.braiding_phase(&q).unwrap().mul(&p2.braiding_phase(&q).unwrap());
        prop_assert_eq!(lhs, rhs);
        let lhs = q.braiding_phase(&p1.mul(&p2).unwrap()).unwrap();
        let rhs = q.braiding_phase(&p1).unwrap().mul(&q.braiding_phase(&p2).unwrap());
        prop_assert_eq!(lhs, rhs);
        // Antisymmetry
        prop_assert!(p1.braiding_phase(&q).unwrap().mul(&q.braiding_phase(&p1).unwrap()).is_one());
    }

    #[test]
    fn phases_are_consistent((p, _) in pair()) {
        let dm = dense(&p);
        prop_assert!(max_abs_diff(&dense(&p.dagger()), &dm.adjoint()) < 1e-12);
        let unit = p.mul(&p.dagger()).unwrap();
        prop_assert!(unit.is_identity());
        let d = p.d();
        let mut acc = Matrix::identity(dm.nrows(), dm.ncols());
        for _ in 0..d {
            acc = &acc * &dm;
        }
        prop_assert!(max_abs_diff(&dense(&p.pow(d)), &acc) < 1e-11);
        prop_assert!(p.pow(d).is_identity_up_to_phase());
        // Stripping the phase leaves the unit-phase representative.
        prop_assert_eq!(p.strip_phase().phase_exp(), 0);
        prop_assert_eq!(p.strip_phase().with_phase(i64::from(p.phase_exp())), p.clone());
    }

    #[test]
    fn braiding_is_chi_of_the_symplectic_pairing((p, q) in pair()) {
        let d = p.d();
        let mut a = p.x().to_vec();
        a.extend(p.z().iter().map(|z| (d - z) % d));
        let mut b = q.z().to_vec();
        b.extend_from_slice(q.x());
        prop_assert_eq!(chi(&a, &b, d).unwrap(), p.braiding_phase(&q).unwrap());
    }

    #[test]
    fn text_and_json_round_trip((p, _) in pair()) {
        let text = p.to_text();
        prop_assert_eq!(text.parse::<WeylOperator>().unwrap(), p.clone());
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<WeylOperator>(&json).unwrap(), p.clone());
        let (back, phase) = WeylOperator::from_matrix_projective(&dense(&p), p.d(), p.n(), 1e-9).unwrap();
        prop_assert!(max_abs_diff(&(back.to_matrix().unwrap() * phase), &dense(&p)) < 1e-11);
    }
}

#[test]
fn qubit_y_is_i_x_z() {
    let y = WeylOperator::pauli("Y").unwrap();
    let x = WeylOperator::pauli("X").unwrap();
    let z = WeylOperator::pauli("Z").unwrap();
    let ixz = x
        .mul(&z)
        .unwrap()
        .with_phase(i64::from(x.mul(&z).unwrap().phase_exp()) + 1);
    assert_eq!(y, ixz);
    let expected = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    assert!(max_abs_diff(&y.to_matrix().unwrap(), &expected) < 1e-15);
}

#[test]
fn malformed_text_is_rejected() {
    for bad in ["", "0;1;0", "0;1,0;0;2", "x;1;0;2", "0;1;0;1"] {
        assert!(bad.parse::<WeylOperator>().is_err(), "{bad}");
    }
}
