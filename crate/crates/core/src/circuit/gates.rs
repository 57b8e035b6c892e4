//! Named gates used by `gates` realizations.

use std::f64::consts::FRAC_PI_4;

use crate::error::{LrcError, Result};
use crate::linalg::{dft, root_of_unity, Matrix, C64};

/// Number of qudits the named gate acts on.
pub fn gate_arity(name: &str) -> Option<usize> {
    match name {
        "x" | "z" | "y" | "h" | "f" | "fdg" | "s" | "sdg" | "t" | "tdg" => Some(1),
        "cx" | "swap" => Some(2),
        "ccx" => Some(3),
        _ => None,
    }
}

fn qubit_only(name: &str, d: u32) -> Result<()> {
    if d != 2 {
        return Err(LrcError::Circuit(format!(
            "gate `{name}` is only defined for qubits"
        )));
    }
    Ok(())
}

fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    for j in 0..dim {
        m[(f(j), j)] = C64::new(1.0, 0.0);
    }
    m
}

/// Matrix of a named gate. `cx` is the qudit SUM gate `|a,b> -> |a, b+a>` and
/// `ccx` maps `|a,b,c> -> |a,b,c+ab>`.
pub fn gate_matrix(name: &str, d: u32) -> Result<Matrix> {
    let du = d as usize;
    let m = match name {
        "x" => permutation(du, |j| (j + 1) % du),
        "z" => Matrix::from_fn(du, du, |i, j| {
            if i == j {
                root_of_unity(2 * i as u32, d)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        "f" | "h" => {
            if name == "h" {
                qubit_only(name, d)?;
            }
            dft(du)
        }
        "fdg" => dft(du).adjoint(),
        "y" => {
            qubit_only(name, d)?;
            Matrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(0., 0.),
                    C64::new(0., -1.),
                    C64::new(0., 1.),
                    C64::new(0., 0.),
                ],
            )
        }
        "s" | "sdg" | "t" | "tdg" => {
            qubit_only(name, d)?;
            let angle = match name {
                "s" => 2.0 * FRAC_PI_4,
                "sdg" => -2.0 * FRAC_PI_4,
                "t" => FRAC_PI_4,
                _ => -FRAC_PI_4,
            };
            let mut m = Matrix::identity(2, 2);
            m[(1, 1)] = C64::from_polar(1.0, angle);
            m
        }
        "cx" => permutation(du * du, |j| {
            let (a, b) = (j / du, j % du);
            a * du + (a + b) % du
        }),
        "swap" => permutation(du * du, |j| {
            let (a, b) = (j / du, j % du);
            b * du + a
        }),
        "ccx" => permutation(du * du * du, |j| {
            let (a, b, c) = (j / (du * du), (j / du) % du, j % du);
            (a * du + b) * du + (c + a * b) % du
        }),
        other => return Err(LrcError::Circuit(format!("unknown gate `{other}`"))),
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_unitary, max_abs_diff};
    use crate::weyl::WeylOperator;

    #[test]
    fn gates_are_unitary() {
        for d in [2u32, 3] {
            for g in ["x", "z", "f", "fdg", "cx", "swap", "ccx"] {
                assert!(is_unitary(&gate_matrix(g, d).unwrap(), 1e-12), "{g} d={d}");
            }
        }
        for g in ["h", "y", "s", "sdg", "t", "tdg"] {
            assert!(is_unitary(&gate_matrix(g, 2).unwrap(), 1e-12));
            assert!(gate_matrix(g, 3).is_err());
        }
    }

    #[test]
    fn x_and_z_match_weyl() {
        for d in [2u32, 3, 5] {
            let x = WeylOperator::x_at(d, 1, 0).to_matrix().unwrap();
            let z = WeylOperator::z_at(d, 1, 0).to_matrix().unwrap();
            assert!(max_abs_diff(&gate_matrix("x", d).unwrap(), &x) < 1e-14);
            assert!(max_abs_diff(&gate_matrix("z", d).unwrap(), &z) < 1e-14);
        }
    }

    #[test]
    fn toffoli_flips_target_only_on_11() {
        let m = gate_matrix("ccx", 2).unwrap();
        assert_eq!(m[(7, 6)], C64::new(1.0, 0.0));
        assert_eq!(m[(5, 5)], C64::new(1.0, 0.0));
    }
}
