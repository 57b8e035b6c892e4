//! Coherence and channel-structure metrics relative to a stabilizer code.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::Superoperator;
use crate::code::{StabilizerCode, Syndrome};
use crate::error::{dim_err, Result};
use crate::linalg::{frobenius, trace, vectorize, Matrix, C64};
use crate::weyl::WeylOperator;

/// Coherences of a state between and within the cospaces of a code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    /// Sum over ordered pairs `T != T'` of `||Pi_T rho Pi_T'||_F`.
    pub inter_cospace: f64,
    /// Frobenius norm of the part of `sum_T Pi_T rho Pi_T` removed by
    /// dephasing with the logical Z group.
    pub intra_cospace: f64,
    /// Cospace populations keyed by syndrome dits, e.g. `"1,0"`.
    pub populations: BTreeMap<String, f64>,
}

pub fn syndrome_key(code: &StabilizerCode, index: usize) -> String {
    let s = Syndrome::from_index(index, code.d(), code.stabilizer_generators().len());
    s.dits
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Logical Z group: products of powers of every logical Z generator.
fn logical_z_group(code: &StabilizerCode) -> Vec<WeylOperator> {
    let mut group = vec![WeylOperator::identity(code.d(), code.n())];
    for i in 0..code.k() {
        let z = code.logical_z(i);
        group = group
            .iter()
            .flat_map(|g| (0..code.d()).map(move |p| g.mul(&z.pow(p)).expect("same shape")))
            .collect();
    }
    group
}

pub fn coherence_metrics(rho: &Matrix, code: &StabilizerCode) -> Result<CoherenceReport> {
    let dim = code.dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(dim_err(format!(
            "state is {}x{} but the code space has dimension {dim}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let projectors = (0..code.pure_errors().len())
        .map(|i| code.cospace_projector_by_index(i))
        .collect::<Result<Vec<_>>>()?;
    let mut inter = 0.0;
    let mut diag = Matrix::zeros(dim, dim);
    let mut populations = BTreeMap::new();
    for (i, pi) in projectors.iter().enumerate() {
        let left = pi * rho;
        for (j, pj) in projectors.iter().enumerate() {
            let block = &left * pj;
            if i == j {
                populations.insert(syndrome_key(code, i), trace(&block).re);
                diag += block;
            } else {
                inter += frobenius(&block);
            }
        }
    }
    let zs = logical_z_group(code);
    let mut dephased = Matrix::zeros(dim, dim);
    for z in &zs {
        let zm = z.to_matrix()?;
        dephased += &zm * &diag * zm.adjoint();
    }
    dephased /= C64::new(zs.len() as f64, 0.0);
    Ok(CoherenceReport {
        inter_cospace: inter,
        intra_cospace: frobenius(&(&diag - dephased)),
        populations,
    })
}

/// Operator basis `T W Pi_I T'^dagger` over pure errors `T, T'` and logical
/// Weyls `W`, labelled by their indices.
pub struct CospaceBasis {
    pub elements: Vec<Matrix>,
    pub labels: Vec<(usize, usize, usize)>,
    syndromes: Vec<Vec<u32>>,
    d: u32,
    norm: f64,
}

impl CospaceBasis {
    pub fn new(code: &StabilizerCode) -> Result<Self> {
        let pi = code.codespace_projector()?;
        let errors = code.pure_errors();
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        let mut lw = Vec::new();
        for w in code.logical_group() {
            lw.push(w.to_matrix()? * &pi);
        }
        let tms = errors
            .iter()
            .map(|t| t.to_matrix())
            .collect::<Result<Vec<_>>>()?;
        for (a, t) in tms.iter().enumerate() {
            for (b, t2) in tms.iter().enumerate() {
                for (w, wm) in lw.iter().enumerate() {
                    elements.push(t * wm * t2.adjoint());
                    labels.push((a, b, w));
                }
            }
        }
        let r = code.stabilizer_generators().len();
        let syndromes = (0..errors.len())
            .map(|i| Syndrome::from_index(i, code.d(), r).dits)
            .collect();
        Ok(CospaceBasis {
            elements,
            labels,
            syndromes,
            d: code.d(),
            norm: (code.d() as f64).powi(code.k() as i32),
        })
    }

    /// Transfer matrix `Tr(E_a^dagger L(E_b)) / d^k`.
    pub fn transfer(&self, channel: &Superoperator) -> Matrix {
        let vecs: Vec<_> = self.elements.iter().map(vectorize).collect();
        let images: Vec<_> = vecs.iter().map(|v| channel.matrix() * v).collect();
        Matrix::from_fn(vecs.len(), vecs.len(), |i, j| {
            vecs[i].dotc(&images[j]) / C64::new(self.norm, 0.0)
        })
    }

    fn syndrome_shift(&self, t: usize, t2: usize) -> Vec<u32> {
        self.syndromes[t]
            .iter()
            .zip(&self.syndromes[t2])
            .map(|(a, b)| (a + self.d - b) % self.d)
            .collect()
    }

    fn worst_entry(
        &self,
        channel: &Superoperator,
        allowed: impl Fn(&(usize, usize, usize), &(usize, usize, usize)) -> bool,
    ) -> f64 {
        let r = self.transfer(channel);
        let mut worst: f64 = 0.0;
        for (i, a) in self.labels.iter().enumerate() {
            for (j, b) in self.labels.iter().enumerate() {
                if !allowed(a, b) {
                    worst = worst.max(r[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Largest transfer entry that every stochastic Weyl map must have zero:
    /// one that changes the logical Weyl label or the syndrome difference
    /// between the two cospace indices.
    pub fn offdiagonal(&self, channel: &Superoperator) -> f64 {
        self.worst_entry(channel, |&(t1, t1p, w1), &(t2, t2p, w2)| {
            w1 == w2 && self.syndrome_shift(t1, t1p) == self.syndrome_shift(t2, t2p)
        })
    }

    /// Stricter form for channels that also end with a cospace projection and
    /// act on block-diagonal inputs: only cospace-diagonal entries survive.
    pub fn block_offdiagonal(&self, channel: &Superoperator) -> f64 {
        self.worst_entry(channel, |&(t1, t1p, w1), &(t2, t2p, w2)| {
            t1 == t1p && t2 == t2p && w1 == w2
        })
    }
}

/// Largest off-diagonal entry of the Pauli transfer matrix of a qubit channel
/// in the Hermitian Pauli basis.
pub fn weyl_offdiagonal(channel: &Superoperator, basis: &[WeylOperator]) -> Result<f64> {
    let mats = basis
        .iter()
        .map(|p| p.to_matrix())
        .collect::<Result<Vec<_>>>()?;
    let r = channel.transfer_matrix(&mats);
    let mut worst: f64 = 0.0;
    for i in 0..r.nrows() {
        for j in 0..r.ncols() {
            if i != j {
                worst = worst.max(r[(i, j)].norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::rotation_unitary;
    use crate::code::builtin_code;

    #[test]
    fn logical_zero_is_coherence_free() {
        let code = builtin_code("bitflip3").unwrap();
        let psi = code.logical_basis_state(&[0]).unwrap();
        let r = coherence_metrics(&(&psi * psi.adjoint()), &code).unwrap();
        assert!(r.inter_cospace < 1e-14 && r.intra_cospace < 1e-14);
        assert!((r.populations["0,0"] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overrotated_zero_matches_closed_form() {
        let code = builtin_code("bitflip3").unwrap();
        let u = crate::linalg::kron(
            &rotation_unitary(&WeylOperator::pauli("X").unwrap(), 0.1).unwrap(),
            &Matrix::identity(4, 4),
        );
        let psi = u * code.logical_basis_state(&[0]).unwrap();
        let r = coherence_metrics(&(&psi * psi.adjoint()), &code).unwrap();
        let (c, s) = (0.1f64.cos(), 0.1f64.sin());
        assert!((r.inter_cospace - 2.0 * c * s).abs() < 1e-12);
        // XII anticommutes with ZZI only.
        assert!((r.populations["0,0"] - c * c).abs() < 1e-12);
        assert!((r.populations["1,0"] - s * s).abs() < 1e-12);
        assert!(r.intra_cospace < 1e-12);
    }

    #[test]
    fn logical_superposition_has_intra_coherence() {
        let code = builtin_code("bitflip3").unwrap();
        let psi = (code.logical_basis_state(&[0]).unwrap()
            + code.logical_basis_state(&[1]).unwrap())
            / C64::new(2f64.sqrt(), 0.0);
        let r = coherence_metrics(&(&psi * psi.adjoint()), &code).unwrap();
        assert!(r.inter_cospace < 1e-14);
        // Two off-diagonal entries of magnitude 1/2.
        assert!((r.intra_cospace - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cospace_basis_diagonalizes_weyl_channels() {
        let code = builtin_code("bitflip3").unwrap();
        let basis = CospaceBasis::new(&code).unwrap();
        assert_eq!(basis.elements.len(), 64);
        let ch = Superoperator::from_weyl(&WeylOperator::pauli("XIZ").unwrap()).unwrap();
        assert!(basis.offdiagonal(&ch) < 1e-12);
        // A bare Weyl channel keeps coherence between cospaces.
        assert!(basis.block_offdiagonal(&ch) > 0.5);
        let rot =
            Superoperator::coherent_rotation(&WeylOperator::pauli("XII").unwrap(), 0.2).unwrap();
        assert!(basis.offdiagonal(&rot) > 0.1);
    }
}
