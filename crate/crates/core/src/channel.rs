//! Dense channels in the natural representation `A(M) = conj(M) (x) M`,
//! acting on column-stacked density matrices.

use crate::error::{dim_err, LrcError, Result};
use crate::linalg::{
    c, expm_hermitian, identity, is_hermitian, is_unitary, kron, max_abs_diff, trace, unvectorize,
    vectorize, Matrix, Vector, C64,
};
use crate::weyl::WeylOperator;

/// Largest Hilbert dimension for which superoperators are formed.
pub const MAX_SUPEROP_DIM: usize = 64;

fn check_superop_dim(dim: usize) -> Result<()> {
    if dim > MAX_SUPEROP_DIM {
        return Err(LrcError::Capacity {
            what: "superoperator".into(),
            requested: dim,
            limit: MAX_SUPEROP_DIM,
        });
    }
    Ok(())
}

/// Linear map on `dim x dim` matrices stored as a `dim^2 x dim^2` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: Matrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: Matrix) -> Result<Self> {
        check_superop_dim(dim)?;
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(dim_err(format!(
                "superoperator on dimension {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Superoperator { dim, matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_superop_dim(dim)?;
        Ok(Superoperator {
            dim,
            matrix: identity(dim * dim),
        })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_superop_dim(dim)?;
        Ok(Superoperator {
            dim,
            matrix: Matrix::zeros(dim * dim, dim * dim),
        })
    }

    /// `A(M) = conj(M) (x) M`, so that `vec(M rho M^dagger) = A(M) vec(rho)`.
    pub fn natural_rep(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(dim_err(format!(
                "natural representation of a {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        check_superop_dim(m.nrows())?;
        Ok(Superoperator {
            dim: m.nrows(),
            matrix: kron(&m.conjugate(), m),
        })
    }

    pub fn from_weyl(p: &WeylOperator) -> Result<Self> {
        let dim = (p.d() as usize).pow(p.n() as u32);
        check_superop_dim(dim)?;
        let (perm, phases) = p.action_on_basis();
        let mut m = Matrix::zeros(dim * dim, dim * dim);
        for b in 0..dim {
            for a in 0..dim {
                m[(perm[b] * dim + perm[a], b * dim + a)] = phases[a] * phases[b].conj();
            }
        }
        Ok(Superoperator { dim, matrix: m })
    }

    /// Unitary channel of `exp(-i theta P)` for a Hermitian Weyl operator `P`.
    pub fn coherent_rotation(p: &WeylOperator, theta: f64) -> Result<Self> {
        Self::natural_rep(&rotation_unitary(p, theta)?)
    }

    /// `sum_P p_P A(P)`.
    pub fn stochastic_weyl(terms: &[(WeylOperator, f64)]) -> Result<Self> {
        validate_distribution(terms.iter().map(|t| t.1))?;
        let first = &terms[0].0;
        let dim = (first.d() as usize).pow(first.n() as u32);
        let mut acc = Superoperator::zero(dim)?;
        for (p, prob) in terms {
            if p.d() != first.d() || p.n() != first.n() {
                return Err(dim_err("stochastic Weyl terms act on different registers"));
            }
            acc.matrix += Superoperator::from_weyl(p)?.matrix * c(*prob, 0.0);
        }
        Ok(acc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// `compose(a, b)` applies `b` first, then `a`.
    pub fn compose(&self, first_applied: &Superoperator) -> Result<Superoperator> {
        if self.dim != first_applied.dim {
            return Err(dim_err(format!(
                "composing channels on {} and {}",
                self.dim, first_applied.dim
            )));
        }
        Ok(Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &first_applied.matrix,
        })
    }

    pub fn average(channels: &[Superoperator]) -> Result<Superoperator> {
        let first = channels
            .first()
            .ok_or_else(|| LrcError::Domain("average of an empty channel list".into()))?;
        let mut acc = Matrix::zeros(first.matrix.nrows(), first.matrix.ncols());
        for ch in channels {
            if ch.dim != first.dim {
                return Err(dim_err("averaging channels of different dimension"));
            }
            acc += &ch.matrix;
        }
        Ok(Superoperator {
            dim: first.dim,
            matrix: acc / c(channels.len() as f64, 0.0),
        })
    }

    /// `E_G A(G^dagger) self A(G)` over a list of unitaries.
    pub fn twirl(&self, group: &[Matrix]) -> Result<Superoperator> {
        if group.is_empty() {
            return Err(LrcError::Domain("twirl over an empty group".into()));
        }
        let mut acc = Matrix::zeros(self.matrix.nrows(), self.matrix.ncols());
        for g in group {
            let ag = Superoperator::natural_rep(g)?;
            if ag.dim != self.dim {
                return Err(dim_err("twirl group element has the wrong dimension"));
            }
            let agd = Superoperator::natural_rep(&g.adjoint())?;
            acc += agd.matrix * &self.matrix * ag.matrix;
        }
        Ok(Superoperator {
            dim: self.dim,
            matrix: acc / c(group.len() as f64, 0.0),
        })
    }

    /// Twirl over Weyl operators using their monomial structure:
    /// `[A(P)^dagger L A(P)]_{ij} = conj(a_i) a_j L_{pi(i), pi(j)}`.
    pub fn twirl_weyl(&self, group: &[WeylOperator]) -> Result<Superoperator> {
        if group.is_empty() {
            return Err(LrcError::Domain("twirl over an empty group".into()));
        }
        let dim = self.dim;
        let big = dim * dim;
        let mut acc = Matrix::zeros(big, big);
        for p in group {
            if (p.d() as usize).pow(p.n() as u32) != dim {
                return Err(dim_err("twirl group element has the wrong dimension"));
            }
            let (perm, phases) = p.action_on_basis();
            let mut sp = vec![0usize; big];
            let mut sa = vec![C64::new(0.0, 0.0); big];
            for b in 0..dim {
                for a in 0..dim {
                    sp[b * dim + a] = perm[b] * dim + perm[a];
                    sa[b * dim + a] = phases[a] * phases[b].conj();
                }
            }
            for j in 0..big {
                for i in 0..big {
                    acc[(i, j)] += sa[i].conj() * sa[j] * self.matrix[(sp[i], sp[j])];
                }
            }
        }
        Ok(Superoperator {
            dim,
            matrix: acc / c(group.len() as f64, 0.0),
        })
    }

    /// `Delta = A(U^dagger) Gamma`, so that `compose(A(U), Delta) = Gamma`.
    pub fn factor_noise(gamma: &Superoperator, u: &Matrix) -> Result<Superoperator> {
        if !is_unitary(u, 1e-10) {
            return Err(LrcError::Domain("factor_noise needs a unitary".into()));
        }
        Superoperator::natural_rep(&u.adjoint())?.compose(gamma)
    }

    pub fn apply_matrix(&self, rho: &Matrix) -> Result<Matrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(dim_err(format!(
                "applying a channel on {} to a {}x{} matrix",
                self.dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let out = &self.matrix * vectorize(rho);
        Ok(unvectorize(out.as_slice(), self.dim))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.matrix())?;
        DensityMatrix::from_drifted(out)
    }

    pub fn max_diff(&self, other: &Superoperator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Largest deviation of `Tr(L(E_ab))` from `delta_ab`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let dim = self.dim;
        let mut worst: f64 = 0.0;
        for b in 0..dim {
            for a in 0..dim {
                let col = b * dim + a;
                let tr: C64 = (0..dim).map(|i| self.matrix[(i * dim + i, col)]).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((tr - c(expected, 0.0)).norm());
            }
        }
        worst
    }

    /// Choi matrix `sum_ab |a><b| (x) L(|a><b|)`.
    pub fn choi(&self) -> Matrix {
        let dim = self.dim;
        let mut out = Matrix::zeros(dim * dim, dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let col = b * dim + a;
                for j in 0..dim {
                    for i in 0..dim {
                        out[(a * dim + i, b * dim + j)] = self.matrix[(j * dim + i, col)];
                    }
                }
            }
        }
        out
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        let choi = self.choi();
        let herm = (&choi + choi.adjoint()) * c(0.5, 0.0);
        herm.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.trace_preservation_defect() < tol && self.choi_min_eigenvalue() > -tol
    }

    /// Transfer matrix `R[P, Q] = Tr(P^dagger L(Q)) / D` in the given operator basis.
    pub fn transfer_matrix(&self, basis: &[Matrix]) -> Matrix {
        let norm = self.dim as f64;
        let vecs: Vec<Vector> = basis.iter().map(vectorize).collect();
        let images: Vec<Vector> = vecs.iter().map(|v| &self.matrix * v).collect();
        Matrix::from_fn(basis.len(), basis.len(), |i, j| {
            vecs[i].dotc(&images[j]) / c(norm, 0.0)
        })
    }

    /// Weyl error rates `p_P = Tr(A(P)^dagger L) / D^2` for the listed operators.
    pub fn weyl_error_rates(&self, ops: &[WeylOperator]) -> Result<Vec<f64>> {
        let big = (self.dim * self.dim) as f64;
        ops.iter()
            .map(|p| {
                let ap = Superoperator::from_weyl(p)?;
                let overlap: C64 = ap
                    .matrix
                    .iter()
                    .zip(self.matrix.iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                Ok(overlap.re / big)
            })
            .collect()
    }
}

/// `exp(-i theta P)` for a Weyl operator that is Hermitian as a matrix.
pub fn rotation_unitary(p: &WeylOperator, theta: f64) -> Result<Matrix> {
    let m = p.to_matrix()?;
    if !is_hermitian(&m, 1e-12) {
        return Err(LrcError::Domain(format!(
            "{p} is not Hermitian; rotation needs P = P^dagger"
        )));
    }
    Ok(expm_hermitian(&m, theta))
}

pub(crate) fn validate_distribution(probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for p in probs {
        if !p.is_finite() || p < 0.0 {
            return Err(LrcError::Distribution(format!(
                "probability {p} is not a nonnegative number"
            )));
        }
        total += p;
        count += 1;
    }
    if count == 0 {
        return Err(LrcError::Distribution("empty distribution".into()));
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(LrcError::Distribution(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Density matrix with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Matrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity (-1e-10).
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !is_hermitian(&matrix, 1e-12) {
            return Err(LrcError::NonPhysical("matrix is not Hermitian".into()));
        }
        let tr = trace(&matrix);
        if (tr - c(1.0, 0.0)).norm() > 1e-12 {
            return Err(LrcError::NonPhysical(format!("trace is {tr}")));
        }
        let min = matrix.clone().symmetric_eigen().eigenvalues.min();
        if min < -1e-10 {
            return Err(LrcError::NonPhysical(format!("negative eigenvalue {min}")));
        }
        Ok(DensityMatrix { matrix })
    }

    /// Symmetrize small Hermiticity drift (< 1e-10) left by floating point.
    pub fn from_drifted(matrix: Matrix) -> Result<Self> {
        let drift = max_abs_diff(&matrix, &matrix.adjoint());
        if drift > 1e-10 {
            return Err(LrcError::NonPhysical(format!("Hermiticity drift {drift}")));
        }
        let sym = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        let tr = trace(&sym);
        if (tr.re - 1.0).abs() > 1e-10 {
            return Err(LrcError::NonPhysical(format!("trace is {tr}")));
        }
        Ok(DensityMatrix { matrix: sym })
    }

    pub fn pure(psi: &Vector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(LrcError::NonPhysical(format!(
                "state vector has norm {norm}"
            )));
        }
        Ok(DensityMatrix {
            matrix: psi * psi.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, psi: &Vector) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli(s: &str) -> WeylOperator {
        WeylOperator::pauli(s).unwrap()
    }

    fn ket_bra(dim: usize, a: usize, b: usize) -> Matrix {
        let mut m = Matrix::zeros(dim, dim);
        m[(a, b)] = c(1.0, 0.0);
        m
    }

    fn conj_oracle(u: &Matrix, rho: &Matrix) -> Matrix {
        u * rho * u.adjoint()
    }

    #[test]
    fn natural_rep_matches_conjugation() {
        let z = pauli("Z").to_matrix().unwrap();
        let az = Superoperator::natural_rep(&z).unwrap();
        let rho = ket_bra(2, 0, 1);
        assert!(
            max_abs_diff(
                &az.apply_matrix(&rho).unwrap(),
                &(rho.clone() * c(-1.0, 0.0))
            ) < 1e-14
        );
        let x = pauli("X").to_matrix().unwrap();
        let ax = Superoperator::natural_rep(&x).unwrap();
        assert!(
            max_abs_diff(
                &ax.apply_matrix(&ket_bra(2, 0, 0)).unwrap(),
                &ket_bra(2, 1, 1)
            ) < 1e-14
        );
        let id = Superoperator::natural_rep(&identity(3)).unwrap();
        assert!(id.max_diff(&Superoperator::identity(3).unwrap()) < 1e-15);
    }

    #[test]
    fn weyl_superop_matches_natural_rep() {
        for label in ["X", "Y", "Z", "XZY"] {
            let p = pauli(label);
            let a = Superoperator::from_weyl(&p).unwrap();
            let b = Superoperator::natural_rep(&p.to_matrix().unwrap()).unwrap();
            assert!(a.max_diff(&b) < 1e-14);
        }
        let q: WeylOperator = "1;1,2;0,1;3".parse().unwrap();
        let a = Superoperator::from_weyl(&q).unwrap();
        let b = Superoperator::natural_rep(&q.to_matrix().unwrap()).unwrap();
        assert!(a.max_diff(&b) < 1e-14);
    }

    #[test]
    fn coherent_rotation_examples() {
        let x = pauli("X");
        let r0 = Superoperator::coherent_rotation(&x, 0.0).unwrap();
        assert!(r0.max_diff(&Superoperator::identity(2).unwrap()) < 1e-15);
        let half_pi = Superoperator::coherent_rotation(&x, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(half_pi.max_diff(&Superoperator::from_weyl(&x).unwrap()) < 1e-14);
        let xii = pauli("XII");
        let r = Superoperator::coherent_rotation(&xii, 0.1).unwrap();
        let u =
            identity(8) * c(0.1f64.cos(), 0.0) - xii.to_matrix().unwrap() * c(0.0, 0.1f64.sin());
        assert!(r.max_diff(&Superoperator::natural_rep(&u).unwrap()) < 1e-14);
        let xz: WeylOperator = "0;1;1;2".parse().unwrap();
        assert!(matches!(
            Superoperator::coherent_rotation(&xz, 0.1),
            Err(LrcError::Domain(_))
        ));
    }

    #[test]
    fn stochastic_weyl_examples() {
        let flip = Superoperator::stochastic_weyl(&[(pauli("I"), 0.9), (pauli("X"), 0.1)]).unwrap();
        let out = flip.apply_matrix(&ket_bra(2, 0, 0)).unwrap();
        assert!((out[(0, 0)].re - 0.9).abs() < 1e-14 && (out[(1, 1)].re - 0.1).abs() < 1e-14);
        let dep = Superoperator::stochastic_weyl(&[
            (pauli("I"), 0.25),
            (pauli("X"), 0.25),
            (pauli("Y"), 0.25),
            (pauli("Z"), 0.25),
        ])
        .unwrap();
        let basis: Vec<Matrix> = ["I", "X", "Y", "Z"]
            .iter()
            .map(|l| pauli(l).to_matrix().unwrap())
            .collect();
        let ptm = dep.transfer_matrix(&basis);
        let mut expected = Matrix::zeros(4, 4);
        expected[(0, 0)] = c(1.0, 0.0);
        assert!(max_abs_diff(&ptm, &expected) < 1e-14);
        assert!(matches!(
            Superoperator::stochastic_weyl(&[(pauli("I"), 0.5)]),
            Err(LrcError::Distribution(_))
        ));
    }

    #[test]
    fn compose_order() {
        let ax = Superoperator::from_weyl(&pauli("X")).unwrap();
        let az = Superoperator::from_weyl(&pauli("Z")).unwrap();
        assert!(
            ax.compose(&ax)
                .unwrap()
                .max_diff(&Superoperator::identity(2).unwrap())
                < 1e-15
        );
        let plus = Matrix::from_element(2, 2, c(0.5, 0.0));
        let zx = pauli("Z").to_matrix().unwrap() * pauli("X").to_matrix().unwrap();
        let via = az.compose(&ax).unwrap().apply_matrix(&plus).unwrap();
        assert!(max_abs_diff(&via, &conj_oracle(&zx, &plus)) < 1e-14);
        // Non-commuting pair: the order is visible.
        let h = crate::linalg::dft(2);
        let ah = Superoperator::natural_rep(&h).unwrap();
        let rho = ket_bra(2, 0, 0);
        let hx = &h * pauli("X").to_matrix().unwrap();
        assert!(
            max_abs_diff(
                &ah.compose(&ax).unwrap().apply_matrix(&rho).unwrap(),
                &conj_oracle(&hx, &rho)
            ) < 1e-14
        );
    }

    #[test]
    fn average_dephases() {
        let deph = Superoperator::average(&[
            Superoperator::from_weyl(&pauli("I")).unwrap(),
            Superoperator::from_weyl(&pauli("Z")).unwrap(),
        ])
        .unwrap();
        let plus = Matrix::from_element(2, 2, c(0.5, 0.0));
        let out = deph.apply_matrix(&plus).unwrap();
        assert!(out[(0, 1)].norm() < 1e-15 && (out[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(Superoperator::average(&[]).is_err());
    }

    #[test]
    fn twirl_paths_agree_and_diagonalize() {
        let noise = Superoperator::coherent_rotation(&pauli("Z"), 0.1).unwrap();
        let paulis: Vec<WeylOperator> = ["I", "X", "Y", "Z"].iter().map(|l| pauli(l)).collect();
        let mats: Vec<Matrix> = paulis.iter().map(|p| p.to_matrix().unwrap()).collect();
        let a = noise.twirl_weyl(&paulis).unwrap();
        let b = noise.twirl(&mats).unwrap();
        assert!(a.max_diff(&b) < 1e-14);
        let ptm = a.transfer_matrix(&mats);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(ptm[(i, j)].norm() < 1e-12);
                }
            }
        }
        let trivial = noise.twirl(&[identity(2)]).unwrap();
        assert!(trivial.max_diff(&noise) < 1e-15);
    }

    #[test]
    fn factor_noise_examples() {
        let x = pauli("X").to_matrix().unwrap();
        let gamma =
            Superoperator::coherent_rotation(&pauli("X"), std::f64::consts::FRAC_PI_2 + 0.05)
                .unwrap();
        let delta = Superoperator::factor_noise(&gamma, &x).unwrap();
        let expected = Superoperator::coherent_rotation(&pauli("X"), 0.05).unwrap();
        assert!(delta.max_diff(&expected) < 1e-14);
        let ax = Superoperator::natural_rep(&x).unwrap();
        assert!(ax.compose(&delta).unwrap().max_diff(&gamma) < 1e-14);
        assert!(Superoperator::factor_noise(&gamma, &(x * c(2.0, 0.0))).is_err());
    }

    #[test]
    fn cptp_diagnostics() {
        let ch = Superoperator::coherent_rotation(&pauli("Y"), 0.3).unwrap();
        assert!(ch.is_cptp(1e-10));
        let transpose = Superoperator::from_matrix(
            2,
            Matrix::from_fn(4, 4, |i, j| {
                let (a, b) = (j % 2, j / 2);
                if i == a * 2 + b {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            }),
        )
        .unwrap();
        assert!(transpose.trace_preservation_defect() < 1e-15);
        assert!(transpose.choi_min_eigenvalue() < -0.5);
    }

    #[test]
    fn rotation_on_encoded_zero_populates_cospace() {
        let code = crate::code::builtin_code("bitflip3").unwrap();
        let psi = code.logical_basis_state(&[0]).unwrap();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let out = Superoperator::coherent_rotation(&pauli("XII"), 0.1)
            .unwrap()
            .apply(&rho)
            .unwrap();
        let p0 = trace(&(code.codespace_projector().unwrap() * out.matrix())).re;
        let p1 = trace(&(code.cospace_projector(&pauli("IXX")).unwrap() * out.matrix())).re;
        assert!((p0 - 0.1f64.cos().powi(2)).abs() < 1e-12);
        assert!((p1 - 0.1f64.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn capacity_enforced() {
        assert!(matches!(
            Superoperator::identity(65),
            Err(LrcError::Capacity { .. })
        ));
    }
}
