//! Exact algebra of phased n-qudit Weyl operators `w^e X^x Z^z`.
//!
//! Phases live in the 2d-th roots of unity: `phase_exp = e` means a global
//! factor `exp(i pi e / d)`. All multiplication, inversion and braiding is
//! done in integer exponent arithmetic; matrices are only built on request.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dim_err, LrcError, Result};
use crate::linalg::{check_dense, root_of_unity, Matrix, C64};

/// Element of the cyclic group of 2d-th roots of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootPhase {
    d: u32,
    exp: u32,
}

impl RootPhase {
    pub fn new(d: u32, exp: i64) -> Self {
        let m = 2 * i64::from(d);
        RootPhase {
            d,
            exp: exp.rem_euclid(m) as u32,
        }
    }

    pub fn one(d: u32) -> Self {
        RootPhase { d, exp: 0 }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Exponent in `[0, 2d)`.
    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// Exponent in units of `2 pi / d`, when the phase is a d-th root of unity.
    pub fn dit(&self) -> Option<u32> {
        self.exp.is_multiple_of(2).then_some(self.exp / 2)
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0
    }

    pub fn mul(&self, other: &RootPhase) -> RootPhase {
        assert_eq!(self.d, other.d, "phase dimension mismatch");
        RootPhase::new(self.d, i64::from(self.exp) + i64::from(other.exp))
    }

    pub fn conj(&self) -> RootPhase {
        RootPhase::new(self.d, -i64::from(self.exp))
    }

    pub fn value(&self) -> C64 {
        root_of_unity(self.exp, self.d)
    }
}

/// Character `chi_a(b) = exp(2 pi i a.b / d)` as a root phase.
pub fn chi(a: &[u32], b: &[u32], d: u32) -> Result<RootPhase> {
    if a.len() != b.len() {
        return Err(dim_err(format!(
            "chi arguments have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(RootPhase::new(d, 2 * dot_mod(a, b, d)))
}

fn dot_mod(a: &[u32], b: &[u32], d: u32) -> i64 {
    let s: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| u64::from(x) * u64::from(y))
        .sum();
    (s % u64::from(d)) as i64
}

/// Phased Weyl operator `exp(i pi phase/d) X^x Z^z` on `n` qudits of dimension `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylOperator {
    d: u32,
    phase: u32,
    x: Vec<u32>,
    z: Vec<u32>,
}

impl WeylOperator {
    pub fn new(d: u32, x: Vec<u32>, z: Vec<u32>, phase_exp: i64) -> Result<Self> {
        if d < 2 {
            return Err(LrcError::Domain(format!(
                "qudit dimension must be >= 2, got {d}"
            )));
        }
        if x.is_empty() {
            return Err(LrcError::Domain(
                "Weyl operator needs at least one qudit".into(),
            ));
        }
        if x.len() != z.len() {
            return Err(dim_err(format!(
                "x has {} entries but z has {}",
                x.len(),
                z.len()
            )));
        }
        let x = x.into_iter().map(|v| v % d).collect();
        let z = z.into_iter().map(|v| v % d).collect();
        Ok(WeylOperator {
            d,
            phase: RootPhase::new(d, phase_exp).exp,
            x,
            z,
        })
    }

    pub fn identity(d: u32, n: usize) -> Self {
        WeylOperator {
            d,
            phase: 0,
            x: vec![0; n],
            z: vec![0; n],
        }
    }

    /// `X` on a single site of an n-qudit register.
    pub fn x_at(d: u32, n: usize, site: usize) -> Self {
        let mut op = Self::identity(d, n);
        op.x[site] = 1;
        op
    }

    /// `Z` on a single site of an n-qudit register.
    pub fn z_at(d: u32, n: usize, site: usize) -> Self {
        let mut op = Self::identity(d, n);
        op.z[site] = 1;
        op
    }

    /// Qubit operator from a Pauli label such as `"XZZXI"` (optionally prefixed
    /// by `+`, `-`, `i`, `-i`). `Y = i X Z` is the usual Pauli Y matrix.
    pub fn pauli(label: &str) -> Result<Self> {
        let (mut phase, body) = if let Some(rest) = label.strip_prefix("-i") {
            (3i64, rest)
        } else if let Some(rest) = label.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = label.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = label.strip_prefix('+') {
            (0, rest)
        } else {
            (0, label)
        };
        let mut x = Vec::with_capacity(body.len());
        let mut z = Vec::with_capacity(body.len());
        for ch in body.chars() {
            let (xv, zv) = match ch {
                'I' => (0, 0),
                'X' => (1, 0),
                'Z' => (0, 1),
                'Y' => {
                    phase += 1;
                    (1, 1)
                }
                other => return Err(LrcError::Parse(format!("bad Pauli letter `{other}`"))),
            };
            x.push(xv);
            z.push(zv);
        }
        Self::new(2, x, z, phase)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn phase_exp(&self) -> u32 {
        self.phase
    }

    pub fn phase(&self) -> RootPhase {
        RootPhase {
            d: self.d,
            exp: self.phase,
        }
    }

    /// True when the phase-stripped operator is the identity.
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.is_identity_up_to_phase()
    }

    /// Number of sites on which the operator acts non-trivially.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .filter(|(a, b)| **a != 0 || **b != 0)
            .count()
    }

    pub fn with_phase(&self, phase_exp: i64) -> Self {
        let mut op = self.clone();
        op.phase = RootPhase::new(self.d, phase_exp).exp;
        op
    }

    pub fn strip_phase(&self) -> Self {
        self.with_phase(0)
    }

    fn check_compatible(&self, other: &WeylOperator) -> Result<()> {
        if self.d != other.d {
            return Err(dim_err(format!(
                "qudit dimensions {} and {}",
                self.d, other.d
            )));
        }
        if self.n() != other.n() {
            return Err(dim_err(format!(
                "qudit counts {} and {}",
                self.n(),
                other.n()
            )));
        }
        Ok(())
    }

    /// Operator product `self * other` (so `other` acts first on a state).
    pub fn mul(&self, other: &WeylOperator) -> Result<WeylOperator> {
        self.check_compatible(other)?;
        let d = self.d;
        // X^a Z^b X^c Z^e = chi_c(b) X^{a+c} Z^{b+e}
        let cross = dot_mod(&other.x, &self.z, d);
        let x = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a + b) % d)
            .collect();
        let z = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| (a + b) % d)
            .collect();
        let phase = i64::from(self.phase) + i64::from(other.phase) + 2 * cross;
        Ok(WeylOperator {
            d,
            phase: RootPhase::new(d, phase).exp,
            x,
            z,
        })
    }

    pub fn dagger(&self) -> WeylOperator {
        let d = self.d;
        // (X^x Z^z)^dagger = Z^{-z} X^{-x} = chi_x(z) X^{-x} Z^{-z}
        let cross = dot_mod(&self.x, &self.z, d);
        let x = self.x.iter().map(|v| (d - v) % d).collect();
        let z = self.z.iter().map(|v| (d - v) % d).collect();
        WeylOperator {
            d,
            phase: RootPhase::new(d, -i64::from(self.phase) + 2 * cross).exp,
            x,
            z,
        }
    }

    pub fn pow(&self, k: u32) -> WeylOperator {
        let mut acc = WeylOperator::identity(self.d, self.n());
        for _ in 0..k {
            acc = acc.mul(self).expect("same shape");
        }
        acc
    }

    /// Phase `b` with `P Q P^dagger = b^* Q`. The exponent is
    /// `x(P).z(Q) - x(Q).z(P)` in units of `2 pi / d`.
    pub fn braiding_phase(&self, other: &WeylOperator) -> Result<RootPhase> {
        self.check_compatible(other)?;
        let d = self.d;
        let e = dot_mod(&self.x, &other.z, d) - dot_mod(&other.x, &self.z, d);
        Ok(RootPhase::new(d, 2 * e))
    }

    /// Braiding exponent in `Z_d`.
    pub fn braiding_dit(&self, other: &WeylOperator) -> Result<u32> {
        Ok(self.braiding_phase(other)?.exp / 2)
    }

    pub fn commutes_with(&self, other: &WeylOperator) -> Result<bool> {
        Ok(self.braiding_phase(other)?.is_one())
    }

    /// `self (x) other`, concatenating the site vectors.
    pub fn tensor(&self, other: &WeylOperator) -> Result<WeylOperator> {
        if self.d != other.d {
            return Err(dim_err(format!(
                "qudit dimensions {} and {}",
                self.d, other.d
            )));
        }
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        Ok(WeylOperator {
            d: self.d,
            phase: RootPhase::new(self.d, i64::from(self.phase) + i64::from(other.phase)).exp,
            x,
            z,
        })
    }

    /// Place this operator on `sites` of an `n_total`-qudit register.
    pub fn embed(&self, sites: &[usize], n_total: usize) -> Result<WeylOperator> {
        if sites.len() != self.n() {
            return Err(dim_err(format!(
                "embedding {} sites into {} positions",
                self.n(),
                sites.len()
            )));
        }
        let mut out = WeylOperator::identity(self.d, n_total);
        for (i, &s) in sites.iter().enumerate() {
            if s >= n_total {
                return Err(dim_err(format!("site {s} outside register of {n_total}")));
            }
            out.x[s] = self.x[i];
            out.z[s] = self.z[i];
        }
        out.phase = self.phase;
        Ok(out)
    }

    /// Restriction to `sites` (phase kept).
    pub fn restrict(&self, sites: &[usize]) -> WeylOperator {
        WeylOperator {
            d: self.d,
            phase: self.phase,
            x: sites.iter().map(|&s| self.x[s]).collect(),
            z: sites.iter().map(|&s| self.z[s]).collect(),
        }
    }

    /// Global index permutation and phase: `P|j> = phase(j) |perm(j)>`.
    pub(crate) fn action_on_basis(&self) -> (Vec<usize>, Vec<C64>) {
        let d = self.d as usize;
        let n = self.n();
        let dim = d.pow(n as u32);
        let global = self.phase().value();
        let mut perm = vec![0usize; dim];
        let mut phases = vec![C64::new(0.0, 0.0); dim];
        let mut digits = vec![0usize; n];
        for (j, (p_slot, ph_slot)) in perm.iter_mut().zip(phases.iter_mut()).enumerate() {
            let mut rem = j;
            for q in (0..n).rev() {
                digits[q] = rem % d;
                rem /= d;
            }
            let mut e = 0usize;
            let mut target = 0usize;
            for ((&digit, &z), &x) in digits.iter().zip(&self.z).zip(&self.x) {
                e += z as usize * digit;
                target = target * d + (digit + x as usize) % d;
            }
            *p_slot = target;
            *ph_slot = global * root_of_unity(2 * (e % d) as u32, self.d);
        }
        (perm, phases)
    }

    /// Dense matrix `exp(i pi e/d) X^x Z^z` with `X^x Z^z |j> = chi_z(j) |j + x>`.
    pub fn to_matrix(&self) -> Result<Matrix> {
        let d = self.d as usize;
        let dim = d.checked_pow(self.n() as u32).unwrap_or(usize::MAX);
        check_dense("Weyl operator matrix", dim)?;
        let (perm, phases) = self.action_on_basis();
        let mut m = Matrix::zeros(dim, dim);
        for j in 0..dim {
            m[(perm[j], j)] = phases[j];
        }
        Ok(m)
    }

    /// Identify a dense matrix as a Weyl operator up to a global phase.
    /// Returns the operator (phase snapped to the nearest 2d-th root) and the
    /// residual unit factor `m = residual * to_matrix(op)`.
    pub fn from_matrix_projective(
        m: &Matrix,
        d: u32,
        n: usize,
        tol: f64,
    ) -> Option<(WeylOperator, C64)> {
        let du = d as usize;
        let dim = du.pow(n as u32);
        if m.nrows() != dim || m.ncols() != dim {
            return None;
        }
        let col0 = m.column(0);
        let (x_index, lead) = col0
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
        if (lead.norm() - 1.0).abs() > tol {
            return None;
        }
        let mut x = vec![0u32; n];
        let mut rem = x_index;
        for q in (0..n).rev() {
            x[q] = (rem % du) as u32;
            rem /= du;
        }
        let mut z = vec![0u32; n];
        let omega_angle = 2.0 * std::f64::consts::PI / f64::from(d);
        for q in 0..n {
            let basis = du.pow((n - 1 - q) as u32);
            let target_digit = ((x[q] as usize + 1) % du) as usize;
            let target = x_index - (x[q] as usize) * basis + target_digit * basis;
            let ratio = m[(target, basis)] / lead;
            let k = (ratio.arg() / omega_angle).round().rem_euclid(f64::from(d)) as u32;
            z[q] = k;
        }
        let bare = WeylOperator::new(d, x, z, 0).ok()?;
        let e = (lead.arg() / (std::f64::consts::PI / f64::from(d))).round() as i64;
        let op = bare.with_phase(e);
        let candidate = op.to_matrix().ok()?;
        let residual = lead / op.phase().value();
        let diff = crate::linalg::max_abs_diff(m, &(candidate * residual));
        (diff < tol).then_some((op, residual))
    }

    /// Text form `phase_exp;x0,x1,...;z0,z1,...;d`.
    pub fn to_text(&self) -> String {
        let join = |v: &[u32]| {
            v.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{};{};{};{}",
            self.phase,
            join(&self.x),
            join(&self.z),
            self.d
        )
    }

    /// Compact label for qubit operators (`XZI`), falling back to the text form.
    pub fn label(&self) -> String {
        if self.d != 2 {
            return self.to_text();
        }
        let letters: String = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| match (a, b) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect();
        let ys = letters.chars().filter(|&ch| ch == 'Y').count() as u32;
        let prefix = ["", "i", "-", "-i"][((self.phase + 4 - ys % 4) % 4) as usize];
        format!("{prefix}{letters}")
    }
}

impl fmt::Display for WeylOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for WeylOperator {
    type Err = LrcError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(';').collect();
        if parts.len() != 4 {
            return Err(LrcError::Parse(format!(
                "expected `phase;x;z;d`, got `{s}`"
            )));
        }
        let int = |t: &str| -> Result<u32> {
            t.trim()
                .parse::<u32>()
                .map_err(|e| LrcError::Parse(format!("`{t}` in `{s}`: {e}")))
        };
        let list = |t: &str| -> Result<Vec<u32>> { t.split(',').map(int).collect() };
        let phase = int(parts[0])?;
        let x = list(parts[1])?;
        let z = list(parts[2])?;
        let d = int(parts[3])?;
        if x.iter().chain(&z).any(|&v| d >= 2 && v >= d) || (d >= 2 && phase >= 2 * d) {
            return Err(LrcError::Parse(format!("entries out of range in `{s}`")));
        }
        WeylOperator::new(d, x, z, i64::from(phase))
    }
}

impl Serialize for WeylOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for WeylOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All `d^(2n)` phase-free Weyl operators, ordered by weight then `(x, z)`.
pub fn all_weyls_by_weight(d: u32, n: usize) -> Vec<WeylOperator> {
    let du = d as usize;
    let count = du.pow(2 * n as u32);
    let mut ops: Vec<WeylOperator> = (0..count)
        .map(|idx| {
            let mut rem = idx;
            let mut digits = vec![0u32; 2 * n];
            for slot in digits.iter_mut().rev() {
                *slot = (rem % du) as u32;
                rem /= du;
            }
            let (x, z) = digits.split_at(n);
            WeylOperator::new(d, x.to_vec(), z.to_vec(), 0).expect("valid")
        })
        .collect();
    ops.sort_by(|a, b| {
        a.weight()
            .cmp(&b.weight())
            .then_with(|| a.x.cmp(&b.x))
            .then_with(|| a.z.cmp(&b.z))
    });
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, max_abs_diff};

    fn w(s: &str) -> WeylOperator {
        s.parse().unwrap()
    }

    #[test]
    fn chi_examples() {
        assert!(chi(&[0, 0, 0], &[1, 2, 1], 3).unwrap().is_one());
        let minus_one = chi(&[1], &[1], 2).unwrap();
        assert!((minus_one.value() - c(-1.0, 0.0)).norm() < 1e-14);
        // 1*2 + 2*2 = 6 = 0 mod 3
        assert!(chi(&[1, 2], &[2, 2], 3).unwrap().is_one());
        assert!(matches!(chi(&[1], &[1, 0], 2), Err(LrcError::Dimension(_))));
    }

    #[test]
    fn root_phase_matches_complex_value() {
        for d in 2..7u32 {
            for a in 0..2 * d {
                for b in 0..2 * d {
                    let p = RootPhase::new(d, a.into());
                    let q = RootPhase::new(d, b.into());
                    let prod = p.mul(&q).value();
                    assert!((prod - p.value() * q.value()).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pauli_matrices() {
        let x = WeylOperator::pauli("X").unwrap().to_matrix().unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert!(max_abs_diff(&x, &expected) < 1e-15);
        let y = WeylOperator::pauli("Y").unwrap().to_matrix().unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        assert!(max_abs_diff(&y, &expected) < 1e-15);
        let id = WeylOperator::identity(2, 1).to_matrix().unwrap();
        assert!(max_abs_diff(&id, &Matrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn qutrit_z_is_diagonal_roots() {
        let z = WeylOperator::z_at(3, 1, 0).to_matrix().unwrap();
        let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        for j in 0..3 {
            assert!((z[(j, j)] - omega.powu(j as u32)).norm() < 1e-14);
        }
    }

    #[test]
    fn z_times_x_carries_minus_sign_for_qubits() {
        let x = WeylOperator::pauli("X").unwrap();
        let z = WeylOperator::pauli("Z").unwrap();
        let zx = z.mul(&x).unwrap();
        let xz = x.mul(&z).unwrap();
        assert_eq!(zx.x(), &[1]);
        assert_eq!(zx.z(), &[1]);
        assert_eq!(xz.phase_exp(), 0);
        assert_eq!(zx.phase_exp(), 2);
        let dense = z.to_matrix().unwrap() * x.to_matrix().unwrap();
        assert!(max_abs_diff(&dense, &zx.to_matrix().unwrap()) < 1e-15);
    }

    #[test]
    fn triple_product_matches_dense() {
        let x = WeylOperator::pauli("X").unwrap();
        let z = WeylOperator::pauli("Z").unwrap();
        let p = x.mul(&z.mul(&x).unwrap()).unwrap();
        let dense = x.to_matrix().unwrap() * z.to_matrix().unwrap() * x.to_matrix().unwrap();
        assert!(max_abs_diff(&dense, &p.to_matrix().unwrap()) < 1e-15);
    }

    #[test]
    fn dagger_examples() {
        assert!(WeylOperator::identity(2, 3).dagger().is_identity());
        let x = WeylOperator::pauli("X").unwrap();
        assert_eq!(x.dagger(), x);
        let p = w("3;1,2;2,1;3");
        let prod = p.mul(&p.dagger()).unwrap();
        assert!(prod.is_identity());
    }

    #[test]
    fn braiding_examples() {
        let x = WeylOperator::pauli("X").unwrap();
        let z = WeylOperator::pauli("Z").unwrap();
        assert!(x.braiding_phase(&x).unwrap().is_one());
        assert_eq!(x.braiding_phase(&z).unwrap().exp(), 2);
        assert!(matches!(
            x.braiding_phase(&WeylOperator::pauli("XX").unwrap()),
            Err(LrcError::Dimension(_))
        ));
    }

    #[test]
    fn tensor_examples() {
        let i = WeylOperator::identity(2, 1);
        assert_eq!(i.tensor(&i).unwrap(), WeylOperator::identity(2, 2));
        let x = WeylOperator::pauli("X").unwrap();
        let z = WeylOperator::pauli("Z").unwrap();
        let xz = x.tensor(&z).unwrap();
        let dense = kron(&x.to_matrix().unwrap(), &z.to_matrix().unwrap());
        assert!(max_abs_diff(&dense, &xz.to_matrix().unwrap()) < 1e-15);
        let zzi = z.tensor(&z.tensor(&i).unwrap()).unwrap();
        assert_eq!(zzi, WeylOperator::pauli("ZZI").unwrap());
        assert!(matches!(
            x.tensor(&WeylOperator::x_at(3, 1, 0)),
            Err(LrcError::Dimension(_))
        ));
    }

    #[test]
    fn text_form_round_trip_and_errors() {
        let xxx = w("0;1,1,1;0,0,0;2");
        assert_eq!(xxx, WeylOperator::pauli("XXX").unwrap());
        assert_eq!(xxx.to_text(), "0;1,1,1;0,0,0;2");
        assert!("0;1,1;0;2".parse::<WeylOperator>().is_err());
        assert!("0;2;0;2".parse::<WeylOperator>().is_err());
        assert!("garbage".parse::<WeylOperator>().is_err());
    }

    #[test]
    fn capacity_limit_enforced() {
        let big = WeylOperator::identity(2, 13);
        assert!(matches!(big.to_matrix(), Err(LrcError::Capacity { .. })));
    }

    #[test]
    fn projective_recognition() {
        let p = w("1;1,0;2,1;3");
        let m = p.to_matrix().unwrap() * C64::from_polar(1.0, 0.37);
        let (found, residual) = WeylOperator::from_matrix_projective(&m, 3, 2, 1e-10).unwrap();
        assert_eq!(found.strip_phase(), p.strip_phase());
        assert!(max_abs_diff(&(found.to_matrix().unwrap() * residual), &m) < 1e-12);
        let h = crate::linalg::dft(2);
        assert!(WeylOperator::from_matrix_projective(&h, 2, 1, 1e-10).is_none());
    }

    #[test]
    fn weight_ordering() {
        let all = all_weyls_by_weight(2, 2);
        assert_eq!(all.len(), 16);
        assert!(all[0].is_identity());
        assert!(all.windows(2).all(|p| p[0].weight() <= p[1].weight()));
    }
}
