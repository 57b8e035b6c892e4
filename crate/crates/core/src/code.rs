//! Stabilizer codes over qudits: stabilizer group, pure errors, logical group,
//! cospace projectors and syndromes.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, LrcError, Result};
use crate::linalg::{check_dense, max_abs, root_of_unity, Matrix, Vector, C64};
use crate::weyl::{all_weyls_by_weight, WeylOperator};

/// Names accepted by [`builtin_code`].
pub const BUILTIN_CODES: [&str; 5] = [
    "bitflip3",
    "phaseflip3",
    "qutrit_rep3",
    "five_one_three",
    "trivial",
];

/// Error syndrome as a ditstring, one dit per stabilizer generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syndrome {
    pub dits: Vec<u32>,
}

impl Syndrome {
    /// Mixed-radix index, first dit most significant.
    pub fn index(&self, d: u32) -> usize {
        self.dits
            .iter()
            .fold(0usize, |acc, &s| acc * d as usize + s as usize)
    }

    pub fn from_index(index: usize, d: u32, len: usize) -> Self {
        let mut dits = vec![0u32; len];
        let mut rem = index;
        for slot in dits.iter_mut().rev() {
            *slot = (rem % d as usize) as u32;
            rem /= d as usize;
        }
        Syndrome { dits }
    }
}

/// Serialized code definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDefinition {
    pub d: u32,
    pub n: usize,
    pub k: usize,
    pub stabilizer_generators: Vec<WeylOperator>,
    #[serde(default)]
    pub pure_error_generators: Vec<WeylOperator>,
    pub logical_generators: Vec<WeylOperator>,
}

/// A validated stabilizer code.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCode {
    name: Option<String>,
    d: u32,
    n: usize,
    k: usize,
    stab_gens: Vec<WeylOperator>,
    pure_error_gens: Vec<WeylOperator>,
    logical_gens: Vec<WeylOperator>,
    stabilizers: Vec<WeylOperator>,
    pure_errors: Vec<WeylOperator>,
    logicals: Vec<WeylOperator>,
}

fn product_of_powers(gens: &[WeylOperator], powers: &[u32], d: u32, n: usize) -> WeylOperator {
    gens.iter()
        .zip(powers)
        .fold(WeylOperator::identity(d, n), |acc, (g, &p)| {
            acc.mul(&g.pow(p)).expect("generators share shape")
        })
}

fn mixed_radix(index: usize, d: u32, len: usize) -> Vec<u32> {
    Syndrome::from_index(index, d, len).dits
}

impl StabilizerCode {
    /// Validate a code definition. Empty `pure_error_generators` are derived
    /// with [`derive_pure_errors`].
    pub fn new(def: CodeDefinition) -> Result<Self> {
        Self::with_name(def, None)
    }

    fn with_name(def: CodeDefinition, name: Option<String>) -> Result<Self> {
        let CodeDefinition {
            d,
            n,
            k,
            stabilizer_generators,
            pure_error_generators,
            logical_generators,
        } = def;
        if d < 2 {
            return Err(LrcError::Validation(format!("d must be >= 2, got {d}")));
        }
        if n == 0 || k > n {
            return Err(LrcError::Validation(format!(
                "need 0 <= k <= n and n >= 1, got n={n}, k={k}"
            )));
        }
        let r = n - k;
        if stabilizer_generators.len() != r {
            return Err(LrcError::Validation(format!(
                "expected {r} stabilizer generators, got {}",
                stabilizer_generators.len()
            )));
        }
        if logical_generators.len() != 2 * k {
            return Err(LrcError::Validation(format!(
                "expected {} logical generators, got {}",
                2 * k,
                logical_generators.len()
            )));
        }
        for op in stabilizer_generators
            .iter()
            .chain(&pure_error_generators)
            .chain(&logical_generators)
        {
            if op.d() != d || op.n() != n {
                return Err(LrcError::Validation(format!(
                    "operator {op} does not act on {n} qudits of dimension {d}"
                )));
            }
        }
        for (i, g) in stabilizer_generators.iter().enumerate() {
            if !g.pow(d).is_identity() {
                return Err(LrcError::Validation(format!(
                    "stabilizer generator {i} ({g}) does not satisfy G^d = I"
                )));
            }
            for h in &stabilizer_generators[i + 1..] {
                if !g.commutes_with(h)? {
                    return Err(LrcError::Validation(format!(
                        "stabilizer generators {g} and {h} do not commute"
                    )));
                }
            }
        }
        let stabilizers = enumerate_group(&stabilizer_generators, d, n);
        let distinct: HashSet<(Vec<u32>, Vec<u32>)> = stabilizers
            .iter()
            .map(|s| (s.x().to_vec(), s.z().to_vec()))
            .collect();
        if distinct.len() != stabilizers.len() {
            return Err(LrcError::Validation(
                "stabilizer generators are not independent (group contains a phase multiple of I or repeats)".into(),
            ));
        }

        for (i, l) in logical_generators.iter().enumerate() {
            if !l.pow(d).is_identity() {
                return Err(LrcError::Validation(format!(
                    "logical generator {i} ({l}) does not satisfy L^d = I"
                )));
            }
            for g in &stabilizer_generators {
                if !l.commutes_with(g)? {
                    return Err(LrcError::Validation(format!(
                        "logical {l} does not commute with stabilizer {g}"
                    )));
                }
            }
            for (j, m) in logical_generators.iter().enumerate() {
                let expected = if i / 2 == j / 2 && i != j {
                    if i % 2 == 0 {
                        1
                    } else {
                        d - 1
                    }
                } else {
                    0
                };
                if l.braiding_dit(m)? != expected {
                    return Err(LrcError::Validation(format!(
                        "logical generators {i} and {j} do not form canonical pairs (X_i Z_i braid exponent must be 1)"
                    )));
                }
            }
        }

        let pure_error_gens = if pure_error_generators.is_empty() && r > 0 {
            derive_pure_errors(d, n, &stabilizer_generators, &logical_generators)?
        } else {
            pure_error_generators
        };
        if pure_error_gens.len() != r {
            return Err(LrcError::Validation(format!(
                "expected {r} pure error generators, got {}",
                pure_error_gens.len()
            )));
        }
        for t in &pure_error_gens {
            for l in &logical_generators {
                if !t.commutes_with(l)? {
                    return Err(LrcError::Validation(format!(
                        "pure error {t} does not commute with logical {l}"
                    )));
                }
            }
        }
        let mut pure_errors: Vec<Option<WeylOperator>> = vec![None; stabilizers.len()];
        for t in enumerate_group(&pure_error_gens, d, n) {
            let s = syndrome_against(&stabilizer_generators, &t)?;
            let slot = &mut pure_errors[s.index(d)];
            if slot.is_some() {
                return Err(LrcError::Validation(format!(
                    "pure errors are not in bijection with syndromes (repeat at {:?})",
                    s.dits
                )));
            }
            *slot = Some(t.strip_phase());
        }
        let pure_errors: Vec<WeylOperator> = pure_errors
            .into_iter()
            .map(|t| t.expect("bijection"))
            .collect();
        let logicals = enumerate_group(&logical_generators, d, n);

        Ok(StabilizerCode {
            name,
            d,
            n,
            k,
            stab_gens: stabilizer_generators,
            pure_error_gens,
            logical_gens: logical_generators,
            stabilizers,
            pure_errors,
            logicals,
        })
    }

    /// Code with no stabilizers on `n` bare qudits (`k = n`).
    pub fn trivial(d: u32, n: usize) -> Result<Self> {
        let mut logical_generators = Vec::with_capacity(2 * n);
        for q in 0..n {
            logical_generators.push(WeylOperator::x_at(d, n, q));
            logical_generators.push(WeylOperator::z_at(d, n, q));
        }
        Self::with_name(
            CodeDefinition {
                d,
                n,
                k: n,
                stabilizer_generators: vec![],
                pure_error_generators: vec![],
                logical_generators,
            },
            Some("trivial".into()),
        )
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        (self.d as usize).pow(self.n as u32)
    }

    pub fn stabilizer_generators(&self) -> &[WeylOperator] {
        &self.stab_gens
    }

    pub fn pure_error_generators(&self) -> &[WeylOperator] {
        &self.pure_error_gens
    }

    pub fn logical_generators(&self) -> &[WeylOperator] {
        &self.logical_gens
    }

    /// Logical X of logical qudit `i`.
    pub fn logical_x(&self, i: usize) -> &WeylOperator {
        &self.logical_gens[2 * i]
    }

    /// Logical Z of logical qudit `i`.
    pub fn logical_z(&self, i: usize) -> &WeylOperator {
        &self.logical_gens[2 * i + 1]
    }

    /// All `d^(n-k)` stabilizers, identity first.
    pub fn enumerate_stabilizers(&self) -> &[WeylOperator] {
        &self.stabilizers
    }

    /// All `d^(n-k)` pure errors indexed by syndrome index; entry 0 is `I`.
    pub fn pure_errors(&self) -> &[WeylOperator] {
        &self.pure_errors
    }

    /// The `d^(2k)` logical Weyl operators (products of generator powers,
    /// first generator most significant).
    pub fn logical_group(&self) -> &[WeylOperator] {
        &self.logicals
    }

    pub fn definition(&self) -> CodeDefinition {
        CodeDefinition {
            d: self.d,
            n: self.n,
            k: self.k,
            stabilizer_generators: self.stab_gens.clone(),
            pure_error_generators: self.pure_error_gens.clone(),
            logical_generators: self.logical_gens.clone(),
        }
    }

    pub fn syndrome_of(&self, e: &WeylOperator) -> Result<Syndrome> {
        if e.d() != self.d || e.n() != self.n {
            return Err(dim_err(format!(
                "operator {e} does not act on this code's {} qudits",
                self.n
            )));
        }
        syndrome_against(&self.stab_gens, e)
    }

    /// Index into [`pure_errors`](Self::pure_errors) of the pure error with
    /// the same syndrome as `e`.
    pub fn pure_error_index(&self, e: &WeylOperator) -> Result<usize> {
        Ok(self.syndrome_of(e)?.index(self.d))
    }

    /// Position of `t` among the enumerated pure errors (phase ignored).
    pub fn find_pure_error(&self, t: &WeylOperator) -> Result<usize> {
        let stripped = t.strip_phase();
        self.pure_errors
            .iter()
            .position(|p| *p == stripped)
            .ok_or_else(|| LrcError::Domain(format!("{t} is not a pure error of this code")))
    }

    /// `Pi_I = E_S S`.
    pub fn codespace_projector(&self) -> Result<Matrix> {
        self.projector_from_characters(0)
    }

    /// `Pi_T = E_S chi_T(S)^* S` for the pure error `t`.
    pub fn cospace_projector(&self, t: &WeylOperator) -> Result<Matrix> {
        let idx = self.find_pure_error(t)?;
        self.projector_from_characters(idx)
    }

    /// Cospace projector addressed by syndrome index.
    pub fn cospace_projector_by_index(&self, idx: usize) -> Result<Matrix> {
        if idx >= self.pure_errors.len() {
            return Err(LrcError::Domain(format!(
                "cospace index {idx} out of range"
            )));
        }
        self.projector_from_characters(idx)
    }

    fn projector_from_characters(&self, idx: usize) -> Result<Matrix> {
        let dim = self.dim();
        check_dense("cospace projector", dim)?;
        let t = &self.pure_errors[idx];
        let mut acc = Matrix::zeros(dim, dim);
        for s in &self.stabilizers {
            let phase = t.braiding_phase(s)?.conj().value();
            let (perm, phases) = s.action_on_basis();
            for j in 0..dim {
                acc[(perm[j], j)] += phase * phases[j];
            }
        }
        Ok(acc / C64::new(self.stabilizers.len() as f64, 0.0))
    }

    /// Projector onto the `w^m` eigenspace of a Weyl operator with `W^d = I`.
    pub fn eigenprojector(&self, w: &WeylOperator, m: u32) -> Result<Matrix> {
        eigenprojector(w, m)
    }

    /// Encoded basis state `|j_1 ... j_k>` (logical X powers applied to `|0>`).
    pub fn logical_basis_state(&self, dits: &[u32]) -> Result<Vector> {
        if dits.len() != self.k {
            return Err(dim_err(format!(
                "expected {} logical dits, got {}",
                self.k,
                dits.len()
            )));
        }
        let dim = self.dim();
        check_dense("encoded state", dim)?;
        let mut proj = self.codespace_projector()?;
        for i in 0..self.k {
            proj = &proj * eigenprojector(self.logical_z(i), 0)?;
        }
        let (col, norm) = (0..dim)
            .map(|j| (j, proj.column(j).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if norm < 1e-9 {
            return Err(LrcError::Validation("logical zero state is empty".into()));
        }
        let mut psi: Vector = proj.column(col).into_owned() / C64::new(norm, 0.0);
        // Fix the global phase so the largest amplitude is real and positive.
        let (_, lead) = psi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("nonempty");
        let phase = lead.conj() / lead.norm();
        psi *= phase;
        for (i, &j) in dits.iter().enumerate() {
            let xm = self.logical_x(i).pow(j).to_matrix()?;
            psi = xm * psi;
        }
        Ok(psi)
    }
}

fn syndrome_against(gens: &[WeylOperator], e: &WeylOperator) -> Result<Syndrome> {
    let dits = gens
        .iter()
        .map(|g| e.braiding_dit(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(Syndrome { dits })
}

fn enumerate_group(gens: &[WeylOperator], d: u32, n: usize) -> Vec<WeylOperator> {
    let count = (d as usize).pow(gens.len() as u32);
    (0..count)
        .map(|idx| product_of_powers(gens, &mixed_radix(idx, d, gens.len()), d, n))
        .collect()
}

/// `(1/d) sum_j w^{-mj} W^j`.
pub fn eigenprojector(w: &WeylOperator, m: u32) -> Result<Matrix> {
    let d = w.d();
    if !w.pow(d).is_identity() {
        return Err(LrcError::Domain(format!("{w} does not satisfy W^d = I")));
    }
    let dim = (d as usize).pow(w.n() as u32);
    check_dense("eigenprojector", dim)?;
    let mut acc = Matrix::zeros(dim, dim);
    let mut power = WeylOperator::identity(d, w.n());
    for j in 0..d {
        let coeff = root_of_unity((2 * ((d - m % d) * j % d)) % (2 * d), d);
        let (perm, phases) = power.action_on_basis();
        for c in 0..dim {
            acc[(perm[c], c)] += coeff * phases[c];
        }
        power = power.mul(w)?;
    }
    Ok(acc / C64::new(f64::from(d), 0.0))
}

/// Minimum-weight pure error generators: for each unit syndrome, the first
/// Weyl operator (by weight, then `(x, z)`) with that syndrome that commutes
/// with every logical generator and every previously chosen pure error.
pub fn derive_pure_errors(
    d: u32,
    n: usize,
    stab_gens: &[WeylOperator],
    logical_gens: &[WeylOperator],
) -> Result<Vec<WeylOperator>> {
    let candidates = all_weyls_by_weight(d, n);
    let r = stab_gens.len();
    let mut chosen: Vec<WeylOperator> = Vec::with_capacity(r);
    for i in 0..r {
        let mut target = vec![0u32; r];
        target[i] = 1;
        let found = candidates.iter().find(|c| {
            syndrome_against(stab_gens, c)
                .map(|s| s.dits == target)
                .unwrap_or(false)
                && logical_gens
                    .iter()
                    .chain(&chosen)
                    .all(|l| c.commutes_with(l).unwrap_or(false))
        });
        match found {
            Some(t) => chosen.push(t.clone()),
            None => {
                return Err(LrcError::Validation(format!(
                    "no pure error with unit syndrome {i} commutes with the logical operators"
                )))
            }
        }
    }
    Ok(chosen)
}

/// `sum_T chi_T(S)^* chi_T(S')` evaluated exactly. The exponent
/// `T -> braid(T, S') - braid(T, S)` is a homomorphism, so the sum is `|T|`
/// when it vanishes identically and zero when its image is a nontrivial
/// subgroup hit uniformly. Any other histogram is reported as an error.
pub fn character_sum(
    code: &StabilizerCode,
    s: &WeylOperator,
    s_prime: &WeylOperator,
) -> Result<u64> {
    let d = code.d();
    let mut hist = vec![0u64; d as usize];
    for t in code.pure_errors() {
        let a = t.braiding_dit(s)?;
        let b = t.braiding_dit(s_prime)?;
        hist[((b + d - a) % d) as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    if hist[0] == total {
        return Ok(total);
    }
    let support: Vec<usize> = (0..d as usize).filter(|&e| hist[e] > 0).collect();
    let step = support[1];
    let is_subgroup = support.len() * step == d as usize
        && support.iter().enumerate().all(|(i, &e)| e == i * step);
    let uniform = support.iter().all(|&e| hist[e] == hist[0]);
    if is_subgroup && uniform {
        Ok(0)
    } else {
        Err(LrcError::Validation(format!(
            "character histogram {hist:?} does not cancel"
        )))
    }
}

fn def(d: u32, n: usize, k: usize, stabs: &[&str], logicals: &[&str]) -> CodeDefinition {
    CodeDefinition {
        d,
        n,
        k,
        stabilizer_generators: stabs.iter().map(|s| s.parse().expect("builtin")).collect(),
        pure_error_generators: vec![],
        logical_generators: logicals
            .iter()
            .map(|s| s.parse().expect("builtin"))
            .collect(),
    }
}

/// One of the built-in codes listed in [`BUILTIN_CODES`].
pub fn builtin_code(name: &str) -> Result<StabilizerCode> {
    let definition = match name {
        "bitflip3" => def(
            2,
            3,
            1,
            &["0;0,0,0;1,1,0;2", "0;0,0,0;0,1,1;2"],
            &["0;1,1,1;0,0,0;2", "0;0,0,0;1,1,1;2"],
        ),
        "phaseflip3" => def(
            2,
            3,
            1,
            &["0;1,1,0;0,0,0;2", "0;0,1,1;0,0,0;2"],
            &["0;0,0,0;1,1,1;2", "0;1,1,1;0,0,0;2"],
        ),
        "qutrit_rep3" => def(
            3,
            3,
            1,
            &["0;0,0,0;1,2,0;3", "0;0,0,0;0,1,2;3"],
            &["0;1,1,1;0,0,0;3", "0;0,0,0;1,0,0;3"],
        ),
        "five_one_three" => def(
            2,
            5,
            1,
            &[
                "0;1,0,0,1,0;0,1,1,0,0;2",
                "0;0,1,0,0,1;0,0,1,1,0;2",
                "0;1,0,1,0,0;0,0,0,1,1;2",
                "0;0,1,0,1,0;1,0,0,0,1;2",
            ],
            &["0;1,1,1,1,1;0,0,0,0,0;2", "0;0,0,0,0,0;1,1,1,1,1;2"],
        ),
        "trivial" => return StabilizerCode::trivial(2, 1),
        other => return Err(LrcError::UnknownCode(other.to_string())),
    };
    StabilizerCode::with_name(definition, Some(name.to_string()))
}

/// Load a builtin by name or parse a code definition from JSON text.
pub fn code_from_json(text: &str) -> Result<StabilizerCode> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let def: CodeDefinition =
        serde_path_to_error::deserialize(de).map_err(|e| LrcError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    StabilizerCode::new(def)
}

/// Projectors `Pi_T` for all pure errors, keyed by syndrome index.
pub fn all_cospace_projectors(code: &StabilizerCode) -> Result<BTreeMap<usize, Matrix>> {
    (0..code.pure_errors().len())
        .map(|i| Ok((i, code.cospace_projector_by_index(i)?)))
        .collect()
}

/// Largest entry of `P^2 - P` and `P^dagger - P`.
pub fn projector_defect(p: &Matrix) -> f64 {
    max_abs(&(p * p - p)).max(max_abs(&(p.adjoint() - p)))
}
