//! Physical operation list and a branch-tracking evaluator.
//!
//! A payload is a list of operators that every operation acts on linearly: a
//! single density matrix for state-level runs, or the `D^2` matrix units
//! `|a><b|` for channel-level runs. Measurements split payloads into
//! branches keyed by the classical record.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::Superoperator;
use crate::error::{dim_err, LrcError, Result};
use crate::linalg::{
    apply_local_superop, check_dense, conjugate_local, max_abs, prepare_local, trace, Matrix,
    SiteMap, Vector, C64,
};
use crate::weyl::WeylOperator;

/// Branch weight below which a branch is dropped.
pub const NEGLIGIBLE: f64 = 1e-14;

/// Default number of simultaneous classical branches.
pub const DEFAULT_BRANCH_LIMIT: usize = 4096;

/// One concrete physical operation on the global register.
#[derive(Debug, Clone, PartialEq)]
pub enum PhysOp {
    /// Weyl operator on the whole register.
    Weyl(WeylOperator),
    Unitary {
        sites: Vec<usize>,
        matrix: Matrix,
    },
    /// Natural-representation channel on `sites`.
    Channel {
        sites: Vec<usize>,
        superop: Matrix,
    },
    /// `rho -> sum_i p_i U_i rho U_i^dagger`.
    Mixture {
        sites: Vec<usize>,
        terms: Vec<(f64, Matrix)>,
    },
    /// Discard `sites` and replace them by a pure state.
    Prepare {
        sites: Vec<usize>,
        state: Vector,
    },
    /// Projective measurement writing the outcome value to `wire`; several
    /// projectors may share a value. `reset` re-prepares the sites afterwards.
    Measure {
        sites: Vec<usize>,
        outcomes: Vec<(u32, Matrix)>,
        wire: usize,
        reset: Option<Vector>,
    },
    /// `wire <- wire + add (mod d)`.
    ClassicalAdd {
        wire: usize,
        add: u32,
    },
}

pub type Record = Vec<Option<u32>>;

/// Operators carried through a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload(pub Vec<Matrix>);

impl Payload {
    pub fn scale(&mut self, f: f64) {
        for m in &mut self.0 {
            *m *= C64::new(f, 0.0);
        }
    }

    fn add_assign(&mut self, other: &Payload) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    fn magnitude(&self) -> f64 {
        self.0.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn weight(&self) -> f64 {
        self.0.iter().map(|m| trace(m).re).sum()
    }
}

pub type Branches = BTreeMap<Record, Payload>;

pub(crate) fn add_branch(into: &mut Branches, key: Record, payload: Payload) {
    match into.get_mut(&key) {
        Some(existing) => existing.add_assign(&payload),
        None => {
            into.insert(key, payload);
        }
    }
}

/// Scale every branch by `f` and add it into `into`.
pub fn accumulate(into: &mut Branches, from: &Branches, f: f64) {
    for (key, payload) in from {
        let mut p = payload.clone();
        p.scale(f);
        add_branch(into, key.clone(), p);
    }
}

/// Runs operation lists on a register of `n` qudits of dimension `d`.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub d: u32,
    pub n: usize,
    pub num_wires: usize,
    pub branch_limit: usize,
    /// When set, exceeding the branch limit samples one branch instead of failing.
    pub fallback_seed: Option<u64>,
}

impl Evaluator {
    pub fn new(d: u32, n: usize, num_wires: usize) -> Result<Self> {
        let dim = (d as usize).checked_pow(n as u32).unwrap_or(usize::MAX);
        check_dense("register", dim)?;
        Ok(Evaluator {
            d,
            n,
            num_wires,
            branch_limit: DEFAULT_BRANCH_LIMIT,
            fallback_seed: None,
        })
    }

    pub fn dim(&self) -> usize {
        (self.d as usize).pow(self.n as u32)
    }

    pub fn empty_record(&self) -> Record {
        vec![None; self.num_wires]
    }

    /// Single branch holding the state `rho`.
    pub fn state_input(&self, rho: Matrix) -> Result<Branches> {
        if rho.nrows() != self.dim() || rho.ncols() != self.dim() {
            return Err(dim_err(format!("input state must be {0}x{0}", self.dim())));
        }
        Ok(BTreeMap::from([(self.empty_record(), Payload(vec![rho]))]))
    }

    /// `|0...0><0...0|`.
    pub fn zero_state_input(&self) -> Result<Branches> {
        let mut rho = Matrix::zeros(self.dim(), self.dim());
        rho[(0, 0)] = C64::new(1.0, 0.0);
        self.state_input(rho)
    }

    /// The `D^2` matrix units in column-stacking order.
    pub fn channel_input(&self) -> Result<Branches> {
        let dim = self.dim();
        if dim > crate::channel::MAX_SUPEROP_DIM {
            return Err(LrcError::Capacity {
                what: "channel-level evaluation".into(),
                requested: dim,
                limit: crate::channel::MAX_SUPEROP_DIM,
            });
        }
        let mut units = Vec::with_capacity(dim * dim);
        for b in 0..dim {
            for a in 0..dim {
                let mut m = Matrix::zeros(dim, dim);
                m[(a, b)] = C64::new(1.0, 0.0);
                units.push(m);
            }
        }
        Ok(BTreeMap::from([(self.empty_record(), Payload(units))]))
    }

    pub fn run(&self, ops: &[PhysOp], mut branches: Branches) -> Result<Branches> {
        for op in ops {
            branches = self.apply(op, branches)?;
        }
        Ok(branches)
    }

    fn site_map(&self, sites: &[usize]) -> Result<SiteMap> {
        for &s in sites {
            if s >= self.n {
                return Err(dim_err(format!(
                    "site {s} outside register of {} qudits",
                    self.n
                )));
            }
        }
        Ok(SiteMap::new(self.d as usize, self.n, sites))
    }

    fn check_local(&self, sites: &[usize], dim: usize, what: &str) -> Result<SiteMap> {
        let map = self.site_map(sites)?;
        if map.local_dim != dim {
            return Err(dim_err(format!(
                "{what} has dimension {dim} but acts on {} sites",
                sites.len()
            )));
        }
        Ok(map)
    }

    pub fn apply(&self, op: &PhysOp, branches: Branches) -> Result<Branches> {
        match op {
            PhysOp::Weyl(w) => {
                if w.n() != self.n || w.d() != self.d {
                    return Err(dim_err("Weyl layer does not match the register"));
                }
                let (perm, phases) = w.action_on_basis();
                self.map_each(branches, |m| Ok(apply_weyl(m, &perm, &phases)))
            }
            PhysOp::Unitary { sites, matrix } => {
                let map = self.check_local(sites, matrix.nrows(), "unitary")?;
                self.map_each(branches, |m| {
                    let mut out = m.clone();
                    conjugate_local(&mut out, matrix, &map);
                    Ok(out)
                })
            }
            PhysOp::Channel { sites, superop } => {
                let ld = (self.d as usize).pow(sites.len() as u32);
                if superop.nrows() != ld * ld {
                    return Err(dim_err("channel does not match its sites"));
                }
                let map = self.check_local(sites, ld, "channel")?;
                self.map_each(branches, |m| Ok(apply_local_superop(m, superop, &map)))
            }
            PhysOp::Mixture { sites, terms } => {
                let ld = terms.first().map(|t| t.1.nrows()).unwrap_or(1);
                let map = self.check_local(sites, ld, "mixture")?;
                self.map_each(branches, |m| {
                    let mut acc = Matrix::zeros(m.nrows(), m.ncols());
                    for (p, u) in terms {
                        let mut term = m.clone();
                        conjugate_local(&mut term, u, &map);
                        acc += term * C64::new(*p, 0.0);
                    }
                    Ok(acc)
                })
            }
            PhysOp::Prepare { sites, state } => {
                let map = self.check_local(sites, state.len(), "prepared state")?;
                self.map_each(branches, |m| Ok(prepare_local(m, state, &map)))
            }
            PhysOp::Measure {
                sites,
                outcomes,
                wire,
                reset,
            } => {
                if *wire >= self.num_wires {
                    return Err(dim_err(format!("wire {wire} out of range")));
                }
                let ld = outcomes.first().map(|o| o.1.nrows()).unwrap_or(1);
                let map = self.check_local(sites, ld, "measurement")?;
                let mut out = Branches::new();
                for (record, payload) in branches {
                    if record[*wire].is_some() {
                        return Err(LrcError::Circuit(format!("wire {wire} written twice")));
                    }
                    for (value, proj) in outcomes {
                        let mats = payload
                            .0
                            .iter()
                            .map(|m| {
                                let mut projected = m.clone();
                                conjugate_local(&mut projected, proj, &map);
                                match reset {
                                    Some(psi) => prepare_local(&projected, psi, &map),
                                    None => projected,
                                }
                            })
                            .collect();
                        let branch = Payload(mats);
                        if branch.magnitude() < NEGLIGIBLE {
                            continue;
                        }
                        let mut key = record.clone();
                        key[*wire] = Some(*value % self.d);
                        add_branch(&mut out, key, branch);
                    }
                }
                self.enforce_limit(out)
            }
            PhysOp::ClassicalAdd { wire, add } => {
                let mut out = Branches::new();
                for (mut record, payload) in branches {
                    let slot = record
                        .get_mut(*wire)
                        .ok_or_else(|| dim_err(format!("wire {wire} out of range")))?;
                    let v = slot.ok_or_else(|| {
                        LrcError::Circuit(format!("classical add on unwritten wire {wire}"))
                    })?;
                    *slot = Some((v + add) % self.d);
                    add_branch(&mut out, record, payload);
                }
                Ok(out)
            }
        }
    }

    fn map_each(
        &self,
        branches: Branches,
        f: impl Fn(&Matrix) -> Result<Matrix>,
    ) -> Result<Branches> {
        branches
            .into_iter()
            .map(|(k, p)| Ok((k, Payload(p.0.iter().map(&f).collect::<Result<Vec<_>>>()?))))
            .collect()
    }

    fn enforce_limit(&self, branches: Branches) -> Result<Branches> {
        if branches.len() <= self.branch_limit {
            return Ok(branches);
        }
        let Some(seed) = self.fallback_seed else {
            return Err(LrcError::Capacity {
                what: "classical branches".into(),
                requested: branches.len(),
                limit: self.branch_limit,
            });
        };
        let weights: Vec<f64> = branches.values().map(|p| p.weight().max(0.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ branches.len() as u64);
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = branches.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        let (key, mut payload) = branches.into_iter().nth(chosen).expect("index in range");
        payload.scale(total / weights[chosen]);
        Ok(BTreeMap::from([(key, payload)]))
    }
}

/// `rho -> P rho P^dagger` for `P|i> = phases[i] |perm[i]>`.
pub fn apply_weyl(rho: &Matrix, perm: &[usize], phases: &[C64]) -> Matrix {
    let mut out = Matrix::zeros(rho.nrows(), rho.ncols());
    for j in 0..rho.ncols() {
        let pj = phases[j].conj();
        for i in 0..rho.nrows() {
            out[(perm[i], perm[j])] = phases[i] * pj * rho[(i, j)];
        }
    }
    out
}

/// Reassemble channel-level branches into one superoperator per record.
pub fn branches_to_instrument(
    branches: &Branches,
    dim: usize,
) -> Result<BTreeMap<Record, Superoperator>> {
    branches
        .iter()
        .map(|(k, p)| {
            if p.0.len() != dim * dim {
                return Err(dim_err("payload is not a channel-level run"));
            }
            let mut m = Matrix::zeros(dim * dim, dim * dim);
            for (col, img) in p.0.iter().enumerate() {
                m.column_mut(col).copy_from_slice(img.as_slice());
            }
            Ok((k.clone(), Superoperator::from_matrix(dim, m)?))
        })
        .collect()
}

/// Largest entrywise difference between two branch maps (missing branches
/// count as zero).
pub fn branches_max_diff(a: &Branches, b: &Branches) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, pa) in a {
        worst = worst.max(match b.get(k) {
            Some(pb) => {
                pa.0.iter()
                    .zip(&pb.0)
                    .map(|(x, y)| max_abs(&(x - y)))
                    .fold(0.0, f64::max)
            }
            None => pa.magnitude(),
        });
    }
    for (k, pb) in b {
        if !a.contains_key(k) {
            worst = worst.max(pb.magnitude());
        }
    }
    worst
}

/// Outcome distribution (trace of each branch) for state-level runs.
pub fn outcome_distribution(branches: &Branches) -> BTreeMap<Record, f64> {
    branches
        .iter()
        .map(|(k, p)| (k.clone(), p.weight()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, max_abs_diff};

    #[test]
    fn weyl_application_matches_dense() {
        let w: WeylOperator = "1;1,0,2;2,1,1;3".parse().unwrap();
        let ev = Evaluator::new(3, 3, 0).unwrap();
        let rho = Matrix::from_fn(27, 27, |i, j| c((i + 2 * j) as f64, i as f64 - j as f64));
        let wm = w.to_matrix().unwrap();
        let expected = &wm * &rho * wm.adjoint();
        let out = ev
            .apply(&PhysOp::Weyl(w), ev.state_input(rho).unwrap())
            .unwrap();
        let got = &out.values().next().unwrap().0[0];
        assert!(max_abs_diff(got, &expected) < 1e-10);
    }

    #[test]
    fn measurement_splits_and_records() {
        let ev = Evaluator::new(2, 1, 1).unwrap();
        let plus = Matrix::from_element(2, 2, c(0.5, 0.0));
        let p0 = Matrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let p1 = Matrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        let op = PhysOp::Measure {
            sites: vec![0],
            outcomes: vec![(0, p0), (1, p1)],
            wire: 0,
            reset: None,
        };
        let out = ev.apply(&op, ev.state_input(plus).unwrap()).unwrap();
        let dist = outcome_distribution(&out);
        assert_eq!(dist.len(), 2);
        assert!((dist[&vec![Some(0)]] - 0.5).abs() < 1e-15);
        let out = ev
            .apply(&PhysOp::ClassicalAdd { wire: 0, add: 1 }, out)
            .unwrap();
        assert!(out.contains_key(&vec![Some(0)]) && out.contains_key(&vec![Some(1)]));
        assert!(ev.apply(&op, out).is_err());
    }

    #[test]
    fn channel_level_identity_round_trip() {
        let ev = Evaluator::new(2, 2, 0).unwrap();
        let x = WeylOperator::pauli("XI").unwrap();
        let out = ev
            .run(&[PhysOp::Weyl(x.clone())], ev.channel_input().unwrap())
            .unwrap();
        let inst = branches_to_instrument(&out, 4).unwrap();
        let expected = Superoperator::from_weyl(&x).unwrap();
        assert!(inst.values().next().unwrap().max_diff(&expected) < 1e-15);
    }

    #[test]
    fn local_unitary_on_two_sites() {
        let ev = Evaluator::new(2, 3, 0).unwrap();
        let h = crate::linalg::dft(2);
        let u = kron(&h, &h);
        let out = ev
            .run(
                &[PhysOp::Unitary {
                    sites: vec![2, 0],
                    matrix: u.clone(),
                }],
                ev.zero_state_input().unwrap(),
            )
            .unwrap();
        let rho = &out.values().next().unwrap().0[0];
        assert!(rho.iter().filter(|v| v.norm() > 1e-12).count() == 16);
    }
}
