//! Logical randomized compiling passes.
//!
//! Compilation turns a [`LogicalCircuit`] into a [`Template`]: a list of
//! physical operations interleaved with Weyl layers and choices that depend on
//! uniformly distributed random variables. An assignment of all variables is
//! one compiled instance.

mod average;
mod gadgets;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::Superoperator;
use crate::circuit::eval::{branches_to_instrument, Evaluator, PhysOp, Record};
use crate::circuit::LogicalCircuit;
use crate::error::{LrcError, Result};
use crate::weyl::WeylOperator;

pub use average::{average_assignments, average_exact, run_instance};
pub use gadgets::propagation_correction;

pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1_000_000;

fn yes() -> bool {
    true
}

fn default_cap() -> u64 {
    DEFAULT_EXHAUSTIVE_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled(u64),
}

/// Per-gadget override; unset fields fall back to the policy defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToggleOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilizers: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twirl: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement_rc: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toggles {
    #[serde(default = "yes")]
    pub stabilizers: bool,
    #[serde(default = "yes")]
    pub twirl: bool,
    #[serde(default = "yes")]
    pub measurement_rc: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, ToggleOverride>,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            stabilizers: true,
            twirl: true,
            measurement_rc: true,
            overrides: BTreeMap::new(),
        }
    }
}

/// Effective toggles for one gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetToggles {
    pub stabilizers: bool,
    pub twirl: bool,
    pub measurement_rc: bool,
}

impl Toggles {
    pub fn none() -> Self {
        Toggles {
            stabilizers: false,
            twirl: false,
            measurement_rc: false,
            overrides: BTreeMap::new(),
        }
    }

    pub fn for_gadget(&self, index: usize) -> GadgetToggles {
        let o = self.overrides.get(&index).copied().unwrap_or_default();
        GadgetToggles {
            stabilizers: o.stabilizers.unwrap_or(self.stabilizers),
            twirl: o.twirl.unwrap_or(self.twirl),
            measurement_rc: o.measurement_rc.unwrap_or(self.measurement_rc),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizationPolicy {
    pub seed: u64,
    pub mode: Mode,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default = "default_cap")]
    pub exhaustive_cap: u64,
}

impl RandomizationPolicy {
    pub fn exhaustive(seed: u64) -> Self {
        RandomizationPolicy {
            seed,
            mode: Mode::Exhaustive,
            toggles: Toggles::default(),
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    pub fn sampled(seed: u64, count: u64) -> Self {
        RandomizationPolicy {
            mode: Mode::Sampled(count),
            ..Self::exhaustive(seed)
        }
    }

    /// No insertions at all: the bare circuit.
    pub fn bare() -> Self {
        RandomizationPolicy {
            toggles: Toggles::none(),
            ..Self::exhaustive(0)
        }
    }

    pub fn with_toggles(mut self, toggles: Toggles) -> Self {
        self.toggles = toggles;
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| LrcError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
}

/// A uniformly distributed random variable introduced by one gadget.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVar {
    pub gadget: usize,
    pub name: String,
    /// Human-readable element for each value.
    pub labels: Vec<String>,
}

impl RandomVar {
    pub fn domain(&self) -> u32 {
        self.labels.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeylFactor {
    Fixed(WeylOperator),
    Var {
        var: usize,
        table: Vec<WeylOperator>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemplateOp {
    Fixed(PhysOp),
    /// Product of Weyl factors on the whole register, listed in time order.
    Layer(Vec<WeylFactor>),
    Choice {
        var: usize,
        options: Vec<Vec<PhysOp>>,
    },
    AddVar {
        wire: usize,
        var: usize,
        adds: Vec<u32>,
    },
}

impl TemplateOp {
    fn vars(&self) -> Vec<usize> {
        match self {
            TemplateOp::Fixed(_) => vec![],
            TemplateOp::Layer(fs) => fs
                .iter()
                .filter_map(|f| match f {
                    WeylFactor::Var { var, .. } => Some(*var),
                    WeylFactor::Fixed(_) => None,
                })
                .collect(),
            TemplateOp::Choice { var, .. } | TemplateOp::AddVar { var, .. } => vec![*var],
        }
    }

    fn is_weyl(&self) -> bool {
        matches!(
            self,
            TemplateOp::Layer(_) | TemplateOp::Fixed(PhysOp::Weyl(_))
        )
    }

    fn into_factors(self) -> Vec<WeylFactor> {
        match self {
            TemplateOp::Layer(fs) => fs,
            TemplateOp::Fixed(PhysOp::Weyl(w)) => vec![WeylFactor::Fixed(w)],
            _ => unreachable!("only Weyl ops have factors"),
        }
    }

    /// Concrete operations for an assignment where every variable of this op is set.
    fn concretize(&self, value: impl Fn(usize) -> u32) -> Result<Vec<PhysOp>> {
        Ok(match self {
            TemplateOp::Fixed(op) => vec![op.clone()],
            TemplateOp::Layer(fs) => {
                let mut acc: Option<WeylOperator> = None;
                for f in fs {
                    let w = match f {
                        WeylFactor::Fixed(w) => w,
                        WeylFactor::Var { var, table } => &table[value(*var) as usize],
                    };
                    acc = Some(match acc {
                        None => w.clone(),
                        Some(a) => w.mul(&a)?,
                    });
                }
                match acc {
                    Some(w) if !w.is_identity_up_to_phase() => vec![PhysOp::Weyl(w)],
                    _ => vec![],
                }
            }
            TemplateOp::Choice { var, options } => options[value(*var) as usize].clone(),
            TemplateOp::AddVar { wire, var, adds } => {
                let add = adds[value(*var) as usize];
                if add == 0 {
                    vec![]
                } else {
                    vec![PhysOp::ClassicalAdd { wire: *wire, add }]
                }
            }
        })
    }
}

/// Compiled circuit with its random variables.
#[derive(Debug, Clone)]
pub struct Template {
    pub d: u32,
    pub n_total: usize,
    pub num_wires: usize,
    pub vars: Vec<RandomVar>,
    pub ops: Vec<TemplateOp>,
}

impl Template {
    /// Number of distinct assignments (saturating).
    pub fn instance_count(&self) -> u128 {
        self.vars
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(u128::from(v.domain())))
    }

    pub fn evaluator(&self) -> Result<Evaluator> {
        Evaluator::new(self.d, self.n_total, self.num_wires)
    }

    /// Every assignment in mixed-radix order, first variable most significant.
    pub fn exhaustive_assignments(&self, cap: u64) -> Result<AssignmentIter> {
        let count = self.instance_count();
        if count > u128::from(cap) {
            return Err(LrcError::Capacity {
                what: "exhaustive randomization".into(),
                requested: usize::try_from(count).unwrap_or(usize::MAX),
                limit: cap as usize,
            });
        }
        Ok(AssignmentIter {
            domains: self.vars.iter().map(RandomVar::domain).collect(),
            next: Some(vec![0; self.vars.len()]),
        })
    }

    /// Assignment number `index` of the sampled stream for `seed`.
    pub fn sample_assignment(&self, seed: u64, index: u64) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.vars
            .iter()
            .map(|v| rng.gen_range(0..v.domain()))
            .collect()
    }

    pub fn concretize(&self, assignment: &[u32]) -> Result<Vec<PhysOp>> {
        let mut out = Vec::new();
        for op in &self.ops {
            out.extend(op.concretize(|v| assignment[v])?);
        }
        Ok(out)
    }

    /// Assignments selected by the policy mode.
    pub fn assignments(&self, policy: &RandomizationPolicy) -> Result<Vec<Vec<u32>>> {
        match policy.mode {
            Mode::Exhaustive => Ok(self
                .exhaustive_assignments(policy.exhaustive_cap)?
                .collect()),
            Mode::Sampled(n) => Ok((0..n)
                .map(|i| self.sample_assignment(policy.seed, i))
                .collect()),
        }
    }

    fn push(&mut self, op: TemplateOp) {
        if op.is_weyl() {
            if let Some(prev) = self.ops.pop_if(|last| last.is_weyl()) {
                let mut merged = prev.into_factors();
                merged.extend(op.into_factors());
                self.ops.push(TemplateOp::Layer(merged));
                return;
            }
        }
        self.ops.push(op);
    }
}

pub struct AssignmentIter {
    domains: Vec<u32>,
    next: Option<Vec<u32>>,
}

impl Iterator for AssignmentIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.domains[i] {
                carried = false;
                break;
            }
            succ[i] = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Compile a validated circuit into a template.
pub fn compile(circuit: &LogicalCircuit, policy: &RandomizationPolicy) -> Result<Template> {
    let layout = circuit.ensure_valid()?;
    gadgets::build(circuit, &layout, policy)
}

/// One randomization draw.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledInstance {
    pub index: u64,
    pub seed: u64,
    pub assignment: Vec<u32>,
}

impl CompiledInstance {
    /// Circuit JSON plus `insertions` and `classical_post` blocks.
    pub fn to_json(&self, circuit: &LogicalCircuit, template: &Template) -> Value {
        let mut doc = serde_json::to_value(circuit).expect("circuit serializes");
        let insertions: Vec<Value> = template
            .vars
            .iter()
            .zip(&self.assignment)
            .map(|(v, &a)| {
                json!({
                    "gadget": v.gadget,
                    "name": v.name,
                    "value": a,
                    "element": v.labels[a as usize],
                })
            })
            .collect();
        let mut post = Vec::new();
        for op in &template.ops {
            if let TemplateOp::AddVar { wire, var, adds } = op {
                let add = adds[self.assignment[*var] as usize];
                post.push(json!({
                    "gadget": template.vars[*var].gadget,
                    "wire": circuit.classical_wires[*wire],
                    "add": add,
                }));
            }
        }
        let obj = doc.as_object_mut().expect("circuit is an object");
        obj.insert("insertions".into(), Value::Array(insertions));
        obj.insert("classical_post".into(), Value::Array(post));
        obj.insert(
            "instance".into(),
            json!({"index": self.index, "seed": self.seed}),
        );
        doc
    }
}

/// Compile and list the instances selected by the policy.
pub fn instantiate(
    circuit: &LogicalCircuit,
    policy: &RandomizationPolicy,
) -> Result<(Template, Vec<CompiledInstance>)> {
    let template = compile(circuit, policy)?;
    let instances = template
        .assignments(policy)?
        .into_iter()
        .enumerate()
        .map(|(i, assignment)| CompiledInstance {
            index: i as u64,
            seed: policy.seed,
            assignment,
        })
        .collect();
    Ok((template, instances))
}

pub type Instrument = BTreeMap<Record, Superoperator>;

/// Ideal (noise-free, uncompiled) instrument of the circuit on its full register.
pub fn ideal_instrument(circuit: &LogicalCircuit) -> Result<Instrument> {
    let template = compile(&circuit.strip_noise(), &RandomizationPolicy::bare())?;
    instance_instrument(&template, &[])
}

/// Instrument of one instance of a template.
pub fn instance_instrument(template: &Template, assignment: &[u32]) -> Result<Instrument> {
    let ev = template.evaluator()?;
    let out = run_instance(template, &ev, ev.channel_input()?, assignment)?;
    branches_to_instrument(&out, ev.dim())
}

/// Instrument averaged exactly over all assignments.
pub fn averaged_instrument(template: &Template) -> Result<Instrument> {
    let ev = template.evaluator()?;
    let out = average_exact(template, &ev, ev.channel_input()?)?;
    branches_to_instrument(&out, ev.dim())
}

/// Largest entrywise difference between two instruments.
pub fn instrument_max_diff(a: &Instrument, b: &Instrument) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, sa) in a {
        worst = worst.max(match b.get(k) {
            Some(sb) => sa.max_diff(sb),
            None => crate::linalg::max_abs(sa.matrix()),
        });
    }
    for (k, sb) in b {
        if !a.contains_key(k) {
            worst = worst.max(crate::linalg::max_abs(sb.matrix()));
        }
    }
    worst
}
