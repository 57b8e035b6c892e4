//! Gadget-level circuit IR with attached noise, its JSON form and validation.

pub mod eval;
pub mod gates;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{rotation_unitary, validate_distribution};
use crate::code::{builtin_code, CodeDefinition, StabilizerCode};
use crate::error::{dim_err, LrcError, Result};
use crate::linalg::{apply_left, is_unitary, Matrix, SiteMap, C64};
use crate::weyl::WeylOperator;

use eval::PhysOp;

pub const SCHEMA_VERSION: u32 = 1;

/// Dense complex matrix as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexMatrix(pub Vec<Vec<[f64; 2]>>);

impl ComplexMatrix {
    pub fn from_matrix(m: &Matrix) -> Self {
        ComplexMatrix(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(LrcError::Parse("ragged matrix rows".into()));
        }
        Ok(Matrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            C64::new(re, im)
        }))
    }
}

/// A builtin code name or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSpec {
    Builtin(String),
    Definition(CodeDefinition),
}

impl CodeSpec {
    pub fn resolve(&self) -> Result<StabilizerCode> {
        match self {
            CodeSpec::Builtin(name) => builtin_code(name),
            CodeSpec::Definition(def) => StabilizerCode::new(def.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterKind {
    Logical,
    Readout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub kind: RegisterKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    pub qudits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylTerm {
    pub weyl: WeylOperator,
    pub p: f64,
}

/// Noise attached to a gadget. `sites` index into the gadget footprint;
/// an empty list means the whole footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseOp {
    Rotation {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        sites: Vec<usize>,
        weyl: WeylOperator,
        theta: f64,
    },
    StochasticWeyl {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        sites: Vec<usize>,
        terms: Vec<WeylTerm>,
    },
    Unitary {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        sites: Vec<usize>,
        matrix: ComplexMatrix,
    },
    Superoperator {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        sites: Vec<usize>,
        matrix: ComplexMatrix,
    },
}

impl NoiseOp {
    fn sites(&self) -> &[usize] {
        match self {
            NoiseOp::Rotation { sites, .. }
            | NoiseOp::StochasticWeyl { sites, .. }
            | NoiseOp::Unitary { sites, .. }
            | NoiseOp::Superoperator { sites, .. } => sites,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub gate: String,
    pub sites: Vec<usize>,
}

/// Physical realization of a unitary gadget on its footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    Weyl(WeylOperator),
    Matrix(ComplexMatrix),
    Gates(Vec<GateSpec>),
}

/// Twirling group for a unitary gadget.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwirlGroupSpec {
    Trivial,
    #[default]
    LogicalWeyl,
    Dihedral,
    Custom(Vec<ComplexMatrix>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gadget {
    Reset {
        register: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        state: Vec<u32>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        noise: Vec<NoiseOp>,
    },
    Unitary {
        registers: Vec<String>,
        #[serde(default, skip_serializing_if = "String::is_empty")]
        label: String,
        realization: Realization,
        #[serde(default)]
        twirl: TwirlGroupSpec,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        noise: Vec<NoiseOp>,
    },
    Measure {
        register: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        observable: Option<WeylOperator>,
        wire: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        noise: Vec<NoiseOp>,
    },
    Syndrome {
        register: String,
        generator: usize,
        readout: String,
        wire: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        noise: Vec<NoiseOp>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        readout_noise: Vec<NoiseOp>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        idle_noise: Vec<NoiseOp>,
    },
    Idle {
        register: String,
        ticks: u32,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        noise: Vec<NoiseOp>,
    },
}

impl Gadget {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Gadget::Reset { .. } => "reset",
            Gadget::Unitary { .. } => "unitary",
            Gadget::Measure { .. } => "measure",
            Gadget::Syndrome { .. } => "syndrome",
            Gadget::Idle { .. } => "idle",
        }
    }

    fn strip_noise(&mut self) {
        match self {
            Gadget::Reset { noise, .. }
            | Gadget::Unitary { noise, .. }
            | Gadget::Measure { noise, .. }
            | Gadget::Idle { noise, .. } => noise.clear(),
            Gadget::Syndrome {
                noise,
                readout_noise,
                idle_noise,
                ..
            } => {
                noise.clear();
                readout_noise.clear();
                idle_noise.clear();
            }
        }
    }
}

/// An encoded circuit: registers, an ordered gadget list and named classical wires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    pub schema_version: u32,
    pub d: u32,
    #[serde(default)]
    pub codes: BTreeMap<String, CodeSpec>,
    pub registers: Vec<Register>,
    #[serde(default)]
    pub gadgets: Vec<Gadget>,
    #[serde(default)]
    pub classical_wires: Vec<String>,
}

/// Rule violation found by [`LogicalCircuit::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gadget: Option<usize>,
    pub rule: &'static str,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.gadget {
            Some(g) => write!(f, "gadget {g}: [{}] {}", self.rule, self.message),
            None => write!(f, "[{}] {}", self.rule, self.message),
        }
    }
}

/// Register with its resolved code and global sites.
#[derive(Debug, Clone)]
pub struct ResolvedRegister {
    pub name: String,
    pub kind: RegisterKind,
    pub sites: Vec<usize>,
    pub code: Arc<StabilizerCode>,
}

/// Circuit with codes resolved and names mapped to indices.
#[derive(Debug, Clone)]
pub struct Layout {
    pub d: u32,
    pub n_total: usize,
    pub registers: Vec<ResolvedRegister>,
    pub wires: Vec<String>,
    by_name: HashMap<String, usize>,
}

impl Layout {
    pub fn register(&self, name: &str) -> Result<&ResolvedRegister> {
        self.by_name
            .get(name)
            .map(|&i| &self.registers[i])
            .ok_or_else(|| LrcError::Circuit(format!("unknown register `{name}`")))
    }

    pub fn wire(&self, name: &str) -> Result<usize> {
        self.wires
            .iter()
            .position(|w| w == name)
            .ok_or_else(|| LrcError::Circuit(format!("undeclared classical wire `{name}`")))
    }

    pub fn dim(&self) -> usize {
        (self.d as usize).pow(self.n_total as u32)
    }
}

impl LogicalCircuit {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            let path = e.path().to_string();
            LrcError::Schema {
                path: if inner.line() > 0 {
                    format!("{path} (line {}, column {})", inner.line(), inner.column())
                } else {
                    path
                },
                message: inner.to_string(),
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn strip_noise(&self) -> Self {
        let mut c = self.clone();
        for g in &mut c.gadgets {
            g.strip_noise();
        }
        c
    }

    /// Resolve codes and registers. Fails on the first structural problem;
    /// use [`validate`](Self::validate) for a full diagnostic list.
    pub fn layout(&self) -> Result<Layout> {
        let mut codes = BTreeMap::new();
        for (name, spec) in &self.codes {
            let code = spec
                .resolve()
                .map_err(|e| LrcError::Circuit(format!("code `{name}`: {e}")))?;
            if code.d() != self.d {
                return Err(LrcError::Circuit(format!(
                    "code `{name}` has d={} but circuit has d={}",
                    code.d(),
                    self.d
                )));
            }
            codes.insert(name.clone(), Arc::new(code));
        }
        let mut registers = Vec::new();
        let mut by_name = HashMap::new();
        let mut used = BTreeSet::new();
        for reg in &self.registers {
            if by_name.insert(reg.name.clone(), registers.len()).is_some() {
                return Err(LrcError::Circuit(format!(
                    "duplicate register `{}`",
                    reg.name
                )));
            }
            if reg.qudits.is_empty() {
                return Err(LrcError::Circuit(format!(
                    "register `{}` has no qudits",
                    reg.name
                )));
            }
            for &q in &reg.qudits {
                if !used.insert(q) {
                    return Err(LrcError::Circuit(format!(
                        "qudit {q} belongs to more than one register"
                    )));
                }
            }
            let code = match reg.kind {
                RegisterKind::Logical => {
                    let cname = reg.code.as_ref().ok_or_else(|| {
                        LrcError::Circuit(format!("logical register `{}` needs a code", reg.name))
                    })?;
                    let code = codes.get(cname).cloned().ok_or_else(|| {
                        LrcError::Circuit(format!(
                            "register `{}` uses undeclared code `{cname}`",
                            reg.name
                        ))
                    })?;
                    if code.n() != reg.qudits.len() {
                        return Err(LrcError::Circuit(format!(
                            "register `{}` has {} qudits but its code has n={}",
                            reg.name,
                            reg.qudits.len(),
                            code.n()
                        )));
                    }
                    code
                }
                RegisterKind::Readout => {
                    Arc::new(StabilizerCode::trivial(self.d, reg.qudits.len())?)
                }
            };
            registers.push(ResolvedRegister {
                name: reg.name.clone(),
                kind: reg.kind,
                sites: reg.qudits.clone(),
                code,
            });
        }
        let n_total = used.len();
        if used.iter().copied().ne(0..n_total) {
            return Err(LrcError::Circuit(format!(
                "register qudits must cover 0..{n_total} without gaps"
            )));
        }
        let mut wires = Vec::new();
        for w in &self.classical_wires {
            if wires.contains(w) {
                return Err(LrcError::Circuit(format!("duplicate classical wire `{w}`")));
            }
            wires.push(w.clone());
        }
        Ok(Layout {
            d: self.d,
            n_total,
            registers,
            wires,
            by_name,
        })
    }

    /// All rule violations; empty iff the circuit is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            diags.push(Diagnostic {
                gadget: None,
                rule: "schema_version",
                message: format!("unsupported schema_version {}", self.schema_version),
            });
        }
        let layout = match self.layout() {
            Ok(l) => l,
            Err(e) => {
                diags.push(Diagnostic {
                    gadget: None,
                    rule: "layout",
                    message: e.to_string(),
                });
                return diags;
            }
        };
        let mut measured: BTreeSet<String> = BTreeSet::new();
        let mut written: BTreeSet<String> = BTreeSet::new();
        for (gi, gadget) in self.gadgets.iter().enumerate() {
            let mut push = |rule: &'static str, message: String| {
                diags.push(Diagnostic {
                    gadget: Some(gi),
                    rule,
                    message,
                })
            };
            if let Err(e) = check_gadget(&layout, gadget) {
                push("gadget", e.to_string());
                continue;
            }
            let uses = |name: &str, push: &mut dyn FnMut(&'static str, String)| {
                if measured.contains(name) {
                    push(
                        "reset_before_reuse",
                        format!("register `{name}` was measured and must be reset before reuse"),
                    );
                }
            };
            match gadget {
                Gadget::Reset { register, .. } => {
                    measured.remove(register);
                }
                Gadget::Unitary { registers, .. } => {
                    for r in registers {
                        uses(r, &mut push);
                    }
                }
                Gadget::Idle { register, .. } => uses(register, &mut push),
                Gadget::Measure { register, wire, .. } => {
                    uses(register, &mut push);
                    measured.insert(register.clone());
                    if !written.insert(wire.clone()) {
                        push(
                            "wire_written_once",
                            format!("wire `{wire}` written more than once"),
                        );
                    }
                }
                Gadget::Syndrome {
                    register,
                    readout,
                    wire,
                    ..
                } => {
                    uses(register, &mut push);
                    uses(readout, &mut push);
                    measured.insert(readout.clone());
                    if !written.insert(wire.clone()) {
                        push(
                            "wire_written_once",
                            format!("wire `{wire}` written more than once"),
                        );
                    }
                }
            }
        }
        for w in &layout.wires {
            if !written.contains(w) {
                diags.push(Diagnostic {
                    gadget: None,
                    rule: "wire_written_once",
                    message: format!("wire `{w}` is never written"),
                });
            }
        }
        diags
    }

    /// `Ok` iff [`validate`](Self::validate) reports nothing.
    pub fn ensure_valid(&self) -> Result<Layout> {
        let diags = self.validate();
        if let Some(first) = diags.first() {
            let rest = diags.len() - 1;
            let suffix = if rest > 0 {
                format!(" (and {rest} more)")
            } else {
                String::new()
            };
            return Err(LrcError::Circuit(format!("{first}{suffix}")));
        }
        self.layout()
    }
}

/// Global sites a gadget touches, in footprint order.
pub fn footprint(layout: &Layout, gadget: &Gadget) -> Result<Vec<usize>> {
    Ok(match gadget {
        Gadget::Reset { register, .. }
        | Gadget::Measure { register, .. }
        | Gadget::Idle { register, .. } => layout.register(register)?.sites.clone(),
        Gadget::Unitary { registers, .. } => {
            let mut sites = Vec::new();
            for r in registers {
                sites.extend_from_slice(&layout.register(r)?.sites);
            }
            sites
        }
        Gadget::Syndrome {
            register, readout, ..
        } => {
            let mut sites = layout.register(register)?.sites.clone();
            sites.extend_from_slice(&layout.register(readout)?.sites);
            sites
        }
    })
}

fn check_noise(noise: &[NoiseOp], footprint_len: usize, d: u32) -> Result<()> {
    for op in noise {
        lower_noise_op(op, &(0..footprint_len).collect::<Vec<_>>(), d)?;
    }
    Ok(())
}

fn check_gadget(layout: &Layout, gadget: &Gadget) -> Result<()> {
    let d = layout.d;
    let fp = footprint(layout, gadget)?;
    match gadget {
        Gadget::Reset {
            register,
            state,
            noise,
        } => {
            let reg = layout.register(register)?;
            if !state.is_empty() && state.len() != reg.code.k() {
                return Err(LrcError::Circuit(format!(
                    "reset state needs {} dits",
                    reg.code.k()
                )));
            }
            if state.iter().any(|&s| s >= d) {
                return Err(LrcError::Circuit("reset state dit out of range".into()));
            }
            check_noise(noise, fp.len(), d)
        }
        Gadget::Unitary {
            registers,
            realization,
            twirl,
            noise,
            ..
        } => {
            let distinct: BTreeSet<&String> = registers.iter().collect();
            if distinct.len() != registers.len() || registers.is_empty() {
                return Err(LrcError::Circuit(
                    "unitary gadget registers must be distinct and nonempty".into(),
                ));
            }
            check_realization(realization, fp.len(), d)?;
            match twirl {
                TwirlGroupSpec::Dihedral => {
                    if fp.len() != 1 || d != 2 {
                        return Err(LrcError::Circuit(
                            "dihedral twirl needs a single-qubit footprint".into(),
                        ));
                    }
                }
                TwirlGroupSpec::Custom(elems) => {
                    if elems.is_empty() {
                        return Err(LrcError::Circuit("custom twirl group is empty".into()));
                    }
                    let dim = (d as usize).pow(fp.len() as u32);
                    for e in elems {
                        let m = e.to_matrix()?;
                        if m.nrows() != dim || !is_unitary(&m, 1e-10) {
                            return Err(LrcError::Circuit(
                                "custom twirl element is not a unitary on the footprint".into(),
                            ));
                        }
                    }
                }
                _ => {}
            }
            check_noise(noise, fp.len(), d)
        }
        Gadget::Measure {
            register,
            observable,
            wire,
            noise,
        } => {
            let reg = layout.register(register)?;
            layout.wire(wire)?;
            if reg.code.k() == 0 {
                return Err(LrcError::Circuit(
                    "cannot measure a register with no logical qudits".into(),
                ));
            }
            if let Some(w) = observable {
                if w.n() != reg.code.n() || w.d() != d {
                    return Err(dim_err("observable does not act on the register"));
                }
                if !w.pow(d).is_identity() {
                    return Err(LrcError::Circuit(format!(
                        "observable {w} does not satisfy W^d = I"
                    )));
                }
                for s in reg.code.stabilizer_generators() {
                    if !w.commutes_with(s)? {
                        return Err(LrcError::Circuit(format!(
                            "observable {w} is not a logical operator"
                        )));
                    }
                }
            }
            check_noise(noise, fp.len(), d)
        }
        Gadget::Syndrome {
            register,
            generator,
            readout,
            wire,
            noise,
            readout_noise,
            idle_noise,
        } => {
            let reg = layout.register(register)?;
            let ro = layout.register(readout)?;
            layout.wire(wire)?;
            if reg.kind != RegisterKind::Logical {
                return Err(LrcError::Circuit(
                    "syndrome extraction needs a logical register".into(),
                ));
            }
            if ro.kind != RegisterKind::Readout || ro.sites.len() != 1 {
                return Err(LrcError::Circuit(
                    "syndrome extraction needs a single-qudit readout register".into(),
                ));
            }
            if *generator >= reg.code.stabilizer_generators().len() {
                return Err(LrcError::Circuit(format!(
                    "generator index {generator} out of range"
                )));
            }
            check_noise(noise, fp.len(), d)?;
            check_noise(readout_noise, 1, d)?;
            check_noise(idle_noise, reg.sites.len(), d)
        }
        Gadget::Idle {
            register, noise, ..
        } => {
            layout.register(register)?;
            check_noise(noise, fp.len(), d)
        }
    }
}

fn check_realization(real: &Realization, len: usize, d: u32) -> Result<()> {
    match real {
        Realization::Weyl(w) => {
            if w.n() != len || w.d() != d {
                return Err(dim_err("Weyl realization does not match the footprint"));
            }
        }
        Realization::Matrix(m) => {
            let m = m.to_matrix()?;
            if m.nrows() != (d as usize).pow(len as u32) || !is_unitary(&m, 1e-10) {
                return Err(LrcError::Circuit(
                    "matrix realization is not a unitary on the footprint".into(),
                ));
            }
        }
        Realization::Gates(gs) => {
            for g in gs {
                let arity = gates::gate_arity(&g.gate)
                    .ok_or_else(|| LrcError::Circuit(format!("unknown gate `{}`", g.gate)))?;
                if g.sites.len() != arity || g.sites.iter().any(|&s| s >= len) {
                    return Err(LrcError::Circuit(format!(
                        "gate `{}` has bad sites {:?}",
                        g.gate, g.sites
                    )));
                }
                let distinct: BTreeSet<_> = g.sites.iter().collect();
                if distinct.len() != arity {
                    return Err(LrcError::Circuit(format!(
                        "gate `{}` repeats a site",
                        g.gate
                    )));
                }
                gates::gate_matrix(&g.gate, d)?;
            }
        }
    }
    Ok(())
}

fn map_sites(local: &[usize], footprint: &[usize]) -> Result<Vec<usize>> {
    if local.is_empty() {
        return Ok(footprint.to_vec());
    }
    local
        .iter()
        .map(|&s| {
            footprint.get(s).copied().ok_or_else(|| {
                dim_err(format!(
                    "noise site {s} outside a footprint of {}",
                    footprint.len()
                ))
            })
        })
        .collect()
}

/// Lower one noise op to physical operations on global `footprint` sites.
pub fn lower_noise_op(op: &NoiseOp, footprint: &[usize], d: u32) -> Result<PhysOp> {
    let sites = map_sites(op.sites(), footprint)?;
    let ld = (d as usize).pow(sites.len() as u32);
    Ok(match op {
        NoiseOp::Rotation { weyl, theta, .. } => {
            if weyl.n() != sites.len() || weyl.d() != d {
                return Err(dim_err(format!(
                    "rotation generator {weyl} does not match {} sites",
                    sites.len()
                )));
            }
            PhysOp::Unitary {
                sites,
                matrix: rotation_unitary(weyl, *theta)?,
            }
        }
        NoiseOp::StochasticWeyl { terms, .. } => {
            validate_distribution(terms.iter().map(|t| t.p))?;
            let mut out = Vec::with_capacity(terms.len());
            for t in terms {
                if t.weyl.n() != sites.len() || t.weyl.d() != d {
                    return Err(dim_err("stochastic Weyl term does not match its sites"));
                }
                out.push((t.p, t.weyl.to_matrix()?));
            }
            PhysOp::Mixture { sites, terms: out }
        }
        NoiseOp::Unitary { matrix, .. } => {
            let m = matrix.to_matrix()?;
            if m.nrows() != ld || m.ncols() != ld {
                return Err(dim_err(format!(
                    "noise unitary is {}x{} on {} sites",
                    m.nrows(),
                    m.ncols(),
                    sites.len()
                )));
            }
            if !is_unitary(&m, 1e-10) {
                return Err(LrcError::Circuit("noise matrix is not unitary".into()));
            }
            PhysOp::Unitary { sites, matrix: m }
        }
        NoiseOp::Superoperator { matrix, .. } => {
            let m = matrix.to_matrix()?;
            if m.nrows() != ld * ld || m.ncols() != ld * ld {
                return Err(dim_err(format!(
                    "noise superoperator is {}x{} on {} sites",
                    m.nrows(),
                    m.ncols(),
                    sites.len()
                )));
            }
            PhysOp::Channel { sites, superop: m }
        }
    })
}

pub fn lower_noise(noise: &[NoiseOp], footprint: &[usize], d: u32) -> Result<Vec<PhysOp>> {
    noise
        .iter()
        .map(|op| lower_noise_op(op, footprint, d))
        .collect()
}

/// Physical operations of a realization on global `footprint` sites.
pub fn lower_realization(
    real: &Realization,
    footprint: &[usize],
    d: u32,
    n_total: usize,
) -> Result<Vec<PhysOp>> {
    check_realization(real, footprint.len(), d)?;
    Ok(match real {
        Realization::Weyl(w) => vec![PhysOp::Weyl(w.embed(footprint, n_total)?)],
        Realization::Matrix(m) => vec![PhysOp::Unitary {
            sites: footprint.to_vec(),
            matrix: m.to_matrix()?,
        }],
        Realization::Gates(gs) => gs
            .iter()
            .map(|g| {
                Ok(PhysOp::Unitary {
                    sites: g.sites.iter().map(|&s| footprint[s]).collect(),
                    matrix: gates::gate_matrix(&g.gate, d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    })
}

/// Dense unitary of a realization on its own footprint.
pub fn realization_matrix(real: &Realization, len: usize, d: u32) -> Result<Matrix> {
    let dim = (d as usize).pow(len as u32);
    crate::linalg::check_dense("realization matrix", dim)?;
    check_realization(real, len, d)?;
    Ok(match real {
        Realization::Weyl(w) => w.to_matrix()?,
        Realization::Matrix(m) => m.to_matrix()?,
        Realization::Gates(gs) => {
            let mut u = Matrix::identity(dim, dim);
            for g in gs {
                let map = SiteMap::new(d as usize, len, &g.sites);
                apply_left(&mut u, &gates::gate_matrix(&g.gate, d)?, &map);
            }
            u
        }
    })
}
