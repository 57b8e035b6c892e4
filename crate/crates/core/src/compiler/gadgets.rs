//! Per-gadget lowering into template operations.

use crate::circuit::eval::PhysOp;
use crate::circuit::gates::gate_matrix;
use crate::circuit::{
    footprint, lower_noise, lower_realization, realization_matrix, Gadget, Layout, LogicalCircuit,
    Realization, ResolvedRegister, TwirlGroupSpec,
};
use crate::code::eigenprojector;
use crate::error::{LrcError, Result};
use crate::linalg::{dft, phase_insensitive_diff, Matrix, Vector, C64};
use crate::weyl::WeylOperator;

use super::{GadgetToggles, RandomVar, RandomizationPolicy, Template, TemplateOp, WeylFactor};

/// Readout correction `G(A, L)` for a controlled-`A` coupling twirled by `L`:
/// with `L` applied before the coupling, applying `L^dagger` on the block and
/// `G` on the control afterwards restores the ideal coupling.
pub fn propagation_correction(a: &WeylOperator, l: &WeylOperator) -> Result<WeylOperator> {
    let e = a.braiding_dit(l)?;
    Ok(WeylOperator::z_at(a.d(), 1, 0).pow(e))
}

/// Random variable over a table of global Weyl operators.
#[derive(Clone)]
struct GroupVar {
    var: usize,
    table: Vec<WeylOperator>,
}

impl GroupVar {
    fn factor(&self) -> WeylFactor {
        WeylFactor::Var {
            var: self.var,
            table: self.table.clone(),
        }
    }

    fn dagger(&self) -> WeylFactor {
        WeylFactor::Var {
            var: self.var,
            table: self.table.iter().map(WeylOperator::dagger).collect(),
        }
    }

    fn mapped(&self, table: Vec<WeylOperator>) -> WeylFactor {
        WeylFactor::Var {
            var: self.var,
            table,
        }
    }
}

struct Builder<'a> {
    layout: &'a Layout,
    t: Template,
    gadget: usize,
}

impl<'a> Builder<'a> {
    fn n_total(&self) -> usize {
        self.layout.n_total
    }

    fn d(&self) -> u32 {
        self.layout.d
    }

    fn new_var(&mut self, name: &str, labels: Vec<String>) -> Option<usize> {
        if labels.len() <= 1 {
            return None;
        }
        self.t.vars.push(RandomVar {
            gadget: self.gadget,
            name: name.to_string(),
            labels,
        });
        Some(self.t.vars.len() - 1)
    }

    /// Variable uniform over `group` (register-level ops) embedded at `sites`.
    fn group_var(
        &mut self,
        name: &str,
        group: &[WeylOperator],
        sites: &[usize],
    ) -> Result<Option<GroupVar>> {
        let labels = group.iter().map(WeylOperator::label).collect();
        let Some(var) = self.new_var(name, labels) else {
            return Ok(None);
        };
        let table = group
            .iter()
            .map(|g| g.embed(sites, self.n_total()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(GroupVar { var, table }))
    }

    fn stabilizer_var(
        &mut self,
        name: &str,
        reg: &ResolvedRegister,
        on: bool,
    ) -> Result<Option<GroupVar>> {
        if !on {
            return Ok(None);
        }
        self.group_var(name, reg.code.enumerate_stabilizers(), &reg.sites)
    }

    /// Variable over `Z_d`.
    fn dit_var(&mut self, name: &str) -> Option<usize> {
        self.new_var(name, (0..self.d()).map(|v| v.to_string()).collect())
    }

    fn push(&mut self, op: TemplateOp) {
        self.t.push(op);
    }

    fn fixed(&mut self, ops: Vec<PhysOp>) {
        for op in ops {
            self.push(TemplateOp::Fixed(op));
        }
    }

    fn layer(&mut self, factors: Vec<WeylFactor>) {
        if !factors.is_empty() {
            self.push(TemplateOp::Layer(factors));
        }
    }
}

fn factors(vars: &[&Option<GroupVar>]) -> Vec<WeylFactor> {
    vars.iter()
        .filter_map(|v| v.as_ref().map(GroupVar::factor))
        .collect()
}

fn zero_state(dim: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[0] = C64::new(1.0, 0.0);
    v
}

pub(super) fn build(
    circuit: &LogicalCircuit,
    layout: &Layout,
    policy: &RandomizationPolicy,
) -> Result<Template> {
    let mut b = Builder {
        layout,
        t: Template {
            d: layout.d,
            n_total: layout.n_total,
            num_wires: layout.wires.len(),
            vars: Vec::new(),
            ops: Vec::new(),
        },
        gadget: 0,
    };
    for (i, g) in circuit.gadgets.iter().enumerate() {
        b.gadget = i;
        let toggles = policy.toggles.for_gadget(i);
        lower_gadget(&mut b, g, toggles).map_err(|e| match e {
            LrcError::Compile(msg) => LrcError::Compile(format!("gadget {i}: {msg}")),
            other => other,
        })?;
    }
    Ok(b.t)
}

fn lower_gadget(b: &mut Builder, g: &Gadget, tg: GadgetToggles) -> Result<()> {
    let layout = b.layout;
    let d = layout.d;
    let fp = footprint(layout, g)?;
    match g {
        Gadget::Reset {
            register,
            state,
            noise,
        } => {
            let reg = layout.register(register)?;
            let dits = if state.is_empty() {
                vec![0; reg.code.k()]
            } else {
                state.clone()
            };
            b.fixed(vec![PhysOp::Prepare {
                sites: fp.clone(),
                state: reg.code.logical_basis_state(&dits)?,
            }]);
            b.fixed(lower_noise(noise, &fp, d)?);
            let s = b.stabilizer_var("S", reg, tg.stabilizers)?;
            b.layer(factors(&[&s]));
        }
        Gadget::Unitary {
            registers,
            realization,
            twirl,
            noise,
            ..
        } => {
            let regs = registers
                .iter()
                .map(|r| layout.register(r))
                .collect::<Result<Vec<_>>>()?;
            lower_unitary(
                b,
                &regs,
                &fp,
                realization,
                if tg.twirl {
                    twirl
                } else {
                    &TwirlGroupSpec::Trivial
                },
                noise,
                tg,
            )?;
        }
        Gadget::Measure {
            register,
            observable,
            wire,
            noise,
        } => {
            let reg = layout.register(register)?;
            let w = observable
                .clone()
                .unwrap_or_else(|| reg.code.logical_z(0).clone());
            let wire = layout.wire(wire)?;
            let s = b.stabilizer_var("S", reg, tg.stabilizers)?;
            let p = if tg.measurement_rc {
                b.group_var("P", reg.code.logical_group(), &reg.sites)?
            } else {
                None
            };
            b.layer(factors(&[&p, &s]));
            b.fixed(lower_noise(noise, &fp, d)?);
            let outcomes = (0..d)
                .map(|m| Ok((m, eigenprojector(&w, m)?)))
                .collect::<Result<Vec<_>>>()?;
            b.fixed(vec![PhysOp::Measure {
                sites: fp.clone(),
                outcomes,
                wire,
                reset: Some(zero_state((d as usize).pow(fp.len() as u32))),
            }]);
            if let Some(p) = p {
                let adds = reg
                    .code
                    .logical_group()
                    .iter()
                    .map(|op| Ok((d - op.braiding_dit(&w)?) % d))
                    .collect::<Result<Vec<_>>>()?;
                b.push(TemplateOp::AddVar {
                    wire,
                    var: p.var,
                    adds,
                });
            }
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
            let wire = layout.wire(wire)?;
            lower_syndrome(
                b,
                reg,
                ro,
                *generator,
                wire,
                &fp,
                noise,
                readout_noise,
                idle_noise,
                tg,
            )?;
        }
        Gadget::Idle {
            register,
            ticks,
            noise,
        } => {
            let reg = layout.register(register)?;
            let mut prev: Option<GroupVar> = None;
            for t in 0..*ticks {
                let s = b.stabilizer_var(&format!("S[{t}]"), reg, tg.stabilizers)?;
                let l = if tg.twirl {
                    b.group_var(&format!("L[{t}]"), reg.code.logical_group(), &reg.sites)?
                } else {
                    None
                };
                let mut fs: Vec<WeylFactor> = prev.iter().map(GroupVar::dagger).collect();
                fs.extend(factors(&[&s, &l]));
                b.layer(fs);
                b.fixed(lower_noise(noise, &fp, d)?);
                prev = l;
            }
            let s = b.stabilizer_var(&format!("S[{ticks}]"), reg, tg.stabilizers)?;
            let mut fs: Vec<WeylFactor> = prev.iter().map(GroupVar::dagger).collect();
            fs.extend(factors(&[&s]));
            b.layer(fs);
        }
    }
    Ok(())
}

/// Product of the logical groups of several registers as global operators,
/// with the matching footprint-local operators and labels.
fn product_logical_group(
    regs: &[&ResolvedRegister],
    n_total: usize,
) -> Result<(Vec<WeylOperator>, Vec<WeylOperator>, Vec<String>)> {
    let d = regs[0].code.d();
    let mut global = vec![WeylOperator::identity(d, n_total)];
    let mut local: Vec<Option<WeylOperator>> = vec![None];
    let mut labels = vec![String::new()];
    for reg in regs {
        let group = reg.code.logical_group();
        let mut g2 = Vec::with_capacity(global.len() * group.len());
        let mut l2 = Vec::with_capacity(global.len() * group.len());
        let mut lab2 = Vec::with_capacity(global.len() * group.len());
        for ((g, l), lab) in global.iter().zip(&local).zip(&labels) {
            for op in group {
                g2.push(g.mul(&op.embed(&reg.sites, n_total)?)?);
                l2.push(Some(match l {
                    None => op.clone(),
                    Some(l) => l.tensor(op)?,
                }));
                lab2.push(if lab.is_empty() {
                    op.label()
                } else {
                    format!("{lab} {}", op.label())
                });
            }
        }
        global = g2;
        local = l2;
        labels = lab2;
    }
    Ok((
        global,
        local
            .into_iter()
            .map(|l| l.expect("at least one register"))
            .collect(),
        labels,
    ))
}

fn lower_unitary(
    b: &mut Builder,
    regs: &[&ResolvedRegister],
    fp: &[usize],
    realization: &Realization,
    twirl: &TwirlGroupSpec,
    noise: &[crate::circuit::NoiseOp],
    tg: GadgetToggles,
) -> Result<()> {
    let d = b.d();
    let n_total = b.n_total();
    let multi = regs.len() > 1;
    let sname = |prefix: &str, r: &ResolvedRegister| {
        if multi {
            format!("{prefix}:{}", r.name)
        } else {
            prefix.to_string()
        }
    };
    let mut before = Vec::new();
    for r in regs {
        before.push(b.stabilizer_var(&sname("S", r), r, tg.stabilizers)?);
    }
    let u_ops = lower_realization(realization, fp, d, n_total)?;
    let noise_ops = lower_noise(noise, fp, d)?;

    match twirl {
        TwirlGroupSpec::Trivial => {
            b.layer(factors(&before.iter().collect::<Vec<_>>()));
            b.fixed(u_ops);
            b.fixed(noise_ops);
        }
        TwirlGroupSpec::LogicalWeyl => {
            let (global, local, labels) = product_logical_group(regs, n_total)?;
            let l = b.new_var("L", labels).map(|var| GroupVar {
                var,
                table: global.clone(),
            });
            let mut fs = factors(&before.iter().collect::<Vec<_>>());
            fs.extend(l.iter().map(GroupVar::factor));
            b.layer(fs);
            b.fixed(u_ops);
            b.fixed(noise_ops);
            if let Some(l) = &l {
                match weyl_after_table(realization, fp, &global, &local, d, n_total)? {
                    Ok(table) => b.layer(vec![l.mapped(table)]),
                    Err(mats) => b.push(TemplateOp::Choice {
                        var: l.var,
                        options: mats
                            .into_iter()
                            .map(|m| {
                                vec![PhysOp::Unitary {
                                    sites: fp.to_vec(),
                                    matrix: m,
                                }]
                            })
                            .collect(),
                    }),
                }
            }
        }
        TwirlGroupSpec::Custom(elems) => {
            let u = realization_matrix(realization, fp.len(), d)?;
            let mats = elems
                .iter()
                .map(|e| e.to_matrix())
                .collect::<Result<Vec<_>>>()?;
            let labels = (0..mats.len()).map(|i| format!("g{i}")).collect();
            b.layer(factors(&before.iter().collect::<Vec<_>>()));
            let var = b.new_var("G", labels);
            let unitary = |m: Matrix| {
                vec![PhysOp::Unitary {
                    sites: fp.to_vec(),
                    matrix: m,
                }]
            };
            let afters: Vec<Vec<PhysOp>> = mats
                .iter()
                .map(|m| unitary(&u * m.adjoint() * u.adjoint()))
                .collect();
            match var {
                Some(var) => b.push(TemplateOp::Choice {
                    var,
                    options: mats.iter().map(|m| unitary(m.clone())).collect(),
                }),
                None => b.fixed(unitary(mats[0].clone())),
            }
            b.fixed(u_ops);
            b.fixed(noise_ops);
            match var {
                Some(var) => b.push(TemplateOp::Choice {
                    var,
                    options: afters,
                }),
                None => b.fixed(afters.into_iter().next().expect("one element")),
            }
        }
        TwirlGroupSpec::Dihedral => {
            lower_dihedral(b, regs[0], fp, realization, before, u_ops, noise_ops)?
        }
    }

    let mut after = Vec::new();
    for r in regs {
        after.push(b.stabilizer_var(&sname("S'", r), r, tg.stabilizers)?);
    }
    b.layer(factors(&after.iter().collect::<Vec<_>>()));
    Ok(())
}

/// Global Weyl operators `U G^dagger U^dagger` for each `G`, or the dense
/// matrices on the footprint when some of them are not Weyl.
fn weyl_after_table(
    realization: &Realization,
    fp: &[usize],
    global: &[WeylOperator],
    local: &[WeylOperator],
    d: u32,
    n_total: usize,
) -> Result<std::result::Result<Vec<WeylOperator>, Vec<Matrix>>> {
    if let Realization::Weyl(w) = realization {
        let u = w.embed(fp, n_total)?;
        let table = global
            .iter()
            .map(|g| u.mul(&g.dagger())?.mul(&u.dagger()))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Ok(table));
    }
    let u = realization_matrix(realization, fp.len(), d)?;
    let mut mats = Vec::with_capacity(local.len());
    for g in local {
        mats.push(&u * g.dagger().to_matrix()? * u.adjoint());
    }
    let mut table = Vec::with_capacity(mats.len());
    for m in &mats {
        match WeylOperator::from_matrix_projective(m, d, fp.len(), 1e-9) {
            Some((op, _)) => table.push(op.embed(fp, n_total)?),
            None => return Ok(Err(mats)),
        }
    }
    Ok(Ok(table))
}

/// Twirl of a single-qubit `T` gate by `G = R L` with `R = U^{2r}`.
fn lower_dihedral(
    b: &mut Builder,
    reg: &ResolvedRegister,
    fp: &[usize],
    realization: &Realization,
    before: Vec<Option<GroupVar>>,
    u_ops: Vec<PhysOp>,
    noise_ops: Vec<PhysOp>,
) -> Result<()> {
    let d = b.d();
    let n_total = b.n_total();
    let u = realization_matrix(realization, fp.len(), d)?;
    if phase_insensitive_diff(&u, &gate_matrix("t", 2)?) > 1e-9 {
        return Err(LrcError::Compile(
            "dihedral twirl requires a T gate realization".into(),
        ));
    }
    let u2 = &u * &u;
    let group = reg.code.logical_group().to_vec();
    let l = b.group_var("L", &group, fp)?;
    let mut fs = factors(&before.iter().collect::<Vec<_>>());
    fs.extend(l.iter().map(GroupVar::factor));
    b.layer(fs);

    let powers: Vec<Matrix> = (0..4)
        .scan(Matrix::identity(2, 2), |acc, _| {
            let cur = acc.clone();
            *acc = &*acc * &u2;
            Some(cur)
        })
        .collect();
    let r = b.new_var("R", (0..4).map(|r| format!("T^{}", 2 * r)).collect());
    let unitary = |m: Matrix| {
        vec![PhysOp::Unitary {
            sites: fp.to_vec(),
            matrix: m,
        }]
    };
    let r = r.expect("domain 4");
    b.push(TemplateOp::Choice {
        var: r,
        options: powers
            .iter()
            .enumerate()
            .map(|(i, m)| if i == 0 { vec![] } else { unitary(m.clone()) })
            .collect(),
    });
    b.fixed(u_ops);
    b.fixed(noise_ops);
    b.push(TemplateOp::Choice {
        var: r,
        options: powers
            .iter()
            .enumerate()
            .map(|(i, m)| if i == 0 { vec![] } else { unitary(m.adjoint()) })
            .collect(),
    });
    if let Some(l) = &l {
        let u2_inv = u2.adjoint();
        let mut table = Vec::with_capacity(group.len());
        let mut fixups = Vec::with_capacity(group.len());
        for g in &group {
            let a = g.x()[0];
            let core = &u * g.dagger().to_matrix()? * u.adjoint();
            let w = if a == 1 { &u2_inv * core } else { core };
            let (op, _) =
                WeylOperator::from_matrix_projective(&w, 2, 1, 1e-9).ok_or_else(|| {
                    LrcError::Compile("T conjugation did not reduce to a Weyl operator".into())
                })?;
            table.push(op.embed(fp, n_total)?);
            fixups.push(if a == 1 { unitary(u2.clone()) } else { vec![] });
        }
        b.layer(vec![l.mapped(table)]);
        b.push(TemplateOp::Choice {
            var: l.var,
            options: fixups,
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn lower_syndrome(
    b: &mut Builder,
    reg: &ResolvedRegister,
    ro: &ResolvedRegister,
    generator: usize,
    wire: usize,
    fp: &[usize],
    noise: &[crate::circuit::NoiseOp],
    readout_noise: &[crate::circuit::NoiseOp],
    idle_noise: &[crate::circuit::NoiseOp],
    tg: GadgetToggles,
) -> Result<()> {
    let d = b.d();
    let du = d as usize;
    let n_total = b.n_total();
    let code = &reg.code;
    let a = code.stabilizer_generators()[generator].clone();
    let r = ro.sites[0];
    let r_sites = [r];
    let single = crate::code::StabilizerCode::trivial(d, 1)?;

    let s = b.stabilizer_var("S", reg, tg.stabilizers)?;
    b.layer(factors(&[&s]));
    b.fixed(vec![PhysOp::Unitary {
        sites: vec![r],
        matrix: dft(du),
    }]);
    let (l, p) = if tg.twirl {
        (
            b.group_var("L", code.logical_group(), &reg.sites)?,
            b.group_var("P", single.logical_group(), &r_sites)?,
        )
    } else {
        (None, None)
    };
    b.layer(factors(&[&l, &p]));

    // Controlled-A: sum_c |c><c| (x) A^c on [r] + block.
    let a_mat = a.to_matrix()?;
    let bd = a_mat.nrows();
    let mut ca = Matrix::zeros(du * bd, du * bd);
    let mut power = Matrix::identity(bd, bd);
    for c in 0..du {
        ca.view_mut((c * bd, c * bd), (bd, bd)).copy_from(&power);
        power = &a_mat * power;
    }
    let mut ca_sites = vec![r];
    ca_sites.extend_from_slice(&reg.sites);
    b.fixed(vec![PhysOp::Unitary {
        sites: ca_sites,
        matrix: ca,
    }]);
    b.fixed(lower_noise(noise, fp, d)?);

    let s1 = b.stabilizer_var("S'", reg, tg.stabilizers)?;
    let lhat = if tg.twirl {
        b.group_var("L^", code.logical_group(), &reg.sites)?
    } else {
        None
    };
    let mut fs = Vec::new();
    if let Some(l) = &l {
        fs.push(l.dagger());
        let g_table = code
            .logical_group()
            .iter()
            .map(|lop| propagation_correction(&a, lop)?.embed(&r_sites, n_total))
            .collect::<Result<Vec<_>>>()?;
        fs.push(l.mapped(g_table));
    }
    if let Some(p) = &p {
        fs.push(p.dagger());
        let fix = single
            .logical_group()
            .iter()
            .map(|pop| a.pow((d - pop.x()[0]) % d).embed(&reg.sites, n_total))
            .collect::<Result<Vec<_>>>()?;
        fs.push(p.mapped(fix));
    }
    fs.extend(factors(&[&s1, &lhat]));
    b.layer(fs);
    b.fixed(vec![PhysOp::Unitary {
        sites: vec![r],
        matrix: dft(du).adjoint(),
    }]);

    let (zv, xv) = if tg.measurement_rc {
        (b.dit_var("z"), b.dit_var("x"))
    } else {
        (None, None)
    };
    let z_r = WeylOperator::z_at(d, n_total, r);
    let x_r = WeylOperator::x_at(d, n_total, r);
    let powers = |w: &WeylOperator, sign: i64| -> Vec<WeylOperator> {
        (0..d)
            .map(|v| w.pow(((sign * i64::from(v)).rem_euclid(i64::from(d))) as u32))
            .collect()
    };
    let mut fs = Vec::new();
    if let Some(z) = zv {
        fs.push(WeylFactor::Var {
            var: z,
            table: powers(&z_r, 1),
        });
    }
    if let Some(x) = xv {
        fs.push(WeylFactor::Var {
            var: x,
            table: powers(&x_r, 1),
        });
    }
    b.layer(fs);
    b.fixed(lower_noise(readout_noise, &r_sites, d)?);

    let outcomes = (0..d)
        .map(|m| {
            let mut proj = Matrix::zeros(du, du);
            proj[(m as usize, m as usize)] = C64::new(1.0, 0.0);
            (m, proj)
        })
        .collect();
    b.fixed(vec![PhysOp::Measure {
        sites: vec![r],
        outcomes,
        wire,
        reset: None,
    }]);
    let zp = if tg.measurement_rc {
        b.dit_var("z'")
    } else {
        None
    };
    let mut fs = Vec::new();
    if let Some(x) = xv {
        fs.push(WeylFactor::Var {
            var: x,
            table: powers(&x_r, -1),
        });
    }
    if let Some(z) = zp {
        fs.push(WeylFactor::Var {
            var: z,
            table: powers(&z_r, 1),
        });
    }
    b.layer(fs);
    if let Some(x) = xv {
        b.push(TemplateOp::AddVar {
            wire,
            var: x,
            adds: (0..d).map(|v| (d - v) % d).collect(),
        });
    }
    b.fixed(lower_noise(idle_noise, &reg.sites, d)?);
    let s2 = b.stabilizer_var("S''", reg, tg.stabilizers)?;
    let mut fs: Vec<WeylFactor> = lhat.iter().map(GroupVar::dagger).collect();
    fs.extend(factors(&[&s2]));
    b.layer(fs);
    Ok(())
}
