//! Running templates: single instances, literal averages and exact averages.

use std::collections::BTreeMap;

use crate::circuit::eval::{accumulate, Branches, Evaluator};
use crate::error::Result;

use super::{Template, TemplateOp};

pub fn run_instance(
    t: &Template,
    ev: &Evaluator,
    input: Branches,
    assignment: &[u32],
) -> Result<Branches> {
    ev.run(&t.concretize(assignment)?, input)
}

/// Uniform average of the outputs of the given assignments.
pub fn average_assignments<I>(
    t: &Template,
    ev: &Evaluator,
    input: &Branches,
    assignments: I,
) -> Result<Branches>
where
    I: IntoIterator<Item = Vec<u32>>,
{
    let mut sum = Branches::new();
    let mut count = 0usize;
    for a in assignments {
        let out = run_instance(t, ev, input.clone(), &a)?;
        accumulate(&mut sum, &out, 1.0);
        count += 1;
    }
    if count > 0 {
        for p in sum.values_mut() {
            p.scale(1.0 / count as f64);
        }
    }
    Ok(sum)
}

/// Layers split into single factors so that variables local to one layer
/// are summed out one at a time.
fn steps(t: &Template) -> Vec<TemplateOp> {
    let mut out = Vec::new();
    for op in &t.ops {
        match op {
            TemplateOp::Layer(fs) => {
                out.extend(fs.iter().map(|f| TemplateOp::Layer(vec![f.clone()])))
            }
            other => out.push(other.clone()),
        }
    }
    out
}

/// Exact average over every assignment by variable elimination: each variable
/// is expanded at its first use and summed out after its last.
pub fn average_exact(t: &Template, ev: &Evaluator, input: Branches) -> Result<Branches> {
    let steps = steps(t);
    let nv = t.vars.len();
    let mut first = vec![usize::MAX; nv];
    let mut last = vec![0usize; nv];
    for (i, op) in steps.iter().enumerate() {
        for v in op.vars() {
            first[v] = first[v].min(i);
            last[v] = i;
        }
    }
    let mut state: BTreeMap<Vec<Option<u32>>, Branches> = BTreeMap::new();
    state.insert(vec![None; nv], input);
    for (i, op) in steps.iter().enumerate() {
        let mut vars = op.vars();
        vars.sort_unstable();
        vars.dedup();
        for &v in vars.iter().filter(|&&v| first[v] == i) {
            let mut next = BTreeMap::new();
            for (a, br) in state {
                for value in 0..t.vars[v].domain() {
                    let mut a2 = a.clone();
                    a2[v] = Some(value);
                    next.insert(a2, br.clone());
                }
            }
            state = next;
        }
        let mut next = BTreeMap::new();
        for (a, br) in state {
            let ops = op.concretize(|v| a[v].expect("live variable"))?;
            let out = ev.run(&ops, br)?;
            next.insert(a, out);
        }
        state = next;
        for &v in vars.iter().filter(|&&v| last[v] == i) {
            let f = 1.0 / f64::from(t.vars[v].domain());
            let mut next: BTreeMap<Vec<Option<u32>>, Branches> = BTreeMap::new();
            for (mut a, br) in state {
                a[v] = None;
                accumulate(next.entry(a).or_default(), &br, f);
            }
            state = next;
        }
    }
    Ok(state.into_values().next().unwrap_or_default())
}
