import init, { toffoli, readout_confusion, t_gate_twirl } from "./pkg/lrc_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (Math.abs(x) < 1e-12 ? "0" : x.toPrecision(6));

function table(head, rows) {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const body = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${th}</tr>${body}</table>`;
}

// Runs after the status text has painted; the computations are synchronous.
function run(name, compute, render) {
  const status = $(`${name}-status`);
  const out = $(`${name}-out`);
  status.textContent = "running…";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      out.innerHTML = render(JSON.parse(compute()));
      status.textContent = `${((performance.now() - t0) / 1000).toFixed(2)} s`;
    } catch (e) {
      out.innerHTML = `<p class="error">${e.message ?? e}</p>`;
      status.textContent = "";
    }
  }, 20);
}

function renderToffoli(doc) {
  const { before, after } = doc.outcome;
  const keys = Object.keys(after.populations);
  const rows = [
    ["inter-cospace coherence", fmt(before.inter_cospace), fmt(after.inter_cospace)],
    ["intra-cospace coherence", fmt(before.intra_cospace), fmt(after.intra_cospace)],
    ...keys.map((k) => [`population, syndrome ${k}`, fmt(before.populations[k]), fmt(after.populations[k])]),
  ];
  return table(["third block", "bare", "averaged"], rows);
}

function renderReadout(doc) {
  const c = doc.confusion;
  return (
    table(["reported \\ true", "0", "1"], [["0", fmt(c[0][0]), fmt(c[0][1])], ["1", fmt(c[1][0]), fmt(c[1][1])]]) +
    `<p>sin²θ = ${fmt(doc.flip_probability)}; factorization residual ${fmt(doc.report.value)}</p>`
  );
}

function renderTgate(doc) {
  const row = (name, d) => [name, ...d.rates_ixyz.map(fmt), fmt(d.max_offdiagonal)];
  return table(["", "p_I", "p_X", "p_Y", "p_Z", "max off-diagonal"], [row("bare", doc.trivial), row("dihedral twirl", doc.dihedral)]);
}

await init();
$("run-toffoli").onclick = () => run("toffoli", () => toffoli(Number($("delta").value)), renderToffoli);
$("run-readout").onclick = () => run("readout", () => readout_confusion(Number($("theta").value)), renderReadout);
$("run-tgate").onclick = () =>
  run("tgate", () => t_gate_twirl(Number($("t-theta").value), $("t-axis").value), renderTgate);
