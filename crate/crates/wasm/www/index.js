import init, { propagationCurve, feasibilityMap, closureCurve } from "./pkg/relaycast_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function report(id, text, failed = false) {
  const el = $(id);
  el.textContent = text;
  el.className = failed ? "status error" : "status";
}

// Line plot of several series sharing one x axis.
function plotLines(canvas, series, yMax) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 5, w - pad - 5, h - pad - 5);
  ctx.fillStyle = "#555";
  ctx.fillText(String(yMax), 2, 14);
  ctx.fillText("0", 2, h - pad);
  const len = Math.max(...series.map((s) => s.values.length));
  ctx.fillText(String(len - 1), w - 25, h - pad + 15);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.values.forEach((v, k) => {
      const x = pad + ((w - pad - 5) * k) / Math.max(len - 1, 1);
      const y = h - pad - ((h - pad - 5) * v) / yMax;
      k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
}

function runPropagation() {
  try {
    const r = JSON.parse(propagationCurve($("run-config").value));
    plotLines($("run-plot"), [
      { values: r.excited, color: "#1f77b4" },
      { values: r.fired, color: "#d62728" },
    ], 1);
    report("run-status",
      `blue: excited share, red: decided share of ${r.witness_size}/${r.n} core nodes\n` +
      `correctness ${r.heaviside_pass}, relay ${r.dirac_pass}, no forgery ${r.unforgeability_pass}` +
      (r.notes.length ? `\n${r.notes.join("\n")}` : ""));
  } catch (e) {
    report("run-status", String(e), true);
  }
}

function runFeasibility() {
  try {
    const r = JSON.parse(feasibilityMap(num("fm-alpha"), num("fm-n"), num("fm-d"), num("fm-lambda"), num("fm-step")));
    const canvas = $("fm-plot");
    const ctx = canvas.getContext("2d");
    const size = canvas.width;
    ctx.clearRect(0, 0, size, size);
    ctx.strokeStyle = "#999";
    ctx.strokeRect(0, 0, size, size);
    const most = Math.max(1, ...r.cells.map((c) => c.beta2_count));
    const cell = size * r.grid_step;
    for (const c of r.cells) {
      ctx.fillStyle = `rgba(31, 119, 180, ${0.2 + 0.8 * c.beta2_count / most})`;
      ctx.fillRect(c.beta * size - cell / 2, size - c.beta0 * size - cell / 2, cell, cell);
    }
    report("fm-status",
      `x: excitation coefficient, y: immunity coefficient\n` +
      `${r.feasible_triples} feasible triples, lambda ${r.lambda.toFixed(3)}` +
      (r.barrier_violated ? ", degree below the linear barrier" : ""));
  } catch (e) {
    report("fm-status", String(e), true);
  }
}

function runClosure() {
  try {
    const args = [num("cc-n"), num("cc-d"), BigInt(num("cc-seed")), num("cc-beta0")];
    const curves = ["random", "ball", "greedy-closure"].map((s) => JSON.parse(closureCurve(...args, s, num("cc-f"))));
    const colors = ["#2ca02c", "#ff7f0e", "#d62728"];
    const series = curves.map((c, i) => ({ values: c.points.map((p) => p.z), color: colors[i] }));
    const yMax = Math.max(1, ...series.flatMap((s) => s.values));
    plotLines($("cc-plot"), series, yMax);
    const last = curves.map((c) => c.points[c.points.length - 1].z);
    report("cc-status",
      `closure size against fault count; green random (${last[0]}), orange ball (${last[1]}), red greedy (${last[2]})\n` +
      `lambda ${curves[0].lambda.toFixed(3)}`);
  } catch (e) {
    report("cc-status", String(e), true);
  }
}

await init();
$("run-go").onclick = runPropagation;
$("fm-go").onclick = runFeasibility;
$("cc-go").onclick = runClosure;
runPropagation();
