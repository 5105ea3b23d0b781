import init, { extremal_path, extremal_fdd, record_gap, rem_clock_path } from "./pkg/trapflow_wasm.js";

const num = (id) => Number(document.getElementById(id).value);
const show = (id, text) => { document.getElementById(id).textContent = text; };

// Draws a right-continuous step function through (t, y) pairs, log-scaled in y.
function drawSteps(canvas, pairs, tmax, y0) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const ys = pairs.map((p) => p[1]).filter((y) => y > 0);
  const lo = Math.log(Math.max(y0, Math.min(...ys, y0)));
  const hi = Math.log(Math.max(...ys, y0 * 10));
  const px = (t) => (t / tmax) * (w - 20) + 10;
  const py = (y) => h - 10 - ((Math.log(Math.max(y, y0)) - lo) / (hi - lo || 1)) * (h - 20);
  ctx.strokeStyle = "#1f5fa8";
  ctx.beginPath();
  let prev = y0;
  ctx.moveTo(px(0), py(prev));
  for (const [t, y] of pairs) {
    ctx.lineTo(px(t), py(prev));
    ctx.lineTo(px(t), py(y));
    prev = y;
  }
  ctx.lineTo(px(tmax), py(prev));
  ctx.stroke();
}

const pairsOf = (flat) => {
  const out = [];
  for (let i = 0; i < flat.length; i += 2) out.push([flat[i], flat[i + 1]]);
  return out;
};

function guard(out, f) {
  try { f(); } catch (e) { show(out, `error: ${e}`); }
}

await init();

document.getElementById("ex-run").onclick = () => guard("ex-out", () => {
  const h = num("ex-h"), floor = num("ex-floor");
  const jumps = pairsOf(extremal_path(h, floor, num("ex-seed")));
  drawSteps(document.getElementById("ex-canvas"), jumps, h, floor);
  const last = jumps.length ? jumps[jumps.length - 1][1] : NaN;
  show("ex-out", `${jumps.length} records; W(${h}) = ${last.toPrecision(6)}; ` +
    `P(W(${h}) <= 1) = ${extremal_fdd([h], [1]).toPrecision(6)}`);
});

document.getElementById("rg-run").onclick = () => guard("rg-out", () => {
  const [p, se, exact] = record_gap(num("rg-eps"), num("rg-m"), num("rg-a"), num("rg-b"), num("rg-n"), 7);
  show("rg-out", `Monte Carlo ${p.toFixed(5)} +- ${se.toFixed(5)}   exact ${exact.toFixed(5)}`);
});

document.getElementById("rem-run").onclick = () => guard("rem-out", () => {
  const h = num("rem-h");
  const path = pairsOf(rem_clock_path(num("rem-n"), num("rem-alpha"), num("rem-beta"), h, 400, num("rem-seed")));
  drawSteps(document.getElementById("rem-canvas"), path.filter((p) => p[1] > 0), h, 1e-3);
  show("rem-out", `final rescaled clock ${path[path.length - 1][1].toPrecision(6)} at t = ${h}`);
});
