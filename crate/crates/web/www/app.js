import init, { polygon, sos_curve, compare } from "./pkg/purikit_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(target, e) {
  target.innerHTML = `<p class="err">${e.message ?? e}</p>`;
}

// Line plot of [x, y] point sets on a canvas with a light frame.
function plot(canvas, series, { logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const ty = (y) => (logY ? Math.log10(Math.max(y, 1e-16)) : y);
  const pts = series.flatMap((s) => s.points);
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => ty(p[1]));
  let [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 1; y1 += 1; }
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - ((ty(y) - y0) / (y1 - y0)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(xLabel, w / 2 - 20, h - 8);
  ctx.fillText(yLabel, 4, 14);
  ctx.fillText(logY ? `1e${y1.toFixed(1)}` : y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(logY ? `1e${y0.toFixed(1)}` : y0.toPrecision(3), 2, h - pad);
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    if (s.dots) {
      for (const [x, y] of s.points) ctx.fillRect(px(x) - 2, py(y) - 2, 4, 4);
      continue;
    }
    ctx.beginPath();
    s.points.forEach(([x, y], i) => (i ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y))));
    ctx.stroke();
  }
}

function runPolygon() {
  const out = $("poly-out");
  try {
    const r = JSON.parse(polygon(num("t")));
    out.innerHTML = `<table>
      <tr><th>rank S</th><th>Fourier modes</th><th>SR(φ)</th><th>SR(φ²)</th></tr>
      <tr><td>${r.rank}</td><td>${r.fourier_modes.join(", ")}</td><td>${r.phi_sr}</td><td>${r.phi_sq_sr}</td></tr>
    </table>`;
    drawSlack(r.row);
  } catch (e) {
    fail(out, e);
  }
}

// Circulant heat map: S(i, j) = row[(j - i) mod t].
function drawSlack(row) {
  const canvas = $("poly-canvas");
  const ctx = canvas.getContext("2d");
  const t = row.length;
  const cell = canvas.width / t;
  const top = Math.max(...row);
  for (let i = 0; i < t; i++) {
    for (let j = 0; j < t; j++) {
      const v = row[(j - i + t) % t] / top;
      ctx.fillStyle = `rgb(${255 - 200 * v}, ${255 - 120 * v}, 255)`;
      ctx.fillRect(j * cell, i * cell, cell, cell);
    }
  }
}

function runFit() {
  const out = $("fit-out");
  out.textContent = "fitting…";
  // let the status paint before the synchronous solve
  setTimeout(() => {
    try {
      const r = JSON.parse(sos_curve($("kind").value, num("n"), num("kmax"), num("b")));
      const fit = r.fit ? `A = ${r.fit.a.toFixed(3)}, B = ${r.fit.b.toFixed(3)}` : "no decay fit (distances at noise level)";
      out.textContent = `distance at k = ${r.curve.at(-1)[0]}: ${r.curve.at(-1)[1].toExponential(3)}; ${fit}`;
      plot($("curve-canvas"), [{ points: r.curve, color: "#1f5fbf" }, { points: r.curve, color: "#1f5fbf", dots: true }],
        { logY: true, xLabel: "k", yLabel: "‖ρ − σ_k‖₁" });
      const eig = r.eigenvalues.map((l) => [l, 0]);
      const boundary = r.poly.samples.map(([l]) => [l, -l]);
      plot($("poly-diff-canvas"), [
        { points: r.poly.samples, color: "#1f5fbf" },
        { points: boundary, color: "#bbb" },
        { points: eig, color: "#c33", dots: true },
      ], { xLabel: "λ", yLabel: `p_${r.poly.k}(λ) − λ` });
    } catch (e) {
      fail(out, e);
    }
  }, 10);
}

function runCompare() {
  const out = $("cmp-out");
  try {
    const r = JSON.parse(compare($("kind").value, num("n"), num("b"), num("d"), num("eps")));
    const sos = r.sos ? `k = ${r.sos.k}, bound ${r.sos.bound}` : "not reached for k ≤ 8";
    out.innerHTML = `<table>
      <tr><th>route</th><th>size</th><th>purification-rank bound</th></tr>
      <tr><td>sum of squares</td><td colspan="2">${sos}</td></tr>
      <tr><td>eigenbasis</td><td>s = ${r.eigen.s}</td><td>${r.eigen.bound} (closed form ${r.eigen.formula.toFixed(1)})</td></tr>
    </table>`;
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("status").textContent = "Ready.";
$("poly-go").onclick = runPolygon;
$("fit-go").onclick = runFit;
$("cmp-go").onclick = runCompare;
runPolygon();
