import init, { convergence, breakdown, deflated_spectrum } from "./pkg/deflated_krylov_web.js";

const colors = ["#444", "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e"];
const canvas = document.getElementById("plot");
const ctx = canvas.getContext("2d");
const pad = { left: 60, right: 20, top: 20, bottom: 40 };

function value(id) {
  return document.getElementById(id).value;
}

function frame(xMax, yLo, yHi, xLabel, log) {
  const w = canvas.width - pad.left - pad.right;
  const h = canvas.height - pad.top - pad.bottom;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.left, pad.top, w, h);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  ctx.fillText(xLabel, pad.left + w / 2 - 20, canvas.height - 8);
  const ticks = log ? Math.round(yHi - yLo) : 4;
  for (let i = 0; i <= ticks; i++) {
    const y = pad.top + h - (i / ticks) * h;
    const v = yLo + (i / ticks) * (yHi - yLo);
    ctx.fillText(log ? `1e${Math.round(v)}` : v.toFixed(1), 8, y + 4);
  }
  ctx.fillText("0", pad.left, pad.top + h + 14);
  ctx.fillText(String(xMax), pad.left + w - 20, pad.top + h + 14);
  return {
    x: (i) => pad.left + (i / Math.max(xMax, 1)) * w,
    y: (v) => pad.top + h - ((v - yLo) / (yHi - yLo)) * h,
  };
}

function plotCurves(curves) {
  const xMax = Math.max(...curves.map((c) => c.residuals.length - 1), 1);
  const floor = (r) => Math.log10(Math.max(r, 1e-16));
  const all = curves.flatMap((c) => c.residuals.map(floor));
  const yLo = Math.floor(Math.min(...all));
  const yHi = Math.max(Math.ceil(Math.max(...all)), yLo + 1);
  const t = frame(xMax, yLo, yHi, "iteration", true);
  const legend = document.getElementById("legend");
  legend.innerHTML = "";
  curves.forEach((c, j) => {
    ctx.strokeStyle = colors[j % colors.length];
    ctx.lineWidth = j === 0 ? 2 : 1.5;
    ctx.setLineDash(j > 1 ? [6, 4] : []);
    ctx.beginPath();
    c.residuals.forEach((r, i) => {
      const [px, py] = [t.x(i), t.y(floor(r))];
      i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    });
    ctx.stroke();
    const s = document.createElement("span");
    s.style.color = colors[j % colors.length];
    s.textContent = `${c.variant}: ${c.status}, ${c.iterations} it.`;
    legend.appendChild(s);
  });
  ctx.setLineDash([]);
}

function plotSpectrum(s) {
  const lo = Math.min(...s.expected, ...s.computed);
  const hi = Math.max(...s.expected, ...s.computed);
  const n = s.computed.length;
  const t = frame(n - 1, lo, hi, "index (sorted)", false);
  const dot = (vals, color, r) => {
    ctx.fillStyle = color;
    vals.forEach((v, i) => {
      ctx.beginPath();
      ctx.arc(t.x(i), t.y(v), r, 0, 2 * Math.PI);
      ctx.fill();
    });
  };
  dot(s.expected, "#bbb", 5);
  dot(s.computed, "#d62728", 2.5);
  document.getElementById("legend").innerHTML =
    '<span style="color:#999">expected</span><span style="color:#d62728">computed</span>';
}

function run() {
  const op = document.querySelector('input[name="op"]:checked').value;
  const m = Number(value("m"));
  const k = Number(value("k"));
  const seed = BigInt(value("seed"));
  let out;
  if (op === "convergence") {
    out = JSON.parse(convergence(m, k, seed, Number(value("tol"))));
  } else if (op === "breakdown") {
    out = JSON.parse(breakdown(m, k, seed, Number(value("eps")), Number(value("noise"))));
  } else {
    out = JSON.parse(deflated_spectrum(m, k, seed));
  }
  const summary = document.getElementById("summary");
  if (out.error) {
    summary.textContent = `error: ${out.error}`;
    return;
  }
  if (op === "spectrum") {
    plotSpectrum(out);
    summary.textContent = `max mismatch ${out.max_mismatch.toExponential(3)}`;
  } else {
    plotCurves(out.curves);
    summary.textContent =
      op === "breakdown"
        ? `U ∩ (AU)^⊥ nontrivial: ${out.intersection_nontrivial}, ` +
          `cos θ_max = ${out.indicator.toExponential(3)}, θ_max = ${out.angle_deg.toFixed(4)}°`
        : `n = ${out.dimension}`;
  }
}

await init();
document.getElementById("run").addEventListener("click", run);
run();
