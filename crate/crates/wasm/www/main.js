import init, { moment_curves, simulate_histogram, tree_listing } from "./pkg/banded_esd_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"];
const $ = (id) => document.getElementById(id);

function axes(ctx, box, xr, yr, xlabel, ylabel, fmtY = (v) => v.toPrecision(3)) {
  const { left, top, width, height } = box;
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "11px system-ui";
  ctx.beginPath();
  ctx.moveTo(left, top);
  ctx.lineTo(left, top + height);
  ctx.lineTo(left + width, top + height);
  ctx.stroke();
  for (let t = 0; t <= 4; t++) {
    const x = xr[0] + (t / 4) * (xr[1] - xr[0]);
    const y = yr[0] + (t / 4) * (yr[1] - yr[0]);
    ctx.fillText(x.toPrecision(3), left + (t / 4) * width - 10, top + height + 14);
    ctx.fillText(fmtY(y), 2, top + height - (t / 4) * height + 4);
  }
  ctx.fillText(xlabel, left + width - 40, top + height + 28);
  ctx.fillText(ylabel, left + 4, top - 6);
}

function drawCurves() {
  const lmax = Number($("mc-lmax").value);
  const gmax = Number($("mc-gmax").value);
  const log = $("mc-log").checked;
  const withMp = $("mc-mp").checked;
  const canvas = $("mc-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let data;
  try {
    data = JSON.parse(moment_curves(lmax, gmax, 121));
  } catch (e) {
    $("mc-legend").innerHTML = `<span class="error">${e.message ?? e}</span>`;
    return;
  }
  const tr = (v) => (log ? Math.log10(v) : v);
  let top = 0;
  for (const o of data.orders) {
    for (const v of withMp ? o.marchenko_pastur : o.gamma) top = Math.max(top, tr(v));
  }
  const box = { left: 60, top: 20, width: canvas.width - 80, height: canvas.height - 60 };
  const yr = [0, top || 1];
  axes(ctx, box, [0, gmax], yr, "gamma", log ? "log10 m_l" : "m_l");
  const px = (g) => box.left + (g / gmax) * box.width;
  const py = (v) => box.top + box.height - ((tr(v) - yr[0]) / (yr[1] - yr[0])) * box.height;
  const line = (values, color, dash) => {
    ctx.strokeStyle = color;
    ctx.setLineDash(dash);
    ctx.beginPath();
    values.forEach((v, i) => {
      const x = px(data.gammas[i]);
      const y = py(v);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.stroke();
  };
  const legend = [];
  data.orders.forEach((o, i) => {
    const color = COLORS[i % COLORS.length];
    line(o.gamma, color, []);
    if (withMp) line(o.marchenko_pastur, color, [4, 4]);
    legend.push(`<span style="color:${color}">m_${o.l} = ${o.polynomial}</span>`);
  });
  ctx.setLineDash([]);
  $("mc-legend").innerHTML = legend.join("<br>") + (withMp ? "<br>dashed: Marchenko-Pastur moments at y = 2 gamma" : "");
}

function runSimulation() {
  const args = ["sim-p", "sim-n", "sim-d"].map((id) => Number($(id).value));
  const dist = $("sim-dist").value;
  const reps = Number($("sim-reps").value);
  const seed = Number($("sim-seed").value);
  const bins = Number($("sim-bins").value);
  const canvas = $("sim-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let data;
  const started = performance.now();
  try {
    data = JSON.parse(simulate_histogram(...args, dist, reps, seed, bins));
  } catch (e) {
    $("sim-report").innerHTML = `<p class="error">${e.message ?? e}</p>`;
    return;
  }
  const elapsed = performance.now() - started;
  const { edges, density } = data.histogram;
  const lo = Math.min(edges[0], 0);
  const hi = Math.max(edges[edges.length - 1], data.support_bound);
  const peak = Math.max(...density);
  const box = { left: 60, top: 20, width: canvas.width - 80, height: canvas.height - 60 };
  axes(ctx, box, [lo, hi], [0, peak], "eigenvalue", "density");
  const px = (x) => box.left + ((x - lo) / (hi - lo)) * box.width;
  ctx.fillStyle = "rgba(31, 119, 180, 0.6)";
  density.forEach((rho, b) => {
    const x0 = px(edges[b]);
    const x1 = px(edges[b + 1]);
    const h = (rho / peak) * box.height;
    ctx.fillRect(x0, box.top + box.height - h, Math.max(1, x1 - x0 - 0.5), h);
  });
  ctx.strokeStyle = "#d62728";
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.moveTo(px(data.support_bound), box.top);
  ctx.lineTo(px(data.support_bound), box.top + box.height);
  ctx.stroke();
  ctx.setLineDash([]);
  const rows = data.report.rows
    .map((r) => `<tr><td>${r.order}</td><td>${r.empirical.toFixed(5)}</td><td>${r.gamma_convention.toFixed(5)}</td>` +
      `<td>${r.doubled_convention.toFixed(5)}</td><td>${r.rel_err_gamma.toExponential(2)}</td><td>${r.closer}</td></tr>`)
    .join("");
  $("sim-report").innerHTML =
    `<p class="note">gamma = ${data.gamma.toPrecision(4)}, y = ${data.y.toPrecision(4)}; eigenvalues in ` +
    `[${data.lambda_min.toFixed(4)}, ${data.lambda_max.toFixed(4)}]; dashed line (1 + sqrt y)^2 = ` +
    `${data.support_bound.toFixed(4)}; ${elapsed.toFixed(0)} ms</p>` +
    `<table><tr><th>l</th><th>empirical</th><th>m_l(gamma)</th><th>m_l(2 gamma)</th><th>rel. err</th><th>closer</th></tr>${rows}</table>`;
}

function listTrees() {
  const l = Number($("tr-l").value);
  let data;
  try {
    data = JSON.parse(tree_listing(l));
  } catch (e) {
    $("tr-out").innerHTML = `<p class="error">${e.message ?? e}</p>`;
    return;
  }
  const rows = data.trees
    .map((t, i) => `<tr><td>${i}</td><td>${t.walk}</td><td>${t.r}</td><td>{${t.profile.join(",")}}</td>` +
      `<td>${t.contribution}${t.r ? ` g^${t.r}` : ""}</td></tr>`)
    .join("");
  $("tr-out").innerHTML =
    `<p class="note">${data.trees.length} trees; m_${data.l} = ${data.polynomial}</p>` +
    `<table><tr><th>#</th><th>walk</th><th>r</th><th>profile</th><th>contribution</th></tr>${rows}</table>`;
}

await init();
for (const id of ["mc-lmax", "mc-gmax", "mc-mp", "mc-log"]) $(id).addEventListener("input", drawCurves);
$("sim-run").addEventListener("click", runSimulation);
$("tr-l").addEventListener("input", listTrees);
drawCurves();
runSimulation();
listTrees();
