import init, { grid_placement, burst_transient, fixture_trace } from "./pkg/faultcover_web.js";

const $ = (id) => document.getElementById(id);
const palette = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

function report(err) {
  $("error").textContent = err ? String(err.message ?? err) : "";
}

function fit(points, w, h, pad) {
  const xs = points.map((p) => p.x), ys = points.map((p) => p.y);
  const x0 = Math.min(...xs), x1 = Math.max(...xs), y0 = Math.min(...ys), y1 = Math.max(...ys);
  const s = Math.min((w - 2 * pad) / (x1 - x0 || 1), (h - 2 * pad) / (y1 - y0 || 1));
  return (p) => [pad + (p.x - x0) * s, pad + (p.y - y0) * s];
}

function drawGrid(data) {
  const c = $("grid"), g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const at = fit(data.nodes, c.width, c.height, 24);
  g.lineWidth = 3;
  data.links.forEach(([a, b], l) => {
    g.strokeStyle = palette[data.link_group[l] % palette.length];
    const [ax, ay] = at(data.nodes[a]), [bx, by] = at(data.nodes[b]);
    g.beginPath(); g.moveTo(ax, ay); g.lineTo(bx, by); g.stroke();
  });
  const chosen = new Map(data.sensors.map((s, k) => [s, k + 1]));
  data.nodes.forEach((n, i) => {
    const [x, y] = at(n);
    g.beginPath();
    g.fillStyle = chosen.has(i) ? "#111" : "#fff";
    g.strokeStyle = "#111"; g.lineWidth = 1;
    g.arc(x, y, chosen.has(i) ? 6 : 3, 0, 2 * Math.PI);
    g.fill(); g.stroke();
  });
}

function drawLines(canvas, series, { xMax, yMin, yMax, labels }) {
  const g = canvas.getContext("2d"), w = canvas.width, h = canvas.height, pad = 36;
  g.clearRect(0, 0, w, h);
  g.strokeStyle = "#999"; g.lineWidth = 1;
  g.strokeRect(pad, 8, w - pad - 8, h - pad - 8);
  g.fillStyle = "#555"; g.font = "11px sans-serif";
  g.fillText(yMax.toPrecision(3), 2, 16);
  g.fillText(yMin.toPrecision(3), 2, h - pad);
  g.fillText(labels.x, w / 2, h - 8);
  const X = (i) => pad + (i / (xMax || 1)) * (w - pad - 8);
  const Y = (v) => 8 + (1 - (v - yMin) / (yMax - yMin || 1)) * (h - pad - 16);
  series.forEach((s, k) => {
    g.strokeStyle = s.color ?? palette[k % palette.length];
    g.setLineDash(s.dash ?? []);
    g.lineWidth = 2;
    g.beginPath();
    s.values.forEach((v, i) => (i ? g.lineTo(X(i), Y(v)) : g.moveTo(X(i), Y(v))));
    g.stroke();
    g.setLineDash([]);
    g.fillStyle = g.strokeStyle;
    g.fillText(s.name, w - 120, 24 + 14 * k);
  });
}

function updateGrid() {
  $("eps-v").textContent = $("eps").value;
  try {
    const data = JSON.parse(grid_placement(+$("rows").value, +$("cols").value, +$("eps").value,
      +$("jitter").value, +$("seed").value, $("algo").value));
    drawGrid(data);
    const pts = data.curve;
    const maxW = Math.max(...pts.map((p) => p.i_w)) || 1;
    drawLines($("curve"), [
      { name: "I_D", values: pts.map((p) => p.i_d) },
      { name: "I_I", values: pts.map((p) => p.i_i) },
      { name: "I_L", values: pts.map((p) => p.i_l) },
      { name: "I_W / max", values: pts.map((p) => p.i_w / maxW), dash: [4, 3] },
    ], { xMax: pts.length - 1, yMin: 0, yMax: 1, labels: { x: "sensors" } });
    const last = pts[pts.length - 1];
    $("grid-info").textContent = `${data.links.length} links, ${data.nodes.length} candidate nodes, ` +
      `${data.sensors.length} sensors chosen; I_L = ${last.i_l.toFixed(3)}, largest ambiguity set ${last.i_w}`;
    report();
  } catch (e) { report(e); }
}

function updateTransient() {
  $("burst-v").textContent = $("burst").value;
  try {
    const probes = Uint32Array.from($("probes").value.split(",").map((s) => s.trim()).filter(Boolean).map(Number));
    const data = JSON.parse(burst_transient(+$("burst").value, +$("area").value, +$("thr").value, probes));
    const all = data.series.flatMap((s) => s.pressure_pa.concat(s.expected_pa));
    const lines = data.series.flatMap((s, k) => [
      { name: `p @ ${s.grid_index}`, values: s.pressure_pa, color: palette[k % palette.length] },
      { name: "", values: s.expected_pa, color: palette[k % palette.length], dash: [2, 4] },
    ]);
    drawLines($("transient"), lines, {
      xMax: data.series[0]?.pressure_pa.length - 1, yMin: Math.min(...all), yMax: Math.max(...all),
      labels: { x: `time step (Δt = ${data.dt.toFixed(3)} s)` },
    });
    $("transient-info").textContent = data.series
      .map((s) => `point ${s.grid_index}: ${s.first_detection == null ? "no detection" : `detects at step ${s.first_detection}`}`)
      .join("; ");
    report();
  } catch (e) { report(e); }
}

function showTrace() {
  const rows = JSON.parse(fixture_trace());
  const m = rows[0].utilities.length;
  let html = "<table><tr><th>j</th>";
  for (let i = 1; i <= m; i++) html += `<th>S${i}</th>`;
  html += "<th>buckets after update</th></tr>";
  for (const r of rows) {
    html += `<tr><td>${r.iteration}</td>`;
    r.utilities.forEach((u, i) => {
      const cls = r.chosen === i ? "pick" : u ? "" : "done";
      html += `<td class="${cls}">${u ? `${u[0]} + ${u[1]}` : "·"}</td>`;
    });
    const b = r.buckets.map((g) => `{${g.map(([a, c]) => `${a + 1}${c + 1}`).join(" ")}}`).join(" ");
    html += `<td style="text-align:left">${b}</td></tr>`;
  }
  $("trace").innerHTML = html + "</table>";
}

await init();
for (const id of ["rows", "cols", "eps", "jitter", "seed", "algo"]) $(id).addEventListener("input", updateGrid);
for (const id of ["burst", "area", "thr", "probes"]) $(id).addEventListener("input", updateTransient);
updateGrid();
updateTransient();
showTrace();
