import init, { run_pipeline_demo, leader_compression_demo, cut_probability_demo } from "./pkg/emst_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, value) {
  const el = $(id);
  el.classList.toggle("err", Boolean(value.error));
  el.textContent = value.error ? value.error : JSON.stringify(value, null, 2);
}

function drawPipeline(r) {
  const cv = $("p-canvas");
  const ctx = cv.getContext("2d");
  ctx.clearRect(0, 0, cv.width, cv.height);
  if (r.error || r.points.length === 0) return;
  const xs = r.points.map((p) => p[0]);
  const ys = r.points.map((p) => p[1]);
  const minX = Math.min(...xs), minY = Math.min(...ys);
  const span = Math.max(Math.max(...xs) - minX, Math.max(...ys) - minY) || 1;
  const pad = 12;
  const scale = (cv.width - 2 * pad) / span;
  const at = (i) => [pad + (r.points[i][0] - minX) * scale, cv.height - pad - (r.points[i][1] - minY) * scale];

  const strokeEdges = (edges, color, width) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.beginPath();
    for (const [u, v] of edges) {
      ctx.moveTo(...at(u));
      ctx.lineTo(...at(v));
    }
    ctx.stroke();
  };

  if ($("p-cycle").checked && r.cycle.length > 1) {
    const c = r.cycle;
    strokeEdges(c.map((u, i) => [u, c[(i + 1) % c.length]]), "rgba(200,120,0,0.6)", 1);
  }
  if ($("p-exact").checked) strokeEdges(r.exact, "rgba(0,160,0,0.7)", 3);
  strokeEdges(r.tree, "#1f4fa0", 1.2);
  ctx.fillStyle = "#000";
  for (let i = 0; i < r.points.length; i++) {
    const [x, y] = at(i);
    ctx.fillRect(x - 1.5, y - 1.5, 3, 3);
  }
}

function runPipeline() {
  const t0 = performance.now();
  const r = JSON.parse(run_pipeline_demo($("p-kind").value, num("p-n"), num("p-seed"), $("p-strategy").value, num("p-h")));
  const ms = performance.now() - t0;
  drawPipeline(r);
  if (r.error) return show("p-out", r);
  const { points, tree, exact, cycle, ...summary } = r;
  show("p-out", { ...summary, wall_ms: Math.round(ms) });
}

function drawDecay(points) {
  const cv = $("c-canvas");
  const ctx = cv.getContext("2d");
  ctx.clearRect(0, 0, cv.width, cv.height);
  if (points.error || points.length === 0) return;
  const top = Math.max(1, ...points.map((p) => Math.max(p.bound, p.mean_excess)));
  const pad = 30;
  const x = (i) => pad + (i * (cv.width - 2 * pad)) / Math.max(1, points.length - 1);
  const y = (v) => cv.height - pad - (v / top) * (cv.height - 2 * pad);
  const line = (key, color) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    points.forEach((p, i) => (i ? ctx.lineTo(x(i), y(p[key])) : ctx.moveTo(x(i), y(p[key]))));
    ctx.stroke();
  };
  ctx.lineWidth = 2;
  line("bound", "#c33");
  line("mean_excess", "#1f4fa0");
  ctx.fillStyle = "#333";
  ctx.fillText("red: (3/4)^h bound   blue: measured mean excess components", pad, 16);
  points.forEach((p, i) => ctx.fillText(String(p.h), x(i) - 3, cv.height - 10));
}

function runCompression() {
  const r = JSON.parse(leader_compression_demo($("c-graph").value, num("c-n"), num("c-rounds"), num("c-trials"), num("c-seed")));
  drawDecay(r);
  if (r.error) return show("c-out", r);
  $("c-out").classList.remove("err");
  $("c-out").textContent = r
    .map((p) => `h=${p.h}  mean=${p.mean_excess.toFixed(2)} +- ${p.std_err.toFixed(2)}  bound=${p.bound.toFixed(2)}`)
    .join("\n");
}

function runCut() {
  const r = JSON.parse(cut_probability_demo(num("x-w"), num("x-side"), num("x-d"), num("x-trials"), num("x-seed")));
  show("x-out", r);
}

await init();
$("status").textContent = "Ready.";
$("p-run").onclick = runPipeline;
$("c-run").onclick = runCompression;
$("x-run").onclick = runCut;
for (const id of ["p-exact", "p-cycle"]) $(id).onchange = runPipeline;
runPipeline();
