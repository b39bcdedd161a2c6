import init, { matrix, envelope, compose } from "./pkg/disco_web.js";

const $ = (id) => document.getElementById(id);

function attempt(errorId, f) {
  $(errorId).textContent = "";
  try {
    f();
  } catch (e) {
    $(errorId).textContent = String(e);
  }
}

function drawMatrix() {
  const out = JSON.parse(matrix($("matrix-input").value));
  const m = out.masses;
  const canvas = $("matrix-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const rows = m.length, cols = m[0].length;
  const cw = canvas.width / cols, ch = canvas.height / rows;
  const max = Math.max(...m.flat(), 1e-12);
  ctx.font = "12px monospace";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  m.forEach((row, i) => row.forEach((mu, j) => {
    const shade = Math.round(255 * (1 - mu / max));
    ctx.fillStyle = `rgb(${shade}, ${shade}, 255)`;
    ctx.fillRect(j * cw, i * ch, cw - 1, ch - 1);
    ctx.fillStyle = mu / max > 0.6 ? "#fff" : "#000";
    ctx.fillText(mu.toFixed(3), j * cw + cw / 2, i * ch + ch / 2 - 8);
    ctx.fillText("Σ " + out.cumulative[i][j].toFixed(3), j * cw + cw / 2, i * ch + ch / 2 + 8);
  }));
}

function drawEnvelope() {
  const pts = JSON.parse(envelope($("envelope-input").value)).points;
  const canvas = $("envelope-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const ts = pts.map((p) => p[0]), vs = pts.map((p) => p[1]);
  const [t0, t1] = [Math.min(...ts), Math.max(...ts)];
  let [v0, v1] = [Math.min(...vs), Math.max(...vs)];
  if (v0 === v1) { v0 -= 1; v1 += 1; }
  const pad = 10;
  const x = (t) => pad + (t - t0) / (t1 - t0 || 1) * (canvas.width - 2 * pad);
  const y = (v) => canvas.height - pad - (v - v0) / (v1 - v0) * (canvas.height - 2 * pad);
  ctx.strokeStyle = "#36c";
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach(([t, v], k) => (k ? ctx.lineTo(x(t), y(v)) : ctx.moveTo(x(t), y(v))));
  ctx.stroke();
  ctx.fillStyle = "#000";
  ctx.fillText(v1.toFixed(2), 2, pad + 4);
  ctx.fillText(v0.toFixed(2), 2, canvas.height - 2);
}

function drawTimeline() {
  const out = JSON.parse(compose($("config").value, Number($("seed").value), Number($("variant").value)));
  const canvas = $("timeline-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const scale = canvas.width / out.end;
  const colors = ["#e76f51", "#2a9d8f", "#e9c46a", "#264653", "#8ab17d", "#f4a261"];
  const lane = canvas.height / out.assignments.length;
  out.assignments.forEach((a, k) => {
    ctx.fillStyle = colors[k % colors.length];
    ctx.fillRect(a.start * scale, k * lane + 4, (a.end - a.start) * scale, lane - 8);
    ctx.fillStyle = "#000";
    ctx.fillText(`${a.section} ${a.start}–${a.end}`, a.start * scale + 4, k * lane + lane / 2 + 4);
  });
  $("score").textContent = out.score;
  $("notation").textContent = out.notation;
}

await init();
const demo = await fetch("demo.json").then((r) => (r.ok ? r.text() : ""), () => "");
$("config").value = demo;
$("matrix-run").onclick = () => attempt("matrix-error", drawMatrix);
$("envelope-run").onclick = () => attempt("envelope-error", drawEnvelope);
$("compose-run").onclick = () => attempt("compose-error", drawTimeline);
attempt("matrix-error", drawMatrix);
attempt("envelope-error", drawEnvelope);
if (demo) attempt("compose-error", drawTimeline);
