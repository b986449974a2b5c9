import init, { bloch, circles, generative } from "./pkg/qlab_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(out, e) {
  out.className = "err";
  out.textContent = String(e && e.message ? e.message : e);
}

function clear(ctx) {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

function dot(ctx, x, y, r, color) {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

// unit square onto a canvas with a margin
function square(ctx) {
  const m = 24;
  const s = Math.min(ctx.canvas.width, ctx.canvas.height) - 2 * m;
  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(m, m, s, s);
  return (x, y) => [m + x * s, m + (1 - y) * s];
}

function drawBloch() {
  const x1 = num("b-x1");
  const x2 = num("b-x2");
  $("b-x1v").textContent = x1.toFixed(3);
  $("b-x2v").textContent = x2.toFixed(3);
  const out = $("b-out");
  let v;
  try {
    v = bloch(x1, x2);
  } catch (e) {
    return fail(out, e);
  }
  const [bx, by, bz, p1, d1, d2] = v;
  out.className = "";
  out.textContent =
    `Bloch (${bx.toFixed(4)}, ${by.toFixed(4)}, ${bz.toFixed(4)})\n` +
    `P(|1>) = ${p1.toFixed(4)}\n` +
    `decoded (${d1.toFixed(6)}, ${d2.toFixed(6)})`;

  const ctx = $("b-canvas").getContext("2d");
  clear(ctx);
  const c = ctx.canvas.width / 2;
  const r = c - 30;
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.arc(c, c, r, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.beginPath();
  ctx.ellipse(c, c, r, r * 0.3, 0, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.fillStyle = "#666";
  ctx.fillText("|0>", c - 8, c - r - 8);
  ctx.fillText("|1>", c - 8, c + r + 16);
  // oblique projection: x toward the viewer, y to the right, z up
  const px = c + r * (by - 0.35 * bx);
  const py = c - r * (bz - 0.3 * bx);
  ctx.strokeStyle = "#c33";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(c, c);
  ctx.lineTo(px, py);
  ctx.stroke();
  ctx.lineWidth = 1;
  dot(ctx, px, py, 5, "#c33");
}

function runCircles() {
  const out = $("c-out");
  let r;
  try {
    r = circles(num("c-n"), num("c-noise"), num("c-shots"), num("c-reps"), BigInt(num("c-seed")));
  } catch (e) {
    return fail(out, e);
  }
  const pts = r.points;
  const shots = r.shot_accuracies;
  const perfect = shots.filter((a) => a === 1).length;
  const mean = shots.reduce((a, b) => a + b, 0) / shots.length;
  out.className = "";
  out.textContent =
    `exact accuracy ${r.exact_accuracy.toFixed(4)}\n` +
    `shot accuracy mean ${mean.toFixed(4)}, perfect ${perfect}/${shots.length}\n` +
    `decision radius ${r.boundary.toFixed(4)}`;

  const ctx = $("c-canvas").getContext("2d");
  clear(ctx);
  let extent = r.boundary;
  for (let i = 0; i < pts.length; i += 5) {
    extent = Math.max(extent, Math.abs(pts[i]), Math.abs(pts[i + 1]));
  }
  extent *= 1.1;
  const c = ctx.canvas.width / 2;
  const scale = (c - 10) / extent;
  ctx.strokeStyle = "#888";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.arc(c, c, r.boundary * scale, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
  for (let i = 0; i < pts.length; i += 5) {
    const [x, y, label, predicted] = pts.slice(i, i + 4);
    const color = label === 1 ? "#2a6fdb" : "#e07b00";
    const px = c + x * scale;
    const py = c - y * scale;
    dot(ctx, px, py, 4, color);
    if (predicted !== label) {
      ctx.strokeStyle = "#c00";
      ctx.strokeRect(px - 6, py - 6, 12, 12);
    }
  }
  r.free();
}

function runGenerative() {
  const out = $("g-out");
  let r;
  try {
    r = generative(
      num("g-cx"), num("g-cy"), num("g-spread"), num("g-epochs"), num("g-lr"),
      num("g-shots"), num("g-count"), BigInt(num("g-seed")),
    );
  } catch (e) {
    return fail(out, e);
  }
  const cloud = r.cloud;
  const path = r.path;
  const samples = r.samples;
  const losses = r.losses;
  r.free();

  let mx = 0;
  let my = 0;
  for (let i = 0; i < cloud.length; i += 2) {
    mx += cloud[i];
    my += cloud[i + 1];
  }
  mx /= cloud.length / 2;
  my /= cloud.length / 2;
  const fx = path[path.length - 2];
  const fy = path[path.length - 1];
  out.className = "";
  out.textContent =
    `cloud mean (${mx.toFixed(4)}, ${my.toFixed(4)})\n` +
    `decoded    (${fx.toFixed(4)}, ${fy.toFixed(4)})\n` +
    `distance   ${Math.hypot(fx - mx, fy - my).toExponential(2)}\n` +
    `loss ${losses[0].toFixed(4)} -> ${losses[losses.length - 1].toFixed(4)}`;

  const ctx = $("g-canvas").getContext("2d");
  clear(ctx);
  const at = square(ctx);
  for (let i = 0; i < cloud.length; i += 2) dot(ctx, ...at(cloud[i], cloud[i + 1]), 2, "#9ab");
  for (let i = 0; i < samples.length; i += 2) dot(ctx, ...at(samples[i], samples[i + 1]), 2.5, "#e07b00");
  ctx.strokeStyle = "#2a6fdb";
  ctx.beginPath();
  ctx.moveTo(...at(path[0], path[1]));
  for (let i = 2; i < path.length; i += 2) ctx.lineTo(...at(path[i], path[i + 1]));
  ctx.stroke();
  dot(ctx, ...at(path[0], path[1]), 4, "#2a6fdb");
  dot(ctx, ...at(fx, fy), 5, "#c00");

  const lc = $("g-loss").getContext("2d");
  clear(lc);
  const w = lc.canvas.width - 40;
  const h = lc.canvas.height - 30;
  const top = Math.max(...losses);
  lc.strokeStyle = "#ccc";
  lc.strokeRect(30, 10, w, h);
  lc.fillStyle = "#666";
  lc.fillText(top.toFixed(3), 0, 16);
  lc.fillText("0", 18, 10 + h);
  lc.fillText(`epoch ${losses.length - 1}`, 30 + w - 50, 24 + h);
  lc.strokeStyle = "#2a6fdb";
  lc.beginPath();
  losses.forEach((l, i) => {
    const x = 30 + (w * i) / Math.max(1, losses.length - 1);
    const y = 10 + h * (1 - l / top);
    if (i === 0) lc.moveTo(x, y);
    else lc.lineTo(x, y);
  });
  lc.stroke();
}

await init();
$("b-x1").addEventListener("input", drawBloch);
$("b-x2").addEventListener("input", drawBloch);
$("c-run").addEventListener("click", runCircles);
$("g-run").addEventListener("click", runGenerative);
drawBloch();
runCircles();
runGenerative();
