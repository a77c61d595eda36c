import init, { trajectory, darknessScan, mexhatCurve } from "./pkg/dicke_web.js";

const COLORS = ["#c0392b", "#2471a3", "#239b56"];

// Splits a flat record array into columns.
function columns(flat, width) {
  const cols = Array.from({ length: width }, () => []);
  for (let i = 0; i + width <= flat.length; i += width) {
    for (let c = 0; c < width; c++) cols[c].push(flat[i + c]);
  }
  return cols;
}

function plot(canvas, x, series, labels) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const finite = (v) => v.filter(Number.isFinite);
  const xs = finite(x);
  const ys = series.flatMap(finite);
  if (!xs.length || !ys.length) return;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys) || 1];
  const px = (v) => pad + ((v - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (v) => h - pad + ((v - y0) / (y1 - y0 || 1)) * -(h - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 15);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - pad + 15);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);

  series.forEach((ys, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.beginPath();
    let pen = false;
    ys.forEach((y, i) => {
      if (!Number.isFinite(y)) { pen = false; return; }
      pen ? ctx.lineTo(px(x[i]), py(y)) : ctx.moveTo(px(x[i]), py(y));
      pen = true;
    });
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(labels[k], w - pad - 80, pad + 15 * (k + 1));
  });
}

function bind(id, action) {
  const root = document.getElementById(id);
  const status = root.querySelector(".status");
  const value = (name) => {
    const el = root.querySelector(`[name=${name}]`);
    return el.type === "checkbox" ? el.checked : Number(el.value);
  };
  root.querySelector("button").addEventListener("click", () => {
    status.textContent = "";
    // Let the browser repaint before the (blocking) computation.
    setTimeout(() => {
      try {
        action(value, root.querySelector("canvas"));
      } catch (e) {
        status.textContent = String(e.message ?? e);
      }
    }, 0);
  });
}

await init();

bind("trajectory", (v, canvas) => {
  const [t, nph, nat] = columns(trajectory(v("lambda"), v("dphi"), v("periods"), v("preset")), 3);
  plot(canvas, t, [nph, nat], ["n_ph", "n_at"]);
});

bind("scan", (v, canvas) => {
  const data = darknessScan(v("start"), v("stop"), v("count"), v("dphi"), v("periods"), v("preset"));
  const [lambda, nph, nat] = columns(data, 3);
  plot(canvas, lambda, [nph, nat], ["avg n_ph", "avg n_at"]);
});

bind("mexhat", (v, canvas) => {
  const [eps, rho2, half] = columns(mexhatCurve(v("mass"), v("k"), v("g"), v("count")), 3);
  const finiteHalf = half.map((x) => (Number.isFinite(x) ? x : NaN));
  plot(canvas, eps, [rho2, finiteHalf], ["<rho^2>", "T_half"]);
});
