import init, { partition, spectrogram, atom_at } from "./pkg/alphaframe_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function frame(ctx, xs, lo, hi) {
  const { width: w, height: h } = ctx.canvas;
  ctx.clearRect(0, 0, w, h);
  const x0 = xs[0], x1 = xs[xs.length - 1];
  return {
    x: (v) => 30 + ((v - x0) / (x1 - x0)) * (w - 40),
    y: (v) => h - 20 - ((v - lo) / (hi - lo)) * (h - 30),
  };
}

function line(ctx, m, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  for (let i = 0; i < xs.length; i++) {
    const f = i ? "lineTo" : "moveTo";
    ctx[f](m.x(xs[i]), m.y(ys[i]));
  }
  ctx.stroke();
}

function show(id, text, err = false) {
  $(id).textContent = String(text);
  $(id).className = err ? "err" : "";
}

function drawPartition() {
  const ctx = $("p-canvas").getContext("2d");
  try {
    const p = partition(num("p-alpha"), num("p-b"));
    const xs = p.freqs, n = xs.length, w = p.windows;
    const m = frame(ctx, xs, 0, 1.1);
    for (let j = 0; j < p.count; j++) {
      line(ctx, m, xs, w.subarray(j * n, (j + 1) * n), `hsl(${(j * 47) % 360} 60% 45%)`);
    }
    line(ctx, m, xs, p.sum, "#000");
    ctx.fillStyle = "#000";
    for (const c of p.positions) ctx.fillRect(m.x(c) - 1, m.y(0) + 2, 2, 6);
    show("p-msg", `${p.count} intervals, covered band [${p.lefts[0].toFixed(2)}, ${p.rights[p.count - 1].toFixed(2)}]`);
  } catch (e) {
    ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
    show("p-msg", e, true);
  }
}

function drawSpectrogram() {
  const canvas = $("s-canvas");
  const ctx = canvas.getContext("2d");
  try {
    const s = spectrogram(num("s-alpha"), num("s-rate"), 160);
    const rows = s.omegas.length, cols = s.times.length;
    let max = 0;
    for (const v of s.power) max = Math.max(max, v);
    const img = ctx.createImageData(cols, rows);
    for (let r = 0; r < rows; r++) {
      for (let c = 0; c < cols; c++) {
        const v = Math.log10(s.power[r * cols + c] / max + 1e-8) / 8 + 1;
        const g = Math.round(255 * Math.max(0, Math.min(1, v)));
        const o = ((rows - 1 - r) * cols + c) * 4;
        img.data.set([g, Math.round(g * 0.8), 255 - g, 255], o);
      }
    }
    const tmp = new OffscreenCanvas(cols, rows);
    tmp.getContext("2d").putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
    show("s-msg", `ω ∈ [${s.omegas[0]}, ${s.omegas[rows - 1]}], x ∈ [${s.times[0]}, ${s.times[cols - 1].toFixed(2)}], log scale over 80 dB`);
  } catch (e) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    show("s-msg", e, true);
  }
}

function drawAtom() {
  const t = $("a-time").getContext("2d");
  const f = $("a-freq").getContext("2d");
  try {
    const v = atom_at(num("a-alpha"), num("a-a"), parseInt($("a-j").value, 10) || 0, parseInt($("a-k").value, 10) || 0);
    let amp = 0;
    for (let i = 0; i < v.re.length; i++) amp = Math.max(amp, Math.hypot(v.re[i], v.im[i]));
    const mt = frame(t, v.times, -amp, amp);
    line(t, mt, v.times, v.re, "#1a5fb4");
    line(t, mt, v.times, v.im, "#c64600");
    let peak = 0;
    for (const x of v.magnitude) peak = Math.max(peak, x);
    line(f, frame(f, v.freqs, 0, peak * 1.05), v.freqs, v.magnitude, "#222");
    show("a-msg", `|j| ≤ ${v.jmax}, |k| ≤ ${v.kmax} at this scale; top: real and imaginary part, bottom: spectrum magnitude`);
  } catch (e) {
    show("a-msg", e, true);
  }
}

function bind(ids, draw) {
  for (const id of ids) {
    const el = $(id);
    const out = $(id + "-v");
    const update = () => {
      if (out) out.textContent = el.value;
      draw();
    };
    el.addEventListener("input", update);
    if (out) out.textContent = el.value;
  }
  draw();
}

await init();
bind(["p-alpha", "p-b"], drawPartition);
bind(["s-alpha", "s-rate"], drawSpectrogram);
bind(["a-alpha", "a-a", "a-j", "a-k"], drawAtom);
