import init, { run, trace, mass_curve } from "./pkg/qwhile_web.js";

const $ = (id) => document.getElementById(id);
const out = $("out");
const plot = $("plot");

function amp(e) {
  const re = e.re.toFixed(6), im = Math.abs(e.im).toFixed(6);
  return `${e.re >= 0 ? "+" : ""}${re}${e.im >= 0 ? "+" : "-"}${im}i`;
}

function ket(state) {
  if (state.length === 0) return "  0\n";
  return state
    .map((e) => {
      const regs = Object.entries(e.regs).map(([k, v]) => `${k}=${v}`).join(" ");
      return `  ${amp(e)} |${e.ancillas}0…⟩ ${regs}\n`;
    })
    .join("");
}

function show(text, isError = false) {
  out.textContent = text;
  out.className = isError ? "error" : "";
}

function args() {
  const n = $("n").value === "" ? undefined : Number($("n").value);
  return [$("source").value, $("mode").value, n];
}

function guarded(f) {
  return () => {
    try {
      f();
    } catch (e) {
      plot.hidden = true;
      show(String(e.message ?? e), true);
    }
  };
}

function doRun() {
  plot.hidden = true;
  const r = JSON.parse(run(...args()));
  show(
    `${r.mode}, ${r.iterations} iteration(s), converged: ${r.converged}\n` +
      `terminated mass ${r.terminated_mass.toFixed(9)}, running mass ${r.running_mass.toFixed(9)}\n` +
      ket(r.state),
  );
}

function doTrace() {
  plot.hidden = true;
  const t = JSON.parse(trace(...args()));
  show(t.steps.map((s) => `${s.label}  (norm² ${s.norm_sqr.toFixed(9)})\n${ket(s.state)}`).join("\n"));
}

function doCurve() {
  const n = Number($("n").value || 10);
  const ys = Array.from(mass_curve($("source").value, n));
  const g = plot.getContext("2d");
  const w = plot.width, h = plot.height, pad = 28;
  g.clearRect(0, 0, w, h);
  g.strokeStyle = "#999";
  g.strokeRect(pad, 8, w - pad - 8, h - pad - 8);
  g.fillStyle = "#333";
  g.fillText("1", 10, 12);
  g.fillText("0", 10, h - pad);
  g.fillText(`n = ${n}`, w - 60, h - 8);
  const x = (i) => pad + ((w - pad - 8) * i) / Math.max(1, ys.length - 1);
  const y = (m) => h - pad - (h - pad - 8) * m;
  g.strokeStyle = "#1565c0";
  g.beginPath();
  ys.forEach((m, i) => (i === 0 ? g.moveTo(x(i), y(m)) : g.lineTo(x(i), y(m))));
  g.stroke();
  g.fillStyle = "#1565c0";
  ys.forEach((m, i) => g.fillRect(x(i) - 2, y(m) - 2, 4, 4));
  plot.hidden = false;
  show(ys.map((m, i) => `‖L_${i}ψ‖² = ${m.toFixed(9)}`).join("\n"));
}

await init();
$("source").value = $("example").value;
$("example").onchange = () => ($("source").value = $("example").value);
$("run").onclick = guarded(doRun);
$("trace").onclick = guarded(doTrace);
$("curve").onclick = guarded(doCurve);
