import init, { decompose, connectedness, rolling } from "./pkg/aspill_web.js";

const num = (id) => Number(document.getElementById(id).value);
const str = (id) => document.getElementById(id).value;

function show(outId, fn) {
  const out = document.getElementById(outId);
  try {
    out.innerHTML = fn();
  } catch (e) {
    out.innerHTML = `<p class="error">${e}</p>`;
  }
}

// Minimal line chart for the decomposition; the rolling plot comes from the library.
function lines(seriesList, colors, width = 800, height = 300) {
  const all = seriesList.flat();
  const lo = Math.min(...all), hi = Math.max(...all);
  const span = hi - lo || 1;
  const n = seriesList[0].length;
  const path = (ys) =>
    ys.map((y, i) => `${(40 + (i / Math.max(n - 1, 1)) * (width - 60)).toFixed(1)},` +
      `${(20 + (1 - (y - lo) / span) * (height - 40)).toFixed(1)}`).join(" ");
  const polys = seriesList.map((ys, k) =>
    `<polyline fill="none" stroke="${colors[k]}" stroke-width="1.5" points="${path(ys)}"/>`).join("");
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">` +
    `<rect width="${width}" height="${height}" fill="white"/>${polys}</svg>`;
}

function runDecompose() {
  show("d-out", () => {
    const r = JSON.parse(decompose(BigInt(num("d-seed")), num("d-len"), num("d-drift"),
      num("d-sigma"), str("d-trend")));
    return lines([r.series, r.plus, r.minus], ["#222", "#2a7", "#c33"]) +
      `<p>black: series, green: positive component, red: negative component. ` +
      `Fitted drift c = ${r.c.toExponential(3)}, trend d = ${r.d.toExponential(3)}.</p>`;
  });
}

function runConnect() {
  show("c-out", () => {
    const sides = JSON.parse(connectedness(BigInt(num("c-seed")), num("c-len"), num("c-m"),
      num("c-up"), num("c-down"), num("c-lags"), num("c-h")));
    const rows = sides.map((s) => `<tr><td>${s.side}</td><td>${s.index.toFixed(2)}%</td></tr>`).join("");
    const tables = sides.map((s) => `<h3>${s.side}</h3><pre>${s.markdown}</pre>` +
      `<p>net directional (to minus from): ${s.net_directional.map((v) => v.toFixed(1)).join(", ")}</p>`).join("");
    return `<table class="idx"><tr><th>side</th><th>spillover index</th></tr>${rows}</table>${tables}`;
  });
}

function runRolling() {
  show("r-out", () => {
    const r = JSON.parse(rolling(BigInt(num("r-seed")), num("r-len"), num("r-up"), num("r-down"),
      num("r-win"), num("r-step"), 10, str("r-side")));
    return r.svg + `<p>${r.values.length} windows, ${r.gaps} gaps.</p>`;
  });
}

await init();
document.getElementById("d-run").onclick = runDecompose;
document.getElementById("c-run").onclick = runConnect;
document.getElementById("r-run").onclick = runRolling;
runDecompose();
runConnect();
runRolling();
