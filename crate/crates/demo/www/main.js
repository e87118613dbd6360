import init, { homology, decide, filling_map } from "./pkg/homlens_demo.js";

const num = (form, name) => parseInt(form.elements[name].value, 10);

function show(pre, fn) {
  pre.classList.remove("error");
  try {
    const value = fn();
    pre.textContent = typeof value === "string" ? JSON.stringify(JSON.parse(value), null, 2) : value;
    return value;
  } catch (err) {
    pre.classList.add("error");
    pre.textContent = String(err);
    return null;
  }
}

function drawMap(canvas, map) {
  const ctx = canvas.getContext("2d");
  const cols = 2 * map.n_radius + 1;
  const rows = map.nprime_max;
  const cw = canvas.width / cols;
  const ch = canvas.height / rows;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (map.delta_divisor) {
    ctx.fillStyle = "#e8eefc";
    for (let k = 0; k < rows; k++) {
      if ((k + 1) % map.delta_divisor === 0) ctx.fillRect(0, canvas.height - (k + 1) * ch, canvas.width, ch);
    }
  }
  ctx.fillStyle = "#c33";
  map.rows.forEach((row, k) => {
    row.forEach((hit, j) => {
      if (hit) ctx.fillRect(j * cw, canvas.height - (k + 1) * ch, Math.max(cw, 1), Math.max(ch, 1));
    });
  });
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo((map.n_radius + 0.5) * cw, 0);
  ctx.lineTo((map.n_radius + 0.5) * cw, canvas.height);
  ctx.stroke();
}

function summarize(map) {
  const lines = [
    `class: ${map.class}`,
    `Z/${map.p} fillings in view: ${map.zp_fillings.length}`,
  ];
  if (map.delta_divisor) {
    lines.push(`guaranteed divisor of n': ${map.delta_divisor} (shaded rows), holds: ${map.divisor_holds}`);
  } else {
    lines.push("no guaranteed divisor for this class");
  }
  const sample = map.zp_fillings.slice(0, 12).map((h) => `${h.n}/${h.nprime}${h.reduced ? "" : "*"}`);
  if (sample.length) lines.push(`first: ${sample.join(", ")}${map.zp_fillings.length > 12 ? ", ..." : ""}`);
  return lines.join("\n");
}

await init();

const mapForm = document.getElementById("map-form");
const mapOut = document.getElementById("map-out");
const canvas = document.getElementById("map");
mapForm.addEventListener("submit", (e) => {
  e.preventDefault();
  mapOut.classList.remove("error");
  try {
    const map = JSON.parse(filling_map(num(mapForm, "p"), num(mapForm, "q"), num(mapForm, "w"),
      num(mapForm, "radius"), num(mapForm, "nprime")));
    drawMap(canvas, map);
    mapOut.textContent = summarize(map);
  } catch (err) {
    mapOut.classList.add("error");
    mapOut.textContent = String(err);
  }
});

const homForm = document.getElementById("hom-form");
const homOut = document.getElementById("hom-out");
homForm.addEventListener("submit", (e) => {
  e.preventDefault();
  show(homOut, () => homology(num(homForm, "p"), num(homForm, "q"), num(homForm, "w"),
    homForm.elements.slope.value, homForm.elements.unreduced.checked));
});

const decideForm = document.getElementById("decide-form");
const decideOut = document.getElementById("decide-out");
decideForm.addEventListener("submit", (e) => {
  e.preventDefault();
  const f = decideForm.elements;
  const lspace = f.lspace.value === "" ? undefined : f.lspace.value === "true";
  const lensq = f.ambient.value === "lens" ? num(decideForm, "lensq") : undefined;
  show(decideOut, () => decide(f.ambient.value, f.knot.value, f.class.value, num(decideForm, "p"),
    f.prime.checked, lspace, lensq));
});

mapForm.requestSubmit();
homForm.requestSubmit();
decideForm.requestSubmit();
