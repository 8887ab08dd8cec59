import init, { render_captcha, blur_text, gaussian_kernel, similarity, exact_match } from "./pkg/blurcap_wasm.js";

const $ = (id) => document.getElementById(id);
let truth = "";

function draw(canvas, rendered, zoom = 2) {
  canvas.width = rendered.width;
  canvas.height = rendered.height;
  canvas.style.width = `${rendered.width * zoom}px`;
  const data = new ImageData(new Uint8ClampedArray(rendered.rgba), rendered.width, rendered.height);
  canvas.getContext("2d").putImageData(data, 0, 0);
}

function fail(el, err) {
  el.textContent = String(err.message ?? err);
  el.className = "error";
}

function refreshCaptcha() {
  const radius = Number($("radius").value);
  $("radius-out").textContent = radius;
  try {
    const r = render_captcha(Number($("seed").value) >>> 0, radius, $("confusables").checked);
    truth = r.text;
    draw($("captcha"), r);
    $("score").textContent = "";
    $("answer").value = "";
  } catch (err) {
    fail($("score"), err);
  }
}

function score(event) {
  event.preventDefault();
  const response = $("answer").value;
  const pct = (100 * similarity(truth, response)).toFixed(1);
  const exact = exact_match(truth, response);
  $("score").className = "";
  $("score").textContent = `${exact ? "exact match" : "no exact match"}, character similarity ${pct}%. Answer: "${truth}"`;
}

function drawKernel(sigma) {
  const canvas = $("kernel");
  const ctx = canvas.getContext("2d");
  if (sigma <= 0) {
    canvas.width = canvas.height = 0;
    return;
  }
  const w = gaussian_kernel(sigma);
  const n = Math.round(Math.sqrt(w.length));
  const cell = Math.max(4, Math.floor(160 / n));
  canvas.width = canvas.height = n * cell;
  const max = Math.max(...w);
  w.forEach((v, i) => {
    const shade = Math.round(255 * (1 - v / max));
    ctx.fillStyle = `rgb(${shade},${shade},${shade})`;
    ctx.fillRect((i % n) * cell, Math.floor(i / n) * cell, cell, cell);
  });
}

function refreshText() {
  const radius = Number($("text-radius").value);
  $("text-radius-out").textContent = radius;
  try {
    draw($("text-canvas"), blur_text($("text").value, radius));
    $("text").setCustomValidity("");
  } catch (err) {
    $("text").setCustomValidity(String(err.message ?? err));
    $("text").reportValidity();
  }
  drawKernel(radius);
}

await init();
for (const id of ["seed", "radius", "confusables"]) $(id).addEventListener("input", refreshCaptcha);
$("new-seed").addEventListener("click", () => {
  $("seed").value = crypto.getRandomValues(new Uint32Array(1))[0];
  refreshCaptcha();
});
$("answer-form").addEventListener("submit", score);
for (const id of ["text", "text-radius"]) $(id).addEventListener("input", refreshText);
refreshCaptcha();
refreshText();
