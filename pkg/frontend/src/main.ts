// App wiring: one UiSession per tab, one Client, all panels hanging off the
// same completed-plan list. No state lives anywhere the server can't
// reconstruct — a refresh reloads the session and resumes polling.

import { ApiError, Client, pollPlan } from "./api";
import { cdfChart, chartTransform, medianShiftDb } from "./cdf";
import { RegionEditor } from "./editor";
import { cameraQuaternion, dotRadiusPx, overlayDots } from "./overlay";
import { legendGradient } from "./ramp";
import { toGrammar, toWire } from "./region";
import { freshSession, loadSession, saveSession, type UiSession } from "./session";
import { drawSlice, sliceHeights, sliceModel } from "./slice";
import type { CdfPayload, SceneDoc } from "./types";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

const statusEl = $("status");
const retryBtn = $<HTMLButtonElement>("retry");
let lastFailed: (() => void) | null = null;

function showError(msg: string, retry: (() => void) | null): void {
  statusEl.textContent = msg;
  lastFailed = retry;
  retryBtn.hidden = retry === null;
}

function clearError(): void {
  statusEl.textContent = "";
  retryBtn.hidden = true;
  lastFailed = null;
}

retryBtn.addEventListener("click", () => {
  const fn = lastFailed;
  clearError();
  fn?.();
});

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

// --- session + client -------------------------------------------------------

let session: UiSession = loadSession(sessionStorage);
const persist = () => saveSession(session, sessionStorage);

const tokenInput = $<HTMLInputElement>("token");
let client = new Client({ baseUrl: "..", token: undefined });
tokenInput.addEventListener("change", () => {
  client = new Client({ baseUrl: "..", token: tokenInput.value || undefined });
});

// served at /ui/, API at /; dev server proxies the same paths
if (location.pathname === "/" || location.port === "5173") {
  client = new Client({ baseUrl: "" });
  tokenInput.addEventListener("change", () => {
    client = new Client({ baseUrl: "", token: tokenInput.value || undefined });
  });
}

// --- scene + editor ---------------------------------------------------------

const editor = new RegionEditor($<HTMLCanvasElement>("editor"));
const regionZ = $<HTMLInputElement>("region-z");
const regionText = $("region-text");
const planBtn = $<HTMLButtonElement>("plan-btn");
let scene: SceneDoc | null = null;

editor.onChange = (draft) => {
  session.regionDraft = draft;
  regionZ.value = String(draft.z);
  regionText.textContent = toGrammar(draft);
  planBtn.disabled = scene === null;
  persist();
};

regionZ.addEventListener("change", () => editor.setHeight(Number(regionZ.value)));

async function loadSceneById(sceneId: string): Promise<void> {
  scene = await client.getScene(sceneId);
  session.sceneId = sceneId;
  $("scene-name").textContent = `${scene.name} (${sceneId})`;
  regionZ.value = String(session.regionDraft?.z ?? scene.bounds.max[2]);
  editor.setScene(scene, session.regionDraft);
  if (session.regionDraft) {
    regionText.textContent = toGrammar(session.regionDraft);
    planBtn.disabled = false;
  }
  persist();
}

$<HTMLInputElement>("scene-file").addEventListener("change", async (e) => {
  const file = (e.target as HTMLInputElement).files?.[0];
  if (!file) return;
  const upload = async () => {
    try {
      clearError();
      const doc = JSON.parse(await file.text());
      const { scene_id } = await client.uploadScene(doc);
      session = { ...freshSession(), sceneId: scene_id };
      await loadSceneById(scene_id);
    } catch (err) {
      showError(`scene upload failed — ${describe(err)}`, upload);
    }
  };
  await upload();
});

// --- plan launcher ----------------------------------------------------------

const progress = $<HTMLProgressElement>("plan-progress");
const planState = $("plan-state");
const instancesEl = $("instances");
interface DonePlan {
  jobId: string;
  label: string;
}
const donePlans: DonePlan[] = [];

async function watchJob(jobId: string): Promise<void> {
  progress.hidden = false;
  planBtn.disabled = true;
  const watch = async () => {
    try {
      clearError();
      for await (const st of pollPlan(client, jobId, 1000)) {
        progress.value = st.progress;
        planState.textContent = st.state;
        if (st.state === "failed") {
          showError(`plan failed — ${st.error ?? "unknown error"}`, null);
        } else if (st.state === "done" && st.result) {
          const r = st.result;
          donePlans.push({ jobId, label: `${jobId.slice(0, 6)} @ ${r.best_position.map((v) => v.toFixed(2)).join(",")}` });
          editor.showBest(r.best_position);
          instancesEl.innerHTML = "";
          for (const inst of r.instances) {
            const li = document.createElement("li");
            li.textContent =
              `(${inst.init_position.map((v) => v.toFixed(1)).join(",")}) -> ` +
              `(${inst.final_position.map((v) => v.toFixed(2)).join(",")})  ` +
              `u=${inst.final_utility.toFixed(1)} in ${inst.iterations} it`;
            instancesEl.appendChild(li);
          }
          session.view.comparedPlanIds = donePlans.slice(-2).map((p) => p.jobId);
          await refreshSliceTab(jobId);
          refreshCdfTab();
          overlayBtn.disabled = false;
        }
      }
    } catch (err) {
      showError(`polling failed — ${describe(err)}`, watch);
      return;
    }
    session.activeJobId = null;
    planBtn.disabled = scene === null;
    persist();
  };
  await watch();
}

planBtn.addEventListener("click", async () => {
  if (!scene || !session.sceneId || !session.regionDraft) return;
  const submit = async () => {
    try {
      clearError();
      const { job_id } = await client.submitPlan({
        scene_id: session.sceneId!,
        region: toWire(session.regionDraft!),
      });
      session.activeJobId = job_id;
      persist();
      await watchJob(job_id);
    } catch (err) {
      showError(`plan submit failed — ${describe(err)}`, submit);
    }
  };
  await submit();
});

// --- tabs -------------------------------------------------------------------

let tabAbort = new AbortController();
for (const btn of document.querySelectorAll<HTMLButtonElement>(".tab")) {
  btn.addEventListener("click", () => {
    tabAbort.abort(); // navigation cancels the old panel's in-flight calls
    tabAbort = new AbortController();
    document.querySelectorAll(".tab").forEach((b) => b.classList.remove("active"));
    btn.classList.add("active");
    for (const panel of document.querySelectorAll<HTMLElement>(".panel")) {
      panel.hidden = panel.id !== `tab-${btn.dataset.tab}`;
    }
  });
}

// --- slice viewer -----------------------------------------------------------

const sliceSelect = $<HTMLSelectElement>("slice-z");
const sliceCanvas = $<HTMLCanvasElement>("slice-canvas");
const sliceInfo = $("slice-info");
$("legend-bar").style.background = legendGradient();
let slicePlanId: string | null = null;

async function refreshSliceTab(jobId: string): Promise<void> {
  slicePlanId = jobId;
  const meta = await client.mapMeta(jobId);
  const heights = sliceHeights(meta);
  sliceSelect.innerHTML = "";
  for (const h of heights) {
    const opt = document.createElement("option");
    opt.value = String(h);
    opt.textContent = `${h.toFixed(3)} m`;
    sliceSelect.appendChild(opt);
  }
  const want = session.view.sliceZ;
  const nearest = heights.reduce((a, b) => (Math.abs(b - want) < Math.abs(a - want) ? b : a));
  sliceSelect.value = String(nearest);
  await drawSliceAt(nearest);
}

async function drawSliceAt(z: number): Promise<void> {
  if (!slicePlanId) return;
  const render = async () => {
    try {
      clearError();
      const payload = await client.slice(slicePlanId!, z, tabAbort.signal);
      const model = sliceModel(payload, session.view.vminDbm, session.view.vmaxDbm);
      const ctx = sliceCanvas.getContext("2d")!;
      ctx.clearRect(0, 0, sliceCanvas.width, sliceCanvas.height);
      drawSlice(ctx, model, sliceCanvas.width, sliceCanvas.height);
      sliceInfo.textContent = `${model.nx} x ${model.ny} voxels at z = ${model.zCenterM.toFixed(3)} m`;
      session.view.sliceZ = z;
      persist();
    } catch (err) {
      if ((err as Error).name !== "AbortError") showError(`slice failed — ${describe(err)}`, render);
    }
  };
  await render();
}

sliceSelect.addEventListener("change", () => drawSliceAt(Number(sliceSelect.value)));

// --- CDF comparator ---------------------------------------------------------

const cdfPlansEl = $("cdf-plans");
const cdfCanvas = $<HTMLCanvasElement>("cdf-canvas");
const cdfNote = $("cdf-note");
const CDF_COLORS = ["#3a6ea5", "#dd8628", "#5d8a4a", "#a04e9b"];

function refreshCdfTab(): void {
  cdfPlansEl.innerHTML = "";
  donePlans.forEach((p) => {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = session.view.comparedPlanIds.includes(p.jobId);
    box.addEventListener("change", () => {
      const ids = new Set(session.view.comparedPlanIds);
      box.checked ? ids.add(p.jobId) : ids.delete(p.jobId);
      session.view.comparedPlanIds = [...ids];
      persist();
      void drawCdfs();
    });
    label.append(box, ` ${p.label}`);
    cdfPlansEl.appendChild(label);
  });
  void drawCdfs();
}

async function drawCdfs(): Promise<void> {
  const ids = session.view.comparedPlanIds.filter((id) => donePlans.some((p) => p.jobId === id));
  const ctx = cdfCanvas.getContext("2d")!;
  ctx.clearRect(0, 0, cdfCanvas.width, cdfCanvas.height);
  cdfNote.textContent = "";
  if (ids.length === 0) return;
  const draw = async () => {
    try {
      clearError();
      const payloads: { label: string; cdf: CdfPayload }[] = [];
      for (const id of ids) {
        payloads.push({ label: id.slice(0, 6), cdf: await client.cdf(id, tabAbort.signal) });
      }
      const chart = cdfChart(payloads);
      const tf = chartTransform(chart, cdfCanvas.width, cdfCanvas.height);
      chart.curves.forEach((curve, ci) => {
        ctx.strokeStyle = CDF_COLORS[ci % CDF_COLORS.length];
        ctx.lineWidth = 2;
        ctx.beginPath();
        curve.steps.forEach(([v, f], i) => {
          const x = tf.x(v);
          const y = tf.y(f);
          i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
        });
        ctx.stroke();
        // median tick
        ctx.fillStyle = ctx.strokeStyle;
        ctx.fillRect(tf.x(curve.medianDbm) - 1, tf.y(0.5) - 6, 2, 12);
        ctx.fillText(`${curve.label} median ${curve.medianDbm.toFixed(1)} dBm`, 40, 20 + 16 * ci);
      });
      if (payloads.length === 2) {
        const shift = medianShiftDb(payloads[0].cdf, payloads[1].cdf);
        cdfNote.textContent = `median shift (${payloads[1].label} vs ${payloads[0].label}): ${shift >= 0 ? "+" : ""}${shift.toFixed(2)} dB`;
      }
    } catch (err) {
      if ((err as Error).name !== "AbortError") showError(`CDF failed — ${describe(err)}`, draw);
    }
  };
  await draw();
}

// --- overlay preview --------------------------------------------------------

const overlayBtn = $<HTMLButtonElement>("overlay-btn");
const overlayCanvas = $<HTMLCanvasElement>("overlay-canvas");

function drawPlaceholderFrame(ctx: CanvasRenderingContext2D): void {
  const { width: w, height: h } = overlayCanvas;
  const grad = ctx.createLinearGradient(0, 0, 0, h);
  grad.addColorStop(0, "#35404d");
  grad.addColorStop(1, "#10151b");
  ctx.fillStyle = grad;
  ctx.fillRect(0, 0, w, h);
  ctx.strokeStyle = "rgba(255,255,255,0.12)";
  for (let x = 0; x <= w; x += w / 16) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, h);
    ctx.stroke();
  }
  for (let y = 0; y <= h; y += h / 9) {
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(w, y);
    ctx.stroke();
  }
}

overlayBtn.addEventListener("click", async () => {
  const planId = slicePlanId;
  if (!planId) return;
  const project = async () => {
    try {
      clearError();
      const pose = {
        location: [
          Number($<HTMLInputElement>("cam-x").value),
          Number($<HTMLInputElement>("cam-y").value),
          Number($<HTMLInputElement>("cam-z").value),
        ] as [number, number, number],
        quaternion: cameraQuaternion(Number($<HTMLInputElement>("cam-yaw").value)),
      };
      const intr = { fx: 600, fy: 600, cx: 480, cy: 270, width: 960, height: 540 };
      const payload = await client.overlay(
        planId,
        pose,
        intr,
        Number($<HTMLInputElement>("cam-layer").value),
        tabAbort.signal,
      );
      const ctx = overlayCanvas.getContext("2d")!;
      drawPlaceholderFrame(ctx);
      for (const dot of overlayDots(payload, overlayCanvas.width, overlayCanvas.height)) {
        ctx.fillStyle = `rgb(${dot.color[0]},${dot.color[1]},${dot.color[2]})`;
        ctx.beginPath();
        ctx.arc(dot.xPx, dot.yPx, dotRadiusPx(dot.depthM), 0, 2 * Math.PI);
        ctx.fill();
      }
    } catch (err) {
      if ((err as Error).name !== "AbortError") showError(`overlay failed — ${describe(err)}`, project);
    }
  };
  await project();
});

// --- boot: restore the previous session -------------------------------------

(async () => {
  if (!session.sceneId) return;
  try {
    await loadSceneById(session.sceneId);
    if (session.activeJobId) {
      planState.textContent = "resuming…";
      await watchJob(session.activeJobId);
    }
  } catch (err) {
    showError(`could not restore session — ${describe(err)}`, null);
    session = freshSession();
    persist();
  }
})();
