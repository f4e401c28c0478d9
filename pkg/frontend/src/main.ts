import {
  DRAG_DEGREES_PER_PIXEL,
  canvasPointFromPixel,
  cutPlaneFromAngles,
  dragRotate,
  pressureToWidth,
  scaledModel,
} from "./controls";
import { ModelPose, Quat, SessionSnapshot } from "./protocol";
import { Session } from "./session";

const CANVAS_EXTENT: [number, number] = [0.4, 0.3];
const el = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const defaultUrl = `ws://${location.hostname || "127.0.0.1"}:7421`;
el<HTMLInputElement>("server-url").value = defaultUrl;

let session: Session | null = null;
let lastState: SessionSnapshot | null = null;
let dragAnchor: Quat | null = null;
let dragStart: [number, number] | null = null;
let sketchPoints: [number, number, number][] = [];

const statusBar = el<HTMLDivElement>("status");
const frameImg = el<HTMLImageElement>("frame");
const seqLabel = el<HTMLSpanElement>("seq");
const clientList = el<HTMLUListElement>("clients");
const nackBar = el<HTMLDivElement>("nack");

function currentModel(): ModelPose {
  return lastState?.model ?? { t: [0, 0, -0.8], r_quat: [1, 0, 0, 0], s: [0.4, 0.4, 0.4] };
}

function refreshControls(state: SessionSnapshot): void {
  el<HTMLSelectElement>("scheme").value = state.scheme.kind;
  el<HTMLInputElement>("win-base").value = String(state.window.base);
  el<HTMLInputElement>("win-brightness").value = String(state.window.brightness);
  el<HTMLInputElement>("win-contrast").value = String(state.window.contrast);
  el<HTMLInputElement>("cut-enabled").checked = state.cut.enabled;
  seqLabel.textContent = String(state.seq);
}

function connect(): void {
  session?.close();
  session = new Session(el<HTMLInputElement>("server-url").value, {
    status: (status, detail) => {
      statusBar.textContent = `${status}: ${detail}`;
      statusBar.dataset.status = status;
    },
    state: (state) => {
      lastState = state;
      refreshControls(state);
    },
    frame: (png) => {
      frameImg.src = `data:image/png;base64,${png}`;
    },
    clients: (clients) => {
      clientList.innerHTML = "";
      for (const c of clients) {
        const li = document.createElement("li");
        li.textContent = `#${c.id} ${c.name || "(anon)"} [${c.role}]`;
        clientList.appendChild(li);
      }
    },
    nack: (reason) => {
      nackBar.textContent = `rejected: ${reason}`;
      setTimeout(() => (nackBar.textContent = ""), 4000);
    },
  });
  session.connect();
}

el<HTMLButtonElement>("connect").onclick = connect;

// -- pose: drag to rotate, slider to scale -----------------------------------

frameImg.addEventListener("pointerdown", (ev) => {
  dragAnchor = currentModel().r_quat;
  dragStart = [ev.clientX, ev.clientY];
  frameImg.setPointerCapture(ev.pointerId);
});

frameImg.addEventListener("pointermove", (ev) => {
  if (!dragAnchor || !dragStart || !session) return;
  const rotated = dragRotate(dragAnchor, ev.clientX - dragStart[0], ev.clientY - dragStart[1]);
  session.sendControl("SET_POSE", { model: { ...currentModel(), r_quat: rotated } });
});

frameImg.addEventListener("pointerup", () => {
  dragAnchor = null;
  dragStart = null;
});

el<HTMLInputElement>("scale").oninput = (ev) => {
  const factor = Number((ev.target as HTMLInputElement).value);
  session?.sendControl("SET_POSE", { model: scaledModel(currentModel(), factor) });
  (ev.target as HTMLInputElement).value = "1";
};

// -- transfer ----------------------------------------------------------------

el<HTMLSelectElement>("scheme").onchange = (ev) => {
  session?.sendControl("SET_TRANSFER", {
    scheme: { kind: (ev.target as HTMLSelectElement).value },
  });
};

function sendWindow(): void {
  session?.sendControl("SET_TRANSFER", {
    window: {
      base: Number(el<HTMLInputElement>("win-base").value),
      brightness: Number(el<HTMLInputElement>("win-brightness").value),
      contrast: Number(el<HTMLInputElement>("win-contrast").value),
    },
  });
}
el<HTMLInputElement>("win-base").oninput = sendWindow;
el<HTMLInputElement>("win-brightness").oninput = sendWindow;
el<HTMLInputElement>("win-contrast").oninput = sendWindow;

// -- cut plane ----------------------------------------------------------------

function sendCut(): void {
  const cut = cutPlaneFromAngles(
    Number(el<HTMLInputElement>("cut-theta").value),
    Number(el<HTMLInputElement>("cut-phi").value),
    Number(el<HTMLInputElement>("cut-depth").value),
    el<HTMLInputElement>("cut-enabled").checked,
  );
  session?.sendControl("SET_CUT_PLANE", { cut });
}
el<HTMLInputElement>("cut-enabled").onchange = sendCut;
el<HTMLInputElement>("cut-theta").oninput = sendCut;
el<HTMLInputElement>("cut-phi").oninput = sendCut;
el<HTMLInputElement>("cut-depth").oninput = sendCut;

// -- sketch annotation ---------------------------------------------------------

const sketch = el<HTMLCanvasElement>("sketch");
const ctx = sketch.getContext("2d")!;

function sketchPressure(ev: PointerEvent): number {
  // hardware pressure when present; mouse reports 0.5 while buttons are down
  return ev.pressure > 0 ? ev.pressure : ev.buttons ? 0.5 : 0;
}

sketch.addEventListener("pointerdown", (ev) => {
  sketchPoints = [];
  sketch.setPointerCapture(ev.pointerId);
  addSketchPoint(ev);
});

sketch.addEventListener("pointermove", (ev) => {
  if (sketchPoints.length > 0 && ev.buttons) addSketchPoint(ev);
});

sketch.addEventListener("pointerup", () => {
  if (session && sketchPoints.length > 0) {
    session.sendControl("ANNOTATE_STROKE", {
      points: sketchPoints,
      color: [1, 0.1, 0.1, 1],
    });
  }
  sketchPoints = [];
});

function addSketchPoint(ev: PointerEvent): void {
  const width = pressureToWidth(sketchPressure(ev), { widthMin: 0.001, widthMax: 0.008 });
  if (width <= 0) return;
  const rect = sketch.getBoundingClientRect();
  const [u, v] = canvasPointFromPixel(
    ev.clientX - rect.left,
    ev.clientY - rect.top,
    rect.width,
    rect.height,
    CANVAS_EXTENT,
  );
  sketchPoints.push([u, v, width]);
  const px = ev.clientX - rect.left;
  const py = ev.clientY - rect.top;
  ctx.fillStyle = "rgba(255,40,40,0.9)";
  ctx.beginPath();
  ctx.arc(px, py, Math.max(width * 1500, 1), 0, Math.PI * 2);
  ctx.fill();
}

el<HTMLButtonElement>("clear-sketch").onclick = () => {
  ctx.clearRect(0, 0, sketch.width, sketch.height);
  sketchPoints = [];
};

document.title = `voxelglass panel (drag = ${DRAG_DEGREES_PER_PIXEL} deg/px)`;
connect();
