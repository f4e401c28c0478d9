// Pointer gestures translated into protocol payloads.  All math lives here,
// DOM-free, so the mappings are unit-testable.

import { ModelPose, Quat, Vec3, quatFromAxisAngle, quatMultiply, quatNormalize } from "./protocol";

export const DRAG_DEGREES_PER_PIXEL = 0.5;

/** Orbit-style drag: horizontal pixels yaw about +y, vertical pitch about +x. */
export function dragRotate(anchor: Quat, dxPixels: number, dyPixels: number): Quat {
  const yaw = quatFromAxisAngle([0, 1, 0], (dxPixels * DRAG_DEGREES_PER_PIXEL * Math.PI) / 180);
  const pitch = quatFromAxisAngle([1, 0, 0], (dyPixels * DRAG_DEGREES_PER_PIXEL * Math.PI) / 180);
  return quatNormalize(quatMultiply(quatMultiply(yaw, pitch), anchor));
}

export function scaledModel(model: ModelPose, factor: number): ModelPose {
  const s = model.s.map((v) => Math.max(v * factor, 1e-6)) as Vec3;
  return { ...model, s };
}

/** Cut plane from two spherical angles plus a depth along the normal. */
export function cutPlaneFromAngles(
  thetaDeg: number,
  phiDeg: number,
  depth: number,
  enabled: boolean,
): { enabled: boolean; point: Vec3; normal: Vec3 } {
  const th = (thetaDeg * Math.PI) / 180;
  const ph = (phiDeg * Math.PI) / 180;
  const normal: Vec3 = [
    Math.sin(th) * Math.cos(ph),
    Math.cos(th),
    Math.sin(th) * Math.sin(ph),
  ];
  const point: Vec3 = [-depth * normal[0], -depth * normal[1], -0.8 - depth * normal[2]];
  return { enabled, point, normal };
}

export interface PressureConfig {
  widthMin: number;
  widthMax: number;
}

/** Pointer pressure (0..1, hardware or fallback 0.5) to stroke width. */
export function pressureToWidth(pressure: number, cfg: PressureConfig): number {
  const p = Math.min(Math.max(pressure, 0), 1);
  if (p <= 0) return 0;
  return cfg.widthMin + (cfg.widthMax - cfg.widthMin) * p;
}

export interface SketchPoint {
  u: number;
  v: number;
  width: number;
}

/** Canvas-pixel position to canvas-plane coordinates (meters, origin center). */
export function canvasPointFromPixel(
  px: number,
  py: number,
  canvasWidthPx: number,
  canvasHeightPx: number,
  extentMeters: [number, number],
): [number, number] {
  const u = (px / canvasWidthPx - 0.5) * extentMeters[0];
  const v = (0.5 - py / canvasHeightPx) * extentMeters[1];
  return [u, v];
}
