// Wire types for the voxelglass session protocol (JSON over WebSocket text
// frames).  Every message is {type, seq, ...payload}; seq must strictly
// increase per client on outbound traffic.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export interface ModelPose {
  t: Vec3;
  r_quat: Quat;
  s: Vec3;
}

export interface CutPlaneState {
  enabled: boolean;
  point: Vec3;
  normal: Vec3;
}

export interface WindowState {
  base: number;
  brightness: number;
  contrast: number;
}

export interface StrokeState {
  points: [number, number, number][]; // u, v, width
  color: [number, number, number, number];
}

export interface SessionSnapshot {
  seq: number;
  model: ModelPose;
  cut: CutPlaneState;
  window: WindowState;
  scheme: { kind: string };
  opacity: { points: [number, number][] };
  marker: { present: boolean; pose?: { t: Vec3; r_quat: Quat } };
  strokes: StrokeState[];
}

export interface ClientEntry {
  id: number;
  name: string;
  role: string;
}

export interface InboundMessage {
  type: string;
  seq: number;
  [key: string]: unknown;
}

export function parseMessage(raw: string): InboundMessage | null {
  try {
    const obj = JSON.parse(raw);
    if (typeof obj !== "object" || obj === null || typeof obj.type !== "string") {
      return null;
    }
    if (typeof obj.seq !== "number") obj.seq = 0;
    return obj as InboundMessage;
  } catch {
    return null;
  }
}

export function encodeMessage(type: string, seq: number, payload: Record<string, unknown>): string {
  return JSON.stringify({ type, seq, ...payload });
}

// ---------------------------------------------------------------------------
// Quaternion helpers (w-first), enough for drag-rotate.
// ---------------------------------------------------------------------------

export function quatFromAxisAngle(axis: Vec3, angleRad: number): Quat {
  const n = Math.hypot(axis[0], axis[1], axis[2]) || 1;
  const half = angleRad / 2;
  const s = Math.sin(half) / n;
  return [Math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s];
}

export function quatMultiply(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatNormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]) || 1;
  const out: Quat = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
  return out[0] < 0 ? ([-out[0], -out[1], -out[2], -out[3]] as Quat) : out;
}

/** Angle in degrees between two unit rotations. */
export function quatAngleDeg(a: Quat, b: Quat): number {
  const na = quatNormalize(a);
  const nb = quatNormalize(b);
  const dot = Math.abs(na[0] * nb[0] + na[1] * nb[1] + na[2] * nb[2] + na[3] * nb[3]);
  return (2 * Math.acos(Math.min(dot, 1))) * (180 / Math.PI);
}
