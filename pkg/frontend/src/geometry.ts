// Pure vector math for picking and frustum previews. Kept three-free so the
// logic is unit-testable in node.

import type { CameraOptics, Vec3 } from './types';

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(a: Vec3): number {
  return Math.sqrt(dot(a, a));
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) throw new Error('cannot normalize a zero vector');
  return scale(a, 1 / n);
}

export interface PickResult {
  index: number;
  point: Vec3;
  distanceToRay: number;
}

/**
 * Nearest cloud point to a ray, within pickRadius of it. Returns null when
 * nothing is close enough (e.g. a click on empty sky).
 */
export function pickNearestPoint(
  origin: Vec3,
  direction: Vec3,
  points: Vec3[],
  pickRadius: number,
): PickResult | null {
  const dir = normalize(direction);
  let best: PickResult | null = null;
  for (let i = 0; i < points.length; i++) {
    const rel = sub(points[i], origin);
    const along = dot(rel, dir);
    if (along <= 0) continue; // behind the camera
    const offAxis = sub(rel, scale(dir, along));
    const d = norm(offAxis);
    if (d > pickRadius) continue;
    // prefer the smallest off-axis distance; ties toward the nearer point
    if (
      best === null ||
      d < best.distanceToRay - 1e-12 ||
      (Math.abs(d - best.distanceToRay) <= 1e-12 && along < dot(sub(best.point, origin), dir))
    ) {
      best = { index: i, point: points[i], distanceToRay: d };
    }
  }
  return best;
}

/**
 * Frustum preview corners for a camera at `position` looking along
 * heading/pitch (heading about +z from +x; positive pitch looks up).
 * Returns the four far-plane corners at optics.previewDepth.
 */
export function frustumCorners(
  position: Vec3,
  heading: number,
  pitch: number,
  optics: CameraOptics,
): Vec3[] {
  const forward: Vec3 = [
    Math.cos(heading) * Math.cos(pitch),
    Math.sin(heading) * Math.cos(pitch),
    Math.sin(pitch),
  ];
  const right = normalize(cross(forward, [0, 0, 1]));
  const up = cross(right, forward);
  const halfH = Math.tan(((optics.horizontalFovDeg / 2) * Math.PI) / 180);
  const halfV = halfH / optics.aspect;
  const d = optics.previewDepth;
  const center = add(position, scale(forward, d));
  const corners: Vec3[] = [];
  for (const [sx, sy] of [
    [-1, -1],
    [1, -1],
    [1, 1],
    [-1, 1],
  ] as const) {
    corners.push(
      add(center, add(scale(right, sx * halfH * d), scale(up, sy * halfV * d))),
    );
  }
  return corners;
}

/** Angle subtended at the camera by the frustum's horizontal edge pair. */
export function frustumHorizontalAngle(
  position: Vec3,
  corners: Vec3[],
): number {
  const midLeft = scale(add(corners[0], corners[3]), 0.5);
  const midRight = scale(add(corners[1], corners[2]), 0.5);
  const a = normalize(sub(midLeft, position));
  const b = normalize(sub(midRight, position));
  return Math.acos(Math.min(1, Math.max(-1, dot(a, b))));
}
