import { describe, expect, it } from 'vitest';

import {
  frustumCorners,
  frustumHorizontalAngle,
  norm,
  pickNearestPoint,
  sub,
} from '../src/geometry';
import type { Vec3 } from '../src/types';

describe('pickNearestPoint', () => {
  const cloud: Vec3[] = [
    [5, 0, 0],
    [5, 0.3, 0],
    [10, 2, 0],
    [-3, 0, 0],
  ];

  it('selects the point closest to the ray', () => {
    const hit = pickNearestPoint([0, 0, 0], [1, 0, 0], cloud, 0.5);
    expect(hit).not.toBeNull();
    expect(hit!.index).toBe(0);
    expect(hit!.distanceToRay).toBe(0);
  });

  it('rejects picks on empty regions', () => {
    const hit = pickNearestPoint([0, 0, 0], [0, 0, 1], cloud, 0.5);
    expect(hit).toBeNull();
  });

  it('ignores points behind the camera', () => {
    const hit = pickNearestPoint([0, 0, 0], [1, 0, 0], [[-3, 0, 0]], 1.0);
    expect(hit).toBeNull();
  });
});

describe('frustumCorners', () => {
  it('matches the configured field of view', () => {
    const optics = { horizontalFovDeg: 62, aspect: 1.5, previewDepth: 5 };
    const position: Vec3 = [1, 2, 3];
    const corners = frustumCorners(position, 0.7, -0.2, optics);
    expect(corners).toHaveLength(4);
    const angle = frustumHorizontalAngle(position, corners);
    // the angle between left/right edge midpoints equals the horizontal FOV
    expect(angle).toBeCloseTo((62 * Math.PI) / 180, 6);
  });

  it('puts all corners at the preview depth plane', () => {
    const optics = { horizontalFovDeg: 60, aspect: 1.5, previewDepth: 4 };
    const position: Vec3 = [0, 0, 0];
    const heading = 0.3;
    const pitch = 0.1;
    const forward: Vec3 = [
      Math.cos(heading) * Math.cos(pitch),
      Math.sin(heading) * Math.cos(pitch),
      Math.sin(pitch),
    ];
    for (const corner of frustumCorners(position, heading, pitch, optics)) {
      const rel = sub(corner, position);
      const alongForward =
        rel[0] * forward[0] + rel[1] * forward[1] + rel[2] * forward[2];
      expect(alongForward).toBeCloseTo(4, 9);
    }
  });

  it('spans symmetric horizontal extents', () => {
    const optics = { horizontalFovDeg: 90, aspect: 2, previewDepth: 2 };
    const corners = frustumCorners([0, 0, 0], 0, 0, optics);
    // looking along +x: y extents symmetric, |y| = tan(45 deg) * depth
    expect(Math.abs(corners[0][1])).toBeCloseTo(2, 9);
    expect(corners[0][1]).toBeCloseTo(-corners[1][1], 9);
  });
});

describe('vector helpers', () => {
  it('norm of axis vectors', () => {
    expect(norm([3, 4, 0])).toBe(5);
  });
});
