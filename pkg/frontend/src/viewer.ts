// three.js rendering: point cloud, placed viewpoints with frustum previews,
// and per-flight plan overlays. All state comes from SceneState; this module
// only draws.

import * as THREE from 'three';
import { OrbitControls } from 'three/examples/jsm/controls/OrbitControls.js';
import { frustumCorners } from './geometry';
import type { FlightLayer } from './state';
import type { CameraOptics, Vec3, ViewpointDoc } from './types';
import { DEFAULT_OPTICS } from './types';

const FLIGHT_COLORS = [0xe41a1c, 0x377eb8, 0x4daf4a, 0x984ea3, 0xff7f00, 0xa65628];

export class Viewer {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly renderer: THREE.WebGLRenderer;
  readonly controls: OrbitControls;
  private cloud: THREE.Points | null = null;
  private cloudPositions: Vec3[] = [];
  private viewpointGroup = new THREE.Group();
  private overlayGroup = new THREE.Group();
  private flightLayers = new Map<number, THREE.Group>();
  optics: CameraOptics = { ...DEFAULT_OPTICS };

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setClearColor(0x10141a);
    this.camera = new THREE.PerspectiveCamera(55, 1, 0.05, 500);
    this.camera.up.set(0, 0, 1); // z-up world
    this.camera.position.set(-8, -8, 6);
    this.controls = new OrbitControls(this.camera, canvas);
    this.scene.add(this.viewpointGroup);
    this.scene.add(this.overlayGroup);
    this.scene.add(new THREE.AxesHelper(2));
    this.resize();
  }

  resize(): void {
    const w = this.canvas.clientWidth || 800;
    const h = this.canvas.clientHeight || 600;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }

  setCloud(points: Vec3[]): void {
    if (this.cloud) this.scene.remove(this.cloud);
    this.cloudPositions = points;
    const positions = new Float32Array(points.length * 3);
    for (let i = 0; i < points.length; i++) {
      positions[i * 3] = points[i][0];
      positions[i * 3 + 1] = points[i][1];
      positions[i * 3 + 2] = points[i][2];
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute('position', new THREE.BufferAttribute(positions, 3));
    const material = new THREE.PointsMaterial({ size: 0.06, color: 0x9fb4c7 });
    this.cloud = new THREE.Points(geometry, material);
    this.scene.add(this.cloud);
    const box = new THREE.Box3().setFromObject(this.cloud);
    const center = box.getCenter(new THREE.Vector3());
    this.controls.target.copy(center);
    this.controls.update();
  }

  cloudPointsRef(): Vec3[] {
    return this.cloudPositions;
  }

  /** Ray through a normalized device coordinate, for OOI picking. */
  pickRay(ndcX: number, ndcY: number): { origin: Vec3; direction: Vec3 } {
    const raycaster = new THREE.Raycaster();
    raycaster.setFromCamera(new THREE.Vector2(ndcX, ndcY), this.camera);
    const o = raycaster.ray.origin;
    const d = raycaster.ray.direction;
    return { origin: [o.x, o.y, o.z], direction: [d.x, d.y, d.z] };
  }

  renderViewpoints(viewpoints: readonly ViewpointDoc[], flagged: Set<number>): void {
    this.viewpointGroup.clear();
    viewpoints.forEach((vp, i) => {
      const color = flagged.has(i) ? 0xff5252 : 0x4dd0e1;
      const pos = vp.camera_pose.position;
      const marker = new THREE.Mesh(
        new THREE.SphereGeometry(0.12, 12, 12),
        new THREE.MeshBasicMaterial({ color }),
      );
      marker.position.set(pos[0], pos[1], pos[2]);
      this.viewpointGroup.add(marker);

      const corners = frustumCorners(
        pos,
        vp.camera_pose.heading ?? 0,
        vp.camera_pose.gimbal_pitch ?? 0,
        this.optics,
      );
      const lines: Vec3[][] = [
        ...corners.map((c) => [pos, c] as Vec3[]),
        [...corners, corners[0]],
      ];
      for (const line of lines) {
        const geometry = new THREE.BufferGeometry().setFromPoints(
          line.map((p) => new THREE.Vector3(p[0], p[1], p[2])),
        );
        this.viewpointGroup.add(
          new THREE.Line(geometry, new THREE.LineBasicMaterial({ color })),
        );
      }
      // ray to the object of interest
      const ooi = vp.ooi_point;
      const ooiGeom = new THREE.BufferGeometry().setFromPoints([
        new THREE.Vector3(pos[0], pos[1], pos[2]),
        new THREE.Vector3(ooi[0], ooi[1], ooi[2]),
      ]);
      this.viewpointGroup.add(
        new THREE.Line(
          ooiGeom,
          new THREE.LineDashedMaterial({ color: 0xffc107, dashSize: 0.2, gapSize: 0.1 }),
        ),
      );
    });
  }

  /** One toggleable layer per flight. */
  renderPlanOverlay(layers: FlightLayer[], visible: Set<number>): void {
    this.overlayGroup.clear();
    this.flightLayers.clear();
    for (const layer of layers) {
      const group = new THREE.Group();
      group.visible = visible.has(layer.flight);
      const color = FLIGHT_COLORS[layer.flight % FLIGHT_COLORS.length];
      const geometry = new THREE.BufferGeometry().setFromPoints(
        layer.path.map((p) => new THREE.Vector3(p[0], p[1], p[2])),
      );
      group.add(new THREE.Line(geometry, new THREE.LineBasicMaterial({ color })));
      for (const acq of layer.acquisitions) {
        const star = new THREE.Mesh(
          new THREE.OctahedronGeometry(0.15),
          new THREE.MeshBasicMaterial({ color: 0x66bb6a }),
        );
        star.position.set(acq.position[0], acq.position[1], acq.position[2]);
        group.add(star);
      }
      this.flightLayers.set(layer.flight, group);
      this.overlayGroup.add(group);
    }
  }

  setFlightVisible(flight: number, visible: boolean): void {
    const group = this.flightLayers.get(flight);
    if (group) group.visible = visible;
  }

  renderLoop(): void {
    const tick = () => {
      requestAnimationFrame(tick);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    tick();
  }
}
