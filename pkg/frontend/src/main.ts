// Application wiring: panels, picking flow, save/load, planning, review.

import { ApiClient, PlanBusy, ValidationRejection } from './api';
import { pickNearestPoint } from './geometry';
import { SceneState } from './state';
import type { ViewpointDoc } from './types';
import { Viewer } from './viewer';

const PICK_RADIUS_M = 0.6;
const TECHNIQUES = [
  'VIS', 'VISTR', 'RAK', 'TPL', 'RTI', 'VIVL', 'UVR', 'UVF', 'UVRFC',
  'IRR', 'IRRTR', 'IRF', 'IRRFC', 'RADIOGRAPHY', 'RECON3D',
  'PHOTOGRAMMETRY', 'ENVMON',
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setBanner(text: string, kind: 'info' | 'warn' | 'error'): void {
  const banner = el<HTMLDivElement>('banner');
  banner.textContent = text;
  banner.dataset.kind = kind;
  banner.style.display = text ? 'block' : 'none';
}

async function start(): Promise<void> {
  const api = new ApiClient('');
  const state = new SceneState();
  const viewer = new Viewer(el<HTMLCanvasElement>('viewer'));
  const listPanel = el<HTMLUListElement>('viewpoint-list');
  const flightPanel = el<HTMLUListElement>('flight-list');
  const visibleFlights = new Set<number>();
  let placing = false;

  function redraw(): void {
    const flagged = new Set<number>();
    for (let i = 0; i < state.count(); i++) {
      if (state.issuesFor(i).length) flagged.add(i);
    }
    viewer.renderViewpoints(state.list(), flagged);

    listPanel.innerHTML = '';
    state.list().forEach((vp, i) => {
      const item = document.createElement('li');
      const pos = vp.camera_pose.position;
      item.textContent =
        `#${i} ${vp.technique} @ (${pos[0].toFixed(1)}, ${pos[1].toFixed(1)}, ` +
        `${pos[2].toFixed(1)})`;
      for (const issue of state.issuesFor(i)) {
        const err = document.createElement('div');
        err.className = 'issue';
        err.textContent = issue.message;
        item.appendChild(err);
      }
      const remove = document.createElement('button');
      remove.textContent = 'x';
      remove.onclick = () => state.removeViewpoint(i);
      item.appendChild(remove);
      listPanel.appendChild(item);
    });

    const layers = state.planOverlay();
    viewer.renderPlanOverlay(layers, visibleFlights);
    flightPanel.innerHTML = '';
    for (const layer of layers) {
      const item = document.createElement('li');
      const toggle = document.createElement('input');
      toggle.type = 'checkbox';
      toggle.checked = visibleFlights.has(layer.flight);
      toggle.onchange = () => {
        if (toggle.checked) visibleFlights.add(layer.flight);
        else visibleFlights.delete(layer.flight);
        viewer.setFlightVisible(layer.flight, toggle.checked);
      };
      const gauge = `${layer.durationS.toFixed(0)} s / ${state.currentPlan()!.t_max.toFixed(0)} s`;
      const label = document.createElement('span');
      label.textContent = ` flight ${layer.flight}: ${gauge}${layer.overBudget ? ' OVER BUDGET' : ''}`;
      item.append(toggle, label);
      flightPanel.appendChild(item);
    }

    if (state.isPlanStale()) {
      setBanner('viewpoints changed since this plan was computed: re-plan', 'warn');
    } else if (state.hasUnsavedChanges()) {
      setBanner('unsaved viewpoint changes', 'info');
    } else {
      setBanner('', 'info');
    }
  }
  state.subscribe(redraw);

  // map load with the point budget negotiated server-side
  const map = await api.getMap(0.1, 500_000);
  viewer.setCloud(map.points);
  el<HTMLSpanElement>('map-info').textContent =
    `${map.count} points at ${map.leaf.toFixed(2)} m leaf`;

  const saved = await api.getViewpointsText();
  if (saved !== null) state.loadFromText(saved);

  el<HTMLButtonElement>('place-btn').onclick = () => {
    placing = true;
    setBanner('click a cloud point to target it from the current camera pose', 'info');
  };

  el<HTMLCanvasElement>('viewer').addEventListener('click', (event) => {
    if (!placing) return;
    const rect = (event.target as HTMLCanvasElement).getBoundingClientRect();
    const ndcX = ((event.clientX - rect.left) / rect.width) * 2 - 1;
    const ndcY = -(((event.clientY - rect.top) / rect.height) * 2 - 1);
    const ray = viewer.pickRay(ndcX, ndcY);
    const hit = pickNearestPoint(
      ray.origin, ray.direction, viewer.cloudPointsRef(), PICK_RADIUS_M,
    );
    if (!hit) {
      setBanner(
        `no cloud point within ${PICK_RADIUS_M} m of that ray: aim at the model`,
        'error',
      );
      return;
    }
    placing = false;
    const cam = viewer.camera.position;
    const heading = Math.atan2(hit.point[1] - cam.y, hit.point[0] - cam.x);
    const horiz = Math.hypot(hit.point[0] - cam.x, hit.point[1] - cam.y);
    const pitch = Math.atan2(hit.point[2] - cam.z, horiz);
    const vp: ViewpointDoc = {
      camera_pose: { position: [cam.x, cam.y, cam.z], heading, gimbal_pitch: pitch },
      ooi_point: hit.point,
      technique: el<HTMLSelectElement>('technique').value,
      acquire: true,
      camera_onboard: true,
    };
    state.addViewpoint(vp);
  });

  el<HTMLButtonElement>('save-btn').onclick = async () => {
    const text = state.missionText();
    try {
      await api.putViewpointsText(text);
      state.markSaved(text);
      setBanner('saved', 'info');
    } catch (err) {
      if (err instanceof ValidationRejection) {
        state.applyValidationReport(err.report.issues);
        setBanner(
          `rejected: ${err.report.issues.length} constraint issue(s), see list`,
          'error',
        );
      } else {
        setBanner(String(err), 'error');
      }
    }
  };

  el<HTMLButtonElement>('plan-btn').onclick = async () => {
    try {
      const plan = await api.postPlan();
      visibleFlights.clear();
      plan.plans.forEach((_, i) => visibleFlights.add(i));
      state.setPlan(plan);
      setBanner(`planned ${plan.plans.length} flight(s)`, 'info');
    } catch (err) {
      if (err instanceof PlanBusy) setBanner('planner busy, retry shortly', 'warn');
      else if (err instanceof ValidationRejection) {
        state.applyValidationReport(err.report.issues);
        setBanner('mission no longer validates; fix the flagged viewpoints', 'error');
      } else setBanner(String(err), 'error');
    }
  };

  const techniqueSelect = el<HTMLSelectElement>('technique');
  for (const t of TECHNIQUES) {
    const option = document.createElement('option');
    option.value = t;
    option.textContent = t;
    techniqueSelect.appendChild(option);
  }

  window.addEventListener('resize', () => viewer.resize());
  viewer.renderLoop();
  redraw();
}

start().catch((err) => setBanner(`startup failed: ${err}`, 'error'));
