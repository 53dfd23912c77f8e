import { describe, expect, it } from 'vitest';

import { ApiClient, ValidationRejection } from '../src/api';
import { SceneState } from '../src/state';
import type { ViewpointDoc } from '../src/types';
import { FakeServer } from './fakeServer';

function vp(x: number, technique = 'VIS'): ViewpointDoc {
  return {
    camera_pose: { position: [x, 0, 2], heading: 0.5, gimbal_pitch: 0.1 },
    ooi_point: [x, 5, 3],
    technique,
    acquire: true,
    camera_onboard: true,
  };
}

describe('viewpoint round-trip', () => {
  it('place 5, save, reload: server document and state identical', async () => {
    const server = new FakeServer();
    const api = new ApiClient('', server.fetch);
    const state = new SceneState();
    state.settings.ambientLux = 100;
    for (let i = 0; i < 5; i++) state.addViewpoint(vp(i));

    const text = state.missionText();
    await api.putViewpointsText(text);
    state.markSaved(text);
    expect(state.hasUnsavedChanges()).toBe(false);
    expect(server.savedBytes).toBe(text); // byte-exact storage

    // fresh page: reload from the server
    const reloaded = new SceneState();
    const fetched = await new ApiClient('', server.fetch).getViewpointsText();
    expect(fetched).toBe(text);
    reloaded.loadFromText(fetched!);
    expect(reloaded.count()).toBe(5);
    expect(reloaded.missionText()).toBe(text);
    expect(reloaded.list()).toEqual(state.list());
  });

  it('round-trips poses bit-exactly through the document', () => {
    const state = new SceneState();
    const exact = vp(1.2345678901234567);
    exact.camera_pose.heading = Math.PI / 3;
    state.addViewpoint(exact);
    const text = state.missionText();
    const again = new SceneState();
    again.loadFromText(text);
    expect(again.missionText()).toBe(text);
    expect(again.list()[0].camera_pose.position[0]).toBe(1.2345678901234567);
  });
});

describe('validation echo', () => {
  it('attaches the 422 report to the offending viewpoint', async () => {
    const server = new FakeServer();
    const api = new ApiClient('', server.fetch);
    const state = new SceneState();
    state.settings.ambientLux = 500; // bright: RTI must be rejected
    state.addViewpoint(vp(0, 'VIS'));
    state.addViewpoint(vp(1, 'RTI'));

    let rejected: ValidationRejection | null = null;
    try {
      await api.putViewpointsText(state.missionText());
    } catch (err) {
      rejected = err as ValidationRejection;
    }
    expect(rejected).not.toBeNull();
    state.applyValidationReport(rejected!.report.issues);
    expect(state.issuesFor(0)).toHaveLength(0);
    expect(state.issuesFor(1)).toHaveLength(1);
    expect(state.issuesFor(1)[0].code).toBe('ambient_forbidden');
    expect(server.savedBytes).toBeNull(); // rejected documents are not stored
  });
});

describe('plan overlay', () => {
  it('renders one selectable layer per flight', async () => {
    const server = new FakeServer();
    const api = new ApiClient('', server.fetch);
    const state = new SceneState();
    state.settings.ambientLux = 100;
    for (let i = 0; i < 5; i++) state.addViewpoint(vp(i));
    await api.putViewpointsText(state.missionText());
    state.setPlan(await api.postPlan());

    const layers = state.planOverlay();
    expect(layers).toHaveLength(3); // 5 viewpoints, 2 per flight
    expect(new Set(layers.map((l) => l.flight)).size).toBe(3);
    for (const layer of layers) {
      expect(layer.path.length).toBeGreaterThanOrEqual(3);
      expect(layer.acquisitions.length).toBeGreaterThanOrEqual(1);
      expect(layer.overBudget).toBe(false);
    }
  });

  it('flags staleness when a viewpoint changes after planning', async () => {
    const server = new FakeServer();
    const api = new ApiClient('', server.fetch);
    const state = new SceneState();
    state.settings.ambientLux = 100;
    state.addViewpoint(vp(0));
    await api.putViewpointsText(state.missionText());
    state.setPlan(await api.postPlan());
    expect(state.isPlanStale()).toBe(false);

    state.updateViewpoint(0, vp(9));
    expect(state.isPlanStale()).toBe(true);

    state.setPlan(await api.postPlan());
    expect(state.isPlanStale()).toBe(false);
  });
});

describe('plan concurrency', () => {
  it('surfaces 409 as PlanBusy', async () => {
    const server = new FakeServer();
    const api = new ApiClient('', server.fetch);
    const state = new SceneState();
    state.addViewpoint(vp(0));
    await api.putViewpointsText(state.missionText());
    server.busy = true;
    await expect(api.postPlan()).rejects.toThrowError(/planning job/);
    server.busy = false;
    await expect(api.postPlan()).resolves.toBeTruthy();
  });
});
