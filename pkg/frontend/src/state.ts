// Scene state: the single source of truth behind the UI panels. Pure logic,
// no DOM, no three.js — the renderer and panels subscribe to change events.

import type {
  MissionRequestDoc,
  PlanSetDoc,
  ValidationIssue,
  ViewpointDoc,
} from './types';
import { decodeMission, encodeMission } from './api';

export interface MissionSettings {
  teamSize: number;
  ambientLux: number;
  tMax: number;
  cruiseSpeed: number;
  takeoff: [number, number, number];
}

export const DEFAULT_SETTINGS: MissionSettings = {
  teamSize: 1,
  ambientLux: 100,
  tMax: 900,
  cruiseSpeed: 1.0,
  takeoff: [0, 0, 1.5],
};

export type Listener = () => void;

export class SceneState {
  private viewpoints: ViewpointDoc[] = [];
  private issuesByViewpoint = new Map<number, ValidationIssue[]>();
  private plan: PlanSetDoc | null = null;
  /** True when viewpoints changed after the current plan was produced. */
  private planStale = false;
  private savedText: string | null = null;
  private listeners: Listener[] = [];
  settings: MissionSettings = { ...DEFAULT_SETTINGS };

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private changed(): void {
    for (const fn of this.listeners) fn();
  }

  private editedAfterPlan(): void {
    if (this.plan) this.planStale = true;
    this.issuesByViewpoint.clear();
  }

  list(): readonly ViewpointDoc[] {
    return this.viewpoints;
  }

  count(): number {
    return this.viewpoints.length;
  }

  addViewpoint(vp: ViewpointDoc): number {
    this.viewpoints.push(vp);
    this.editedAfterPlan();
    this.changed();
    return this.viewpoints.length - 1;
  }

  updateViewpoint(index: number, vp: ViewpointDoc): void {
    if (index < 0 || index >= this.viewpoints.length) {
      throw new Error(`viewpoint index ${index} out of range`);
    }
    this.viewpoints[index] = vp;
    this.editedAfterPlan();
    this.changed();
  }

  removeViewpoint(index: number): void {
    if (index < 0 || index >= this.viewpoints.length) {
      throw new Error(`viewpoint index ${index} out of range`);
    }
    this.viewpoints.splice(index, 1);
    this.editedAfterPlan();
    this.changed();
  }

  /** The exact document text that PUT /viewpoints will receive. */
  missionText(): string {
    const doc: MissionRequestDoc = {
      format_version: '1',
      viewpoints: this.viewpoints,
      team_size: this.settings.teamSize,
      ambient_lux: this.settings.ambientLux,
      t_max: this.settings.tMax,
      cruise_speed: this.settings.cruiseSpeed,
      takeoff: { position: this.settings.takeoff, heading: 0 },
    };
    return encodeMission(doc);
  }

  markSaved(text: string): void {
    this.savedText = text;
    this.changed();
  }

  /** Replace local state from a server document (reload path). */
  loadFromText(text: string): void {
    const doc = decodeMission(text);
    this.viewpoints = doc.viewpoints.map((v) => ({ ...v }));
    this.settings = {
      teamSize: doc.team_size,
      ambientLux: doc.ambient_lux,
      tMax: doc.t_max,
      cruiseSpeed: doc.cruise_speed,
      takeoff: doc.takeoff ? [...doc.takeoff.position] : [...DEFAULT_SETTINGS.takeoff],
    };
    this.savedText = text;
    this.issuesByViewpoint.clear();
    this.changed();
  }

  hasUnsavedChanges(): boolean {
    return this.savedText !== this.missionText();
  }

  /** Attach a server validation report to the offending viewpoints. */
  applyValidationReport(issues: ValidationIssue[]): void {
    this.issuesByViewpoint.clear();
    for (const issue of issues) {
      const list = this.issuesByViewpoint.get(issue.index) ?? [];
      list.push(issue);
      this.issuesByViewpoint.set(issue.index, list);
    }
    this.changed();
  }

  issuesFor(index: number): readonly ValidationIssue[] {
    return this.issuesByViewpoint.get(index) ?? [];
  }

  setPlan(plan: PlanSetDoc): void {
    this.plan = plan;
    this.planStale = false;
    this.changed();
  }

  currentPlan(): PlanSetDoc | null {
    return this.plan;
  }

  isPlanStale(): boolean {
    return this.planStale;
  }

  /**
   * Per-flight overlay descriptors for the renderer: one selectable layer
   * per flight with its path polyline and acquisition markers.
   */
  planOverlay(): FlightLayer[] {
    if (!this.plan) return [];
    return this.plan.plans.map((steps, i) => ({
      flight: i,
      durationS: this.plan!.durations_s[i],
      overBudget: this.plan!.durations_s[i] >= this.plan!.t_max,
      path: steps.map((s) => s.pose.position),
      acquisitions: steps
        .filter((s) => s.acquire)
        .map((s) => ({ position: s.pose.position, ooi: s.ooi })),
    }));
  }
}

export interface FlightLayer {
  flight: number;
  durationS: number;
  overBudget: boolean;
  path: [number, number, number][];
  acquisitions: { position: [number, number, number]; ooi: [number, number, number] }[];
}
