// Thin client for the planning service. The fetch implementation is
// injectable so tests can run against an in-memory fake.

import type {
  MapPointsDoc,
  MissionRequestDoc,
  PlanSetDoc,
  ValidationReportDoc,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ValidationRejection extends Error {
  constructor(public report: ValidationReportDoc) {
    super(`mission rejected: ${report.issues.length} issue(s)`);
  }
}

export class PlanBusy extends Error {}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async getMap(leaf: number, maxPoints?: number): Promise<MapPointsDoc> {
    const params = new URLSearchParams({ leaf: String(leaf) });
    if (maxPoints) params.set('max_points', String(maxPoints));
    const resp = await this.fetchImpl(this.url(`/map?${params}`));
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as MapPointsDoc;
  }

  /** Raw document text; byte-identical to what was last saved. */
  async getViewpointsText(): Promise<string | null> {
    const resp = await this.fetchImpl(this.url('/viewpoints'));
    if (resp.status === 404) return null;
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return await resp.text();
  }

  /**
   * Saves the exact `text` bytes. Throws ValidationRejection with the server
   * report when technique constraints fail (HTTP 422).
   */
  async putViewpointsText(text: string): Promise<void> {
    const resp = await this.fetchImpl(this.url('/viewpoints'), {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: text,
    });
    if (resp.status === 422) {
      throw new ValidationRejection((await resp.json()) as ValidationReportDoc);
    }
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
  }

  async postPlan(): Promise<PlanSetDoc> {
    const resp = await this.fetchImpl(this.url('/plan'), { method: 'POST' });
    if (resp.status === 409) throw new PlanBusy('a planning job is running');
    if (resp.status === 422) {
      throw new ValidationRejection((await resp.json()) as ValidationReportDoc);
    }
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as PlanSetDoc;
  }

  async getPlan(): Promise<PlanSetDoc | null> {
    const resp = await this.fetchImpl(this.url('/plan'));
    if (resp.status === 404) return null;
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as PlanSetDoc;
  }
}

export function encodeMission(doc: MissionRequestDoc): string {
  return JSON.stringify(doc, null, 2);
}

export function decodeMission(text: string): MissionRequestDoc {
  const doc = JSON.parse(text) as MissionRequestDoc;
  if (doc.format_version !== '1') {
    throw new Error(`unsupported format_version ${String(doc.format_version)}`);
  }
  return doc;
}
