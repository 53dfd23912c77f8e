// Document types mirroring the service JSON contracts (format_version "1").

export type Vec3 = [number, number, number];

export interface PoseDoc {
  position: Vec3;
  heading?: number;
  gimbal_pitch?: number;
}

export interface ViewpointDoc {
  camera_pose: PoseDoc;
  ooi_point: Vec3;
  technique: string;
  acquire?: boolean;
  camera_onboard?: boolean;
}

export interface MissionRequestDoc {
  format_version: '1';
  viewpoints: ViewpointDoc[];
  team_size: number;
  ambient_lux: number;
  t_max: number;
  cruise_speed: number;
  takeoff?: PoseDoc;
}

export interface PlanTripletDoc {
  pose: PoseDoc;
  ooi: Vec3;
  acquire: boolean;
  technique?: string | null;
  dwell_s?: number;
}

export interface PlanSetDoc {
  format_version: '1';
  plans: PlanTripletDoc[][];
  visit_order: number[];
  durations_s: number[];
  t_max: number;
  cruise_speed: number;
  takeoff: PoseDoc;
}

export interface ValidationIssue {
  index: number;
  technique: string;
  code: string;
  message: string;
}

export interface ValidationReportDoc {
  format_version: '1';
  ok: boolean;
  checked: number;
  issues: ValidationIssue[];
}

export interface MapPointsDoc {
  format_version: '1';
  frame_label: string;
  leaf: number;
  count: number;
  points: Vec3[];
}

export interface CameraOptics {
  horizontalFovDeg: number;
  aspect: number; // width / height
  previewDepth: number; // metres to the far preview plane
}

export const DEFAULT_OPTICS: CameraOptics = {
  horizontalFovDeg: 62,
  aspect: 3 / 2,
  previewDepth: 5,
};
