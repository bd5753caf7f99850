/** Wire types of the gateway API. The UI never computes costs or metrics
 * itself; every number it renders arrives through these shapes. */

export interface Session {
  session_id: string;
  perspective: "passenger" | "external";
  created_at: string;
}

export interface Scenario {
  image_id: string;
  instance_id: number;
  image_url: string;
  /** 1-based index of the highlighted (true) class. */
  target_class: number;
  class_name: string;
  perspective: string;
}

export interface AnswerPayload {
  session_id: string;
  image_id: string;
  target_class: number;
  /** 1-based class index -> severity exponent 0..6; exactly five entries. */
  severities: Record<string, number>;
  gender?: string;
  age_band?: string;
  graduation?: string;
  field?: string;
  license?: string;
  transport?: string;
}

export interface FeedbackPayload {
  session_id: string;
  difficulty?: number;
  comments?: string;
  gender?: string;
  age_band?: string;
  graduation?: string;
  field?: string;
  license?: string;
  transport?: string;
}

/** Matrix document: log10 space, null on the diagonal. */
export interface MatrixResponse {
  n_classes: number;
  space: "log10";
  class_names: string[] | null;
  entries: (number | null)[][];
  counts?: number[][];
  group?: unknown;
  n_answers?: number | null;
}

export interface MetricsReport {
  class_names: string[] | null;
  iou: (number | null)[];
  recall: (number | null)[];
  precision: (number | null)[];
  mean_iou: number | null;
  mean_recall: number | null;
  mean_precision: number | null;
}

export interface ZoneCounts {
  name: string;
  max_distance_m: number;
  total: number;
  detected_both: number;
  only_a: number;
  only_b: number;
  overlooked_both: number;
  overlooked_a: number;
  overlooked_b: number;
}

export interface PixelPrecision {
  tp_pixels: number;
  fp_pixels: number;
  total_pixels: number;
  precision: number | null;
}

export interface BirdseyePointOut {
  image_id: string;
  instance_id: number;
  distance_m: number;
  bearing_deg: number | null;
  category: "overlooked_both" | "only_a" | "only_b" | "detected_both";
  recall_a: number;
  recall_b: number;
  x: number;
  y: number;
}

export interface BirdseyeData {
  layout: "wedge" | "strip";
  field_half_angle_deg: number;
  max_radius_m: number;
  rule_names: string[];
  zones: ZoneCounts[];
  points: BirdseyePointOut[];
}

export interface WhatIfResponse {
  dataset_id: string;
  threshold: number;
  metrics: MetricsReport;
  consequences: {
    zones: ZoneCounts[];
    precision_whatif: PixelPrecision;
    precision_baseline: PixelPrecision;
  };
  birdseye: BirdseyeData;
}
