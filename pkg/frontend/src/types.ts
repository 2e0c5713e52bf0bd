// API payload shapes. The dashboard performs no analysis math: every number
// it shows comes verbatim from one of these fields.

export interface Envelope<T = unknown> {
  plugin: string;
  target: string;
  inputs: Record<string, unknown>;
  computed_at: string;
  data: T;
  warnings: string[];
}

export interface RunInfo {
  id: string;
  meta: Record<string, unknown>;
  budgets: number[];
  objectives: { name: string; direction: string; lower: number | null; upper: number | null }[];
  hash: string;
  last_refresh: string | null;
}

export interface GroupInfo {
  name: string;
  run_ids: string[];
}

export interface JobSnapshot {
  job_id: string;
  plugin: string;
  target: string;
  inputs: Record<string, unknown>;
  state: "queued" | "running" | "done" | "failed";
  result: Envelope | null;
  error: string | null;
}

export type SubmitResponse = { cached: Envelope } | { job_id: string };

export interface OverviewData {
  report: string;
  total_trials: number;
  counts: Record<string, number>;
  per_budget_fraction: { budget: number; fraction: number }[];
  failures: { config_id: number; budget: number; status: string; traceback: string | null }[];
  matrix: { config_ids: number[]; budgets: number[]; status: string[][] };
}

export interface CorrelationData {
  objective: string;
  budgets: number[];
  coefficient: (number | null)[][];
  support: number[][];
  labels: (string | null)[][];
  summary: string;
}

export interface ParetoPoint {
  config_id: number;
  origin_run_id: string;
  origin_config_id: number;
  x: number;
  y: number;
  dominated: boolean;
}

export interface ParetoData {
  objective_x: string;
  objective_y: string;
  budget: number;
  sources: { id: string; points: ParetoPoint[] }[];
}

export interface FootprintPoint {
  x: number;
  y: number;
  kind: "evaluated" | "incumbent" | "border" | "random";
  config_id: number | null;
  origin_run_id: string | null;
  origin_config_id: number | null;
  cost: number | null;
  values: Record<string, unknown>;
}

export interface FootprintData {
  objective: string;
  budget: number;
  seed: number;
  points: FootprintPoint[];
}

export interface ImportanceScore {
  name: string;
  mean: number;
  std: number;
}

export interface ImportanceData {
  method: "fanova" | "lpi";
  objective: string;
  budget: number;
  n_trees: number;
  seed: number;
  scores: ImportanceScore[];
  incumbent_config_id?: number;
  flat_neighborhood?: boolean;
}

export interface ConfigDetail {
  run_id: string;
  config_id: number;
  origin: { run_id: string; meta: Record<string, unknown> };
  values: Record<string, unknown>;
  active: string[];
  per_budget_costs: { budget: number; costs: Record<string, number | null> }[];
  native_line: string;
}
