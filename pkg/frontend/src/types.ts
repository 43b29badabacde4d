/** Bundle schema (version v1) and the explorer's view state. */

export interface SetupInfo {
  setup_id: string;
  gpu_label: string;
  runtime_label: string;
  tdp: number;
  peak_compute: number | null;
}

export interface ModelInfo {
  model_id: string;
  family: string;
  pub_year: number | null;
  params: number;
  flops: number;
  activations: number | null;
  input_size: number;
  url: string | null;
  accuracies: Record<string, number>;
}

export interface MetricEntry {
  model_id: string;
  setup_id: string;
  batch_size: number;
  energy_per_image: number;
  throughput: number;
  latency: number;
  avg_power: number;
  images_processed: number;
  wall_time: number;
}

export interface Bundle {
  format: string;
  version: string;
  setups: SetupInfo[];
  datasets: string[];
  models: ModelInfo[];
  metrics: MetricEntry[];
}

export type Metric = 'ratio' | 'manhattan';

/** Everything the UI needs to render; serializable to URL query params. */
export interface ViewState {
  setups: string[]; // selected setup ids (empty = all)
  datasets: string[]; // selected dataset ids (empty = mean of all)
  metric: Metric;
  weight: number; // W in [0, 1]
  minAccuracy: number; // percent threshold (red horizontal line)
  maxEnergy: number | null; // joules threshold (red vertical line), null = off
  topN: number;
  balanced: boolean; // scale the energy term onto 0-100
  logEnergy: boolean; // energy axis scale (always log in the reference view)
}

/** One plottable point: a model under one setup. */
export interface PlotPoint {
  modelId: string;
  setupId: string;
  label: string;
  family: string;
  accuracy: number;
  energy: number;
  url: string | null;
  detail: string;
}
