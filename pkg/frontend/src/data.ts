/** Bundle loading/validation and point derivation for the plots. */

import { Bundle, PlotPoint, ViewState } from './types.js';

export const BUNDLE_VERSION = 'v1';

export class BundleError extends Error {}

/** Validate a parsed JSON document as a v1 explorer bundle. */
export function validateBundle(doc: unknown): Bundle {
  const b = doc as Bundle;
  if (!b || typeof b !== 'object' || b.format !== 'enerprof-bundle') {
    throw new BundleError('not an explorer bundle');
  }
  if (b.version !== BUNDLE_VERSION) {
    throw new BundleError(`unsupported bundle version ${b.version}, expected ${BUNDLE_VERSION}`);
  }
  for (const key of ['setups', 'datasets', 'models', 'metrics'] as const) {
    if (!Array.isArray(b[key])) throw new BundleError(`bundle missing ${key}[]`);
  }
  return b;
}

/** Accuracy under the current dataset selection: one id, or the mean. */
export function accuracyFor(
  accuracies: Record<string, number>,
  datasets: string[],
): number | null {
  const keys = datasets.length > 0 ? datasets : Object.keys(accuracies).sort();
  if (keys.length === 0) return null;
  let sum = 0;
  for (const k of keys) {
    const v = accuracies[k];
    if (v === undefined) return null; // model not evaluated on a selected set
    sum += v;
  }
  return sum / keys.length;
}

/** One point per (model, selected setup) with hover detail text. */
export function derivePoints(bundle: Bundle, state: ViewState): PlotPoint[] {
  const modelById = new Map(bundle.models.map((m) => [m.model_id, m]));
  const selected = new Set(
    state.setups.length > 0 ? state.setups : bundle.setups.map((s) => s.setup_id),
  );
  const multiSetup = selected.size > 1;
  const points: PlotPoint[] = [];
  for (const entry of bundle.metrics) {
    if (!selected.has(entry.setup_id)) continue;
    const model = modelById.get(entry.model_id);
    if (!model) continue;
    const accuracy = accuracyFor(model.accuracies, state.datasets);
    if (accuracy === null) continue;
    const label = multiSetup ? `${model.model_id} @ ${entry.setup_id}` : model.model_id;
    points.push({
      modelId: model.model_id,
      setupId: entry.setup_id,
      label,
      family: model.family,
      accuracy,
      energy: entry.energy_per_image,
      url: model.url,
      detail:
        `${model.model_id} (${model.family}` +
        (model.pub_year ? `, ${model.pub_year}` : '') +
        `)\n${entry.setup_id}, batch ${entry.batch_size}\n` +
        `${entry.energy_per_image.toPrecision(4)} J/img, ` +
        `${entry.throughput.toPrecision(4)} img/s, ` +
        `${entry.avg_power.toPrecision(4)} W\n` +
        `accuracy ${accuracy.toFixed(2)}%`,
    });
  }
  points.sort((a, b) => (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
  return points;
}

export const FAMILY_COLORS: Record<string, string> = {
  MLP: '#9b59b6',
  CNN: '#3498db',
  Transformer: '#e67e22',
  Hybrid: '#16a085',
  Other: '#7f8c8d',
};
