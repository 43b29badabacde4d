/** ViewState defaults and URL query-parameter round trip (shareable links). */

import { Metric, ViewState } from './types.js';

export function defaultState(): ViewState {
  return {
    setups: [],
    datasets: [],
    metric: 'manhattan',
    weight: 0.5,
    minAccuracy: 0,
    maxEnergy: null,
    topN: 10,
    balanced: false,
    logEnergy: true,
  };
}

export function encodeState(state: ViewState): string {
  const q = new URLSearchParams();
  const defaults = defaultState();
  if (state.setups.length) q.set('setups', state.setups.join(','));
  if (state.datasets.length) q.set('datasets', state.datasets.join(','));
  if (state.metric !== defaults.metric) q.set('metric', state.metric);
  if (state.weight !== defaults.weight) q.set('w', String(state.weight));
  if (state.minAccuracy !== defaults.minAccuracy) q.set('minAcc', String(state.minAccuracy));
  if (state.maxEnergy !== null) q.set('maxE', String(state.maxEnergy));
  if (state.topN !== defaults.topN) q.set('top', String(state.topN));
  if (state.balanced) q.set('balanced', '1');
  if (!state.logEnergy) q.set('linE', '1');
  return q.toString();
}

export function decodeState(query: string): ViewState {
  const q = new URLSearchParams(query);
  const state = defaultState();
  const setups = q.get('setups');
  if (setups) state.setups = setups.split(',').filter(Boolean);
  const datasets = q.get('datasets');
  if (datasets) state.datasets = datasets.split(',').filter(Boolean);
  const metric = q.get('metric');
  if (metric === 'ratio' || metric === 'manhattan') state.metric = metric as Metric;
  const w = q.get('w');
  if (w !== null && !Number.isNaN(Number(w))) {
    state.weight = Math.min(1, Math.max(0, Number(w)));
  }
  const minAcc = q.get('minAcc');
  if (minAcc !== null && !Number.isNaN(Number(minAcc))) state.minAccuracy = Number(minAcc);
  const maxE = q.get('maxE');
  if (maxE !== null && !Number.isNaN(Number(maxE))) state.maxEnergy = Number(maxE);
  const top = q.get('top');
  if (top !== null && Number.isInteger(Number(top)) && Number(top) > 0) {
    state.topN = Number(top);
  }
  state.balanced = q.get('balanced') === '1';
  state.logEnergy = q.get('linE') !== '1';
  return state;
}
