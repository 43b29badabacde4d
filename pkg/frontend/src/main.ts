/** DOM wiring: load the bundle, bind controls, render on every state change. */

import { derivePoints, validateBundle } from './data.js';
import { rankingSVG, scatterSVG } from './render.js';
import { autoNorm, rank, ScoreParams } from './scoring.js';
import { decodeState, defaultState, encodeState } from './state.js';
import { Bundle, ViewState } from './types.js';

const DEFAULT_BUNDLE_URL = '../demo/bundle.json';

let bundle: Bundle | null = null;
let state: ViewState = defaultState();

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function banner(message: string, isError = false): void {
  const el = $('banner');
  el.textContent = message;
  el.className = isError ? 'banner error' : 'banner';
  el.style.display = message ? 'block' : 'none';
}

function render(): void {
  if (!bundle) return;
  const points = derivePoints(bundle, state);
  if (points.length === 0) {
    $('scatter').innerHTML = '';
    $('ranking').innerHTML = '';
    banner('no data for the current selection');
    return;
  }
  banner('');
  const entries = points.map((p) => ({ label: p.label, accuracy: p.accuracy, energy: p.energy }));
  let params: ScoreParams;
  try {
    params = {
      weight: state.weight,
      norm: autoNorm(entries, state.minAccuracy),
      minAccuracy: state.minAccuracy,
      balanced: state.balanced,
    };
  } catch {
    $('scatter').innerHTML = '';
    $('ranking').innerHTML = rankingSVG([], state.metric);
    banner('every model is below the accuracy threshold');
    return;
  }
  const filtered = state.maxEnergy !== null
    ? entries.filter((e) => e.energy <= (state.maxEnergy as number))
    : entries;
  $('scatter').innerHTML = scatterSVG(points, state, params);
  $('ranking').innerHTML = rankingSVG(rank(filtered, state.metric, params, state.topN), state.metric);
  $('norm-note').textContent =
    `N = ${params.norm.toPrecision(4)} J (max energy of the current selection)`;
  history.replaceState(null, '', '?' + encodeState(state));
}

function fillMultiSelect(el: HTMLSelectElement, values: string[], selected: string[]): void {
  el.innerHTML = '';
  for (const v of values) {
    const opt = document.createElement('option');
    opt.value = v;
    opt.textContent = v;
    opt.selected = selected.includes(v);
    el.appendChild(opt);
  }
}

function readMultiSelect(el: HTMLSelectElement): string[] {
  return Array.from(el.selectedOptions).map((o) => o.value);
}

function bindControls(): void {
  const setupSel = $('setup-select') as HTMLSelectElement;
  const datasetSel = $('dataset-select') as HTMLSelectElement;
  const metricSel = $('metric-select') as HTMLSelectElement;
  const weight = $('weight-slider') as HTMLInputElement;
  const weightOut = $('weight-value');
  const minAcc = $('min-accuracy') as HTMLInputElement;
  const maxEnergy = $('max-energy') as HTMLInputElement;
  const topN = $('top-n') as HTMLInputElement;
  const balanced = $('balanced') as HTMLInputElement;

  setupSel.addEventListener('change', () => {
    state.setups = readMultiSelect(setupSel);
    render();
  });
  datasetSel.addEventListener('change', () => {
    state.datasets = readMultiSelect(datasetSel);
    render();
  });
  metricSel.addEventListener('change', () => {
    state.metric = metricSel.value as ViewState['metric'];
    render();
  });
  weight.addEventListener('input', () => {
    state.weight = Number(weight.value);
    weightOut.textContent = weight.value;
    render();
  });
  minAcc.addEventListener('input', () => {
    state.minAccuracy = Number(minAcc.value) || 0;
    render();
  });
  maxEnergy.addEventListener('input', () => {
    state.maxEnergy = maxEnergy.value === '' ? null : Number(maxEnergy.value);
    render();
  });
  topN.addEventListener('input', () => {
    state.topN = Math.max(1, Number(topN.value) || 10);
    render();
  });
  balanced.addEventListener('change', () => {
    state.balanced = balanced.checked;
    render();
  });
}

function syncControls(): void {
  if (!bundle) return;
  fillMultiSelect(
    $('setup-select') as HTMLSelectElement,
    bundle.setups.map((s) => s.setup_id),
    state.setups.length ? state.setups : bundle.setups.map((s) => s.setup_id),
  );
  fillMultiSelect($('dataset-select') as HTMLSelectElement, bundle.datasets, state.datasets);
  ($('metric-select') as HTMLSelectElement).value = state.metric;
  ($('weight-slider') as HTMLInputElement).value = String(state.weight);
  $('weight-value').textContent = String(state.weight);
  ($('min-accuracy') as HTMLInputElement).value = String(state.minAccuracy);
  ($('max-energy') as HTMLInputElement).value = state.maxEnergy === null ? '' : String(state.maxEnergy);
  ($('top-n') as HTMLInputElement).value = String(state.topN);
  ($('balanced') as HTMLInputElement).checked = state.balanced;
}

async function loadBundle(url: string): Promise<void> {
  try {
    const response = await fetch(url);
    if (!response.ok) throw new Error(`${response.status} ${response.statusText}`);
    bundle = validateBundle(await response.json());
    banner('');
  } catch (err) {
    bundle = null;
    banner(`cannot load bundle from ${url}: ${(err as Error).message}`, true);
    return;
  }
  syncControls();
  render();
}

function bindFilePicker(): void {
  const picker = $('bundle-file') as HTMLInputElement;
  picker.addEventListener('change', async () => {
    const file = picker.files?.[0];
    if (!file) return;
    try {
      bundle = validateBundle(JSON.parse(await file.text()));
      banner('');
      syncControls();
      render();
    } catch (err) {
      banner(`invalid bundle: ${(err as Error).message}`, true);
    }
  });
}

export function start(): void {
  state = decodeState(window.location.search);
  bindControls();
  bindFilePicker();
  const url = new URLSearchParams(window.location.search).get('bundle') ?? DEFAULT_BUNDLE_URL;
  void loadBundle(url);
}

start();
