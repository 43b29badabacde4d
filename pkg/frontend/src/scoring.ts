/**
 * Client-side efficiency scores.
 *
 * These evaluate the same formulas as the measurement toolkit's scoring
 * module; the shared score_vectors.json fixture pins both sides to
 * identical results (within 1e-9). Keep the arithmetic expression order
 * unchanged when editing.
 */

import { Metric } from './types.js';

export interface ScoreParams {
  weight: number; // W in [0, 1]
  norm: number; // N in joules, > 0
  minAccuracy: number; // percent
  balanced?: boolean;
}

/** Accuracy per joule, or null when the model misses the accuracy floor. */
export function ratioScore(accuracy: number, energy: number, p: ScoreParams): number | null {
  if (energy <= 0) throw new Error('energy must be positive for the ratio score');
  if (accuracy < p.minAccuracy) return null;
  return accuracy / energy;
}

/** score = 100 - (W * (E/N) + (1-W) * (100-A)); balanced scales E/N by 100. */
export function manhattanScore(accuracy: number, energy: number, p: ScoreParams): number {
  if (p.norm <= 0) throw new Error('norm must be positive');
  let energyTerm = energy / p.norm;
  if (p.balanced) energyTerm *= 100.0;
  return 100.0 - (p.weight * energyTerm + (1.0 - p.weight) * (100.0 - accuracy));
}

export interface RankedEntry {
  label: string;
  accuracy: number;
  energy: number;
  score: number;
}

export interface ScoreInput {
  label: string;
  accuracy: number;
  energy: number;
}

/**
 * Score and order entries, best first, ties broken by label. Entries below
 * the accuracy floor never appear (mirrors the reference ranking).
 */
export function rank(
  entries: ScoreInput[],
  metric: Metric,
  p: ScoreParams,
  topN?: number,
): RankedEntry[] {
  const scored: RankedEntry[] = [];
  for (const e of entries) {
    if (e.accuracy < p.minAccuracy) continue;
    const score =
      metric === 'ratio'
        ? ratioScore(e.accuracy, e.energy, p)
        : manhattanScore(e.accuracy, e.energy, p);
    if (score === null) continue;
    scored.push({ label: e.label, accuracy: e.accuracy, energy: e.energy, score });
  }
  scored.sort((a, b) => (b.score - a.score) || (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
  return topN !== undefined ? scored.slice(0, topN) : scored;
}

export interface ScoreGrid {
  energies: number[]; // log-spaced
  accuracies: number[]; // linear
  values: number[][]; // values[i][j] = score(accuracies[i], energies[j])
}

/** Contour background: the accuracy floor is ignored so bands stay continuous. */
export function scoreGrid(
  p: ScoreParams,
  energyRange: [number, number],
  accuracyRange: [number, number],
  resolution: number,
  metric: Metric,
): ScoreGrid {
  const [eLo, eHi] = energyRange;
  const [aLo, aHi] = accuracyRange;
  if (eLo <= 0 || eHi <= eLo) throw new Error('energy range must be positive and increasing');
  if (resolution < 2) throw new Error('resolution must be at least 2');
  const unfiltered: ScoreParams = { ...p, minAccuracy: 0 };
  const logLo = Math.log10(eLo);
  const logHi = Math.log10(eHi);
  const energies: number[] = [];
  const accuracies: number[] = [];
  for (let j = 0; j < resolution; j++) {
    energies.push(10 ** (logLo + ((logHi - logLo) * j) / (resolution - 1)));
  }
  for (let i = 0; i < resolution; i++) {
    accuracies.push(aLo + ((aHi - aLo) * i) / (resolution - 1));
  }
  const values = accuracies.map((a) =>
    energies.map((e) =>
      metric === 'ratio' ? (ratioScore(a, e, unfiltered) as number) : manhattanScore(a, e, unfiltered),
    ),
  );
  return { energies, accuracies, values };
}

/** N for the Manhattan score: max energy among the surviving entries. */
export function autoNorm(entries: ScoreInput[], minAccuracy: number): number {
  const surviving = entries.filter((e) => e.accuracy >= minAccuracy);
  if (surviving.length === 0) throw new Error('every model was filtered out');
  return Math.max(...surviving.map((e) => e.energy));
}
