/**
 * Pure SVG renderers: every function maps (data, state) to an SVG string,
 * so rendering is testable without a DOM and re-renders are full replaces.
 */

import { FAMILY_COLORS } from './data.js';
import { ScoreGrid, ScoreParams, RankedEntry, scoreGrid } from './scoring.js';
import { Metric, PlotPoint, ViewState } from './types.js';

export const PLOT_W = 680;
export const PLOT_H = 440;
const MARGIN = { left: 64, right: 16, top: 16, bottom: 46 };
const GRID_RES = 48;

interface Scales {
  x: (energy: number) => number;
  y: (accuracy: number) => number;
  eMin: number;
  eMax: number;
}

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function makeScales(points: PlotPoint[]): Scales {
  const energies = points.map((p) => p.energy);
  let eMin = Math.min(...energies);
  let eMax = Math.max(...energies);
  if (!isFinite(eMin) || eMin <= 0) eMin = 0.001;
  if (!isFinite(eMax) || eMax <= eMin) eMax = eMin * 10;
  // pad half a decade each side so points sit inside the frame
  eMin = 10 ** (Math.log10(eMin) - 0.5);
  eMax = 10 ** (Math.log10(eMax) + 0.5);
  const innerW = PLOT_W - MARGIN.left - MARGIN.right;
  const innerH = PLOT_H - MARGIN.top - MARGIN.bottom;
  const logMin = Math.log10(eMin);
  const logMax = Math.log10(eMax);
  return {
    x: (e) => MARGIN.left + ((Math.log10(e) - logMin) / (logMax - logMin)) * innerW,
    y: (a) => MARGIN.top + (1 - a / 100) * innerH,
    eMin,
    eMax,
  };
}

/** Two-stop color ramp for the contour background (low = dark, high = light). */
function rampColor(t: number): string {
  const lo = [38, 70, 83];
  const hi = [233, 196, 106];
  const mix = lo.map((l, i) => Math.round(l + (hi[i] - l) * t));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}

export function contourCells(grid: ScoreGrid, scales: Scales): string {
  const finite = grid.values.flat().filter((v) => isFinite(v));
  const vMin = Math.min(...finite);
  const vMax = Math.max(...finite);
  const span = vMax - vMin || 1;
  const parts: string[] = ['<g class="contour">'];
  for (let i = 0; i < grid.accuracies.length - 1; i++) {
    for (let j = 0; j < grid.energies.length - 1; j++) {
      const x0 = scales.x(grid.energies[j]);
      const x1 = scales.x(grid.energies[j + 1]);
      const yTop = scales.y(grid.accuracies[i + 1]);
      const yBot = scales.y(grid.accuracies[i]);
      const t = (grid.values[i][j] - vMin) / span;
      parts.push(
        `<rect x="${x0.toFixed(2)}" y="${yTop.toFixed(2)}" ` +
          `width="${(x1 - x0).toFixed(2)}" height="${(yBot - yTop).toFixed(2)}" ` +
          `fill="${rampColor(t)}" fill-opacity="0.35" data-score="${grid.values[i][j].toPrecision(6)}"/>`,
      );
    }
  }
  parts.push('</g>');
  return parts.join('');
}

function axes(scales: Scales): string {
  const parts: string[] = ['<g class="axes" font-size="11" fill="#333">'];
  const x0 = MARGIN.left;
  const x1 = PLOT_W - MARGIN.right;
  const y0 = PLOT_H - MARGIN.bottom;
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#333"/>`);
  parts.push(`<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="#333"/>`);
  const decadeLo = Math.ceil(Math.log10(scales.eMin));
  const decadeHi = Math.floor(Math.log10(scales.eMax));
  for (let d = decadeLo; d <= decadeHi; d++) {
    const px = scales.x(10 ** d);
    parts.push(`<line x1="${px.toFixed(1)}" y1="${y0}" x2="${px.toFixed(1)}" y2="${y0 + 4}" stroke="#333"/>`);
    parts.push(
      `<text x="${px.toFixed(1)}" y="${y0 + 16}" text-anchor="middle">1e${d}</text>`,
    );
  }
  for (let a = 0; a <= 100; a += 20) {
    const py = scales.y(a);
    parts.push(`<line x1="${x0 - 4}" y1="${py.toFixed(1)}" x2="${x0}" y2="${py.toFixed(1)}" stroke="#333"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${(py + 4).toFixed(1)}" text-anchor="end">${a}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${PLOT_H - 8}" text-anchor="middle">energy per image (J, log)</text>`,
  );
  parts.push(
    `<text x="14" y="${(MARGIN.top + y0) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 14 ${(MARGIN.top + y0) / 2})">accuracy (%)</text>`,
  );
  parts.push('</g>');
  return parts.join('');
}

function thresholdLines(state: ViewState, scales: Scales): string {
  const parts: string[] = ['<g class="thresholds">'];
  const x0 = MARGIN.left;
  const x1 = PLOT_W - MARGIN.right;
  const y0 = MARGIN.top;
  const y1 = PLOT_H - MARGIN.bottom;
  if (state.minAccuracy > 0) {
    const py = scales.y(state.minAccuracy);
    parts.push(
      `<line class="threshold-accuracy" x1="${x0}" y1="${py.toFixed(2)}" ` +
        `x2="${x1}" y2="${py.toFixed(2)}" stroke="#e74c3c" stroke-dasharray="6 3" stroke-width="1.5"/>`,
    );
  }
  if (state.maxEnergy !== null && state.maxEnergy > 0) {
    const px = scales.x(state.maxEnergy);
    parts.push(
      `<line class="threshold-energy" x1="${px.toFixed(2)}" y1="${y0}" ` +
        `x2="${px.toFixed(2)}" y2="${y1}" stroke="#e74c3c" stroke-dasharray="6 3" stroke-width="1.5"/>`,
    );
  }
  parts.push('</g>');
  return parts.join('');
}

/**
 * Scatter with the score-contour background and threshold lines. Each model
 * is a circle colored by family; hover shows details (native tooltip) and
 * clicking opens the model's reference URL.
 */
export function scatterSVG(points: PlotPoint[], state: ViewState, params: ScoreParams): string {
  const scales = makeScales(points.length ? points : []);
  const grid = scoreGrid(
    params,
    [scales.eMin, scales.eMax],
    [0, 100],
    GRID_RES,
    state.metric as Metric,
  );
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${PLOT_W} ${PLOT_H}" class="scatter">`,
  ];
  parts.push(contourCells(grid, scales));
  parts.push(axes(scales));
  parts.push(thresholdLines(state, scales));
  parts.push('<g class="points">');
  for (const p of points) {
    const cx = scales.x(p.energy).toFixed(2);
    const cy = scales.y(p.accuracy).toFixed(2);
    const color = FAMILY_COLORS[p.family] ?? FAMILY_COLORS.Other;
    const dim = p.accuracy < state.minAccuracy ||
      (state.maxEnergy !== null && p.energy > state.maxEnergy);
    const circle =
      `<circle class="model-point" cx="${cx}" cy="${cy}" r="6" fill="${color}" ` +
      `fill-opacity="${dim ? 0.25 : 0.9}" stroke="#222" stroke-width="0.8" ` +
      `data-label="${esc(p.label)}"><title>${esc(p.detail)}</title></circle>`;
    parts.push(p.url ? `<a href="${esc(p.url)}" target="_blank">${circle}</a>` : circle);
  }
  parts.push('</g></svg>');
  return parts.join('');
}

/** Top-N horizontal bar chart; ordering comes from the ranking function. */
export function rankingSVG(ranked: RankedEntry[], metric: Metric): string {
  const width = 360;
  const rowH = 26;
  const top = 18;
  const height = Math.max(top + ranked.length * rowH + 8, 60);
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="ranking">`,
    `<text x="8" y="13" font-size="12" fill="#333">top models (${esc(metric)} score)</text>`,
  ];
  if (ranked.length === 0) {
    parts.push(
      `<text class="empty-state" x="8" y="${top + 20}" font-size="12" fill="#999">` +
        'no models pass the current thresholds</text>',
    );
    parts.push('</svg>');
    return parts.join('');
  }
  const maxScore = Math.max(...ranked.map((r) => r.score));
  const minScore = Math.min(0, ...ranked.map((r) => r.score));
  const span = maxScore - minScore || 1;
  ranked.forEach((r, i) => {
    const y = top + i * rowH;
    const barW = Math.max(((r.score - minScore) / span) * (width - 150), 2);
    parts.push(
      `<rect class="rank-bar" x="140" y="${y + 4}" width="${barW.toFixed(1)}" height="${rowH - 10}" ` +
        `fill="#2a9d8f" data-label="${esc(r.label)}" data-score="${r.score.toPrecision(8)}"/>`,
    );
    parts.push(
      `<text x="136" y="${y + rowH - 10}" font-size="11" text-anchor="end" fill="#333">${esc(r.label)}</text>`,
    );
    parts.push(
      `<text x="${(144 + barW).toFixed(1)}" y="${y + rowH - 10}" font-size="10" fill="#333">` +
        `${r.score.toPrecision(4)}</text>`,
    );
  });
  parts.push('</svg>');
  return parts.join('');
}
