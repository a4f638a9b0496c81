/** Canvas rendering of the induced (p0, p1) density grid.
 *
 * Pure presentation: density values arrive from the service; this module
 * only maps them to pixels, overlays filled contour bands, and draws the
 * p0 = p1 diagonal for reading the no-effect direction.
 */

import type { DensityGridResponse } from './types.js';

const BANDS = 9;

export function drawDensity(canvas: HTMLCanvasElement, grid: DensityGridResponse): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const { resolution, rows } = grid;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);

  let peak = 0;
  for (const [, , d] of rows) peak = Math.max(peak, d);
  if (peak <= 0) peak = 1;

  const cellW = w / resolution;
  const cellH = h / resolution;
  for (const [p0, p1, d] of rows) {
    if (d <= 0) continue;
    const band = Math.min(BANDS - 1, Math.floor((d / peak) * BANDS));
    if (band === 0) continue;
    const t = band / (BANDS - 1);
    ctx.fillStyle = `rgba(${Math.round(30 + 80 * t)}, ${Math.round(90 + 60 * t)}, ${Math.round(
      170 + 60 * t,
    )}, ${0.15 + 0.75 * t})`;
    // canvas y grows downward; p1 grows upward
    ctx.fillRect(p0 * w - cellW / 2, h - p1 * h - cellH / 2, cellW + 0.5, cellH + 0.5);
  }

  ctx.strokeStyle = '#999';
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.moveTo(0, h);
  ctx.lineTo(w, 0);
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = '#444';
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
}
