/** Prior explorer: hyperparameter edits -> debounced contour + ESS card. */

import { ApiClient, ServiceError } from '../api.js';
import { drawDensity } from '../contour.js';
import { Debouncer } from '../debounce.js';
import { essCardModel } from '../format.js';
import { ElicitationSession } from '../session.js';
import type { EssResponse, MeasureName } from '../types.js';
import { explorerDoc } from '../validation.js';

const DRAG_RESOLUTION = 120;
const SETTLED_RESOLUTION = 300;

export class ExplorerPanel {
  onPriorChanged: (() => void) | null = null;
  lastEss: EssResponse | null = null;

  private debouncer = new Debouncer(250);

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private session: ElicitationSession,
  ) {
    for (const name of ['mu0', 'm0', 'theta0', 's', 'rho'] as const) {
      const input = this.input(name);
      input.addEventListener('input', () => this.edited(false));
      input.addEventListener('change', () => this.edited(true));
    }
    this.select('measure').addEventListener('change', () => this.edited(true));
    this.input('ratio').addEventListener('change', () => this.edited(true));
  }

  private input(name: string): HTMLInputElement {
    return this.root.querySelector(`[name=${name}]`) as HTMLInputElement;
  }

  private select(name: string): HTMLSelectElement {
    return this.root.querySelector(`[name=${name}]`) as HTMLSelectElement;
  }

  private note(text: string, isError = false): void {
    const el = this.root.querySelector('.explorer-note') as HTMLElement;
    el.textContent = text;
    el.classList.toggle('error', isError);
  }

  setRho(rho: number): void {
    this.input('rho').value = String(rho);
    this.edited(true);
  }

  /** Validate, then schedule (drag) or run (release) the refresh. */
  edited(settled: boolean): void {
    this.session.measure = this.select('measure').value as MeasureName;
    this.session.ratioText = this.input('ratio').value;
    this.session.hyper = {
      mu0: Number(this.input('mu0').value),
      m0: Number(this.input('m0').value),
      theta0: Number(this.input('theta0').value),
      s: Number(this.input('s').value),
      rho: Number(this.input('rho').value),
    };
    const { problems } = explorerDoc(
      this.session.measure, this.session.hyper, this.session.ratioText);
    if (problems.length > 0) {
      this.debouncer.cancel('explorer');
      this.note(problems.join('; '), true);
      return;
    }
    this.note('');
    if (settled) {
      this.debouncer.flush('explorer', () => void this.refresh(SETTLED_RESOLUTION));
    } else {
      this.debouncer.debounce('explorer', () => void this.refresh(DRAG_RESOLUTION));
    }
  }

  async refresh(resolution = SETTLED_RESOLUTION): Promise<void> {
    const { doc, problems } = explorerDoc(
      this.session.measure, this.session.hyper, this.session.ratioText);
    if (problems.length > 0) return;

    try {
      const [ess, grid] = await Promise.all([
        this.api.ess(doc),
        this.api.densityGrid({ ...doc, ratio: undefined, resolution }),
      ]);
      if (ess.stale || grid.stale) return;

      this.session.recordResponse('/v1/ess', doc, ess.body);
      this.session.recordResponse('/v1/density-grid', doc, grid.body);
      this.lastEss = ess.body;
      this.session.snapshot(ess.body);

      const card = essCardModel(ess.body);
      this.text('ess-iu', card.essIu);
      this.text('iu-size', card.iuSize);
      this.text('ess-total', card.essTotal);
      this.text('ess-trt', card.essTrt);
      this.text('ess-ctrl', card.essCtrl);
      this.text('captured-mass', card.capturedMass);
      const badge = this.root.querySelector('.mass-badge') as HTMLElement;
      badge.hidden = !card.lowMass;
      if (card.warnings.length > 0) this.note(card.warnings.join('; '), true);

      drawDensity(this.root.querySelector('canvas') as HTMLCanvasElement, grid.body);
      this.onPriorChanged?.();
    } catch (err) {
      if (err instanceof ServiceError) {
        this.note(`${err.detail.code}: ${err.detail.message}`, true);
      } else {
        this.note(`service unreachable: ${String(err)}`, true);
      }
    }
  }

  private text(cls: string, value: string): void {
    (this.root.querySelector(`.${cls}`) as HTMLElement).textContent = value;
  }
}
