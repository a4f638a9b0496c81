/** Correlation suggestion from external trial counts. */

import { ApiClient, ServiceError } from '../api.js';
import { fitCardModel } from '../format.js';
import { ElicitationSession } from '../session.js';
import type { FitResponse } from '../types.js';
import { validateCounts } from '../validation.js';

export class RhoSuggestPanel {
  onAdopt: ((rho: number) => void) | null = null;
  lastFit: FitResponse | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private session: ElicitationSession,
  ) {
    (root.querySelector('.fit-button') as HTMLButtonElement)
      .addEventListener('click', () => void this.suggest());
    (root.querySelector('.adopt-button') as HTMLButtonElement)
      .addEventListener('click', () => {
        if (this.lastFit) this.onAdopt?.(this.lastFit.rho_hat);
      });
  }

  private counts(): { y0: number; n0: number; y1: number; n1: number } {
    const read = (name: string) =>
      Number((this.root.querySelector(`[name=${name}]`) as HTMLInputElement).value);
    return { y0: read('y0'), n0: read('n0'), y1: read('y1'), n1: read('n1') };
  }

  private note(text: string, isError = false): void {
    const el = this.root.querySelector('.rho-note') as HTMLElement;
    el.textContent = text;
    el.classList.toggle('error', isError);
  }

  async suggest(): Promise<void> {
    const { y0, n0, y1, n1 } = this.counts();
    const problems = validateCounts(y0, n0, y1, n1);
    if (problems.length > 0) {
      this.note(problems.join('; '), true);
      return;
    }
    const doc = { measure: this.session.measure, y0, n0, y1, n1 };
    try {
      const fit = await this.api.fit(doc);
      if (fit.stale) return;
      this.session.recordResponse('/v1/fit', doc, fit.body);
      this.lastFit = fit.body;
      const card = fitCardModel(fit.body);
      this.text('rho-hat', card.rhoHat);
      this.text('l0-hat', card.l0Hat);
      this.text('theta-hat', card.thetaHat);
      this.text('fit-cov', `[[${card.varL0}, ${card.cov}], [${card.cov}, ${card.varTheta}]]`);
      (this.root.querySelector('.adopt-button') as HTMLButtonElement).disabled = false;
      this.note('');
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
