/** Posterior what-if: hypothetical current-trial data -> side-by-side ESS. */

import { ApiClient, ServiceError } from '../api.js';
import { ExplorerPanel } from './explorer.js';
import { ElicitationSession } from '../session.js';
import type { EssCardModel } from '../format.js';
import { validateCounts } from '../validation.js';
import { emptyWhatIfModel, whatIfModel, type WhatIfModel } from '../whatif.js';

export class WhatIfPanel {
  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private session: ElicitationSession,
    private explorer: ExplorerPanel,
  ) {
    (root.querySelector('.whatif-button') as HTMLButtonElement)
      .addEventListener('click', () => void this.run());
  }

  private note(text: string, isError = false): void {
    const el = this.root.querySelector('.whatif-note') as HTMLElement;
    el.textContent = text;
    el.classList.toggle('error', isError);
  }

  /** Refresh both cards from the prior alone (empty-data state). */
  showPriorOnly(): void {
    if (!this.explorer.lastEss) return;
    this.render(emptyWhatIfModel(this.explorer.lastEss));
    this.note('no hypothetical data: both sides show the prior');
  }

  async run(): Promise<void> {
    const prior = this.explorer.lastEss;
    if (!prior) {
      this.note('run the explorer first so there is a prior to update', true);
      return;
    }
    const read = (name: string) =>
      (this.root.querySelector(`[name=${name}]`) as HTMLInputElement).value;
    const raw = { y0: read('y0'), n0: read('n0'), y1: read('y1'), n1: read('n1') };
    if (Object.values(raw).every((v) => v.trim() === '')) {
      this.showPriorOnly();
      return;
    }
    const y0 = Number(raw.y0), n0 = Number(raw.n0);
    const y1 = Number(raw.y1), n1 = Number(raw.n1);
    const problems = validateCounts(y0, n0, y1, n1);
    if (problems.length > 0) {
      this.note(problems.join('; '), true);
      return;
    }

    const doc = {
      measure: this.session.measure,
      ratio: this.session.ratioText,
      ...this.session.hyper,
      y0, n0, y1, n1,
    };
    try {
      const posterior = await this.api.posterior(doc);
      if (posterior.stale) return;
      this.session.recordResponse('/v1/posterior', doc, posterior.body);
      this.render(whatIfModel(prior, posterior.body, n1 + n0));
      this.note('');
    } catch (err) {
      if (err instanceof ServiceError) {
        this.note(`${err.detail.code}: ${err.detail.message}`, true);
      } else {
        this.note(`service unreachable: ${String(err)}`, true);
      }
    }
  }

  private render(model: WhatIfModel): void {
    this.card('.prior-card', model.prior);
    this.card('.posterior-card', model.posterior);
    (this.root.querySelector('.gap-value') as HTMLElement).textContent =
      `${model.gap} (trial size ${model.trialSize})`;
  }

  private card(selector: string, card: EssCardModel): void {
    const el = this.root.querySelector(selector) as HTMLElement;
    (el.querySelector('.card-total') as HTMLElement).textContent = card.essTotal;
    (el.querySelector('.card-split') as HTMLElement).textContent =
      `${card.essIu} IU x ${card.iuSize} = ${card.essTrt} / ${card.essCtrl}`;
  }
}
