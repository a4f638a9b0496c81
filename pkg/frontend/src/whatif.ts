/** Prior-vs-posterior comparison model for the what-if panel.
 *
 * The two ESS cards come straight from service responses; the annotated
 * gap is their difference net of the hypothetical trial size, shown with
 * an explicit sign so shrinking information is visible at a glance.
 */

import type { EssResponse, PosteriorResponse } from './types.js';
import { essCardModel, fmt2, type EssCardModel } from './format.js';

export interface WhatIfModel {
  prior: EssCardModel;
  posterior: EssCardModel;
  trialSize: number;
  gap: string;
  identical: boolean;
}

export function whatIfModel(
  priorEss: EssResponse,
  posterior: PosteriorResponse,
  trialSize: number,
): WhatIfModel {
  const gapValue = posterior.ess.ess_total - priorEss.ess_total - trialSize;
  const signed = gapValue >= 0 ? `+${fmt2(gapValue)}` : fmt2(gapValue);
  return {
    prior: essCardModel(priorEss),
    posterior: essCardModel(posterior.ess),
    trialSize,
    gap: signed,
    identical: posterior.ess.ess_total === priorEss.ess_total,
  };
}

/** With no hypothetical data the posterior side mirrors the prior side. */
export function emptyWhatIfModel(priorEss: EssResponse): WhatIfModel {
  return {
    prior: essCardModel(priorEss),
    posterior: essCardModel(priorEss),
    trialSize: 0,
    gap: fmt2(0),
    identical: true,
  };
}
