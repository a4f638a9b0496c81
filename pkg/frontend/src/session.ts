/** Elicitation session state: current parameters, service response log,
 * and an append-only history of (parameters, total ESS) snapshots.
 *
 * The history and log exist so that every number on screen can be traced
 * to the service response it came from, and so a finished elicitation can
 * be archived next to a design document.
 */

import type { EssResponse, MeasureName, ParamDoc } from './types.js';
import type { HyperParams } from './validation.js';

export interface HistoryEntry {
  at: string;
  measure: MeasureName;
  ratio: string;
  hyper: HyperParams;
  essTotal: number;
}

export interface LogEntry {
  at: string;
  endpoint: string;
  request: ParamDoc;
  response: unknown;
}

export class ElicitationSession {
  measure: MeasureName = 'log-or';
  ratioText = '2:1';
  hyper: HyperParams = { mu0: -1, m0: 0.5, theta0: 0, s: 1, rho: -0.8 };

  private historyEntries: HistoryEntry[] = [];
  private logEntries: LogEntry[] = [];
  private clock: () => string;

  constructor(clock: () => string = () => new Date().toISOString()) {
    this.clock = clock;
  }

  get history(): readonly HistoryEntry[] {
    return this.historyEntries;
  }

  get log(): readonly LogEntry[] {
    return this.logEntries;
  }

  recordResponse(endpoint: string, request: ParamDoc, response: unknown): void {
    this.logEntries.push({ at: this.clock(), endpoint, request, response });
  }

  /** Snapshot the accepted parameter set with its service-computed ESS. */
  snapshot(ess: EssResponse): HistoryEntry {
    const entry: HistoryEntry = {
      at: this.clock(),
      measure: this.measure,
      ratio: this.ratioText,
      hyper: { ...this.hyper },
      essTotal: ess.ess_total,
    };
    this.historyEntries.push(entry);
    return entry;
  }

  /** Serialized trail (history + response log) for archiving. */
  exportTrail(): string {
    return JSON.stringify(
      { history: this.historyEntries, log: this.logEntries },
      null,
      2,
    );
  }
}
