/** Typed /v1 client with latest-wins sequencing.
 *
 * Every request carries a per-channel sequence number; a response that
 * arrives after a newer request on its channel has already resolved is
 * reported as stale so panels never render superseded numbers.
 */

import type {
  ApiError,
  ConsistencyResponse,
  DensityGridResponse,
  EssResponse,
  FitResponse,
  ParamDoc,
  PosteriorResponse,
} from './types.js';

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(readonly status: number, readonly detail: ApiError) {
    super(detail.message);
  }
}

export interface Settled<T> {
  seq: number;
  stale: boolean;
  body: T;
}

export class ApiClient {
  private nextSeq = new Map<string, number>();
  private lastSettled = new Map<string, number>();

  constructor(
    private baseUrl = '',
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(channel: string, path: string, doc: ParamDoc): Promise<Settled<T>> {
    const seq = (this.nextSeq.get(channel) ?? 0) + 1;
    this.nextSeq.set(channel, seq);

    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(doc),
    });
    const body = await resp.json();
    if (!resp.ok) throw new ServiceError(resp.status, body as ApiError);

    const newestSettled = this.lastSettled.get(channel) ?? 0;
    const stale = seq < newestSettled;
    if (!stale) this.lastSettled.set(channel, seq);
    return { seq, stale, body: body as T };
  }

  ess(doc: ParamDoc): Promise<Settled<EssResponse>> {
    return this.post('ess', '/v1/ess', doc);
  }

  densityGrid(doc: ParamDoc): Promise<Settled<DensityGridResponse>> {
    return this.post('density-grid', '/v1/density-grid', doc);
  }

  fit(doc: ParamDoc): Promise<Settled<FitResponse>> {
    return this.post('fit', '/v1/fit', doc);
  }

  posterior(doc: ParamDoc): Promise<Settled<PosteriorResponse>> {
    return this.post('posterior', '/v1/posterior', doc);
  }

  consistency(doc: ParamDoc): Promise<Settled<ConsistencyResponse>> {
    return this.post('consistency', '/v1/consistency', doc);
  }

  async health(): Promise<{ status: string; engine_version: string }> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/health`, { method: 'GET' });
    return resp.json();
  }
}
