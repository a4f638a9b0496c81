/** Client-side validation mirroring the service's parameter invariants.
 *
 * This is the only numeric logic that lives in the client: everything the
 * UI displays comes back from the service.
 */

import type { ParamDoc } from './types.js';

export interface HyperParams {
  mu0: number;
  m0: number;
  theta0: number;
  s: number;
  rho: number;
}

export interface RatioValue {
  a: number;
  b: number;
}

export function validateHyperParams(p: HyperParams): string[] {
  const problems: string[] = [];
  for (const [name, value] of Object.entries(p)) {
    if (!Number.isFinite(value)) problems.push(`${name} must be a finite number`);
  }
  if (Number.isFinite(p.m0) && p.m0 <= 0) problems.push('m0 must be positive');
  if (Number.isFinite(p.s) && p.s <= 0) problems.push('s must be positive');
  if (Number.isFinite(p.rho) && Math.abs(p.rho) >= 1) {
    problems.push('rho must lie strictly inside (-1, 1)');
  }
  return problems;
}

export function parseRatio(text: string): RatioValue | null {
  const match = /^(\d+):(\d+)$/.exec(text.trim());
  if (!match) return null;
  const a = Number(match[1]);
  const b = Number(match[2]);
  if (a < 1 || b < 1) return null;
  return { a, b };
}

export function validateCounts(y0: number, n0: number, y1: number, n1: number): string[] {
  const problems: string[] = [];
  for (const [name, value] of [['y0', y0], ['n0', n0], ['y1', y1], ['n1', n1]] as const) {
    if (!Number.isInteger(value) || value < 0) {
      problems.push(`${name} must be a nonnegative integer`);
    }
  }
  if (n0 < 1 || n1 < 1) problems.push('arm sizes must be positive');
  if (y0 > n0 || y1 > n1) problems.push('events cannot exceed the arm size');
  if (y0 === 0 || y0 === n0 || y1 === 0 || y1 === n1) {
    problems.push('boundary counts admit no interior fit');
  }
  return problems;
}

/** Assemble the prior-explorer request document, or report why not. */
export function explorerDoc(
  measure: ParamDoc['measure'],
  hyper: HyperParams,
  ratioText: string,
): { doc: ParamDoc; problems: string[] } {
  const problems = validateHyperParams(hyper);
  const ratio = parseRatio(ratioText);
  if (!ratio) problems.push(`ratio must look like 'a:b', got '${ratioText}'`);
  const doc: ParamDoc = {
    measure,
    ratio: ratio ? `${ratio.a}:${ratio.b}` : undefined,
    mu0: hyper.mu0,
    m0: hyper.m0,
    theta0: hyper.theta0,
    s: hyper.s,
    rho: hyper.rho,
  };
  return { doc, problems };
}
