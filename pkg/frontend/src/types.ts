/** Shared shapes for the /v1 API: flat request documents, typed responses. */

export type MeasureName = 'mean-diff' | 'rd' | 'log-or' | 'log-rr';

/** Flat parameter document accepted by every endpoint (and the CLI). */
export interface ParamDoc {
  measure?: MeasureName;
  ratio?: string;
  theta0?: number;
  s?: number;
  mu0?: number;
  m0?: number;
  rho?: number;
  s1sq?: number;
  s0sq?: number;
  renormalize?: boolean;
  quad_nodes?: number;
  quad_panels?: number;
  y0?: number;
  n0?: number;
  y1?: number;
  n1?: number;
  theta_hat?: number;
  sigma_sq?: number;
  true_p0?: number;
  true_p1?: number;
  reps?: number;
  seed?: number;
  resolution?: number;
  verbose?: boolean;
}

interface Enveloped {
  warnings: string[];
  engine_version: string;
}

export interface EssResponse extends Enveloped {
  ess_iu: number;
  iu_size: number;
  ess_total: number;
  ess_trt: number;
  ess_ctrl: number;
  captured_mass_z: number;
  expected_iu_variance: number;
  renormalized: boolean;
  quadrature_spread: number;
}

export interface FitResponse extends Enveloped {
  nu_hat: [number, number];
  sigma_hat: [[number, number], [number, number]];
  rho_hat: number;
  iterations: number;
  converged: boolean;
}

export interface PosteriorResponse extends Enveloped {
  posterior: Record<string, number>;
  fit?: Omit<FitResponse, keyof Enveloped>;
  ess: Omit<EssResponse, keyof Enveloped>;
}

export interface DensityGridResponse extends Enveloped {
  resolution: number;
  rows: Array<[number, number, number]>;
}

export interface ConsistencyResponse extends Enveloped {
  prior_ess_total: number;
  avg_posterior_ess_total: number;
  mc_std_error: number;
  consistency_gap: number;
  current_trial_size: number;
  per_replicate?: number[];
}

export interface ApiError {
  code: string;
  message: string;
  engine_version: string;
}
