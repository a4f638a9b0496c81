/** Display formatting: two decimals, like the reference tables. */

export function fmt2(value: number): string {
  return value.toFixed(2);
}

export function fmt3(value: number): string {
  return value.toFixed(3);
}

export interface EssCardModel {
  essIu: string;
  iuSize: string;
  essTotal: string;
  essTrt: string;
  essCtrl: string;
  capturedMass: string;
  lowMass: boolean;
  warnings: string[];
}

export function essCardModel(body: {
  ess_iu: number;
  iu_size: number;
  ess_total: number;
  ess_trt: number;
  ess_ctrl: number;
  captured_mass_z: number;
  warnings?: string[];
}): EssCardModel {
  return {
    essIu: fmt2(body.ess_iu),
    iuSize: String(body.iu_size),
    essTotal: fmt2(body.ess_total),
    essTrt: fmt2(body.ess_trt),
    essCtrl: fmt2(body.ess_ctrl),
    capturedMass: body.captured_mass_z.toFixed(4),
    lowMass: body.captured_mass_z < 0.95,
    warnings: body.warnings ?? [],
  };
}

export interface FitCardModel {
  l0Hat: string;
  thetaHat: string;
  rhoHat: string;
  varL0: string;
  cov: string;
  varTheta: string;
}

export function fitCardModel(body: {
  nu_hat: [number, number];
  sigma_hat: [[number, number], [number, number]];
  rho_hat: number;
}): FitCardModel {
  return {
    l0Hat: fmt3(body.nu_hat[0]),
    thetaHat: fmt3(body.nu_hat[1]),
    rhoHat: fmt3(body.rho_hat),
    varL0: body.sigma_hat[0][0].toPrecision(3),
    cov: body.sigma_hat[0][1].toPrecision(3),
    varTheta: body.sigma_hat[1][1].toPrecision(3),
  };
}
