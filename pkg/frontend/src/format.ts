/** Probability display and the survive/die verdict rule. */

export const SURVIVE_THRESHOLD = 0.5;

/** Score at or above the threshold reads as predicted survival. */
export function verdict(score: number): "survive" | "die" {
  return score >= SURVIVE_THRESHOLD ? "survive" : "die";
}

export function formatProbability(value: number): string {
  return value.toFixed(3);
}

/** Signed delta to 3 decimals, e.g. +0.055 / -0.330 / +0.000. */
export function formatDelta(value: number): string {
  const rounded = value.toFixed(3);
  return value >= 0 ? `+${rounded}` : rounded;
}

export function inUnitInterval(value: number): boolean {
  return Number.isFinite(value) && value >= 0 && value <= 1;
}
