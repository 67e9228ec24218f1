/** Pinned-scenario store and the comparison arithmetic. */

import { HORIZONS, type PredictResponse, type Scenario } from "./types.js";

export class MixedModelComparison extends Error {}

export class ScenarioStore {
  private pinnedScenarios: Scenario[] = [];

  get pinned(): readonly Scenario[] {
    return this.pinnedScenarios;
  }

  /** Pin a snapshot of a scenario; all pins must target one model. */
  pin(scenario: Scenario): void {
    if (scenario.response === null) {
      throw new Error("cannot pin a scenario before it has a prediction");
    }
    if (
      this.pinnedScenarios.length > 0 &&
      this.pinnedScenarios[0].modelId !== scenario.modelId
    ) {
      throw new MixedModelComparison(
        `pinned scenarios use model "${this.pinnedScenarios[0].modelId}"; ` +
          `cannot compare against "${scenario.modelId}"`,
      );
    }
    this.pinnedScenarios.push({
      ...scenario,
      attributes: { ...scenario.attributes },
      pinned: true,
    });
  }

  unpin(index: number): void {
    this.pinnedScenarios.splice(index, 1);
  }

  clear(): void {
    this.pinnedScenarios = [];
  }
}

export interface DeltaRow {
  label: string;
  probs: Record<string, number>;
  /** horizon -> prob minus the first scenario's prob; zero row for the baseline */
  deltas: Record<string, number>;
}

/** S(6)/S(12)/S(60) deltas of every pinned scenario against the first. */
export function deltaTable(pinned: readonly Scenario[]): DeltaRow[] {
  if (pinned.length < 2) {
    throw new Error("need at least two pinned scenarios to compare");
  }
  const baseline = pinned[0].response as PredictResponse;
  return pinned.map((scenario) => {
    const response = scenario.response as PredictResponse;
    const probs: Record<string, number> = {};
    const deltas: Record<string, number> = {};
    for (const h of HORIZONS) {
      const key = String(h);
      probs[key] = response.horizon_probs[key];
      deltas[key] = response.horizon_probs[key] - baseline.horizon_probs[key];
    }
    return { label: scenario.label, probs, deltas };
  });
}
