import { describe, expect, it } from "vitest";

import { deltaTable, MixedModelComparison, ScenarioStore } from "../src/scenarios.js";
import { verdict } from "../src/format.js";
import { BOSTON_RESPONSE, DENVER_RESPONSE } from "./fixtures";
import type { Scenario } from "../src/types.js";

function scenario(label: string, modelId: string, response = BOSTON_RESPONSE): Scenario {
  return { label, modelId, attributes: { ADDRESS: label }, response, pinned: false };
}

describe("ScenarioStore", () => {
  it("pins snapshots that survive later edits", () => {
    const store = new ScenarioStore();
    const s = scenario("boston", "colon-demo");
    store.pin(s);
    s.attributes["ADDRESS"] = "changed";
    expect(store.pinned[0].attributes["ADDRESS"]).toBe("boston");
    expect(store.pinned[0].pinned).toBe(true);
  });

  it("blocks mixed-model comparison with a message", () => {
    const store = new ScenarioStore();
    store.pin(scenario("boston", "colon-demo"));
    expect(() => store.pin(scenario("denver", "lung-demo"))).toThrow(MixedModelComparison);
    expect(store.pinned).toHaveLength(1);
  });

  it("refuses to pin before a prediction exists", () => {
    const store = new ScenarioStore();
    expect(() =>
      store.pin({ label: "x", modelId: "m", attributes: {}, response: null, pinned: false }),
    ).toThrow();
  });
});

describe("deltaTable", () => {
  it("computes horizon deltas against the first pinned scenario", () => {
    const rows = deltaTable([
      scenario("boston", "colon-demo", BOSTON_RESPONSE),
      scenario("denver", "colon-demo", DENVER_RESPONSE),
    ]);
    expect(rows[0].deltas).toEqual({ "6": 0, "12": 0, "60": 0 });
    expect(rows[1].deltas["6"]).toBeCloseTo(0.055, 10);
    expect(rows[1].deltas["12"]).toBeCloseTo(0.072, 10);
    expect(rows[1].deltas["60"]).toBeCloseTo(0.165, 10);
  });

  it("identical scenarios give zero deltas", () => {
    const rows = deltaTable([
      scenario("a", "m", BOSTON_RESPONSE),
      scenario("b", "m", BOSTON_RESPONSE),
    ]);
    expect(rows[1].deltas).toEqual({ "6": 0, "12": 0, "60": 0 });
  });

  it("requires two scenarios", () => {
    expect(() => deltaTable([scenario("only", "m")])).toThrow();
  });
});

describe("verdict rule", () => {
  it("boundary .5 predicts survival", () => {
    expect(verdict(0.5)).toBe("survive");
    expect(verdict(0.4999)).toBe("die");
    expect(verdict(0.89)).toBe("survive");
  });
});
