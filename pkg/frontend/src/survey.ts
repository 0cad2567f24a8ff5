/** Pairwise judgement survey.
 *
 * Sliders snap to the discrete Saaty scale (1..9 and reciprocals). The
 * client only assembles the matrix; lambda_max, CI, CR, and the priority
 * vector all come from the API after every edit.
 */

import {
  ConsistencyDoc,
  DataValorClient,
  PriorityDoc,
  ScenarioDoc,
} from "./api.js";

export const SAATY_STEPS: readonly number[] = [
  1 / 9, 1 / 8, 1 / 7, 1 / 6, 1 / 5, 1 / 4, 1 / 3, 1 / 2,
  1, 2, 3, 4, 5, 6, 7, 8, 9,
];

export function isSaatyValue(value: number): boolean {
  return SAATY_STEPS.some((step) => step === value);
}

export class Survey {
  readonly items: string[];
  readonly matrix: number[][];
  lastConsistency: ConsistencyDoc | null = null;

  constructor(
    private readonly client: DataValorClient,
    items: string[],
  ) {
    if (items.length < 1) throw new Error("survey needs at least one item");
    this.items = [...items];
    this.matrix = items.map(() => items.map(() => 1));
  }

  /** Record one judgement; the mirror cell becomes its exact reciprocal. */
  setJudgement(row: number, col: number, value: number): void {
    if (row === col) throw new Error("diagonal judgements are fixed at 1");
    if (!isSaatyValue(value)) {
      throw new Error(`judgement ${value} is not on the discrete scale`);
    }
    const r = this.matrix[row];
    const c = this.matrix[col];
    if (!r || !c) throw new Error("judgement indexes out of range");
    r[col] = value;
    c[row] = 1 / value;
  }

  /** Live CR badge data, recomputed server-side after every edit. */
  async consistency(threshold?: number): Promise<ConsistencyDoc> {
    this.lastConsistency = await this.client.consistency(
      this.items,
      this.matrix,
      threshold,
    );
    return this.lastConsistency;
  }

  async priorities(method?: string): Promise<PriorityDoc> {
    return this.client.priorities(this.items, this.matrix, method);
  }

  /** Write the derived priority vector into a stored scenario's weights.
   *
   * Inconsistent judgements (CR above threshold) require an explicit
   * confirmation; the server-reported CR is the gate, not a local one.
   */
  async adoptWeights(
    scenarioId: string,
    options: { confirmInconsistent?: boolean; method?: string } = {},
  ): Promise<ScenarioDoc> {
    const derived = await this.priorities(options.method);
    if (!derived.consistency.acceptable && !options.confirmInconsistent) {
      throw new Error(
        `consistency ratio ${derived.consistency.consistency_ratio.toFixed(3)} ` +
          "exceeds the threshold; pass confirmInconsistent to adopt anyway",
      );
    }
    const scenario = await this.client.getScenario(scenarioId);
    const weights = { ...scenario.weights };
    derived.items.forEach((item, index) => {
      const weight = derived.weights[index];
      if (weight !== undefined) weights[item] = weight;
    });
    const updated: ScenarioDoc = { ...scenario, weights };
    await this.client.putScenario(scenarioId, updated);
    return updated;
  }
}
