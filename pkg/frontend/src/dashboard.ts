/** Valuation dashboard: ranked comparison plus what-if previews.
 *
 * Every displayed number originates from a server response. Override
 * edits issue what-if calls; nothing is recomputed locally.
 */

import {
  ApiRequestError,
  ComparisonDoc,
  DataValorClient,
  ScenarioDoc,
  WhatIfDoc,
} from "./api.js";
import { formatThousands } from "./format.js";

export interface RankedDisplayRow {
  candidateId: string;
  value: number;
  display: string;
  totalCost: number;
}

export interface FieldError {
  field: string;
  message: string;
}

export class Dashboard {
  scenario: ScenarioDoc | null = null;
  report: ComparisonDoc | null = null;
  lastWhatIf: WhatIfDoc | null = null;
  fieldError: FieldError | null = null;

  constructor(private readonly client: DataValorClient) {}

  /** Load a stored scenario; rank its candidates when there are rivals
   * to rank (the comparison endpoint needs at least two). */
  async load(scenarioId: string, paperCompat?: boolean): Promise<void> {
    this.scenario = await this.client.getScenario(scenarioId);
    this.report =
      this.scenario.candidates.length >= 2
        ? await this.client.comparison(scenarioId, paperCompat)
        : null;
    this.fieldError = null;
  }

  /** Upload a scenario document, then load it. */
  async loadDocument(doc: ScenarioDoc, paperCompat?: boolean): Promise<void> {
    const { id } = await this.client.createScenario(doc);
    await this.load(id, paperCompat);
  }

  /** Ranked rows ready for the table, values verbatim from the API. */
  rows(): RankedDisplayRow[] {
    if (!this.report) return [];
    return this.report.ranked.map((row) => ({
      candidateId: row.candidate_id,
      value: row.value,
      display: formatThousands(row.value),
      totalCost: row.total_cost,
    }));
  }

  get winner(): string {
    if (!this.report) throw new Error("no comparison loaded");
    return this.report.winner;
  }

  get notes(): string[] {
    return this.report ? [...this.report.discrepancy_notes] : [];
  }

  /** One what-if preview. Server validation failures land on the edited
   * field instead of throwing, for inline rendering. */
  async preview(
    candidateId: string,
    overrides: Record<string, unknown>,
    paperCompat?: boolean,
  ): Promise<WhatIfDoc | null> {
    if (!this.scenario) throw new Error("no scenario loaded");
    try {
      this.lastWhatIf = await this.client.whatIf(
        this.scenario.id,
        candidateId,
        overrides,
        paperCompat,
      );
      this.fieldError = null;
      return this.lastWhatIf;
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 400) {
        this.fieldError = {
          field: error.path || Object.keys(overrides).join(","),
          message: error.message,
        };
        return null;
      }
      throw error;
    }
  }

  /** Stage deltas of the last preview as label/value pairs for the bar list. */
  deltaRows(): Array<{ stage: string; delta: number }> {
    if (!this.lastWhatIf) return [];
    const rows: Array<{ stage: string; delta: number }> = [];
    for (const [stage, delta] of Object.entries(this.lastWhatIf.deltas)) {
      if (typeof delta === "number") {
        rows.push({ stage, delta });
      } else {
        for (const [domain, value] of Object.entries(delta)) {
          rows.push({ stage: `${stage}:${domain}`, delta: value });
        }
      }
    }
    return rows;
  }
}
