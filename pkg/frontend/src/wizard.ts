/** Screening wizard state machine.
 *
 * The state is a mirror of the server session: every mutation is a
 * round-trip, and `verifyMirror` can prove the mirror exact at any time.
 * Out-of-order answers (stale double-clicks) surface as a retry prompt
 * and the local state is refreshed from the server, losing nothing.
 */

import {
  ApiRequestError,
  DataValorClient,
  RecommendationPanel,
  SessionDoc,
} from "./api.js";

export class Wizard {
  private state: SessionDoc | null = null;
  retryPrompt: string | null = null;

  constructor(private readonly client: DataValorClient) {}

  get session(): SessionDoc {
    if (!this.state) throw new Error("wizard has no active session");
    return this.state;
  }

  get complete(): boolean {
    return this.session.status === "complete";
  }

  get codes(): number[] {
    return [...this.session.accumulated_codes];
  }

  async start(tree: string | object = "step1"): Promise<SessionDoc> {
    this.state = await this.client.startScreening(tree);
    this.retryPrompt = null;
    return this.state;
  }

  /** Re-attach to a server-held session, e.g. after a reload. */
  async resume(sessionId: string): Promise<SessionDoc> {
    this.state = await this.client.getSession(sessionId);
    this.retryPrompt = null;
    return this.state;
  }

  /** Answer the pending question. A 409 (the click raced a newer state)
   * refreshes from the server and sets `retryPrompt` instead of throwing. */
  async answer(label: string): Promise<SessionDoc> {
    const current = this.session;
    if (!current.question) throw new Error("session is already complete");
    try {
      this.state = await this.client.postAnswer(
        current.session_id,
        current.question.id,
        label,
      );
      this.retryPrompt = null;
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 409) {
        this.state = await this.client.getSession(current.session_id);
        this.retryPrompt = error.message;
        return this.state;
      }
      throw error;
    }
    return this.state;
  }

  async answerAll(labels: string[]): Promise<SessionDoc> {
    for (const label of labels) {
      await this.answer(label);
    }
    return this.session;
  }

  /** The recommendation panel for a complete session. */
  async panel(): Promise<RecommendationPanel> {
    return this.client.recommendations(this.session.session_id);
  }

  /** True when the local mirror equals the server state field for field. */
  async verifyMirror(): Promise<boolean> {
    const server = await this.client.getSession(this.session.session_id);
    return JSON.stringify(server) === JSON.stringify(this.state);
  }
}

/** Badge strings for the merged-effects panel, in display order. */
export function effectsBadges(panel: RecommendationPanel): string[] {
  const effects = panel.effects;
  const badges: string[] = [];
  if (effects.cost_only) badges.push("driver: cost only");
  else if (effects.main_driver) badges.push(`driver: ${effects.main_driver}`);
  const costs: string[] = [];
  if (effects.include_capex) costs.push("capex");
  if (effects.include_opex) costs.push("opex");
  if (effects.include_governance_costs) costs.push("governance");
  if (costs.length) badges.push(`costs: ${costs.join("+")}`);
  if (effects.icf_rule === "one_time" || effects.icf_value !== null) {
    badges.push(`ICF=${effects.icf_value ?? 1}`);
  } else if (effects.icf_rule) {
    badges.push(`ICF rule: ${effects.icf_rule}`);
  }
  if (effects.strategy) badges.push(`strategy: ${effects.strategy}`);
  if (effects.demand_required) badges.push("demand estimation required");
  if (panel.purpose) badges.push(`purpose: ${panel.purpose}`);
  return badges;
}
