/** Screening wizard behaviour against the live service.
 *
 * The core guarantee under test: the wizard is a faithful mirror of the
 * server-held session, so replaying a questionnaire through it must land
 * on exactly the recommendation panel the raw API produces.
 */

import { describe, expect, it } from "vitest";

import { DataValorClient } from "../src/api.js";
import { Wizard, effectsBadges } from "../src/wizard.js";
import { BASE_URL } from "./config.js";

const client = new DataValorClient(BASE_URL);

// Screening answers for a service that stores telemetry, sells access to
// the processed feed, and transfers ownership on purchase.
const FLOW = [
  "No",
  "Yes",
  "No",
  "No",
  "Yes",
  "No",
  "Direct",
  "Yes",
  "No",
  "No",
];

describe("wizard replay", () => {
  it("reaches the same recommendation panel as the raw API", async () => {
    // Raw API walk, no wizard involved.
    let rawSession = await client.startScreening("step1");
    for (const label of FLOW) {
      if (!rawSession.question) throw new Error("raw walk ended early");
      rawSession = await client.postAnswer(
        rawSession.session_id,
        rawSession.question.id,
        label,
      );
    }
    expect(rawSession.status).toBe("complete");
    const rawPanel = await client.recommendations(rawSession.session_id);

    // Same questionnaire through the wizard, verifying the mirror after
    // every single round-trip.
    const wizard = new Wizard(client);
    await wizard.start("step1");
    for (const label of FLOW) {
      await wizard.answer(label);
      expect(await wizard.verifyMirror()).toBe(true);
    }
    expect(wizard.complete).toBe(true);
    const wizardPanel = await wizard.panel();

    expect(new Set(wizardPanel.accumulated_codes)).toEqual(
      new Set(rawPanel.accumulated_codes),
    );
    expect(wizardPanel.accumulated_codes).toEqual([2, 3, 6, 12, 13]);
    expect(wizardPanel.effects).toEqual(rawPanel.effects);
    expect(wizardPanel.recommendations.map((r) => r.text)).toEqual(
      rawPanel.recommendations.map((r) => r.text),
    );
    expect(wizardPanel.discrepancy_notes).toEqual(rawPanel.discrepancy_notes);
  });

  it("summarises merged effects as badges", async () => {
    const wizard = new Wizard(client);
    await wizard.start("step1");
    await wizard.answerAll(FLOW);
    const badges = effectsBadges(await wizard.panel());
    expect(badges).toEqual([
      "driver: relevance",
      "costs: capex+opex",
      "ICF=1",
      "strategy: daas",
      "demand estimation required",
    ]);
  });

  it("completes immediately on a management-only answer", async () => {
    const wizard = new Wizard(client);
    await wizard.start("step1");
    await wizard.answer("Yes");
    expect(wizard.complete).toBe(true);
    expect(wizard.codes).toEqual([1]);
    const panel = await wizard.panel();
    expect(panel.effects.cost_only).toBe(true);
    expect(effectsBadges(panel)).toContain("driver: cost only");
  });

  it("classifies the purpose on a step2 walk", async () => {
    const wizard = new Wizard(client);
    await wizard.start("step2");
    await wizard.answerAll(["No", "Yes", "Yes", "No", "No", "Yes", "No"]);
    const panel = await wizard.panel();
    expect(panel.purpose).toBe("operational");
    expect(effectsBadges(panel)).toContain("purpose: operational");
  });
});

describe("wizard resilience", () => {
  it("turns a stale double-click into a retry prompt, losing nothing", async () => {
    const wizard = new Wizard(client);
    await wizard.start("step1");
    const sessionId = wizard.session.session_id;

    // Another tab (raw client) answers first; the wizard's next answer is
    // now out of order.
    const firstQuestion = wizard.session.question;
    if (!firstQuestion) throw new Error("expected a first question");
    await client.postAnswer(sessionId, firstQuestion.id, "No");

    const refreshed = await wizard.answer("No");
    expect(wizard.retryPrompt).not.toBeNull();
    expect(refreshed.answered).toEqual([[firstQuestion.id, "No"]]);
    expect(await wizard.verifyMirror()).toBe(true);

    // The walk continues with no answers lost.
    await wizard.answerAll(FLOW.slice(1));
    expect(wizard.retryPrompt).toBeNull();
    expect(wizard.codes).toEqual([2, 3, 6, 12, 13]);
  });

  it("resumes a server-held session by id", async () => {
    const first = new Wizard(client);
    await first.start("step1");
    await first.answer("No");
    await first.answer("Yes");

    const second = new Wizard(client);
    const resumed = await second.resume(first.session.session_id);
    expect(resumed).toEqual(first.session);
    expect(await second.verifyMirror()).toBe(true);
  });

  it("rejects answering after completion", async () => {
    const wizard = new Wizard(client);
    await wizard.start("step1");
    await wizard.answer("Yes");
    await expect(wizard.answer("No")).rejects.toThrow(/complete/);
  });
});
