/** DOM wiring for the workbench: wizard, survey, dashboard panels. */

import { ApiRequestError, DataValorClient } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { debounce, formatDelta } from "./format.js";
import { SAATY_STEPS, Survey } from "./survey.js";
import { Wizard, effectsBadges } from "./wizard.js";

const client = new DataValorClient(
  (window as { DATAVALOR_URL?: string }).DATAVALOR_URL ??
    "http://127.0.0.1:8080",
);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  text?: string,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (className) node.className = className;
  return node;
}

function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

// ------------------------------------------------------------------ wizard

const wizard = new Wizard(client);

async function renderWizard(root: HTMLElement): Promise<void> {
  clear(root);
  root.append(el("h2", "Screening wizard"));

  const controls = el("div", undefined, "controls");
  for (const tree of ["step1", "step2"] as const) {
    const button = el("button", `start ${tree}`);
    button.onclick = async () => {
      await wizard.start(tree);
      await renderWizard(root);
    };
    controls.append(button);
  }
  root.append(controls);

  let session;
  try {
    session = wizard.session;
  } catch {
    root.append(el("p", "No active session."));
    return;
  }

  if (wizard.retryPrompt) {
    root.append(el("p", `Answer raced a newer state, retry: ${wizard.retryPrompt}`,
                   "warning"));
  }

  if (session.question) {
    root.append(el("p", session.question.text));
    const answers = el("div", undefined, "answers");
    for (const label of session.question.answers) {
      const button = el("button", label);
      button.onclick = async () => {
        await wizard.answer(label);
        await renderWizard(root);
      };
      answers.append(button);
    }
    root.append(answers);
    return;
  }

  const panel = await wizard.panel();
  root.append(el("p", `Codes: ${panel.accumulated_codes.join(", ")}`));
  const badges = el("div", undefined, "badges");
  for (const badge of effectsBadges(panel)) {
    badges.append(el("span", badge, "badge"));
  }
  root.append(badges);
  const list = el("ul");
  for (const rec of panel.recommendations) {
    list.append(el("li", `[${rec.code}] ${rec.text}`));
  }
  root.append(list);
  for (const note of panel.discrepancy_notes) {
    root.append(el("p", note, "note"));
  }
}

// ------------------------------------------------------------------ survey

let survey: Survey | null = null;

async function renderSurvey(root: HTMLElement): Promise<void> {
  clear(root);
  root.append(el("h2", "Pairwise survey"));

  const picker = el("div", undefined, "controls");
  const input = el("input") as HTMLInputElement;
  input.placeholder = "comma separated metric ids";
  const startButton = el("button", "start survey");
  startButton.onclick = () => {
    const items = input.value.split(",").map((s) => s.trim()).filter(Boolean);
    if (items.length >= 2) {
      survey = new Survey(client, items);
      void renderSurvey(root);
    }
  };
  picker.append(input, startButton);
  root.append(picker);
  if (!survey) return;
  const active = survey;

  const table = el("table");
  active.items.forEach((rowItem, i) => {
    const tr = el("tr");
    tr.append(el("th", rowItem));
    active.items.forEach((_, j) => {
      const td = el("td");
      if (i === j) {
        td.textContent = "1";
      } else if (i < j) {
        const select = el("select") as HTMLSelectElement;
        for (const step of SAATY_STEPS) {
          const option = el("option", step >= 1 ? String(step) : `1/${1 / step}`);
          option.setAttribute("value", String(step));
          if (active.matrix[i]?.[j] === step) option.selected = true;
          select.append(option);
        }
        select.onchange = async () => {
          active.setJudgement(i, j, Number(select.value));
          const report = await active.consistency();
          const badge = document.getElementById("cr-badge");
          if (badge) {
            badge.textContent = `CR ${report.consistency_ratio.toFixed(3)}`;
            badge.className = report.acceptable ? "badge" : "badge warning";
          }
        };
        td.append(select);
      } else {
        td.textContent = (active.matrix[i]?.[j] ?? 1).toFixed(3);
      }
      tr.append(td);
    });
    table.append(tr);
  });
  root.append(table);
  const crBadge = el("span", "CR 0.000", "badge");
  crBadge.id = "cr-badge";
  root.append(crBadge);

  const adopt = el("button", "adopt weights into scenario");
  adopt.onclick = async () => {
    const scenarioId = prompt("scenario id") ?? "";
    if (!scenarioId) return;
    try {
      await active.adoptWeights(scenarioId);
    } catch (error) {
      if (
        error instanceof Error &&
        confirm(`${error.message}. Adopt anyway?`)
      ) {
        await active.adoptWeights(scenarioId, { confirmInconsistent: true });
      }
    }
  };
  root.append(adopt);
}

// --------------------------------------------------------------- dashboard

const dashboard = new Dashboard(client);

async function renderDashboard(root: HTMLElement): Promise<void> {
  clear(root);
  root.append(el("h2", "Valuation dashboard"));

  const controls = el("div", undefined, "controls");
  const idInput = el("input") as HTMLInputElement;
  idInput.placeholder = "scenario id";
  const loadButton = el("button", "load");
  loadButton.onclick = async () => {
    try {
      await dashboard.load(idInput.value.trim());
    } catch (error) {
      if (error instanceof ApiRequestError) {
        root.append(el("p", error.message, "warning"));
        return;
      }
      throw error;
    }
    await renderDashboard(root);
  };
  controls.append(idInput, loadButton);
  root.append(controls);
  if (!dashboard.report || !dashboard.scenario) return;

  const table = el("table");
  const head = el("tr");
  for (const title of ["candidate", "V", "total cost", "ICF what-if"]) {
    head.append(el("th", title));
  }
  table.append(head);
  for (const row of dashboard.rows()) {
    const tr = el("tr");
    if (row.candidateId === dashboard.winner) tr.className = "winner";
    tr.append(el("td", row.candidateId));
    tr.append(el("td", row.display));
    tr.append(el("td", row.totalCost.toFixed(2)));
    const slider = el("input") as HTMLInputElement;
    slider.type = "range";
    slider.min = "0.5";
    slider.max = "4";
    slider.step = "0.5";
    slider.value = "1";
    const preview = debounce(async () => {
      const report = await dashboard.preview(row.candidateId, {
        icf: Number(slider.value),
      });
      const cell = document.getElementById(`delta-${row.candidateId}`);
      if (cell && report) {
        cell.textContent = formatDelta(report.after.value - report.before.value);
      } else if (cell && dashboard.fieldError) {
        cell.textContent = dashboard.fieldError.message;
      }
    });
    slider.oninput = () => preview();
    const sliderCell = el("td");
    sliderCell.append(slider, el("span", "", "delta"));
    sliderCell.lastElementChild!.id = `delta-${row.candidateId}`;
    tr.append(sliderCell);
    table.append(tr);
  }
  root.append(table);
  for (const note of dashboard.notes) {
    root.append(el("p", note, "note"));
  }
}

// ------------------------------------------------------------------- boot

async function boot(): Promise<void> {
  const app = document.getElementById("app");
  if (!app) return;
  const wizardRoot = el("section");
  const surveyRoot = el("section");
  const dashboardRoot = el("section");
  app.append(wizardRoot, surveyRoot, dashboardRoot);
  await renderWizard(wizardRoot);
  await renderSurvey(surveyRoot);
  await renderDashboard(dashboardRoot);
}

if (typeof document !== "undefined") {
  void boot();
}
