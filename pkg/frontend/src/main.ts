/** Browser bootstrap: wires the API client, wizard, and diagram into the
 * page.  All state lives server-side; every change here is an API call
 * followed by a re-render at the acknowledged revision. */

import { ApiClient } from "./api.js";
import { renderDiagram, witnessToRefs } from "./diagram.js";
import type { ArchitectureDoc, ReportDoc, RunState } from "./types.js";
import {
  PatternWizard,
  describeFailure,
  importArchitecture,
  validateNames,
} from "./wizard.js";

interface App {
  api: ApiClient;
  wizard?: PatternWizard;
  showUses: boolean;
  highlight: Set<string>;
  revision: number;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function refreshDiagram(app: App): Promise<void> {
  if (!app.wizard) return;
  const diagramHost = el<HTMLDivElement>("diagram");
  diagramHost.classList.add("refreshing");
  const res = await app.api.getArchitecture(app.wizard.sessionId);
  app.revision = res.revision;
  const { svg } = renderDiagram(res.architecture, {
    showUses: app.showUses,
    highlight: app.highlight,
  });
  diagramHost.innerHTML = svg;
  diagramHost.classList.remove("refreshing");
  el<HTMLSpanElement>("revision").textContent = `revision ${res.revision}`;
}

function showReport(app: App, report: ReportDoc): void {
  const panel = el<HTMLUListElement>("report");
  panel.innerHTML = "";
  app.highlight = new Set();
  for (const v of report.violations) {
    const li = document.createElement("li");
    li.textContent = `[${v.code}] ${v.message}`;
    panel.appendChild(li);
    for (const ref of witnessToRefs(v)) app.highlight.add(ref);
  }
  el<HTMLParagraphElement>("verdict").textContent = report.ok
    ? "conforms: no violations"
    : `${report.violations.length} violation(s)`;
}

function showRunState(state: RunState): void {
  el<HTMLParagraphElement>("run-state").textContent =
    state.state + (state.diagnostic ? `: ${state.diagnostic}` : "");
  el<HTMLParagraphElement>("prompt").textContent =
    state.pendingDecision?.prompt ?? "";
  el<HTMLPreElement>("trace").textContent = (state.trace ?? []).join("\n");
}

function fail(message: string): void {
  el<HTMLParagraphElement>("error").textContent = message;
}

export function boot(baseUrl: string): void {
  const app: App = {
    api: new ApiClient(baseUrl),
    showUses: false,
    highlight: new Set(),
    revision: 0,
  };

  el<HTMLInputElement>("import-file").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const doc = JSON.parse(await file.text()) as ArchitectureDoc;
      const { wizard } = await importArchitecture(app.api, doc);
      app.wizard = wizard;
      await refreshDiagram(app);
    } catch (err) {
      fail(describeFailure(err));
    }
  });

  el<HTMLButtonElement>("toggle-uses").addEventListener("click", async () => {
    app.showUses = !app.showUses;
    await refreshDiagram(app);
  });

  el<HTMLButtonElement>("start-pattern").addEventListener("click", async () => {
    if (!app.wizard) return fail("import an architecture first");
    try {
      showRunState(await app.wizard.start("client-server"));
    } catch (err) {
      fail(describeFailure(err));
    }
  });

  el<HTMLButtonElement>("submit-names").addEventListener("click", async () => {
    if (!app.wizard) return;
    const server = el<HTMLInputElement>("server-name").value.trim();
    const clients = el<HTMLInputElement>("client-names")
      .value.split(",").map((s) => s.trim()).filter(Boolean);
    const res = await app.api.getArchitecture(app.wizard.sessionId);
    const problems = validateNames(
      { server, clients },
      res.architecture.components.map((c) => c.name),
    );
    if (problems.length) return fail(problems.join("; "));
    try {
      showRunState(await app.wizard.answer("names", { server, clients }));
      await refreshDiagram(app);
    } catch (err) {
      fail(describeFailure(err));
    }
  });

  el<HTMLButtonElement>("check-style").addEventListener("click", async () => {
    if (!app.wizard) return;
    try {
      showReport(app, await app.api.check(app.wizard.sessionId, "client-server"));
      await refreshDiagram(app);
    } catch (err) {
      fail(describeFailure(err));
    }
  });

  el<HTMLButtonElement>("export").addEventListener("click", async () => {
    if (!app.wizard) return;
    const text = await app.wizard.exportArchitecture();
    const blob = new Blob([text], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "architecture.arch";
    a.click();
  });
}
