/** Pattern wizard: drives a pattern run over the API, mirrors the server's
 * decision validation client-side so obviously bad answers never leave the
 * browser, and exports the session architecture in canonical bytes. */

import { ApiClient, ApiError } from "./api.js";
import { canonicalJson } from "./canonical.js";
import type {
  ArchitectureDoc,
  DecisionScriptDoc,
  RunState,
} from "./types.js";

export interface NamesAnswer {
  server: string;
  clients: string[];
}

/** Client-side mirror of the server's tier-name validation. */
export function validateNames(
  answer: NamesAnswer,
  existing: string[],
): string[] {
  const problems: string[] = [];
  if (!answer.server) problems.push("server name must not be empty");
  if (answer.clients.length < 1) problems.push("at least one client is required");
  if (answer.clients.some((c) => !c)) problems.push("client names must not be empty");
  const names = [answer.server, ...answer.clients];
  if (new Set(names).size !== names.length) problems.push("tier names must be distinct");
  const clash = names.filter((n) => existing.includes(n));
  if (clash.length) problems.push(`names already taken: ${clash.sort().join(", ")}`);
  return problems;
}

/** Client-side mirror of the assignment validation. */
export function validateAssignment(
  assignment: Record<string, string>,
  assignable: string[],
  tiers: string[],
): string[] {
  const problems: string[] = [];
  for (const [comp, tier] of Object.entries(assignment)) {
    if (!assignable.includes(comp))
      problems.push(`${comp} is not an assignable top-level component`);
    if (!tiers.includes(tier)) problems.push(`${tier} is not a tier of this run`);
  }
  return problems;
}

export class PatternWizard {
  state: RunState = { state: "idle", revision: 0 };

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  async start(pattern: string): Promise<RunState> {
    this.state = await this.api.startPattern(this.sessionId, pattern);
    return this.state;
  }

  async answer(step: string, answer: unknown): Promise<RunState> {
    this.state = await this.api.postDecision(this.sessionId, step, answer);
    return this.state;
  }

  async refresh(): Promise<RunState> {
    this.state = await this.api.patternState(this.sessionId);
    return this.state;
  }

  /** Drive the run to completion with a recorded decision script; the same
   * script the CLI replays headlessly. */
  async replay(script: DecisionScriptDoc): Promise<RunState> {
    await this.start(script.pattern);
    while (this.state.state === "awaiting-decision") {
      const pending = this.state.pendingDecision;
      if (!pending) throw new Error("awaiting a decision but none is pending");
      const entry = script.decisions.find((d) => d.step === pending.step);
      if (!entry) throw new Error(`script has no answer for step ${pending.step}`);
      await this.answer(pending.step, entry.answer);
    }
    return this.state;
  }

  /** The session architecture as canonical file bytes. */
  async exportArchitecture(): Promise<string> {
    const res = await this.api.getArchitecture(this.sessionId);
    return canonicalJson(res.architecture);
  }
}

export async function importArchitecture(
  api: ApiClient,
  doc: ArchitectureDoc,
): Promise<{ wizard: PatternWizard; sessionId: string }> {
  const { sessionId } = await api.createSession(doc);
  return { wizard: new PatternWizard(api, sessionId), sessionId };
}

/** Surface an API failure as a message for the responsible control. */
export function describeFailure(err: unknown): string {
  if (err instanceof ApiError) {
    if (err.status === 409) return `conflict: ${err.detail} (refresh and retry)`;
    return err.detail;
  }
  return err instanceof Error ? err.message : String(err);
}
