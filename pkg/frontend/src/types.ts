/** Wire types shared with the HTTP service.  The wire format is identical to
 * the on-disk format, so an exported document can be replayed headlessly. */

export type Direction = "provided" | "required";
export type ComponentKind = "plain" | "client" | "server";

export interface PortDoc {
  name: string;
  direction: Direction;
}

export interface ComponentDoc {
  name: string;
  kind: ComponentKind;
  ports: PortDoc[];
  children?: ComponentDoc[];
}

export interface RoleDoc {
  name: string;
  direction: Direction;
}

export interface ConnectorDoc {
  name: string;
  roles: RoleDoc[];
}

export interface ArchitectureDoc {
  format: string;
  name: string;
  components: ComponentDoc[];
  connectors: { name: string; roles: RoleDoc[] }[];
  attachments: { port: string; role: string }[];
  bindings: { outer: string; inner: string }[];
  uses: { from: string; to: string }[];
}

export interface ViolationDoc {
  code: string;
  message: string;
  witness: string[];
}

export interface ReportDoc {
  ok: boolean;
  violations: ViolationDoc[];
}

export interface OperationDoc {
  op: string;
  context?: string;
  params?: Record<string, unknown>;
  revision?: number;
}

export interface PendingDecision {
  step: string;
  kind: string;
  prompt: string;
}

export interface RunState {
  state: "idle" | "running" | "awaiting-decision" | "finished" | "failed";
  pattern?: string;
  trace?: string[];
  revision: number;
  diagnostic?: string | null;
  pendingDecision?: PendingDecision;
  finalReport?: ReportDoc;
}

export interface ArchitectureResponse {
  architecture: ArchitectureDoc;
  connectsTo: [string, string][];
  revision: number;
}

export interface DecisionScriptDoc {
  format: string;
  pattern: string;
  decisions: { step: string; answer: unknown }[];
}
