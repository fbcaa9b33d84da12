/** Typed client for the archevol HTTP service.
 *
 * Every mutation awaits server acknowledgment; the client holds no
 * architecture state of its own.  `fetch` is injectable for tests.
 */

import type {
  ArchitectureDoc,
  ArchitectureResponse,
  OperationDoc,
  ReportDoc,
  RunState,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: string };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body; keep the status text */
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchImpl(this.baseUrl + path, init);
    if (!res.ok) await parseError(res);
    return (await res.json()) as T;
  }

  createSession(doc: ArchitectureDoc): Promise<{ sessionId: string; revision: number }> {
    return this.request("POST", "/sessions", doc);
  }

  getArchitecture(sid: string): Promise<ArchitectureResponse> {
    return this.request("GET", `/sessions/${sid}/architecture`);
  }

  postOperation(sid: string, op: OperationDoc): Promise<{ architecture: ArchitectureDoc; revision: number }> {
    return this.request("POST", `/sessions/${sid}/ops`, op);
  }

  startPattern(sid: string, name: string): Promise<RunState> {
    return this.request("POST", `/sessions/${sid}/pattern/${name}/start`);
  }

  patternState(sid: string): Promise<RunState> {
    return this.request("GET", `/sessions/${sid}/pattern/state`);
  }

  postDecision(sid: string, step: string, answer: unknown): Promise<RunState> {
    return this.request("POST", `/sessions/${sid}/pattern/decision`, { step, answer });
  }

  check(sid: string, style?: string): Promise<ReportDoc> {
    const q = style ? `?style=${encodeURIComponent(style)}` : "";
    return this.request("GET", `/sessions/${sid}/check${q}`);
  }

  styles(): Promise<{ styles: string[] }> {
    return this.request("GET", "/styles");
  }

  patterns(): Promise<{ patterns: string[] }> {
    return this.request("GET", "/patterns");
  }
}
