/** Typed client for the workbench HTTP JSON API (v1). All UI mutations go
 * through this module; the UI holds no authoritative state. */

export interface SessionMeta {
  id: string;
  corpus: string;
  models: string[];
  iteration: number;
  createdAt: number;
  updatedAt: number;
}

export interface SourceLocation {
  file: string;
  line: number;
}

export interface SuggestionEntry {
  id: string;
  dfd: string;
  pm: string;
  pmLabel: string;
  kind: string;
  state: string;
  score: number;
  location: SourceLocation | null;
}

export interface SuggestionPage {
  iteration: number;
  suggestions: SuggestionEntry[];
}

export interface Violation {
  kind: string;
  process?: string;
  contract?: string;
  asset?: string;
  zone?: string;
  element?: string;
  detail?: string;
  [key: string]: unknown;
}

export interface CheckReport {
  kind: string | null;
  mode?: string;
  violations: Violation[];
  convergences?: string[];
}

export interface CryptoEntry {
  capability: string;
  pattern: string;
}

export type Decision = "accept" | "reject" | "tolerate";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: string | null = null,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(private base: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(`${this.base}/api/v1${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json().catch(() => null);
    if (!resp.ok) {
      const err = (payload ?? {}) as { code?: string; message?: string; detail?: string };
      throw new ApiError(
        resp.status,
        err.code ?? "error",
        err.message ?? `request failed with status ${resp.status}`,
        err.detail ?? null,
      );
    }
    return payload as T;
  }

  listSessions(): Promise<{ sessions: string[] }> {
    return this.request("GET", "/sessions");
  }

  createSession(corpus: string, models: string[]): Promise<SessionMeta> {
    return this.request("POST", "/sessions", { corpus, models });
  }

  getSession(id: string): Promise<SessionMeta> {
    return this.request("GET", `/sessions/${id}`);
  }

  getSuggestions(id: string): Promise<SuggestionPage> {
    return this.request("GET", `/sessions/${id}/suggestions`);
  }

  postDecision(id: string, entryId: string, decision: Decision): Promise<SuggestionPage> {
    return this.request("POST", `/sessions/${id}/decisions`, { entryId, decision });
  }

  postMapping(id: string, dfdRef: string, pmRef: string):
      Promise<{ entryId: string; suggestions: SuggestionEntry[] }> {
    return this.request("POST", `/sessions/${id}/mappings`, { dfdRef, pmRef });
  }

  iterate(id: string): Promise<SuggestionPage> {
    return this.request("POST", `/sessions/${id}/iterate`);
  }

  runCheck(id: string, kind: string, mode?: string): Promise<CheckReport> {
    const query = mode ? `?mode=${encodeURIComponent(mode)}` : "";
    return this.request("POST", `/sessions/${id}/checks/${kind}${query}`);
  }

  getViolations(id: string): Promise<CheckReport> {
    return this.request("GET", `/sessions/${id}/violations`);
  }

  putCryptoList(id: string, text: string): Promise<{ entries: CryptoEntry[] }> {
    return this.request("PUT", `/sessions/${id}/crypto-list`, { text });
  }
}
