/** Client-side session state: a cache of the latest API responses plus
 * fetch-and-reconcile mutation helpers. Scores and entry states always come
 * from the server; nothing is recomputed locally. */

import {
  ApiClient,
  CheckReport,
  Decision,
  SuggestionEntry,
  SuggestionPage,
} from "./api.js";

export interface SuggestionGroup {
  dfdRef: string;
  entries: SuggestionEntry[]; // sorted by score descending
}

export type Listener = () => void;

const PINNED = new Set(["ACCEPTED", "USER_DEFINED"]);

export function groupSuggestions(entries: SuggestionEntry[]): SuggestionGroup[] {
  const byDfd = new Map<string, SuggestionEntry[]>();
  for (const entry of entries) {
    const group = byDfd.get(entry.dfd);
    if (group) {
      group.push(entry);
    } else {
      byDfd.set(entry.dfd, [entry]);
    }
  }
  const groups = [...byDfd.entries()].map(([dfdRef, groupEntries]) => ({
    dfdRef,
    entries: [...groupEntries].sort(
      (a, b) => b.score - a.score || a.pm.localeCompare(b.pm),
    ),
  }));
  groups.sort((a, b) => a.dfdRef.localeCompare(b.dfdRef));
  return groups;
}

export function isPinned(entry: SuggestionEntry): boolean {
  return PINNED.has(entry.state);
}

export class SessionStore {
  sessionId: string | null = null;
  iteration = 0;
  suggestions: SuggestionEntry[] = [];
  report: CheckReport | null = null;
  error: string | null = null;
  busy = false;

  private listeners: Listener[] = [];

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get groups(): SuggestionGroup[] {
    return groupSuggestions(this.suggestions);
  }

  private applyPage(page: SuggestionPage): void {
    this.iteration = page.iteration;
    this.suggestions = page.suggestions;
  }

  private async mutate(work: () => Promise<void>): Promise<void> {
    this.busy = true;
    this.error = null;
    this.notify();
    try {
      await work();
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.busy = false;
      this.notify();
    }
  }

  async open(sessionId: string): Promise<void> {
    await this.mutate(async () => {
      const page = await this.api.getSuggestions(sessionId);
      this.sessionId = sessionId;
      this.applyPage(page);
      this.report = await this.api.getViolations(sessionId);
    });
  }

  async refresh(): Promise<void> {
    if (!this.sessionId) return;
    await this.open(this.sessionId);
  }

  async decide(entryId: string, decision: Decision): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      this.applyPage(await this.api.postDecision(id, entryId, decision));
    });
  }

  async acceptAll(dfdRef: string): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      const pending = this.suggestions.filter(
        (e) => e.dfd === dfdRef && !isPinned(e),
      );
      let page: SuggestionPage | null = null;
      for (const entry of pending) {
        page = await this.api.postDecision(id, entry.id, "accept");
      }
      if (page) this.applyPage(page);
    });
  }

  async mapManually(dfdRef: string, pmRef: string): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      const result = await this.api.postMapping(id, dfdRef, pmRef);
      this.suggestions = result.suggestions;
    });
  }

  async iterate(): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      this.applyPage(await this.api.iterate(id));
    });
  }

  async runCheck(kind: string, mode?: string): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      this.report = await this.api.runCheck(id, kind, mode);
    });
  }

  async saveCryptoList(text: string): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      await this.api.putCryptoList(id, text);
    });
  }

  private requireSession(): string {
    if (!this.sessionId) throw new Error("no session open");
    return this.sessionId;
  }
}
