/** End-to-end UI tests against a live `flowmap serve` instance.
 *
 * The suite boots the real HTTP service once, creates sessions over the
 * API, and drives the rendered DOM in jsdom: the UI round trip is
 * load session → accept → iterate → pinned entry persists; reject →
 * derived rows vanish; run a check → violation cards mirror the API
 * report.
 */

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, SuggestionEntry } from "../src/api.js";
import { bootstrap } from "../src/main.js";
import { groupSuggestions } from "../src/store.js";

const PORT = 8765 + Math.floor(Math.random() * 100);
const BASE = `http://127.0.0.1:${PORT}`;
const REPO = resolve(__dirname, "..", "..");
const SECURESTORE = join(REPO, "corpus", "securestore");
const PIPELINE = join(REPO, "corpus", "pipeline");

let server: ChildProcess;
let home: string;
const api = new ApiClient(BASE);

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      await api.listSessions();
      return;
    } catch {
      await new Promise((resolvePoll) => setTimeout(resolvePoll, 150));
    }
  }
  throw new Error("service did not come up");
}

async function settle(): Promise<void> {
  // The store re-renders asynchronously after each API response; give the
  // microtask/fetch chain a few turns to flush.
  for (let i = 0; i < 3; i++) {
    await new Promise((resolveTick) => setTimeout(resolveTick, 120));
  }
}

function openSession(sessionId: string) {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app") as HTMLElement;
  const store = bootstrap(root, BASE, sessionId);
  return { root, store };
}

function rows(root: HTMLElement): HTMLElement[] {
  return [...root.querySelectorAll<HTMLElement>('[data-testid="entry-row"]')];
}

function groupCard(root: HTMLElement, dfdRef: string): HTMLElement {
  const card = root.querySelector<HTMLElement>(
    `[data-testid="group-card"][data-dfd-ref="${dfdRef}"]`,
  );
  if (!card) throw new Error(`no group card for ${dfdRef}`);
  return card;
}

beforeAll(async () => {
  home = mkdtempSync(join(tmpdir(), "flowmap-ui-"));
  server = spawn("flowmap", ["serve", "--port", String(PORT)], {
    env: { ...process.env, FLOWMAP_HOME: home },
    stdio: "ignore",
  });
  await waitForServer();
});

afterAll(() => {
  server?.kill();
  rmSync(home, { recursive: true, force: true });
});

describe("suggestion review", () => {
  it("groups the reference corpus by DFD element with API-ordered scores", async () => {
    const meta = await api.createSession(SECURESTORE, [
      join(SECURESTORE, "securestore.secdfd"),
    ]);
    const { root } = openSession(meta.id);
    await settle();

    const page = await api.getSuggestions(meta.id);
    const getValue = groupCard(root, "securestore/Get_Value");
    const labels = [...getValue.querySelectorAll(".entry-pm")].map(
      (node) => node.textContent,
    );
    expect(labels).toContain("Service.get(Key):Secret");
    expect(labels).toContain("Service.getPassword(Key):Secret");

    // every rendered score is the API's score, in descending group order
    const serverGroups = groupSuggestions(page.suggestions);
    for (const group of serverGroups) {
      const card = groupCard(root, group.dfdRef);
      const rendered = [...card.querySelectorAll(".entry-score")].map(
        (node) => node.textContent,
      );
      expect(rendered).toEqual(group.entries.map((e) => e.score.toFixed(3)));
    }
  });

  it("round-trips accept → iterate with the accepted entry pinned", async () => {
    const meta = await api.createSession(SECURESTORE, [
      join(SECURESTORE, "securestore.secdfd"),
    ]);
    const { root } = openSession(meta.id);
    await settle();

    const before = rows(root).length;
    const firstRow = rows(root)[0];
    const entryId = firstRow.dataset.entryId as string;
    firstRow.querySelector<HTMLButtonElement>('[data-testid="decide-accept"]')!.click();
    await settle();

    let accepted = rows(root).find((r) => r.dataset.entryId === entryId);
    expect(accepted?.dataset.state).toBe("ACCEPTED");

    root.querySelector<HTMLButtonElement>('[data-testid="iterate"]')!.click();
    await settle();

    accepted = rows(root).find((r) => r.dataset.entryId === entryId);
    expect(accepted?.dataset.state).toBe("ACCEPTED");
    // pinned rows render no decision buttons
    expect(accepted?.querySelector("button")).toBeNull();
    expect(rows(root).length).toBeGreaterThanOrEqual(before);
  });

  it("drops rejected entries and their derived rows, and never re-renders them", async () => {
    const meta = await api.createSession(SECURESTORE, [
      join(SECURESTORE, "securestore.secdfd"),
    ]);
    // grow derived entries first so the rejection has a closure to delete
    await api.iterate(meta.id);
    const { root } = openSession(meta.id);
    await settle();

    const rejectedId =
      "securestore/Get_Passwords_External::S:getPassword(Key):Secret";
    const derivedId =
      "securestore/Get_Passwords_External::D:Service.getPassword(Key):Secret";
    const target = rows(root).find((r) => r.dataset.entryId === rejectedId);
    expect(target).toBeDefined();
    expect(rows(root).some((r) => r.dataset.entryId === derivedId)).toBe(true);
    target!.querySelector<HTMLButtonElement>('[data-testid="decide-reject"]')!.click();
    await settle();

    root.querySelector<HTMLButtonElement>('[data-testid="iterate"]')!.click();
    await settle();

    const remaining = rows(root).map((r) => r.dataset.entryId as string);
    expect(remaining).not.toContain(rejectedId);
    // nothing derived from the rejected entry survives either
    expect(remaining).not.toContain(derivedId);
    // invariant: no rendered row is in REJECTED state
    for (const row of rows(root)) {
      expect(row.dataset.state).not.toBe("REJECTED");
    }
  });

  it("accept-all pins every entry in a group", async () => {
    const meta = await api.createSession(SECURESTORE, [
      join(SECURESTORE, "securestore.secdfd"),
    ]);
    const { root } = openSession(meta.id);
    await settle();

    const card = groupCard(root, "securestore/Get_Value");
    card.querySelector<HTMLButtonElement>('[data-testid="accept-all"]')!.click();
    await settle();

    const after = groupCard(root, "securestore/Get_Value");
    for (const row of after.querySelectorAll<HTMLElement>('[data-testid="entry-row"]')) {
      expect(row.dataset.state).toBe("ACCEPTED");
    }
  });
});

describe("manual mapping", () => {
  it("adds a USER_DEFINED row and surfaces illegal pairs as an error banner", async () => {
    const meta = await api.createSession(SECURESTORE, [
      join(SECURESTORE, "securestore.secdfd"),
    ]);
    const { root } = openSession(meta.id);
    await settle();

    const form = root.querySelector<HTMLFormElement>('[data-testid="manual-mapping"]')!;
    const [dfdInput, pmInput] = form.querySelectorAll("input");
    dfdInput.value = "securestore/secret";
    pmInput.value = "T:Secret";
    form.dispatchEvent(new window.Event("submit", { cancelable: true }));
    await settle();

    const manual = rows(root).find(
      (r) => r.dataset.entryId === "securestore/secret::T:Secret",
    );
    expect(manual?.dataset.state).toBe("USER_DEFINED");

    dfdInput.value = "securestore/secret";
    pmInput.value = "T:NoSuchType";
    form.dispatchEvent(new window.Event("submit", { cancelable: true }));
    await settle();

    const banner = root.querySelector<HTMLElement>('[data-testid="error-banner"]')!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toBeTruthy();
  });
});

describe("checks and the crypto list", () => {
  it("renders violation cards identical to the API report", async () => {
    const meta = await api.createSession(SECURESTORE, [
      join(SECURESTORE, "securestore.secdfd"),
    ]);
    const { root } = openSession(meta.id);
    await settle();

    root.querySelector<HTMLButtonElement>('[data-testid="check-design"]')!.click();
    await settle();

    const report = await api.getViolations(meta.id);
    const cards = [...root.querySelectorAll<HTMLElement>('[data-testid="violation-card"]')];
    expect(cards.length).toBe(report.violations.length);
    expect(cards.map((c) => c.dataset.kind)).toEqual(
      report.violations.map((v) => v.kind),
    );
    expect(cards.some((c) => c.textContent?.includes("curious_logger"))).toBe(true);
  });

  it("shows a clean result for the compliant pinned corpus", async () => {
    const meta = await api.createSession(PIPELINE, [
      join(PIPELINE, "pipeline.secdfd"),
    ]);
    const gt = (await import("node:fs")).readFileSync(
      join(PIPELINE, "pipeline.gt.json"),
      "utf8",
    );
    for (const record of JSON.parse(gt) as { dfd: string; pm: string }[]) {
      await api.postMapping(meta.id, record.dfd, record.pm);
    }
    const { root } = openSession(meta.id);
    await settle();

    root.querySelector<HTMLButtonElement>('[data-testid="check-contracts"]')!.click();
    await settle();

    expect(root.querySelector('[data-testid="no-violations"]')).not.toBeNull();
    expect(root.querySelectorAll('[data-testid="violation-card"]').length).toBe(0);
  });

  it("round-trips the crypto list editor and rejects malformed input inline", async () => {
    const meta = await api.createSession(PIPELINE, [
      join(PIPELINE, "pipeline.secdfd"),
    ]);
    const { root } = openSession(meta.id);
    await settle();

    const editor = root.querySelector<HTMLFormElement>('[data-testid="crypto-editor"]')!;
    const textarea = editor.querySelector("textarea")!;
    textarea.value = "enc\tCrypto.seal(*)*\ndec\tCrypto.open(*)*\n";
    editor.dispatchEvent(new window.Event("submit", { cancelable: true }));
    await settle();

    let banner = root.querySelector<HTMLElement>('[data-testid="error-banner"]')!;
    expect(banner.hidden).toBe(true);

    const textareaAgain = root.querySelector<HTMLFormElement>(
      '[data-testid="crypto-editor"]',
    )!.querySelector("textarea")!;
    textareaAgain.value = "enc missing-tab-separator";
    root.querySelector<HTMLFormElement>('[data-testid="crypto-editor"]')!
      .dispatchEvent(new window.Event("submit", { cancelable: true }));
    await settle();

    banner = root.querySelector<HTMLElement>('[data-testid="error-banner"]')!;
    expect(banner.hidden).toBe(false);
  });
});

describe("sorting and grouping rules", () => {
  it("sorts entries within a group by score descending", () => {
    const entries = [
      { id: "a", dfd: "m/P", pm: "N:a", pmLabel: "a", kind: "PROCESS_NAME", state: "SUGGESTED", score: 0.2, location: null },
      { id: "b", dfd: "m/P", pm: "N:b", pmLabel: "b", kind: "PROCESS_NAME", state: "SUGGESTED", score: 0.9, location: null },
      { id: "c", dfd: "m/Q", pm: "N:c", pmLabel: "c", kind: "PROCESS_NAME", state: "SUGGESTED", score: 0.5, location: null },
    ] satisfies SuggestionEntry[];
    const groups = groupSuggestions(entries);
    expect(groups.map((g) => g.dfdRef)).toEqual(["m/P", "m/Q"]);
    expect(groups[0].entries.map((e) => e.id)).toEqual(["b", "a"]);
  });
});
