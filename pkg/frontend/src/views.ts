/** DOM rendering: suggestion groups, violation cards, the manual-mapping
 * form, and the crypto-list editor. Pure render-from-state functions; all
 * event wiring delegates to the store via callbacks. */

import { SuggestionEntry, Violation } from "./api.js";
import { SessionStore, isPinned } from "./store.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function locationLabel(entry: SuggestionEntry): string {
  if (!entry.location) return "";
  return `${entry.location.file}:${entry.location.line}`;
}

export function renderErrorBanner(store: SessionStore): HTMLElement {
  const banner = el("div", "error-banner");
  banner.dataset.testid = "error-banner";
  if (store.error) {
    banner.textContent = store.error;
  } else {
    banner.hidden = true;
  }
  return banner;
}

function renderEntryRow(store: SessionStore, entry: SuggestionEntry): HTMLElement {
  const row = el("li", "entry-row");
  row.dataset.testid = "entry-row";
  row.dataset.entryId = entry.id;
  row.dataset.state = entry.state;

  row.append(
    el("span", "entry-pm", entry.pmLabel),
    el("span", "entry-kind", entry.kind),
    el("span", "entry-score", entry.score.toFixed(3)),
    el("span", "entry-location", locationLabel(entry)),
  );

  if (isPinned(entry)) {
    row.classList.add("pinned");
    row.append(el("span", "entry-pinned-badge", entry.state));
    return row;
  }

  for (const decision of ["accept", "reject", "tolerate"] as const) {
    const button = el("button", `decide-${decision}`, decision);
    button.dataset.testid = `decide-${decision}`;
    button.disabled = store.busy;
    button.addEventListener("click", () => void store.decide(entry.id, decision));
    row.append(button);
  }
  return row;
}

export function renderSuggestions(store: SessionStore): HTMLElement {
  const panel = el("section", "suggestions");
  panel.dataset.testid = "suggestions";

  const heading = el("h2", undefined, `Suggestions — iteration ${store.iteration}`);
  panel.append(heading);

  const groups = store.groups;
  if (groups.length === 0) {
    const empty = el("p", "empty-state", "No suggestions. Run an iteration to search the program model.");
    empty.dataset.testid = "empty-state";
    panel.append(empty);
    return panel;
  }

  for (const group of groups) {
    const card = el("article", "group-card");
    card.dataset.testid = "group-card";
    card.dataset.dfdRef = group.dfdRef;

    const header = el("header", "group-header");
    header.append(el("h3", "group-title", group.dfdRef));
    const acceptAll = el("button", "accept-all", "accept all");
    acceptAll.dataset.testid = "accept-all";
    acceptAll.disabled = store.busy || group.entries.every(isPinned);
    acceptAll.addEventListener("click", () => void store.acceptAll(group.dfdRef));
    header.append(acceptAll);
    card.append(header);

    const list = el("ul", "entry-list");
    for (const entry of group.entries) {
      list.append(renderEntryRow(store, entry));
    }
    card.append(list);
    panel.append(card);
  }
  return panel;
}

function violationSummary(violation: Violation): string {
  const anchor = violation.process ?? violation.element ?? violation.asset ?? "";
  const extra = violation.contract ?? violation.zone ?? violation.detail ?? "";
  return [anchor, extra].filter(Boolean).join(" — ");
}

export function renderViolations(store: SessionStore): HTMLElement {
  const panel = el("section", "violations");
  panel.dataset.testid = "violations";
  panel.append(el("h2", undefined, "Check results"));

  const report = store.report;
  if (!report || report.kind === null) {
    panel.append(el("p", "empty-state", "No check has run yet."));
    return panel;
  }

  panel.append(el("p", "report-kind", `Last check: ${report.kind}${report.mode ? ` (${report.mode})` : ""}`));

  if (report.violations.length === 0) {
    const clean = el("p", "no-violations", "No violations found.");
    clean.dataset.testid = "no-violations";
    panel.append(clean);
  }
  for (const violation of report.violations) {
    const card = el("article", "violation-card");
    card.dataset.testid = "violation-card";
    card.dataset.kind = violation.kind;
    card.append(el("span", "violation-badge", violation.kind));
    card.append(el("span", "violation-summary", violationSummary(violation)));
    panel.append(card);
  }

  if (report.convergences && report.convergences.length > 0) {
    const list = el("ul", "convergences");
    list.dataset.testid = "convergences";
    for (const convergence of report.convergences) {
      list.append(el("li", "convergence", convergence));
    }
    panel.append(list);
  }
  return panel;
}

export function renderControls(store: SessionStore): HTMLElement {
  const bar = el("section", "controls");
  bar.dataset.testid = "controls";

  const iterate = el("button", "iterate", "iterate");
  iterate.dataset.testid = "iterate";
  iterate.disabled = store.busy;
  iterate.addEventListener("click", () => void store.iterate());
  bar.append(iterate);

  for (const kind of ["contracts", "crypto", "design", "taint"]) {
    const button = el("button", `check-${kind}`, `check ${kind}`);
    button.dataset.testid = `check-${kind}`;
    button.disabled = store.busy;
    button.addEventListener("click", () => void store.runCheck(kind));
    bar.append(button);
  }
  return bar;
}

export function renderManualMappingForm(store: SessionStore): HTMLElement {
  const form = el("form", "manual-mapping");
  form.dataset.testid = "manual-mapping";

  const dfdInput = el("input");
  dfdInput.name = "dfdRef";
  dfdInput.placeholder = "model/element";
  const pmInput = el("input");
  pmInput.name = "pmRef";
  pmInput.placeholder = "T:…, N:…, S:…, or D:…";
  const submit = el("button", undefined, "map");
  submit.type = "submit";
  submit.disabled = store.busy;

  form.append(dfdInput, pmInput, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (dfdInput.value && pmInput.value) {
      void store.mapManually(dfdInput.value, pmInput.value);
    }
  });
  return form;
}

export function renderCryptoEditor(store: SessionStore): HTMLElement {
  const form = el("form", "crypto-editor");
  form.dataset.testid = "crypto-editor";
  form.append(el("h2", undefined, "Cryptographic signature list"));

  const textarea = el("textarea");
  textarea.name = "cryptoText";
  textarea.rows = 6;
  const save = el("button", undefined, "save list");
  save.type = "submit";
  save.disabled = store.busy;

  form.append(textarea, save);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void store.saveCryptoList(textarea.value);
  });
  return form;
}

export function renderApp(root: HTMLElement, store: SessionStore): void {
  root.replaceChildren(
    renderErrorBanner(store),
    renderControls(store),
    renderSuggestions(store),
    renderManualMappingForm(store),
    renderViolations(store),
    renderCryptoEditor(store),
  );
}
