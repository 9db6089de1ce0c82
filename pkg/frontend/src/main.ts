/** Entry point: wires the store to the DOM and re-renders on every state
 * change. The session id comes from the ?session= query parameter. */

import { ApiClient } from "./api.js";
import { SessionStore } from "./store.js";
import { renderApp } from "./views.js";

export function bootstrap(root: HTMLElement, baseUrl: string, sessionId: string): SessionStore {
  const store = new SessionStore(new ApiClient(baseUrl));
  store.subscribe(() => renderApp(root, store));
  void store.open(sessionId);
  return store;
}

declare global {
  interface Window {
    flowmapStore?: SessionStore;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const root = document.getElementById("app") as HTMLElement;
  if (sessionId) {
    window.flowmapStore = bootstrap(root, window.location.origin, sessionId);
  } else {
    root.textContent = "Open with ?session=<id> to load a mapping session.";
  }
}
