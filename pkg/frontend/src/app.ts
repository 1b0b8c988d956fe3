// Wires the store, view, and DOM events together. createApp is also the
// test entry point: tests mount it on a jsdom element with a mocked fetch
// and await app.idle() after dispatching events.

import { ApiClient } from "./api.js";
import { ChatStore } from "./state.js";
import { buildSkeleton, render } from "./view.js";

export interface App {
  store: ChatStore;
  root: HTMLElement;
  idle(): Promise<void>;
}

export function createApp(root: HTMLElement, api: ApiClient): App {
  const store = new ChatStore(api);
  buildSkeleton(root);
  store.subscribe(() => render(root, store));
  render(root, store);

  let inflight = 0;
  let idleResolvers: Array<() => void> = [];
  const track = (promise: Promise<unknown>): void => {
    inflight += 1;
    promise.finally(() => {
      inflight -= 1;
      if (inflight === 0) {
        const resolvers = idleResolvers;
        idleResolvers = [];
        resolvers.forEach((resolve) => resolve());
      }
    });
  };

  const chatForm = root.querySelector<HTMLFormElement>('[data-testid="chat-form"]')!;
  const chatInput = root.querySelector<HTMLInputElement>('[data-testid="chat-input"]')!;
  chatForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const question = chatInput.value;
    if (!question.trim() || store.pending) {
      return;
    }
    chatInput.value = "";
    track(store.send(question));
  });
  chatInput.addEventListener("input", () => render(root, store));

  const configForm = root.querySelector<HTMLFormElement>('[data-testid="config-form"]')!;
  configForm.addEventListener("change", () => {
    const read = (name: string) =>
      configForm.querySelector<HTMLInputElement | HTMLSelectElement>(`[data-config="${name}"]`)!;
    store.setConfig({
      useKb: (read("useKb") as HTMLInputElement).checked,
      useWeb: (read("useWeb") as HTMLInputElement).checked,
      k: Number(read("k").value),
      j: Number(read("j").value),
      metric: read("metric").value,
    });
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.testid === "save-btn") {
      track(store.saveCitation(Number(target.dataset.msg), Number(target.dataset.cit)));
    } else if (target.dataset.testid === "retry-btn" && target.dataset.question) {
      track(store.send(target.dataset.question));
    } else if (target.dataset.tab) {
      for (const tab of root.querySelectorAll<HTMLElement>("[data-tab]")) {
        tab.classList.toggle("active", tab === target);
      }
      for (const panel of root.querySelectorAll<HTMLElement>("[data-panel]")) {
        panel.classList.toggle("hidden", panel.dataset.panel !== target.dataset.tab);
      }
    } else if (target.dataset.testid === "toast" || target.closest('[data-testid="toast"]')) {
      store.dismissToast();
    }
  });

  const kbForm = root.querySelector<HTMLFormElement>('[data-testid="kb-form"]')!;
  kbForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const query = root.querySelector<HTMLInputElement>('[data-testid="kb-input"]')!.value;
    const k = Number(root.querySelector<HTMLInputElement>('[data-testid="kb-k"]')!.value) || 5;
    track(store.searchKb(query, k));
  });

  return {
    store,
    root,
    idle: () =>
      inflight === 0
        ? Promise.resolve()
        : new Promise<void>((resolve) => idleResolvers.push(resolve)),
  };
}
