// Test harness: mounts the app on jsdom with a mocked fetch that serves
// payloads recorded from the real fixture-configured service
// (scripts/record_frontend_fixtures.py in the repo root regenerates them).

import { ApiClient, type FetchLike } from "../src/api.js";
import { createApp, type App } from "../src/app.js";

import chatLocal from "./fixtures/chat_local.json";
import chatWeb from "./fixtures/chat_web.json";
import saveFirst from "./fixtures/save_web_first.json";
import saveRepeat from "./fixtures/save_web_repeat.json";
import kbSearch from "./fixtures/kb_search.json";

export const LOCAL_QUESTION = "quarterly alpha revenue grew strongly. margins expanded.";
export const WEB_QUESTION = "what is the gamma factor outlook";

export interface Call {
  url: string;
  method: string;
  body: Record<string, unknown> | null;
}

export interface Harness {
  app: App;
  root: HTMLElement;
  calls: Call[];
  postsTo(path: string): Call[];
  failNextChat(): void;
}

export function mount(): Harness {
  const calls: Call[] = [];
  let saveCount = 0;
  let chatShouldFail = false;

  const respond = (payload: unknown, status = 200): Response =>
    new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });

  const fetchImpl: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : null;
    calls.push({ url, method, body });
    if (url.endsWith("/v1/chat")) {
      if (chatShouldFail) {
        chatShouldFail = false;
        throw new TypeError("network down");
      }
      const question = body?.question as string;
      const options = (body?.options ?? {}) as { k?: number; j?: number };
      if ((options.j ?? 0) >= (options.k ?? Infinity)) {
        return respond({ detail: "j must be < k" }, 400);
      }
      return respond(question === LOCAL_QUESTION ? chatLocal : chatWeb);
    }
    if (url.endsWith("/v1/kb/save_web")) {
      saveCount += 1;
      return respond(saveCount === 1 ? saveFirst : saveRepeat);
    }
    if (url.includes("/v1/kb/search")) {
      return respond(kbSearch);
    }
    return respond({ detail: `unexpected url ${url}` }, 404);
  };

  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const app = createApp(root, new ApiClient("", fetchImpl));
  return {
    app,
    root,
    calls,
    postsTo: (path) => calls.filter((c) => c.method === "POST" && c.url.endsWith(path)),
    failNextChat: () => {
      chatShouldFail = true;
    },
  };
}

export function q<T extends HTMLElement>(root: HTMLElement, testid: string): T {
  const node = root.querySelector<T>(`[data-testid="${testid}"]`);
  if (!node) {
    throw new Error(`missing [data-testid="${testid}"]`);
  }
  return node;
}

export function typeInto(input: HTMLInputElement, text: string): void {
  input.value = text;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

export function submit(form: HTMLElement): void {
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

export async function ask(harness: Harness, question: string): Promise<void> {
  const input = q<HTMLInputElement>(harness.root, "chat-input");
  typeInto(input, question);
  submit(q(harness.root, "chat-form"));
  await harness.app.idle();
}
