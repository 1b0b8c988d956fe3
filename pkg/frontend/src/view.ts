// DOM rendering. The skeleton is built once; dynamic regions (messages,
// form error, toast, KB results, control states) are re-rendered from the
// store on every change. The chat draft input is never re-rendered, so
// typing and focus survive updates.

import type { ChatStore, MessageView } from "./state.js";

export function buildSkeleton(root: HTMLElement): void {
  root.innerHTML = `
    <div class="app">
      <header class="topbar">
        <h1>raggate</h1>
        <nav>
          <button type="button" data-tab="chat" class="tab active">Chat</button>
          <button type="button" data-tab="kb" class="tab">Knowledge base</button>
        </nav>
      </header>

      <section data-panel="chat" class="panel">
        <form data-testid="config-form" class="config">
          <label><input type="checkbox" data-config="useKb" checked> local KB</label>
          <label><input type="checkbox" data-config="useWeb" checked> web search</label>
          <label>K <input type="number" data-config="k" value="5" min="1" size="3"></label>
          <label>J <input type="number" data-config="j" value="3" min="1" size="3"></label>
          <label>metric
            <select data-config="metric">
              <option value="cosine">cosine</option>
              <option value="dot">dot</option>
              <option value="euclidean">euclidean</option>
            </select>
          </label>
          <span data-testid="form-error" class="form-error" role="alert"></span>
        </form>

        <div data-testid="messages" class="messages" aria-live="polite"></div>

        <form data-testid="chat-form" class="composer">
          <input data-testid="chat-input" type="text" autocomplete="off"
                 placeholder="Ask a question...">
          <button data-testid="send-btn" type="submit" disabled>Send</button>
        </form>
      </section>

      <section data-panel="kb" class="panel hidden">
        <form data-testid="kb-form" class="composer">
          <input data-testid="kb-input" type="text" autocomplete="off"
                 placeholder="Search the knowledge base...">
          <label>top <input data-testid="kb-k" type="number" value="5" min="1" size="3"></label>
          <button type="submit">Search</button>
        </form>
        <div data-testid="kb-results" class="kb-results"></div>
      </section>

      <div data-testid="toast" class="toast hidden"></div>
    </div>`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderCitations(message: MessageView, messageIndex: number): HTMLElement {
  const list = el("ol", "citations");
  message.citations.forEach((citation, citationIndex) => {
    const item = el("li", "citation");
    if (citation.link) {
      const anchor = el("a", "citation-label", citation.label);
      anchor.href = citation.link;
      anchor.target = "_blank";
      anchor.rel = "noreferrer";
      item.appendChild(anchor);
    } else {
      item.appendChild(el("span", "citation-label", citation.label));
    }
    if (citation.saveable) {
      const button = el("button", "save-btn");
      button.type = "button";
      button.dataset.testid = "save-btn";
      button.dataset.msg = String(messageIndex);
      button.dataset.cit = String(citationIndex);
      button.textContent = citation.saving ? "saving..."
        : citation.alreadyPresent ? "already saved"
        : citation.saved ? "saved ✓"
        : "save to KB";
      button.disabled = citation.saving;
      item.appendChild(button);
    }
    list.appendChild(item);
  });
  return list;
}

function renderMessage(message: MessageView, messageIndex: number): HTMLElement {
  const bubble = el("div", `msg ${message.role}`);
  bubble.appendChild(el("div", "msg-text", message.text));
  if (message.citations.length) {
    bubble.appendChild(renderCitations(message, messageIndex));
  }
  if (message.badges) {
    const badges = el("div", "badges");
    badges.appendChild(el("span", "badge", `web ${message.badges.webUsed ? "used" : "skipped"}`))
      .setAttribute("data-testid", "badge-web");
    badges.appendChild(el("span", "badge", `KB ${message.badges.kbUpdated ? "updated" : "unchanged"}`))
      .setAttribute("data-testid", "badge-kb");
    if (message.badges.degraded) {
      badges.appendChild(el("span", "badge warn", "web search failed"))
        .setAttribute("data-testid", "badge-degraded");
    }
    if (message.totalMs !== null) {
      badges.appendChild(el("span", "badge", `${message.totalMs.toFixed(0)} ms`));
    }
    bubble.appendChild(badges);
  }
  if (message.retryQuestion !== null) {
    const retry = el("button", "retry-btn", "retry");
    retry.type = "button";
    retry.dataset.testid = "retry-btn";
    retry.dataset.question = message.retryQuestion;
    bubble.appendChild(retry);
  }
  return bubble;
}

export function render(root: HTMLElement, store: ChatStore): void {
  const messages = root.querySelector<HTMLElement>('[data-testid="messages"]')!;
  messages.replaceChildren(...store.messages.map(renderMessage));
  if (store.pending) {
    messages.appendChild(el("div", "msg assistant pending", "thinking..."));
  }
  messages.scrollTop = messages.scrollHeight;

  const formError = root.querySelector<HTMLElement>('[data-testid="form-error"]')!;
  formError.textContent = store.formError ?? "";

  const input = root.querySelector<HTMLInputElement>('[data-testid="chat-input"]')!;
  const send = root.querySelector<HTMLButtonElement>('[data-testid="send-btn"]')!;
  send.disabled = store.pending || !input.value.trim() || store.formError !== null;

  const toast = root.querySelector<HTMLElement>('[data-testid="toast"]')!;
  if (store.toast) {
    toast.textContent = store.toast.text;
    toast.className = `toast ${store.toast.kind}`;
  } else {
    toast.textContent = "";
    toast.className = "toast hidden";
  }

  const kbResults = root.querySelector<HTMLElement>('[data-testid="kb-results"]')!;
  if (!store.kbSearched) {
    kbResults.replaceChildren(
      el("p", "empty-state", store.kbQuery ? "" : "Search the local knowledge base."));
  } else if (store.kbResults.length === 0) {
    kbResults.replaceChildren(el("p", "empty-state", "No matching chunks."));
  } else {
    kbResults.replaceChildren(...store.kbResults.map((result) => {
      const row = el("div", "kb-row");
      row.appendChild(el("span", "kb-rank", `#${result.rank}`));
      row.appendChild(el("span", "kb-score", result.score.toFixed(3)));
      row.appendChild(el("span", "kb-date", result.published_at));
      row.appendChild(el("span", "kb-text", result.text));
      return row;
    }));
  }
}
