// View-model state for the chat client. The store owns all mutable state;
// the view renders it and routes DOM events back into store methods. Every
// backend interaction goes through the injected ApiClient.

import { ApiClient, ApiError } from "./api.js";
import type { ChatResponse, KbSearchResult } from "./types.js";

export interface UiConfig {
  useKb: boolean;
  useWeb: boolean;
  k: number;
  j: number;
  metric: string;
}

export const DEFAULT_CONFIG: UiConfig = {
  useKb: true,
  useWeb: true,
  k: 5,
  j: 3,
  metric: "cosine",
};

// Mirrors the server-side rules; the form refuses submission on violation
// and the server re-validates anyway.
export function validateConfig(config: UiConfig): string | null {
  if (!Number.isInteger(config.k) || config.k < 1) {
    return "K must be an integer ≥ 1";
  }
  if (!Number.isInteger(config.j) || config.j < 1) {
    return "J must be an integer ≥ 1";
  }
  if (config.j >= config.k) {
    return "J must be smaller than K";
  }
  if (!config.useKb && !config.useWeb) {
    return "enable at least one knowledge source";
  }
  return null;
}

export interface CitationView {
  label: string;
  link: string | null;     // http(s) url for web sources, null for local
  saveable: boolean;       // true exactly for web-provenance citations
  saved: boolean;
  alreadyPresent: boolean;
  saving: boolean;
}

export interface Badges {
  webUsed: boolean;
  kbUpdated: boolean;
  degraded: boolean;
}

export interface MessageView {
  role: "user" | "assistant" | "system";
  text: string;
  citations: CitationView[];
  badges: Badges | null;
  totalMs: number | null;
  retryQuestion: string | null; // set on failure messages to offer a retry
}

export interface Toast {
  text: string;
  kind: "info" | "error";
}

function citationViews(response: ChatResponse): CitationView[] {
  return response.citations.map((c) => ({
    label: c.label,
    link: c.url_or_local === "local" ? null : c.url_or_local,
    saveable: c.url_or_local !== "local",
    saved: false,
    alreadyPresent: false,
    saving: false,
  }));
}

export class ChatStore {
  messages: MessageView[] = [];
  pending = false;
  config: UiConfig = { ...DEFAULT_CONFIG };
  formError: string | null = null;
  toast: Toast | null = null;
  kbResults: KbSearchResult[] = [];
  kbQuery = "";
  kbK = 5;
  kbSearched = false;

  private listeners: Array<() => void> = [];

  constructor(private api: ApiClient) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  setConfig(patch: Partial<UiConfig>): void {
    this.config = { ...this.config, ...patch };
    this.formError = validateConfig(this.config);
    this.notify();
  }

  async send(question: string): Promise<void> {
    const trimmed = question.trim();
    if (!trimmed || this.pending) {
      return;
    }
    const error = validateConfig(this.config);
    if (error) {
      this.formError = error;
      this.notify();
      return;
    }
    this.messages.push({
      role: "user", text: trimmed, citations: [], badges: null,
      totalMs: null, retryQuestion: null,
    });
    this.pending = true;
    this.notify();
    try {
      const response = await this.api.chat(trimmed, {
        k: this.config.k,
        j: this.config.j,
        use_kb: this.config.useKb,
        use_web: this.config.useWeb,
        metric: this.config.metric,
      });
      this.messages.push({
        role: "assistant",
        text: response.answer,
        citations: citationViews(response),
        badges: {
          webUsed: response.gate.web_search_performed,
          kbUpdated: response.gate.kb_documents_added > 0,
          degraded: response.gate.web_degraded,
        },
        totalMs: response.timings.total_ms ?? null,
        retryQuestion: null,
      });
    } catch (error) {
      if (error instanceof ApiError && error.status === 400) {
        this.formError = error.detail;
      } else {
        this.messages.push({
          role: "system",
          text: `request failed: ${error instanceof Error ? error.message : error}`,
          citations: [], badges: null, totalMs: null,
          retryQuestion: trimmed,
        });
      }
    } finally {
      this.pending = false;
      this.notify();
    }
  }

  async saveCitation(messageIndex: number, citationIndex: number): Promise<void> {
    const message = this.messages[messageIndex];
    const citation = message?.citations[citationIndex];
    if (!citation || !citation.saveable || !citation.link || citation.saving) {
      return;
    }
    citation.saving = true;
    this.notify();
    try {
      const result = await this.api.saveWeb(citation.link);
      citation.saved = true;
      citation.alreadyPresent = result.already_present;
      this.toast = result.already_present
        ? { text: `already saved (${citation.label})`, kind: "info" }
        : { text: `${result.chunk_count} chunks added from ${citation.label}`, kind: "info" };
    } catch (error) {
      this.toast = {
        text: `save failed: ${error instanceof Error ? error.message : error}`,
        kind: "error",
      };
    } finally {
      citation.saving = false;
      this.notify();
    }
  }

  async searchKb(query: string, k: number): Promise<void> {
    this.kbQuery = query;
    this.kbK = k;
    if (!query.trim()) {
      this.kbResults = [];
      this.kbSearched = false;
      this.notify();
      return;
    }
    try {
      const response = await this.api.kbSearch(query, k, this.config.metric);
      this.kbResults = response.results;
      this.kbSearched = true;
    } catch (error) {
      this.kbResults = [];
      this.kbSearched = true;
      this.toast = {
        text: `search failed: ${error instanceof Error ? error.message : error}`,
        kind: "error",
      };
    }
    this.notify();
  }

  dismissToast(): void {
    this.toast = null;
    this.notify();
  }
}
