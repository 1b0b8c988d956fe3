// Thin typed client for the /v1 API. All UI traffic flows through here;
// the fetch implementation is injectable so tests can observe every call.

import type {
  ChatOptions,
  ChatResponse,
  KbSearchResult,
  SaveWebResponse,
  ServiceConfig,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText || "request failed";
  try {
    const body = await resp.json();
    if (body && body.detail) {
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return resp.json() as Promise<T>;
  }

  chat(question: string, options: ChatOptions, questionDate?: string): Promise<ChatResponse> {
    const body: Record<string, unknown> = { question, options };
    if (questionDate) {
      body.question_date = questionDate;
    }
    return this.request<ChatResponse>("/v1/chat", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  saveWeb(url: string): Promise<SaveWebResponse> {
    return this.request<SaveWebResponse>("/v1/kb/save_web", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ url }),
    });
  }

  kbSearch(query: string, k: number, metric: string): Promise<{ results: KbSearchResult[] }> {
    const params = new URLSearchParams({ q: query, k: String(k), metric });
    return this.request<{ results: KbSearchResult[] }>(`/v1/kb/search?${params}`);
  }

  config(): Promise<ServiceConfig> {
    return this.request<ServiceConfig>("/v1/config");
  }

  health(): Promise<{ status: string }> {
    return this.request<{ status: string }>("/v1/health");
  }
}
