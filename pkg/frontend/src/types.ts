// Payload shapes of the /v1 JSON API.

export interface ChatOptions {
  k?: number;
  j?: number;
  use_kb?: boolean;
  use_web?: boolean;
  metric?: string;
  max_tokens?: number;
}

export interface Citation {
  label: string;
  url_or_local: string;
  rank: number;
}

export interface RetrievedChunk {
  chunk_id: string;
  score: number;
  provenance: "local" | "web";
  published_at: string;
}

export interface GateTrace {
  local_max_score: number | null;
  web_search_performed: boolean;
  web_calls: number;
  kb_documents_added: number;
  result_count: number;
  web_degraded: boolean;
  error: string | null;
}

export interface ChatResponse {
  answer: string;
  citations: Citation[];
  citations_text: string;
  retrieved: RetrievedChunk[];
  gate: GateTrace;
  timings: Record<string, number>;
  question_date: string;
  language: string;
}

export interface SaveWebResponse {
  id: string;
  chunk_count: number;
  already_present: boolean;
}

export interface KbSearchResult {
  chunk_id: string;
  score: number;
  rank: number;
  text: string;
  published_at: string;
}

export interface ServiceConfig {
  gate: {
    k: number;
    threshold: number;
    metric: string;
    use_kb: boolean;
    use_web: boolean;
    n_web: number;
    auto_update: boolean;
  };
  prompt: { j: number; template_language: string };
  index_size: number;
  index_documents: number;
  encoder: { dim: number; n_features: number; seed: number };
  version: string;
}
