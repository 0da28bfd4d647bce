// Typed client for the feedback service. Every number the console displays
// comes out of one of these responses; the UI layers never invent state.

export interface GraphEdge {
  u: number;
  v: number;
  label: string;
  u_label: string;
  v_label: string;
}

export interface FeedbackItem {
  pattern_id: number;
  rendering: string;
  kind: string;
  support: number;
  edges: GraphEdge[];
}

export interface FeedbackRequest {
  session_id: string;
  status: string;
  iteration?: number;
  items: FeedbackItem[];
  allowed_ratings?: number[];
  rating_names?: Record<string, string>;
}

export interface IterationSummary {
  iteration: number;
  theta_delta: number;
  status: string;
  feedback_count: number;
  weighted_f_score?: number;
  accuracy?: number;
}

export interface MetricsResponse {
  session_id: string;
  status: string;
  iteration: number;
  feedback_count: number;
  history: IterationSummary[];
}

export interface Recommendation {
  pattern_id: number;
  rendering: string;
  predicted_class: number;
  probability: number;
  edges: GraphEdge[];
}

export interface RecommendationsResponse {
  session_id: string;
  interesting_class: number;
  items: Recommendation[];
}

export interface SessionConfig {
  class_count?: number;
  k?: number;
  batch_fraction?: number;
  min_iterations?: number;
  stop_threshold?: number;
  strategy?: string;
  seed?: number;
  lam?: number;
  dim?: number;
  interesting_class?: number;
  oracle?: { variant: string; feature_tokens?: string[]; threshold?: number } | null;
  rating_names?: Record<string, string>;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`service responded ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ApiClient {
  constructor(private base: string, private fetcher: typeof fetch = fetch) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetcher(`${this.base}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, payload && (payload as any).detail ? (payload as any).detail : payload);
    }
    return payload as T;
  }

  uploadDataset(name: string, kind: string, content: string, role = "dataset") {
    return this.request<{ name: string }>("POST", "/datasets", { name, kind, role, content });
  }

  listDatasets() {
    return this.request<{ name: string; kind: string; role: string }[]>("GET", "/datasets");
  }

  createSession(dataset: string, options: { min_support?: number; patterns?: string; config?: SessionConfig }) {
    return this.request<{ session_id: string; patterns: number; status: string }>("POST", "/sessions", {
      dataset,
      min_support: options.min_support ?? null,
      patterns: options.patterns ?? null,
      config: options.config ?? {},
    });
  }

  nextFeedback(sessionId: string) {
    return this.request<FeedbackRequest>("GET", `/sessions/${sessionId}/feedback`);
  }

  submitRatings(sessionId: string, ratings: { pattern_id: number; rating: number }[]) {
    return this.request<IterationSummary>("POST", `/sessions/${sessionId}/ratings`, { ratings });
  }

  metrics(sessionId: string) {
    return this.request<MetricsResponse>("GET", `/sessions/${sessionId}/metrics`);
  }

  recommendations(sessionId: string, topN: number) {
    return this.request<RecommendationsResponse>("GET", `/sessions/${sessionId}/recommendations?top_n=${topN}`);
  }
}
