// Controllers behind the three screens. They own the rules the UI must
// enforce (submit only when every card is rated, never submit twice) so the
// DOM layer stays a dumb projection and tests can drive the whole flow
// headlessly.

import {
  ApiClient,
  ApiError,
  FeedbackRequest,
  IterationSummary,
  MetricsResponse,
  RecommendationsResponse,
  SessionConfig,
} from "./api.js";

export class RatingBatch {
  private ratings = new Map<number, number>();
  private _submitted = false;

  constructor(public readonly request: FeedbackRequest) {}

  get items() {
    return this.request.items;
  }

  get allowedRatings(): number[] {
    return this.request.allowed_ratings ?? [];
  }

  ratingName(rating: number): string {
    const names = this.request.rating_names ?? {};
    return names[String(rating)] ?? String(rating);
  }

  ratingOf(patternId: number): number | undefined {
    return this.ratings.get(patternId);
  }

  rate(patternId: number, rating: number): void {
    if (this._submitted) {
      throw new Error("batch already submitted");
    }
    if (!this.items.some((item) => item.pattern_id === patternId)) {
      throw new Error(`pattern ${patternId} is not in this batch`);
    }
    if (!this.allowedRatings.includes(rating)) {
      throw new Error(`rating ${rating} is not allowed`);
    }
    this.ratings.set(patternId, rating);
  }

  get ratedCount(): number {
    return this.ratings.size;
  }

  get submitted(): boolean {
    return this._submitted;
  }

  // one rating per card before submission unlocks
  canSubmit(): boolean {
    return !this._submitted && this.ratings.size === this.items.length && this.items.length > 0;
  }

  payload(): { pattern_id: number; rating: number }[] {
    return this.items.map((item) => ({
      pattern_id: item.pattern_id,
      rating: this.ratings.get(item.pattern_id)!,
    }));
  }

  markSubmitted(): void {
    this._submitted = true;
  }
}

export type Screen = "rate" | "progress" | "recommendations";

export class SessionFlow {
  sessionId: string | null = null;
  batch: RatingBatch | null = null;
  lastSummary: IterationSummary | null = null;
  terminalStatus: string | null = null;

  constructor(private api: ApiClient) {}

  async create(dataset: string, options: { min_support?: number; patterns?: string; config?: SessionConfig }) {
    const created = await this.api.createSession(dataset, options);
    this.sessionId = created.session_id;
    this.batch = null;
    this.lastSummary = null;
    this.terminalStatus = null;
    return created;
  }

  attach(sessionId: string) {
    this.sessionId = sessionId;
    this.batch = null;
    this.lastSummary = null;
    this.terminalStatus = null;
  }

  private get id(): string {
    if (!this.sessionId) {
      throw new Error("no session yet");
    }
    return this.sessionId;
  }

  // pulls the pending request; a terminal session yields null and records why
  async loadBatch(): Promise<RatingBatch | null> {
    const request = await this.api.nextFeedback(this.id);
    if (request.status !== "awaiting_feedback") {
      this.terminalStatus = request.status;
      this.batch = null;
      return null;
    }
    this.batch = new RatingBatch(request);
    return this.batch;
  }

  // client-side double-submit guard; the service would also answer 409
  async submitBatch(): Promise<IterationSummary> {
    const batch = this.batch;
    if (!batch) {
      throw new Error("no batch loaded");
    }
    if (batch.submitted) {
      throw new Error("batch already submitted");
    }
    if (!batch.canSubmit()) {
      throw new Error(`${batch.ratedCount} of ${batch.items.length} cards rated`);
    }
    const summary = await this.api.submitRatings(this.id, batch.payload());
    batch.markSubmitted();
    this.lastSummary = summary;
    return summary;
  }

  metrics(): Promise<MetricsResponse> {
    return this.api.metrics(this.id);
  }

  recommendations(topN: number): Promise<RecommendationsResponse> {
    return this.api.recommendations(this.id, topN);
  }
}

// Exponential backoff for the progress screen's polling; reset on success.
export class Backoff {
  private failures = 0;

  constructor(private baseMs = 1000, private maxMs = 30000) {}

  get delay(): number {
    return Math.min(this.maxMs, this.baseMs * 2 ** this.failures);
  }

  succeed(): void {
    this.failures = 0;
  }

  fail(): void {
    this.failures += 1;
  }

  get disconnected(): boolean {
    return this.failures > 0;
  }
}

export function isValidationError(err: unknown): err is ApiError {
  return err instanceof ApiError && err.status === 400;
}

export function isConflict(err: unknown): err is ApiError {
  return err instanceof ApiError && err.status === 409;
}
