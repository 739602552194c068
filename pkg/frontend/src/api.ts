// Thin typed client for the tosqa service API. The extension talks only to
// this API and the current page's DOM; no user-identifying data leaves the
// browser (requests carry the platform slug, the question text, and any
// submitted URL, nothing else).

export interface PlatformStatus {
  platform_id: string;
  status: "unindexed" | "queued" | "crawling" | "indexed" | "failed";
  last_crawled_at: string | null;
  source_urls: string[];
  sentence_count: number;
  failure_reason?: string | null;
}

export interface QueryAnswer {
  platform_id: string;
  sentence_id: number;
  answer: string;
  similarity: number;
  relevance: number;
  accepted: boolean;
  fallback?: string;
  metrics: {
    latency_ms: number;
    timing_ms: number;
    cpu_percent: number;
    ram_percent: number;
    sampled_at: string;
  };
}

export interface SubmitResult {
  platform_id: string;
  entry_id: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "unknown";
  let message = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiError(resp.status, code, message);
}

export class TosQaClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  async getPlatform(platformId: string): Promise<PlatformStatus> {
    const resp = await fetch(this.url(`/api/platforms/${platformId}`));
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  async query(platformId: string, question: string, tau?: number): Promise<QueryAnswer> {
    const resp = await fetch(this.url("/api/query"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ platform_id: platformId, question, tau }),
    });
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  async submitCrawl(url: string, displayName?: string): Promise<SubmitResult> {
    const resp = await fetch(this.url("/api/crawl"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ url, display_name: displayName }),
    });
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }
}
