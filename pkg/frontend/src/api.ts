import type {
  AuditSummary,
  Issue,
  ProgressPayload,
  RankingPage,
  Verdict,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin typed client over the review service. All reads are plain GETs so the
 * UI never re-derives numbers the service already computed. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    if (!resp.ok) {
      throw new ApiError(resp.status, `GET ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  listAudits(): Promise<AuditSummary[]> {
    return this.getJson<AuditSummary[]>("/audits");
  }

  fetchRanking(
    audit: string,
    issue: Issue,
    offset: number,
    limit: number,
  ): Promise<RankingPage> {
    const params = new URLSearchParams({
      offset: String(offset),
      limit: String(limit),
    });
    return this.getJson<RankingPage>(
      `/audits/${encodeURIComponent(audit)}/ranking/${issue}?${params}`,
    );
  }

  fetchProgress(audit: string): Promise<ProgressPayload> {
    return this.getJson<ProgressPayload>(
      `/audits/${encodeURIComponent(audit)}/progress`,
    );
  }

  async postVerdict(verdict: Verdict): Promise<{ ok: boolean; seq: number | null }> {
    const resp = await this.fetchFn(this.baseUrl + "/verdicts", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(verdict),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, `POST /verdicts -> ${resp.status}`);
    }
    return (await resp.json()) as { ok: boolean; seq: number | null };
  }

  audioUrl(path: string): string {
    return this.baseUrl + path;
  }
}
