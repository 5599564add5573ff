import type {
  ExplainPayload,
  ExplainRequest,
  NeighborhoodPayload,
  SessionSummary,
  WhatifPayload,
} from "./types";

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export interface CallLogEntry {
  method: string;
  path: string;
  body?: unknown;
}

type FetchLike = typeof fetch;

/**
 * Thin typed client for the explanation service.  Every call is appended to
 * `log`, so any interaction sequence can be replayed from it.
 */
export class ApiClient {
  readonly log: CallLogEntry[] = [];

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.log.push(body === undefined ? { method, path } : { method, path, body });
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const parsed = (await resp.json()) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  createSession(spec: Record<string, unknown>): Promise<SessionSummary> {
    return this.request("POST", "/api/session", spec);
  }

  belief(sid: string, node: number): Promise<{ node: number; belief: number[] }> {
    return this.request("GET", `/api/${sid}/belief?node=${node}`);
  }

  explain(sid: string, req: ExplainRequest): Promise<ExplainPayload> {
    return this.request("POST", `/api/${sid}/explain`, req);
  }

  whatif(
    sid: string,
    req: { target: number; nodes: number[]; edges: [number, number][] },
  ): Promise<WhatifPayload> {
    return this.request("POST", `/api/${sid}/whatif`, req);
  }

  neighborhood(sid: string, node: number, radius: number): Promise<NeighborhoodPayload> {
    return this.request("GET", `/api/${sid}/neighborhood?node=${node}&radius=${radius}`);
  }
}
