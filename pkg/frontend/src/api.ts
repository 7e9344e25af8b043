import {
  ErrorEnvelopeSchema,
  ExplainResponse,
  ExplainResponseSchema,
  Metadata,
  MetadataSchema,
} from "./types";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly code: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export interface ExplainClient {
  metadata(): Promise<Metadata>;
  explain(instance: number[], seed?: number): Promise<ExplainResponse>;
}

type FetchFn = typeof fetch;

export class ApiClient implements ExplainClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchFn = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`, "unreachable", 0);
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const parsed = ErrorEnvelopeSchema.safeParse(body);
      if (parsed.success) {
        throw new ApiError(
          parsed.data.error.message,
          parsed.data.error.code,
          response.status,
        );
      }
      throw new ApiError(`HTTP ${response.status}`, "http_error", response.status);
    }
    return body;
  }

  async metadata(): Promise<Metadata> {
    return MetadataSchema.parse(await this.request("/api/metadata"));
  }

  async explain(instance: number[], seed = 0): Promise<ExplainResponse> {
    const body = await this.request("/api/explain", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ instance, seed }),
    });
    return ExplainResponseSchema.parse(body);
  }
}
