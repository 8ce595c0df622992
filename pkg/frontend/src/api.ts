import type {
  ApiErrorBody,
  ClipInfo,
  ServerRound,
  SessionCreated,
  SessionHistory,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `request failed with status ${resp.status}`;
  try {
    const body = (await resp.json()) as ApiErrorBody;
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body: keep the generic message
  }
  return new ApiError(resp.status, code, message);
}

/** Thin typed client over the four session endpoints. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = globalThis.fetch?.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  async listClips(): Promise<ClipInfo[]> {
    const body = await this.request<{ clips: ClipInfo[] }>("/clips");
    return body.clips;
  }

  createSession(clipId: string): Promise<SessionCreated> {
    return this.request<SessionCreated>("/sessions", {
      method: "POST",
      body: JSON.stringify({ clip_id: clipId }),
    });
  }

  ask(sessionId: string, text: string): Promise<ServerRound> {
    return this.request<ServerRound>(
      `/sessions/${encodeURIComponent(sessionId)}/questions`,
      { method: "POST", body: JSON.stringify({ text }) },
    );
  }

  getSession(sessionId: string): Promise<SessionHistory> {
    return this.request<SessionHistory>(
      `/sessions/${encodeURIComponent(sessionId)}`,
    );
  }
}
