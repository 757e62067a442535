// Typed client for the dialog session service (/v1 JSON API).

export type Bindings = Record<string, string>;

export interface Completion {
  action: string;
  bindings: Bindings;
}

export interface CreateSessionResponse {
  id: string;
  askable: string[];
  history: Bindings[];
}

export interface SessionStateResponse {
  askable: string[];
  history: Bindings[];
  completed: boolean;
  completion: Completion | null;
}

export interface UtteranceResponse {
  outcome: 'accepted' | 'completed' | 'rejected';
  reason?: string;
  askable?: string[];
  residual_spec?: string | null;
  completion?: Completion;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: { error?: string; position?: string | null },
  ) {
    super(body.error ?? `HTTP ${status}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body);
  }
  return body as T;
}

export class DialogApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, '')}${path}`;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return fetch(this.url(path), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: payload === undefined ? '{}' : JSON.stringify(payload),
    }).then((r) => asJson<T>(r));
  }

  createSession(spec: string, domains: string): Promise<CreateSessionResponse> {
    return this.post('/v1/sessions', { spec, domains });
  }

  getSession(id: string): Promise<SessionStateResponse> {
    return fetch(this.url(`/v1/sessions/${id}`)).then((r) =>
      asJson<SessionStateResponse>(r),
    );
  }

  sendUtterance(id: string, bindings: Bindings): Promise<UtteranceResponse> {
    return this.post(`/v1/sessions/${id}/utterance`, { bindings });
  }

  undo(id: string): Promise<SessionStateResponse> {
    return this.post(`/v1/sessions/${id}/undo`);
  }

  redo(id: string): Promise<SessionStateResponse> {
    return this.post(`/v1/sessions/${id}/redo`);
  }
}
