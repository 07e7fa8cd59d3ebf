import type {
  InterfaceResponse,
  Selection,
  TranslateResponse,
  UploadResponse,
  ViewState,
} from './types';

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const text = await resp.text();
  if (!resp.ok) {
    let detail = text;
    try {
      detail = JSON.parse(text).detail ?? text;
    } catch {
      // detail stays as raw body
    }
    throw new ApiError(resp.status, String(detail));
  }
  return JSON.parse(text) as T;
}

function post<T>(url: string, body: unknown): Promise<T> {
  return request<T>(url, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  });
}

/**
 * Thin client over the service API.
 *
 * State updates are serialized: a second gesture fired while one call is
 * in flight waits for the first to settle, so the server applies deltas
 * in gesture order and the client never forks from it.
 */
export class ApiClient {
  private stateQueue: Promise<unknown> = Promise.resolve();

  constructor(public base: string = '') {}

  uploadDataset(name: string, csv: string): Promise<UploadResponse> {
    return post(`${this.base}/datasets`, { name, csv });
  }

  translate(questions: string[]): Promise<TranslateResponse> {
    return post(`${this.base}/translate`, { questions });
  }

  createInterface(templates: string[]): Promise<InterfaceResponse> {
    return post(`${this.base}/interfaces`, { templates });
  }

  getInterface(interfaceId: string): Promise<InterfaceResponse> {
    return request(`${this.base}/interfaces/${interfaceId}`);
  }

  updateState(
    interfaceId: string,
    viewId: string,
    delta: Record<string, Selection>,
  ): Promise<ViewState> {
    const run = this.stateQueue.then(() =>
      post<ViewState>(`${this.base}/interfaces/${interfaceId}/state`, {
        view_id: viewId,
        delta,
      }),
    );
    this.stateQueue = run.then(
      () => undefined,
      () => undefined,
    );
    return run;
  }
}
