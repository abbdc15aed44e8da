/**
 * Thin typed client for the triagebot service.
 *
 * The base URL comes from (in order) the `data-api-base` attribute on the
 * script tag, an `?api=` query parameter, or same-origin.
 */

import type { SessionStart, SessionView, TableDoc, TurnResponse } from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export function resolveBaseUrl(win: Window = window): string {
  const params = new URLSearchParams(win.location.search);
  const fromQuery = params.get('api');
  if (fromQuery) return fromQuery.replace(/\/$/, '');
  const script = win.document.querySelector<HTMLScriptElement>('script[data-api-base]');
  const fromAttr = script?.dataset.apiBase;
  if (fromAttr) return fromAttr.replace(/\/$/, '');
  return '';
}

export class TriagebotClient {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = `HTTP ${response.status}`;
      let message = response.statusText;
      try {
        const parsed = await response.json();
        code = parsed.code ?? code;
        message = parsed.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  startSession(): Promise<SessionStart> {
    return this.request<SessionStart>('POST', '/sessions');
  }

  sendMessage(sessionId: string, text: string): Promise<TurnResponse> {
    return this.request<TurnResponse>('POST', `/sessions/${sessionId}/messages`, { text });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>('GET', `/sessions/${sessionId}`);
  }

  getActiveTable(): Promise<TableDoc> {
    return this.request<TableDoc>('GET', '/tables/active');
  }
}
