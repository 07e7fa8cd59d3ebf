// Shared test scaffolding: fixture loading and a recording fetch stub.
//
// The stub implements just enough of the fetch contract for ApiClient
// (ok / status / text), so tests run without a Response global.

import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { vi } from 'vitest';

export function fixture<T = any>(name: string): T {
  // vitest runs with the package root as cwd
  const path = join(process.cwd(), 'tests', 'fixtures', name);
  return JSON.parse(readFileSync(path, 'utf8')) as T;
}

export interface RecordedCall {
  method: string;
  url: string;
  body: any;
}

export interface FakeReply {
  status?: number;
  body: unknown;
}

export type Responder = (call: RecordedCall) => FakeReply | Promise<FakeReply>;

export class FakeService {
  calls: RecordedCall[] = [];

  constructor(private respond: Responder) {}

  install(): void {
    vi.stubGlobal('fetch', async (url: unknown, init?: RequestInit) => {
      const call: RecordedCall = {
        method: init?.method ?? 'GET',
        url: String(url),
        body: init?.body ? JSON.parse(String(init.body)) : null,
      };
      this.calls.push(call);
      const { status = 200, body } = await this.respond(call);
      return {
        ok: status < 400,
        status,
        text: async () => JSON.stringify(body),
      };
    });
  }

  stateCalls(): RecordedCall[] {
    return this.calls.filter((c) => c.url.endsWith('/state'));
  }
}

/** Let queued promise chains and macrotasks drain. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export function mountPoint(): HTMLElement {
  const el = document.createElement('div');
  document.body.appendChild(el);
  return el;
}
