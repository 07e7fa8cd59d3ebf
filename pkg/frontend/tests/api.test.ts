import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiError } from '../src/api';
import { FakeService, fixture } from './helpers';

afterEach(() => vi.unstubAllGlobals());

describe('ApiClient', () => {
  it('prefixes every path with the configured base', async () => {
    const svc = new FakeService(() => ({ body: fixture('covid_upload.json') }));
    svc.install();
    await new ApiClient('http://box:9000').uploadDataset('covid', 'a,b\n');
    expect(svc.calls[0]?.url).toBe('http://box:9000/datasets');
  });

  it('surfaces the detail field of an error body', async () => {
    const svc = new FakeService(() => ({
      status: 400,
      body: { detail: 'csv has a ragged row' },
    }));
    svc.install();
    const err = await new ApiClient('')
      .uploadDataset('covid', 'x')
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(400);
    expect((err as ApiError).detail).toBe('csv has a ragged row');
  });

  it('falls back to the raw body when the error is not json', async () => {
    vi.stubGlobal('fetch', async () => ({
      ok: false,
      status: 502,
      text: async () => 'bad gateway',
    }));
    const err = await new ApiClient('')
      .translate(['q'])
      .then(() => null, (e: unknown) => e);
    expect((err as ApiError).detail).toContain('bad gateway');
  });

  it('keeps accepting state calls after one fails', async () => {
    let first = true;
    const svc = new FakeService(() => {
      if (first) {
        first = false;
        return { status: 500, body: { detail: 'boom' } };
      }
      return { body: fixture('covid_state_texas.json') };
    });
    svc.install();
    const api = new ApiClient('');
    await expect(api.updateState('interface_0', 'view_1', {})).rejects.toThrow('boom');
    const state = await api.updateState('interface_0', 'view_1', {});
    expect(state.sql).toContain('Texas');
  });
});
