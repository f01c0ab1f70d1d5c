import { describe, expect, it, vi } from 'vitest';

import { ApiError, VaultApi } from '../src/api';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

describe('VaultApi', () => {
  it('posts encrypt credentials in the body, never the URL', async () => {
    const fetchFn = vi.fn(async () => new Response(new Blob([new Uint8Array([1])])));
    const api = new VaultApi('http://127.0.0.1:8077', fetchFn as typeof fetch);
    await api.encrypt(new Blob([new Uint8Array([42])]), 'hunter2');
    const [url, init] = fetchFn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe('http://127.0.0.1:8077/v1/encrypt');
    expect(url).not.toContain('hunter2');
    const form = init.body as FormData;
    expect(form.get('sp')).toBe('hunter2');
    expect(form.get('payload')).toBeInstanceOf(Blob);
  });

  it('maps phase1 snake_case to the typed response', async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(200, {
        session_id: 'abc',
        image_pgm_base64: 'UDU=',
        expires_in: 600,
      }));
    const api = new VaultApi('', fetchFn as typeof fetch);
    const res = await api.decryptPhase1(new Blob([]), 'pw');
    expect(res.sessionId).toBe('abc');
    expect(res.imagePgmBase64).toBe('UDU=');
    expect(res.expiresIn).toBe(600);
  });

  it('sends phase2 as JSON with session id and key in the body', async () => {
    const fetchFn = vi.fn(async () => new Response(new Blob([new Uint8Array([7])])));
    const api = new VaultApi('', fetchFn as typeof fetch);
    await api.decryptPhase2('sid', 'KM4TX');
    const [url, init] = fetchFn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe('/v1/decrypt/phase2');
    expect(url).not.toContain('KM4TX');
    expect(JSON.parse(init.body as string)).toEqual({
      session_id: 'sid',
      sk: 'KM4TX',
    });
  });

  it('raises ApiError with the status for 401 and 410', async () => {
    for (const status of [401, 410]) {
      const fetchFn = vi.fn(async () => jsonResponse(status, { detail: 'nope' }));
      const api = new VaultApi('', fetchFn as typeof fetch);
      const err = await api.decryptPhase2('sid', 'SK').catch((e) => e);
      expect(err).toBeInstanceOf(ApiError);
      expect(err.status).toBe(status);
      expect(err.message).toBe('nope');
    }
  });

  it('falls back to a generic message for non-JSON errors', async () => {
    const fetchFn = vi.fn(async () => new Response('boom', { status: 500 }));
    const api = new VaultApi('', fetchFn as typeof fetch);
    const err = await api.encrypt(new Blob([]), 'pw').catch((e) => e);
    expect(err.message).toBe('request failed (500)');
  });

  it('health check swallows network failures', async () => {
    const fetchFn = vi.fn(async () => {
      throw new Error('ECONNREFUSED');
    });
    const api = new VaultApi('', fetchFn as typeof fetch);
    expect(await api.healthy()).toBe(false);
  });
});
