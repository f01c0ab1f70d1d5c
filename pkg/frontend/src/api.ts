/**
 * Typed client for the local vault service's /v1 JSON API.
 *
 * Credentials travel only in request bodies (multipart form or JSON),
 * never in URLs, so they cannot leak via history, logs, or referrers.
 */

export interface Phase1Response {
  sessionId: string;
  imagePgmBase64: string;
  expiresIn: number;
}

/** HTTP failure with the status code preserved for flow decisions. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

export class VaultApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  /** Encrypt a payload under a short password; resolves to the container. */
  async encrypt(payload: Blob, sp: string): Promise<Blob> {
    const form = new FormData();
    form.append('payload', payload, 'payload');
    form.append('sp', sp);
    const res = await this.fetchFn(`${this.baseUrl}/v1/encrypt`, {
      method: 'POST',
      body: form,
    });
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    return res.blob();
  }

  /** Phase 1: container + password in, challenge image + session out. */
  async decryptPhase1(container: Blob, sp: string): Promise<Phase1Response> {
    const form = new FormData();
    form.append('container', container, 'container');
    form.append('sp', sp);
    const res = await this.fetchFn(`${this.baseUrl}/v1/decrypt/phase1`, {
      method: 'POST',
      body: form,
    });
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    const body = await res.json();
    return {
      sessionId: body.session_id,
      imagePgmBase64: body.image_pgm_base64,
      expiresIn: body.expires_in,
    };
  }

  /** Phase 2: typed strong key in, plaintext out (or 401/410). */
  async decryptPhase2(sessionId: string, sk: string): Promise<Blob> {
    const res = await this.fetchFn(`${this.baseUrl}/v1/decrypt/phase2`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ session_id: sessionId, sk }),
    });
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    return res.blob();
  }

  /** True when the local service answers its health check. */
  async healthy(): Promise<boolean> {
    try {
      const res = await this.fetchFn(`${this.baseUrl}/v1/health`);
      return res.ok;
    } catch {
      return false;
    }
  }
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (typeof body.detail === 'string') return body.detail;
  } catch {
    /* non-JSON error body */
  }
  return `request failed (${res.status})`;
}
