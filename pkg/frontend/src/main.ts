/**
 * Page wiring: connects the DOM to the API client and the decrypt-flow
 * state machine.  No framework and no external assets, so the page
 * works against the loopback service on an air-gapped machine.
 */

import { ApiError, VaultApi } from './api.js';
import { base64ToBytes, parsePgm, upscaleRgba } from './pgm.js';
import { UiSession } from './session.js';

const SCALE = 8;
const api = new VaultApi();
const session = new UiSession();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(id: string, message: string, isError = false): void {
  const node = el<HTMLElement>(id);
  node.textContent = message;
  node.classList.toggle('error', isError);
}

function offerDownload(blob: Blob, filename: string): void {
  const url = URL.createObjectURL(blob);
  const a = document.createElement('a');
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}

/* ---------- encrypt page ---------- */

function wireEncrypt(): void {
  const file = el<HTMLInputElement>('enc-file');
  const sp = el<HTMLInputElement>('enc-sp');
  const sp2 = el<HTMLInputElement>('enc-sp2');
  const meter = el<HTMLElement>('enc-meter');
  const button = el<HTMLButtonElement>('enc-go');

  sp.addEventListener('input', () => {
    const n = sp.value.length;
    meter.textContent = n === 0 ? '' : n < 8 ? 'short' : n < 16 ? 'fair' : 'long';
  });

  button.addEventListener('click', async () => {
    if (!file.files?.length) {
      setStatus('enc-status', 'choose a file first', true);
      return;
    }
    if (sp.value !== sp2.value) {
      setStatus('enc-status', 'passwords do not match', true);
      return;
    }
    button.disabled = true;
    setStatus('enc-status', 'encrypting (this runs the full lattice)...');
    try {
      const container = await api.encrypt(file.files[0], sp.value);
      offerDownload(container, `${file.files[0].name}.pcv`);
      setStatus('enc-status', 'container downloaded');
    } catch (err) {
      setStatus('enc-status', friendly(err), true);
    } finally {
      sp.value = '';
      sp2.value = '';
      button.disabled = false;
    }
  });
}

/* ---------- decrypt page ---------- */

function wireDecrypt(): void {
  const file = el<HTMLInputElement>('dec-file');
  const sp = el<HTMLInputElement>('dec-sp');
  const phase1 = el<HTMLButtonElement>('dec-phase1');
  const canvas = el<HTMLCanvasElement>('dec-canvas');
  const sk = el<HTMLInputElement>('dec-sk');
  const phase2 = el<HTMLButtonElement>('dec-phase2');

  window.setInterval(() => render(), 1000);

  function render(): void {
    const snap = session.tick();
    sk.disabled = !snap.skInputEnabled;
    phase2.disabled = !snap.skInputEnabled;
    el<HTMLElement>('dec-countdown').textContent =
      snap.secondsLeft > 0 ? `session expires in ${snap.secondsLeft}s` : '';
    el<HTMLElement>('dec-attempts').textContent =
      snap.wrongAttempts > 0 ? `wrong keys so far: ${snap.wrongAttempts}` : '';
    if (snap.state === 'expired') {
      sk.value = '';
      setStatus('dec-status', 'session expired; start over with phase 1', true);
    }
  }

  phase1.addEventListener('click', async () => {
    if (!file.files?.length) {
      setStatus('dec-status', 'choose a container first', true);
      return;
    }
    session.reset();
    setStatus('dec-status', 'running the lattice backwards...');
    try {
      const res = await api.decryptPhase1(file.files[0], sp.value);
      const map = parsePgm(base64ToBytes(res.imagePgmBase64));
      canvas.width = map.width * SCALE;
      canvas.height = map.height * SCALE;
      const ctx = canvas.getContext('2d');
      if (ctx) {
        ctx.imageSmoothingEnabled = false;
        ctx.putImageData(
          new ImageData(upscaleRgba(map, SCALE), canvas.width, canvas.height),
          0,
          0,
        );
      }
      session.beginCaptcha(res.sessionId, res.expiresIn);
      setStatus('dec-status',
        'read the characters from the image and type them below ' +
        '(a wrong password shows meaningless blobs: restart with another one)');
    } catch (err) {
      setStatus('dec-status', friendly(err), true);
    } finally {
      sp.value = '';
    }
    render();
  });

  phase2.addEventListener('click', async () => {
    session.enterSk();
    try {
      const payload = await api.decryptPhase2(session.id, sk.value);
      session.complete();
      offerDownload(payload, 'decrypted.bin');
      setStatus('dec-status', 'decrypted file downloaded');
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        session.wrongSk();
        setStatus('dec-status', 'wrong key: read the image again', true);
      } else if (err instanceof ApiError && err.status === 410) {
        session.expire();
        setStatus('dec-status', 'session gone; start over with phase 1', true);
      } else {
        setStatus('dec-status', friendly(err), true);
      }
    } finally {
      sk.value = '';
    }
    render();
  });
}

function friendly(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return 'service unreachable: is the local vault service running?';
}

async function init(): Promise<void> {
  wireEncrypt();
  wireDecrypt();
  if (!(await api.healthy())) {
    setStatus('enc-status', 'service unreachable: start it and reload', true);
  }
}

void init();
