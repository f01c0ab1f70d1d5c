/**
 * Decrypt-flow state machine for one tab: enter-SP -> view-CAPTCHA ->
 * enter-SK -> done, plus terminal expiry.
 *
 * The machine owns no DOM; the page layer renders from its snapshot.
 * Credential handling rules live here so they are testable: the strong
 * key may only be submitted while the CAPTCHA is visible, and every
 * exit path wipes whatever the user typed.
 */

export type FlowState =
  | 'enter-sp'
  | 'view-captcha'
  | 'enter-sk'
  | 'done'
  | 'expired';

export interface UiSnapshot {
  state: FlowState;
  /** Whole seconds until the session dies (0 outside an active session). */
  secondsLeft: number;
  /** Wrong strong-key submissions so far in this session. */
  wrongAttempts: number;
  /** True only when typing the strong key is allowed. */
  skInputEnabled: boolean;
}

export class UiSession {
  private state: FlowState = 'enter-sp';
  private sessionId = '';
  private expiresAt = 0;
  private wrongAttempts = 0;

  constructor(private readonly now: () => number = () => Date.now()) {}

  /** Phase 1 succeeded: show the image and start the countdown. */
  beginCaptcha(sessionId: string, expiresInSeconds: number): void {
    if (this.state !== 'enter-sp') {
      throw new Error(`cannot begin captcha from ${this.state}`);
    }
    this.sessionId = sessionId;
    this.expiresAt = this.now() + expiresInSeconds * 1000;
    this.wrongAttempts = 0;
    this.state = 'view-captcha';
  }

  /** The user starts typing the strong key. */
  enterSk(): void {
    this.assertActive();
    this.state = 'enter-sk';
  }

  /** Phase 2 succeeded; the session is consumed server-side too. */
  complete(): void {
    this.assertActive();
    this.state = 'done';
    this.sessionId = '';
  }

  /** Phase 2 returned 401: count it and re-enable the key field. */
  wrongSk(): void {
    this.assertActive();
    this.wrongAttempts++;
    this.state = 'enter-sk';
  }

  /** Phase 2 returned 410, or the countdown hit zero. */
  expire(): void {
    this.state = 'expired';
    this.sessionId = '';
  }

  /** Back to the start; all session material is dropped. */
  reset(): void {
    this.state = 'enter-sp';
    this.sessionId = '';
    this.expiresAt = 0;
    this.wrongAttempts = 0;
  }

  /** The session id to present in phase 2. */
  get id(): string {
    return this.sessionId;
  }

  /** Advance the clock: flips to expired when time runs out. */
  tick(): UiSnapshot {
    if (
      (this.state === 'view-captcha' || this.state === 'enter-sk') &&
      this.now() >= this.expiresAt
    ) {
      this.expire();
    }
    return this.snapshot();
  }

  snapshot(): UiSnapshot {
    const active = this.state === 'view-captcha' || this.state === 'enter-sk';
    return {
      state: this.state,
      secondsLeft: active
        ? Math.max(0, Math.ceil((this.expiresAt - this.now()) / 1000))
        : 0,
      wrongAttempts: this.wrongAttempts,
      skInputEnabled: active,
    };
  }

  private assertActive(): void {
    if (this.state !== 'view-captcha' && this.state !== 'enter-sk') {
      throw new Error(`no active session in state ${this.state}`);
    }
  }
}
