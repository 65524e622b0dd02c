// View-state machine for the foraging loop. Phases follow
// board_entry -> results -> recommended -> recommended...
//
// All displayed data derives from the last server session view; the only
// client-side persistence is the session id, so a reload resumes where the
// forager left off. At most one mutation is in flight at a time: a gesture
// arriving while busy is dropped, which is what debounces rapid clicks.

import { ApiError, ForageApi, SessionView } from './api.js';

export type Phase = 'board_entry' | 'results' | 'recommended';

const SESSION_KEY = 'foragerec.session';

export interface SessionStorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class AppState {
  session: SessionView | null = null;
  busy = false;
  toast: string | null = null;
  error: string | null = null;

  private listeners: Array<() => void> = [];
  private inFlight: Promise<void> | null = null;

  constructor(
    private readonly api: ForageApi,
    private readonly storage: SessionStorageLike,
    private readonly user: string = 'explorer',
  ) {}

  get phase(): Phase {
    return this.session ? this.session.phase : 'board_entry';
  }

  /** Cues already consumed this session; drives the active-chip styling. */
  get activeCues(): Record<string, number> {
    return this.session ? this.session.diet.consumed_cues : {};
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  /** Resolves when no mutation is in flight. */
  waitForIdle(): Promise<void> {
    return this.inFlight ?? Promise.resolve();
  }

  enterBoard(name: string): Promise<void> {
    const query = name.trim();
    if (!query) {
      return Promise.resolve();
    }
    return this.mutate(async () => {
      this.session = await this.api.createSession(this.user, query);
      this.toast = null;
      this.storage.setItem(SESSION_KEY, this.session.id);
    });
  }

  selectCue(label: string): Promise<void> {
    const session = this.session;
    if (!session) {
      return Promise.resolve();
    }
    return this.mutate(async () => {
      const updated = await this.api.selectCue(session.id, label);
      this.session = updated;
      // A warning means the server kept the patch; surface it as a toast.
      this.toast = updated.warning;
    });
  }

  /** Reopen the stored session, if any; a vanished session is not an error. */
  async resume(): Promise<boolean> {
    const sessionId = this.storage.getItem(SESSION_KEY);
    if (!sessionId) {
      return false;
    }
    try {
      this.session = await this.api.getSession(sessionId);
      this.emit();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.storage.removeItem(SESSION_KEY);
        return false;
      }
      this.error = describe(err);
      this.emit();
      return false;
    }
  }

  /** Back to board entry; used by the no-matches retry affordance. */
  reset(): void {
    this.session = null;
    this.toast = null;
    this.error = null;
    this.storage.removeItem(SESSION_KEY);
    this.emit();
  }

  private mutate(task: () => Promise<void>): Promise<void> {
    if (this.busy) {
      return Promise.resolve();
    }
    this.busy = true;
    this.error = null;
    this.emit();
    const done = task()
      .catch((err) => {
        this.error = describe(err);
      })
      .finally(() => {
        this.busy = false;
        this.inFlight = null;
        this.emit();
      });
    this.inFlight = done;
    return done;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `server error ${err.status}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}
