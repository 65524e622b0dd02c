// Bootstrap: build the shell, wire gestures, connect state to rendering.
// Event listeners sit on the static containers (delegation), so grid
// re-renders never need re-wiring. Each gesture issues at most one request;
// the state machine drops gestures that arrive while one is in flight.

import { ForageApi } from './api.js';
import { buildShell, highlightCue, update } from './render.js';
import { AppState, SessionStorageLike } from './state.js';

export interface AppOptions {
  baseUrl: string;
  storage?: SessionStorageLike;
  user?: string;
}

export interface App {
  state: AppState;
  root: HTMLElement;
  /** Resolves once any stored session has been reopened (true if it was). */
  ready: Promise<boolean>;
}

export function init(root: HTMLElement, options: AppOptions): App {
  const api = new ForageApi(options.baseUrl);
  const storage = options.storage ?? window.localStorage;
  const state = new AppState(api, storage, options.user);

  buildShell(root);
  state.subscribe(() => update(state, root));
  update(state, root);

  const form = root.querySelector('#board-form') as HTMLFormElement;
  const input = root.querySelector('#board-input') as HTMLInputElement;
  const grid = root.querySelector('#grid') as HTMLElement;
  const retry = root.querySelector('#retry') as HTMLButtonElement;

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void state.enterBoard(input.value);
  });

  retry.addEventListener('click', () => {
    state.reset();
    input.value = '';
    input.focus();
  });

  grid.addEventListener('click', (event) => {
    const chip = (event.target as HTMLElement).closest('[data-cue]');
    if (chip) {
      void state.selectCue(chip.getAttribute('data-cue')!);
    }
  });

  // Hovering a chip highlights every card carrying that cue.
  grid.addEventListener('mouseover', (event) => {
    const chip = (event.target as HTMLElement).closest('[data-cue]');
    if (chip) {
      highlightCue(grid, chip.getAttribute('data-cue'));
    }
  });
  grid.addEventListener('mouseout', (event) => {
    if ((event.target as HTMLElement).closest('[data-cue]')) {
      highlightCue(grid, null);
    }
  });

  const ready = state.resume();
  return { state, root, ready };
}

// Browser entry point; tests call init() themselves. The API base defaults
// to the page origin and can be overridden with ?api=http://host:port.
declare global {
  interface Window {
    foragerecApp?: App;
  }
}

if (typeof document !== 'undefined') {
  const mount = document.getElementById('app');
  if (mount) {
    const params = new URLSearchParams(window.location.search);
    const baseUrl = params.get('api') ?? '';
    window.foragerecApp = init(mount, { baseUrl });
  }
}
