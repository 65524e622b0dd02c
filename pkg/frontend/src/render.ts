// DOM rendering. buildShell() creates the static skeleton once; update()
// refreshes only the dynamic regions, so the board input never loses state.
// The grid mirrors the server patch order exactly: no client-side sorting,
// insertion, or dropping.

import { ItemCard } from './api.js';
import { AppState } from './state.js';

export function buildShell(root: HTMLElement): void {
  root.innerHTML = `
    <header class="top">
      <h1>foragerec</h1>
      <form id="board-form">
        <input id="board-input" type="text" placeholder="Enter a board name"
               autocomplete="off" aria-label="Board name" />
        <button id="board-submit" type="submit">Forage</button>
      </form>
      <p id="status" data-role="status"></p>
    </header>
    <div id="toast" class="toast" hidden></div>
    <section id="no-matches" hidden>
      <p>No items match that board name.</p>
      <button id="retry" type="button">Try another board</button>
    </section>
    <main class="layout">
      <section id="grid" class="grid" aria-live="polite"></section>
      <aside id="panel" class="panel" hidden>
        <h2>Session</h2>
        <dl>
          <dt>Steps</dt><dd data-role="steps"></dd>
          <dt>Retrievals</dt><dd data-role="retrievals"></dd>
          <dt>Elapsed</dt><dd data-role="elapsed"></dd>
          <dt>Items viewed</dt><dd data-role="viewed"></dd>
        </dl>
        <h3>Diet</h3>
        <ul data-role="diet"></ul>
      </aside>
    </main>
  `;
}

export function update(state: AppState, root: HTMLElement): void {
  const status = expect(root, '[data-role="status"]');
  const toast = expect(root, '#toast');
  const noMatches = expect(root, '#no-matches');
  const grid = expect(root, '#grid');
  const panel = expect(root, '#panel');
  const submit = expect<HTMLButtonElement>(root, '#board-submit');

  submit.disabled = state.busy;

  if (state.error) {
    status.textContent = state.error;
  } else if (state.phase === 'board_entry') {
    status.textContent = 'Enter a board name to start foraging.';
  } else {
    const session = state.session!;
    status.textContent =
      `${state.phase}: ${session.patch.length} item(s) for "${session.query}"`;
  }

  toast.hidden = !state.toast;
  toast.textContent = state.toast ?? '';

  const showNoMatches = state.session !== null && state.session.no_matches;
  noMatches.hidden = !showNoMatches;

  const session = state.session;
  if (!session || showNoMatches) {
    grid.innerHTML = '';
    panel.hidden = true;
    return;
  }

  grid.innerHTML = session.patch.map((card) => renderCard(card, state)).join('');
  panel.hidden = false;
  expect(panel, '[data-role="steps"]').textContent = String(session.cost.steps);
  expect(panel, '[data-role="retrievals"]').textContent = String(
    session.cost.retrievals,
  );
  expect(panel, '[data-role="elapsed"]').textContent =
    `${session.cost.elapsed_ms} ms`;
  expect(panel, '[data-role="viewed"]').textContent = String(
    session.diet.items_viewed,
  );
  const diet = expect(panel, '[data-role="diet"]');
  const consumed = Object.entries(session.diet.consumed_cues);
  diet.innerHTML = consumed.length
    ? consumed
        .map(
          ([label, count]) =>
            `<li>${escapeHtml(label)}${count > 1 ? ` ×${count}` : ''}</li>`,
        )
        .join('')
    : '<li class="empty">nothing consumed yet</li>';
}

function renderCard(card: ItemCard, state: AppState): string {
  const cues = card.cues ?? [];
  const active = state.activeCues;
  const badge = card.image_scent ? `
      <span class="badge" data-role="scent">${formatScent(card.image_scent)}</span>`
    : '';
  const chips = cues
    .map((cue) => {
      const isActive = cue.label in active;
      return `<li class="chip${isActive ? ' active' : ''}"
                  data-cue="${escapeHtml(cue.label)}"
                  title="${escapeHtml(cue.source)}">${escapeHtml(cue.label)}</li>`;
    })
    .join('');
  return `
    <article class="card" data-item-id="${escapeHtml(card.item_id)}">
      <header>
        <span class="board">${escapeHtml(card.board ?? '')}</span>${badge}
      </header>
      <h3 class="title">${escapeHtml(card.title || card.item_id)}</h3>
      <ul class="cues">${chips}</ul>
    </article>
  `;
}

/** Scent badge text: integers render bare, everything else to one decimal. */
export function formatScent(value: number): string {
  if (Number.isInteger(value)) {
    return String(value);
  }
  return (Math.round(value * 10) / 10).toString();
}

/** Add the highlight class to every card carrying the cue; null clears. */
export function highlightCue(grid: HTMLElement, label: string | null): void {
  for (const card of Array.from(grid.querySelectorAll('.card'))) {
    const carries =
      label !== null && card.querySelector(`[data-cue="${cssEscape(label)}"]`);
    card.classList.toggle('glow', Boolean(carries));
  }
}

function expect<T extends HTMLElement = HTMLElement>(
  scope: ParentNode,
  selector: string,
): T {
  const node = scope.querySelector(selector);
  if (!node) {
    throw new Error(`missing element ${selector}`);
  }
  return node as T;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function cssEscape(value: string): string {
  return value.replace(/["\\]/g, '\\$&');
}
