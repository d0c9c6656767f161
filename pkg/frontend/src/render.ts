// DOM rendering. One render pass per state change; the view is a pure
// function of UiSessionState plus the cached projection background.

import { PendingQuery, ProjectionResponse, Verdict } from './api.js';
import { drawScatter } from './scatter.js';
import { UiSessionState } from './state.js';

export interface RenderCallbacks {
  onAnswer: (verdict: Verdict) => void;
}

const CONTEXT_LABELS: Record<string, string> = {
  purity_test: 'purity test',
  merge: 'merge',
  split: 'split',
  refine: 'refinement',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderProgress(state: UiSessionState): HTMLElement {
  const wrap = el('div', 'progress');
  const status = state.status;
  const progress = state.pending?.progress ?? status?.progress ?? null;
  if (progress) {
    const used = progress.queries_used;
    const budget = progress.budget;
    const bar = el('div', 'gauge');
    const fill = el('div', 'gauge-fill');
    fill.style.width = `${budget > 0 ? Math.min(100, (100 * used) / budget) : 0}%`;
    bar.appendChild(fill);
    wrap.appendChild(el('span', 'gauge-label', `queries ${used} / ${budget}`));
    wrap.appendChild(bar);
    if (progress.k !== null) {
      wrap.appendChild(el('span', 'stat', `clusters: ${progress.k}`));
    }
  }
  if (status?.metrics?.nmi != null) {
    wrap.appendChild(el('span', 'stat', `NMI: ${status.metrics.nmi.toFixed(4)}`));
  }
  if (state.kTrajectory.length > 1) {
    wrap.appendChild(el('span', 'stat trajectory',
      `k: ${state.kTrajectory.join(' → ')}`));
  }
  return wrap;
}

function renderPair(query: PendingQuery, projection: ProjectionResponse | null): HTMLElement {
  const wrap = el('div', 'pair');
  const display = query.display;
  if (display.mode === 'images' && display.assets) {
    for (const [i, src] of display.assets.entries()) {
      const card = el('figure', 'sample-card');
      const img = el('img', 'sample-image');
      img.src = src;
      img.alt = `sample ${i === 0 ? query.s : query.t}`;
      card.appendChild(img);
      card.appendChild(el('figcaption', undefined, `#${i === 0 ? query.s : query.t}`));
      wrap.appendChild(card);
    }
  } else if (display.coords) {
    const canvas = el('canvas', 'scatter');
    canvas.width = 420;
    canvas.height = 320;
    drawScatter(canvas, projection?.points ?? [], display.coords);
    wrap.appendChild(canvas);
    wrap.appendChild(el('div', 'pair-ids', `samples #${query.s} and #${query.t}`));
  }
  return wrap;
}

export function renderApp(
  root: HTMLElement,
  state: UiSessionState,
  projection: ProjectionResponse | null,
  callbacks: RenderCallbacks,
): void {
  root.textContent = '';
  const app = el('div', 'app');

  if (state.phase === 'disconnected') {
    app.appendChild(el('div', 'banner reconnect', 'connection lost — retrying…'));
  }
  app.appendChild(renderProgress(state));

  if (state.phase === 'question' || state.phase === 'posting') {
    const query = state.pending!;
    const badge = CONTEXT_LABELS[query.context] ?? query.context;
    app.appendChild(el('span', 'context-badge', badge));
    if (state.contradiction) {
      app.appendChild(el('div', 'banner contradiction',
        `that verdict contradicts the recorded constraints ` +
        `(pair ${state.contradiction.pair.join(', ')} is already ` +
        `${state.contradiction.existing}-linked) — please answer again`));
    }
    app.appendChild(renderPair(query, projection));
    const actions = el('div', 'actions');
    const posting = state.phase === 'posting';
    const mustBtn = el('button', 'answer must', 'Must-link (m)');
    const cannotBtn = el('button', 'answer cannot', 'Cannot-link (c)');
    mustBtn.disabled = posting;
    cannotBtn.disabled = posting;
    mustBtn.addEventListener('click', () => callbacks.onAnswer('must'));
    cannotBtn.addEventListener('click', () => callbacks.onAnswer('cannot'));
    actions.appendChild(mustBtn);
    actions.appendChild(cannotBtn);
    app.appendChild(actions);
  } else if (state.phase === 'waiting' || state.phase === 'connecting') {
    app.appendChild(el('div', 'waiting', 'engine is thinking…'));
  } else if (state.phase === 'finished') {
    app.appendChild(el('div', 'done', 'session finished'));
  } else if (state.phase === 'failed') {
    app.appendChild(el('div', 'banner error',
      `session failed: ${state.status?.error ?? 'unknown error'}`));
  } else if (state.phase === 'cancelled') {
    app.appendChild(el('div', 'done', 'session cancelled'));
  }

  if (state.history.length) {
    const list = el('ul', 'history');
    for (const rec of state.history.slice(-12).reverse()) {
      list.appendChild(el('li', `verdict-${rec.verdict}`,
        `#${rec.s} ↔ #${rec.t}: ${rec.verdict} (${CONTEXT_LABELS[rec.context] ?? rec.context})`));
    }
    const section = el('div', 'history-wrap');
    section.appendChild(el('h3', undefined, `answered (${state.history.length})`));
    section.appendChild(list);
    app.appendChild(section);
  }

  root.appendChild(app);
}

export function bindKeyboard(target: Document, callbacks: RenderCallbacks,
                             isActive: () => boolean): void {
  target.addEventListener('keydown', (event) => {
    if (!isActive()) return;
    if (event.key === 'm') callbacks.onAnswer('must');
    else if (event.key === 'c') callbacks.onAnswer('cannot');
  });
}
