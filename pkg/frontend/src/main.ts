// Entry point: connect to the session named in the URL (?session=ID,
// default "main") and keep the view in sync with the store.

import { ApiClient, ProjectionResponse } from './api.js';
import { bindKeyboard, renderApp } from './render.js';
import { SessionStore } from './state.js';

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get('session') ?? 'main';
  const api = new ApiClient('', sessionId);
  const store = new SessionStore(api);
  const root = document.getElementById('root');
  if (!root) throw new Error('missing #root element');

  let projection: ProjectionResponse | null = null;
  try {
    projection = await api.getProjection();
  } catch {
    projection = null; // image-asset sessions do not need it
  }

  const callbacks = { onAnswer: (v: 'must' | 'cannot') => void store.submit(v) };
  store.subscribe((state) => renderApp(root, state, projection, callbacks));
  bindKeyboard(document, callbacks, () => store.getState().phase === 'question');
  await store.run();
}

void boot();
