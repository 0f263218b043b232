/**
 * Browser entry point: wires the controller to the page.
 *
 * Query parameters select the session:  ?session=<id>&annotator=<name>
 * with an optional &api=<base url> when the API is not same-origin.
 */

import { AnnotationApi } from './api.js';
import { JudgingController, keyToChoice } from './state.js';
import { renderApp } from './view.js';

function requireParam(params: URLSearchParams, name: string): string {
  const value = params.get(name);
  if (!value) {
    throw new Error(`missing required query parameter "${name}"`);
  }
  return value;
}

export function bootstrap(root: HTMLElement): JudgingController {
  const params = new URLSearchParams(window.location.search);
  const session = requireParam(params, 'session');
  const annotator = requireParam(params, 'annotator');
  const api = new AnnotationApi(params.get('api') ?? '');
  const controller = new JudgingController(api, session, annotator);

  controller.subscribe((state) => {
    root.innerHTML = renderApp(state);
  });

  root.addEventListener('click', (event) => {
    const target = event.target as HTMLElement | null;
    const choice = target?.dataset?.choice;
    if (choice === 'first' || choice === 'second' || choice === 'neither') {
      void controller.choose(choice);
    } else if (target?.dataset?.action === 'retry') {
      void controller.retry();
    }
  });

  window.addEventListener('keydown', (event) => {
    if (keyToChoice(event.key) !== null) {
      event.preventDefault();
      controller.handleKey(event.key);
    }
  });

  // Queued judgments replay as soon as the browser reports connectivity.
  window.addEventListener('online', () => void controller.retry());

  void controller.start();
  return controller;
}

const rootElement = typeof document !== 'undefined'
  ? document.getElementById('app') : null;
if (rootElement) {
  try {
    bootstrap(rootElement);
  } catch (error) {
    rootElement.textContent = error instanceof Error ? error.message : String(error);
  }
}
