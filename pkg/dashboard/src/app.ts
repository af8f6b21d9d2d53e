/**
 * Browser bootstrap: connection panel, four screens, and the confirm-and-echo
 * flow for mutations.
 */

import { ApiError, ReleaseGateClient, type Identity } from './api.js';
import {
  renderDecisionForms,
  renderEventEcho,
  renderGateError,
  renderHazardLog,
  renderIssueList,
  renderReadinessMatrix,
  renderTraceMatrix,
} from './views.js';

type Screen = 'readiness' | 'hazards' | 'trace' | 'decide';

const state: {
  client: ReleaseGateClient | null;
  identity: Identity | null;
  screen: Screen;
} = { client: null, identity: null, screen: 'readiness' };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function connect(): Promise<void> {
  const baseUrl = (el<HTMLInputElement>('base-url').value || '').replace(/\/$/, '');
  const token = el<HTMLInputElement>('token').value.trim();
  sessionStorage.setItem('release-gate-token', token);
  state.client = new ReleaseGateClient(baseUrl, token);
  state.identity = null;
  if (token) {
    try {
      state.identity = await state.client.whoami();
    } catch (error) {
      state.identity = null;
      if (error instanceof ApiError && error.status === 401) {
        el('connection-status').textContent = 'Unknown token: read-only access.';
      }
    }
  }
  if (state.identity) {
    el('connection-status').textContent =
      `Connected as ${state.identity.actor} (${state.identity.role}).`;
  } else if (!token) {
    el('connection-status').textContent = 'Connected without a token: read-only.';
  }
  await show(state.screen);
}

async function show(screen: Screen): Promise<void> {
  state.screen = screen;
  for (const name of ['readiness', 'hazards', 'trace', 'decide'] as Screen[]) {
    el(`tab-${name}`).classList.toggle('active', name === screen);
  }
  const main = el('screen');
  if (!state.client) {
    main.innerHTML = '<p>Set the service URL and connect first.</p>';
    return;
  }
  try {
    if (screen === 'readiness') {
      const data = await state.client.getPrototypes();
      main.innerHTML = renderReadinessMatrix(data.prototypes) +
        '<div id="drilldown"></div>';
      wireDrilldown();
    } else if (screen === 'hazards') {
      main.innerHTML = renderHazardLog(await state.client.getHazardLog());
    } else if (screen === 'trace') {
      main.innerHTML = renderTraceMatrix(await state.client.getTraceability());
    } else {
      const data = await state.client.getPrototypes();
      main.innerHTML = renderDecisionForms(state.identity, data.prototypes);
      wireForms();
    }
  } catch (error) {
    main.innerHTML = renderGateError(String(error),
      error instanceof ApiError ? error.report : null);
  }
}

function wireDrilldown(): void {
  for (const button of document.querySelectorAll<HTMLButtonElement>('.matrix .cell')) {
    button.addEventListener('click', async () => {
      if (!state.client) return;
      const prototype = button.dataset.prototype ?? '';
      const stage = Number(button.dataset.stage ?? '0');
      const report = await state.client.getReadiness(prototype, stage);
      el('drilldown').innerHTML = renderIssueList(report);
    });
  }
}

function formValues(form: HTMLFormElement): Record<string, string> {
  const data = new FormData(form);
  const out: Record<string, string> = {};
  for (const [key, value] of data.entries()) out[key] = String(value);
  return out;
}

function wireForms(): void {
  const result = el('form-result');

  const submit = async (kind: 'review' | 'decision', form: HTMLFormElement) => {
    if (!state.client) return;
    const values = formValues(form);
    const summary = kind === 'review'
      ? `Record a ${values.recommendation} review for ${values.prototype} ` +
        `stage ${values.stage}?`
      : `Record verdict ${values.verdict} for ${values.prototype} ` +
        `stage ${values.stage}?`;
    if (!window.confirm(summary)) return;
    try {
      if (kind === 'review') {
        await state.client.postReview({
          prototype: values.prototype,
          stage: Number(values.stage),
          recommendation: values.recommendation as 'For' | 'Against',
          notes: values.notes,
        });
      } else {
        await state.client.postDecision({
          prototype: values.prototype,
          stage: Number(values.stage),
          verdict: values.verdict as 'Granted' | 'Rejected',
          conditions: values.conditions,
        });
      }
      const journal = await state.client.getJournal();
      const last = journal.events[journal.events.length - 1];
      result.innerHTML = renderEventEcho(last);
    } catch (error) {
      if (error instanceof ApiError) {
        result.innerHTML = renderGateError(error.message, error.report);
      } else {
        result.innerHTML = renderGateError(String(error), null);
      }
    }
  };

  el<HTMLFormElement>('review-form').addEventListener('submit', (event) => {
    event.preventDefault();
    void submit('review', event.currentTarget as HTMLFormElement);
  });
  el<HTMLFormElement>('decision-form').addEventListener('submit', (event) => {
    event.preventDefault();
    void submit('decision', event.currentTarget as HTMLFormElement);
  });
}

export function start(): void {
  el<HTMLInputElement>('token').value =
    sessionStorage.getItem('release-gate-token') ?? '';
  el('connect').addEventListener('click', () => void connect());
  for (const name of ['readiness', 'hazards', 'trace', 'decide'] as Screen[]) {
    el(`tab-${name}`).addEventListener('click', () => void show(name));
  }
  void connect();
}

if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', start);
}
