// Browser console for live dialog sessions: stage several bindings into
// a basket, send them as ONE utterance, inspect the residual
// specification after each turn, and undo/redo through the service.
//
// Rendered state is a function of the last server response plus the
// local basket; nothing is applied optimistically. Each user action
// issues exactly one API call.

import {
  ApiError,
  Bindings,
  Completion,
  DialogApi,
  SessionStateResponse,
} from './api.js';

export interface ConsoleState {
  sessionId: string | null;
  askable: string[];
  history: Bindings[];
  completed: boolean;
  completion: Completion | null;
  basket: Bindings;
  residualSpec: string | null;
  notice: string | null;
}

const DOMAIN_RE = /\(domain\s+([A-Za-z0-9_/-]+)\s+\(([^()]*)\)\s*\)/g;

/** Pull {question: values} out of pasted domains text, for the chips. */
export function parseDomainValues(text: string): Record<string, string[]> {
  const out: Record<string, string[]> = {};
  for (const match of text.matchAll(DOMAIN_RE)) {
    out[match[1]] = match[2].trim().split(/\s+/).filter((v) => v.length > 0);
  }
  return out;
}

export class ConsoleApp {
  state: ConsoleState = emptyState();
  domainValues: Record<string, string[]> = {};
  // Residuals the server reported, keyed by turn count, so undoing can
  // show the residual it sent for that point again.
  private residualByTurn = new Map<number, string | null>();

  constructor(
    readonly api: DialogApi,
    readonly root: HTMLElement,
  ) {
    this.renderSetup();
  }

  // -- actions (one API call each) --------------------------------------

  async createSession(spec: string, domains: string): Promise<void> {
    try {
      const created = await this.api.createSession(spec, domains);
      this.domainValues = parseDomainValues(domains);
      this.residualByTurn = new Map([[0, null]]);
      this.state = {
        ...emptyState(),
        sessionId: created.id,
        askable: created.askable,
        history: created.history,
      };
    } catch (err) {
      this.state = { ...this.state, notice: describe(err) };
    }
    this.render();
  }

  stage(question: string, value: string): void {
    if (!this.state.askable.includes(question) || this.state.completed) {
      return;
    }
    this.state = {
      ...this.state,
      basket: { ...this.state.basket, [question]: value },
      notice: null,
    };
    this.render();
  }

  unstage(question: string): void {
    const basket = { ...this.state.basket };
    delete basket[question];
    this.state = { ...this.state, basket };
    this.render();
  }

  async send(): Promise<void> {
    const { sessionId, basket } = this.state;
    if (!sessionId || Object.keys(basket).length === 0) {
      return;
    }
    try {
      const resp = await this.api.sendUtterance(sessionId, basket);
      if (resp.outcome === 'rejected') {
        // The basket survives a rejection so the user can adjust it.
        this.state = { ...this.state, notice: `rejected: ${resp.reason}` };
      } else {
        const history = [...this.state.history, basket];
        this.residualByTurn.set(history.length, resp.residual_spec ?? null);
        this.state = {
          ...this.state,
          askable: resp.askable ?? [],
          history,
          basket: {},
          completed: resp.outcome === 'completed',
          completion: resp.completion ?? null,
          residualSpec: resp.residual_spec ?? null,
          notice: null,
        };
      }
    } catch (err) {
      this.state = { ...this.state, notice: describe(err) };
    }
    this.render();
  }

  async undoTurn(): Promise<void> {
    await this.historyCall((id) => this.api.undo(id));
  }

  async redoTurn(): Promise<void> {
    await this.historyCall((id) => this.api.redo(id));
  }

  private async historyCall(
    call: (id: string) => Promise<SessionStateResponse>,
  ): Promise<void> {
    if (!this.state.sessionId) {
      return;
    }
    try {
      const resp = await call(this.state.sessionId);
      const basket = pruneBasket(this.state.basket, resp.askable, resp.completed);
      this.state = {
        ...this.state,
        askable: resp.askable,
        history: resp.history,
        completed: resp.completed,
        completion: resp.completion,
        basket,
        residualSpec: this.residualByTurn.get(resp.history.length) ?? null,
        notice: null,
      };
    } catch (err) {
      this.state = { ...this.state, notice: describe(err) };
    }
    this.render();
  }

  // -- rendering ---------------------------------------------------------

  private renderSetup(): void {
    this.root.innerHTML = `
      <section id="setup">
        <h1>dialog console</h1>
        <label>specification <textarea id="spec-input" rows="3"></textarea></label>
        <label>domains <textarea id="domains-input" rows="3"></textarea></label>
        <button id="create-btn">start session</button>
      </section>
      <section id="console" hidden>
        <div id="banner" hidden></div>
        <div id="notice" hidden></div>
        <h2>askable</h2>
        <div id="chips"></div>
        <h2>basket (sent as one utterance)</h2>
        <div id="basket"></div>
        <button id="send-btn" disabled>send</button>
        <button id="undo-btn">undo</button>
        <button id="redo-btn">redo</button>
        <h2>timeline</h2>
        <ol id="timeline"></ol>
        <h2>residual specification</h2>
        <pre id="residual"></pre>
      </section>
    `;
    this.el('create-btn').addEventListener('click', () => {
      const spec = (this.el('spec-input') as HTMLTextAreaElement).value;
      const domains = (this.el('domains-input') as HTMLTextAreaElement).value;
      void this.createSession(spec, domains);
    });
    this.el('send-btn').addEventListener('click', () => void this.send());
    this.el('undo-btn').addEventListener('click', () => void this.undoTurn());
    this.el('redo-btn').addEventListener('click', () => void this.redoTurn());
  }

  render(): void {
    const s = this.state;
    this.el('console').hidden = s.sessionId === null;

    const notice = this.el('notice');
    notice.hidden = s.notice === null;
    notice.textContent = s.notice ?? '';

    const banner = this.el('banner');
    if (s.completed && s.completion) {
      const pairs = Object.entries(s.completion.bindings)
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([q, v]) => `${q}=${v}`)
        .join(' ');
      banner.hidden = false;
      banner.textContent = `completed: ${s.completion.action} (${pairs})`;
    } else {
      banner.hidden = true;
      banner.textContent = '';
    }

    const chips = this.el('chips');
    chips.innerHTML = '';
    for (const question of s.askable) {
      const chip = document.createElement('div');
      chip.className = 'chip';
      chip.dataset.question = question;
      const name = document.createElement('span');
      name.textContent = question;
      chip.appendChild(name);
      for (const value of this.domainValues[question] ?? []) {
        const btn = document.createElement('button');
        btn.className = 'value-btn';
        btn.dataset.question = question;
        btn.dataset.value = value;
        btn.textContent = value;
        btn.addEventListener('click', () => this.stage(question, value));
        chip.appendChild(btn);
      }
      chips.appendChild(chip);
    }

    const basket = this.el('basket');
    basket.innerHTML = '';
    for (const [question, value] of Object.entries(s.basket)) {
      const item = document.createElement('span');
      item.className = 'basket-item';
      item.dataset.question = question;
      item.textContent = `${question}=${value}`;
      const remove = document.createElement('button');
      remove.textContent = 'x';
      remove.addEventListener('click', () => this.unstage(question));
      item.appendChild(remove);
      basket.appendChild(item);
    }
    (this.el('send-btn') as HTMLButtonElement).disabled =
      Object.keys(s.basket).length === 0 || s.completed;

    const timeline = this.el('timeline');
    timeline.innerHTML = '';
    for (const turn of s.history) {
      const li = document.createElement('li');
      li.textContent = Object.entries(turn)
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([q, v]) => `${q}=${v}`)
        .join(' ');
      timeline.appendChild(li);
    }

    this.el('residual').textContent = s.residualSpec ?? '';
  }

  el(id: string): HTMLElement {
    const found = this.root.querySelector(`#${id}`);
    if (!found) {
      throw new Error(`missing element #${id}`);
    }
    return found as HTMLElement;
  }
}

function emptyState(): ConsoleState {
  return {
    sessionId: null,
    askable: [],
    history: [],
    completed: false,
    completion: null,
    basket: {},
    residualSpec: null,
    notice: null,
  };
}

/** Basket keys must stay within the askable set. */
export function pruneBasket(
  basket: Bindings,
  askable: string[],
  completed: boolean,
): Bindings {
  if (completed) {
    return {};
  }
  const out: Bindings = {};
  for (const [q, v] of Object.entries(basket)) {
    if (askable.includes(q)) {
      out[q] = v;
    }
  }
  return out;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `service error: ${err.message}`;
  }
  return `network error: ${err instanceof Error ? err.message : String(err)}; retry`;
}
