/**
 * Application wiring for the analyst chat.
 *
 * The server owns all conversation state: after every send the app
 * re-fetches the session and redraws the thread from the transcript, so a
 * page reload reproduces exactly what the server recorded. The session id
 * is kept in sessionStorage (one conversation per tab).
 */

import { ApiError, TriagebotClient } from './api.js';
import { renderBanner, renderQuickReplies, renderThread } from './components.js';
import { renderTree } from './tree-view.js';
import type { SessionView, TableDoc } from './types.js';
import {
  QUICK_REPLIES,
  bannerFor,
  bubblesFrom,
  buildTableView,
  quickRepliesVisible,
} from './view-model.js';

const SESSION_KEY = 'triagebot.session';

export interface AppElements {
  thread: HTMLElement;
  quickReplies: HTMLElement;
  banner: HTMLElement;
  form: HTMLFormElement;
  input: HTMLInputElement;
  send: HTMLButtonElement;
  tree: HTMLElement;
  status: HTMLElement;
}

export class ChatApp {
  private session: SessionView | null = null;
  private table: TableDoc | null = null;

  constructor(
    private client: TriagebotClient,
    private ui: AppElements,
    private storage: Storage,
  ) {
    ui.form.addEventListener('submit', (event) => {
      event.preventDefault();
      const text = ui.input.value.trim();
      if (text) {
        ui.input.value = '';
        void this.send(text);
      }
    });
  }

  async start(): Promise<void> {
    try {
      this.table = await this.client.getActiveTable();
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.showEmptyState();
        return;
      }
      if (!(error instanceof ApiError)) {
        this.showRetryBanner();
        return;
      }
      // other API errors: keep going, the tree stays empty
    }

    const existing = this.storage.getItem(SESSION_KEY);
    if (existing) {
      try {
        this.session = await this.client.getSession(existing);
        this.render();
        return;
      } catch {
        this.storage.removeItem(SESSION_KEY);
      }
    }

    try {
      const started = await this.client.startSession();
      this.storage.setItem(SESSION_KEY, started.session_id);
      this.session = await this.client.getSession(started.session_id);
      this.render();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.showEmptyState();
      } else {
        this.showRetryBanner();
      }
    }
  }

  async send(text: string): Promise<void> {
    if (!this.session) return;
    const id = this.session.session_id;
    try {
      await this.client.sendMessage(id, text);
    } catch (error) {
      if (error instanceof ApiError && error.status === 410) {
        // closed while we weren't looking: fall through and re-render the
        // transcript, which carries the terminal banner
      } else if (error instanceof ApiError && error.status === 404) {
        this.showRetryBanner('Session is gone; reload to start a new one.');
        return;
      } else if (!(error instanceof ApiError)) {
        this.showRetryBanner();
        return;
      }
    }
    this.session = await this.client.getSession(id);
    this.render();
  }

  get sessionView(): SessionView | null {
    return this.session;
  }

  private render(): void {
    const session = this.session;
    if (!session) return;
    renderThread(this.ui.thread, bubblesFrom(session.turns));

    if (session.closed && session.event) {
      renderBanner(this.ui.banner, 'terminal', bannerFor(session.event), session.event);
      renderQuickReplies(this.ui.quickReplies, null);
      this.ui.input.disabled = true;
      this.ui.send.disabled = true;
    } else {
      renderBanner(this.ui.banner, null);
      this.ui.input.disabled = false;
      this.ui.send.disabled = false;
      const visible = quickRepliesVisible(this.table, session.current);
      renderQuickReplies(
        this.ui.quickReplies,
        visible ? { replies: QUICK_REPLIES, onPick: (text) => void this.send(text) } : null,
      );
    }

    renderTree(
      this.ui.tree,
      this.table ? buildTableView(this.table) : null,
      session.current,
    );
    this.ui.status.textContent = `session ${session.session_id.slice(0, 8)} · table v${session.table_version}`;
  }

  private showEmptyState(): void {
    renderBanner(
      this.ui.banner,
      'empty',
      'No intention table is active. Import one first: ' +
        'triagebot serve, then POST /tables/import (or use the CLI).',
    );
    renderTree(this.ui.tree, null, null);
    this.ui.input.disabled = true;
    this.ui.send.disabled = true;
  }

  private showRetryBanner(text = 'Cannot reach the triagebot server. Check it is running, then reload.'): void {
    renderBanner(this.ui.banner, 'error', text);
  }
}

export function mount(win: Window, client: TriagebotClient): ChatApp {
  const doc = win.document;
  const byId = <T extends HTMLElement>(id: string): T => {
    const node = doc.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
  };
  const app = new ChatApp(
    client,
    {
      thread: byId('thread'),
      quickReplies: byId('quick-replies'),
      banner: byId('banner'),
      form: byId<HTMLFormElement>('composer'),
      input: byId<HTMLInputElement>('message-input'),
      send: byId<HTMLButtonElement>('send-button'),
      tree: byId('tree'),
      status: byId('status'),
    },
    win.sessionStorage,
  );
  void app.start();
  return app;
}
