/**
 * DOM building blocks. Content always goes through textContent.
 */

import type { Bubble } from './view-model.js';

type Attrs = Record<string, string>;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function renderBubble(bubble: Bubble): HTMLDivElement {
  const classes = [`bubble`, `bubble--${bubble.direction}`];
  if (bubble.fallback) classes.push('bubble--fallback');
  const wrapper = el('div', { class: classes.join(' ') });
  const text = el('div', { class: 'bubble-text' });
  text.textContent = bubble.text;
  wrapper.appendChild(text);
  if (bubble.fallback && bubble.direction === 'user') {
    const tag = el('div', { class: 'bubble-tag' });
    tag.textContent = 'sent to training queue';
    wrapper.appendChild(tag);
  }
  return wrapper;
}

export function renderThread(container: HTMLElement, bubbles: Bubble[]): void {
  container.replaceChildren(...bubbles.map(renderBubble));
  container.scrollTop = container.scrollHeight;
}

export interface QuickReplyOptions {
  replies: readonly string[];
  onPick: (text: string) => void;
}

export function renderQuickReplies(
  container: HTMLElement,
  options: QuickReplyOptions | null,
): void {
  container.replaceChildren();
  if (!options) return;
  for (const reply of options.replies) {
    const button = el('button', { class: 'quick-reply', type: 'button' });
    button.textContent = reply.charAt(0).toUpperCase() + reply.slice(1);
    button.dataset.reply = reply;
    button.addEventListener('click', () => options.onPick(reply));
    container.appendChild(button);
  }
}

export function renderBanner(
  container: HTMLElement,
  kind: 'terminal' | 'error' | 'empty' | null,
  text = '',
  event?: string,
): void {
  container.replaceChildren();
  if (kind === null) {
    container.hidden = true;
    return;
  }
  container.hidden = false;
  const banner = el('div', { class: `banner banner--${kind}` });
  banner.textContent = text;
  if (event) banner.dataset.event = event;
  container.appendChild(banner);
}
