/**
 * Read-only flow viewer: the intention tree as nested lists, edge labels on
 * each branch, the open session's current node highlighted.
 */

import { el } from './components.js';
import { SYNTHETIC_CLOSE_ID, type TableView, type TreeEdge } from './view-model.js';

export function renderTree(
  container: HTMLElement,
  view: TableView | null,
  highlight: string | null,
): void {
  container.replaceChildren();
  if (!view) {
    const empty = el('div', { class: 'tree-empty' });
    empty.textContent = 'No table imported yet.';
    container.appendChild(empty);
    return;
  }
  const byFrom = new Map<string, TreeEdge[]>();
  for (const edge of view.edges) {
    const list = byFrom.get(edge.from) ?? [];
    list.push(edge);
    byFrom.set(edge.from, list);
  }
  const questions = new Map(view.nodes.map((n) => [n.id, n.question]));

  const renderNode = (id: string, label: string | null): HTMLLIElement => {
    const item = el('li', { class: 'tree-item' });
    const card = el('span', { class: 'tree-node' });
    card.dataset.intention = id;
    if (id === highlight) card.classList.add('tree-node--current');
    if (id === SYNTHETIC_CLOSE_ID) card.classList.add('tree-node--synthetic');
    const title = id === SYNTHETIC_CLOSE_ID ? 'close (not an incident)' : questions.get(id) ?? id;
    card.textContent = label === null ? title : `${label}: ${title}`;
    item.appendChild(card);
    const children = byFrom.get(id) ?? [];
    if (children.length > 0) {
      const list = el('ul', { class: 'tree-children' });
      for (const edge of children) {
        list.appendChild(renderNode(edge.to, edge.label));
      }
      item.appendChild(list);
    }
    return item;
  };

  const rootList = el('ul', { class: 'tree-root' });
  rootList.appendChild(renderNode(view.root, null));
  container.appendChild(rootList);
}
