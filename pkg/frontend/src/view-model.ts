/**
 * Pure projections from API data to renderable view state. Everything the
 * DOM layer draws is computed here so it can be unit-tested without a
 * browser.
 */

import type {
  SessionView,
  TableDoc,
  TableIntention,
  TerminalEvent,
  TranscriptTurn,
} from './types.js';

export interface Bubble {
  direction: 'bot' | 'user';
  text: string;
  fallback: boolean;
}

export const EVENT_BANNERS: Record<TerminalEvent, string> = {
  NotifyResponsible: 'Notified responsible group',
  AlignUser: 'Aligned user over fix',
  CloseNotIncident: 'Closed: not an incident',
};

export const SYNTHETIC_CLOSE_ID = 'synthetic-close';
export const QUICK_REPLIES = ['yes', 'no'] as const;

/** Transcript turns in order, one bubble each. */
export function bubblesFrom(turns: TranscriptTurn[]): Bubble[] {
  return turns.map((turn) => ({
    direction: turn.direction,
    text: turn.text,
    fallback: turn.fallback,
  }));
}

export function bannerFor(event: TerminalEvent): string {
  return `${EVENT_BANNERS[event]} (${event})`;
}

/**
 * Quick replies are offered only when every declared condition at the
 * current node is a plain yes/no; phrase conditions need free text.
 */
export function quickRepliesVisible(table: TableDoc | null, intentionId: string): boolean {
  const node = table?.intentions.find((i) => i.id === intentionId);
  if (!node) return false;
  const conditions = node.transitions
    .filter((t) => t.condition !== undefined)
    .map((t) => t.condition as string);
  if (conditions.length === 0) return false;
  return conditions.every((c) => c === 'affirmative' || c === 'negative');
}

export interface TreeEdge {
  from: string;
  label: string;
  to: string;
  synthetic: boolean;
}

export interface TreeNode {
  id: string;
  question: string;
  terminal: boolean;
  event: TerminalEvent | null;
}

export interface TableView {
  nodes: TreeNode[];
  edges: TreeEdge[];
  root: string;
}

function conditionLabel(condition: string): string {
  if (condition === 'affirmative') return 'Yes';
  if (condition === 'negative') return 'No';
  return condition.replace(/^phrase:/, '');
}

/**
 * Nodes and edges of the active table. Nodes lacking a negative branch get
 * a synthetic close edge, mirroring how the engine answers "no" there
 * (the bundled tree yields 8 table nodes, 11 declared edges plus 1 synthetic).
 */
export function buildTableView(table: TableDoc): TableView {
  const nodes: TreeNode[] = table.intentions.map((i) => ({
    id: i.id,
    question: i.response,
    terminal: i.transitions.some((t) => t.terminal_event !== undefined),
    event: i.transitions.find((t) => t.terminal_event !== undefined)?.terminal_event ?? null,
  }));

  const edges: TreeEdge[] = [];
  for (const intention of table.intentions) {
    for (const transition of intention.transitions) {
      if (transition.condition !== undefined && transition.to !== undefined) {
        edges.push({
          from: intention.id,
          label: conditionLabel(transition.condition),
          to: transition.to,
          synthetic: false,
        });
      }
    }
    if (nonTerminalWithoutNegative(intention)) {
      edges.push({
        from: intention.id,
        label: 'No',
        to: SYNTHETIC_CLOSE_ID,
        synthetic: true,
      });
    }
  }
  return { nodes, edges, root: table.root };
}

function nonTerminalWithoutNegative(intention: TableIntention): boolean {
  const terminal = intention.transitions.some((t) => t.terminal_event !== undefined);
  if (terminal) return false;
  return !intention.transitions.some((t) => t.condition === 'negative');
}

/** The intention to highlight in the tree for an open session, if any. */
export function highlightedNode(session: SessionView | null): string | null {
  if (!session) return null;
  return session.current;
}
