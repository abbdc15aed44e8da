/**
 * Wire types for the triagebot HTTP API, mirrored field by field.
 */

export type TerminalEvent = 'NotifyResponsible' | 'AlignUser' | 'CloseNotIncident';

export interface SessionStart {
  session_id: string;
  prompt: string;
}

export interface TurnResponse {
  reply: string;
  terminal: boolean;
  event: TerminalEvent | null;
  fallback: boolean;
  intention_id: string;
}

export interface MatchInfo {
  matched: boolean;
  key: string | null;
  score: number;
  candidates: { key: string; score: number }[];
}

export interface TranscriptTurn {
  direction: 'bot' | 'user';
  text: string;
  timestamp: number;
  match: MatchInfo | null;
  fallback: boolean;
}

export interface SessionView {
  session_id: string;
  table_version: number;
  current: string;
  closed: boolean;
  event: TerminalEvent | null;
  incident_id: string | null;
  turns: TranscriptTurn[];
}

export interface TableTransition {
  condition?: string;
  to?: string;
  terminal_event?: TerminalEvent;
}

export interface TableIntention {
  id: string;
  response: string;
  transitions: TableTransition[];
  training_phrases: Record<string, string[]>;
}

export interface TableDoc {
  version: number;
  root: string;
  intentions: TableIntention[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
