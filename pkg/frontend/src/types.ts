export type Issue = "OT" | "ND" | "LE";

export type Decision = "confirm" | "reject" | "skip";

export type Subject = string | [string, string];

export interface AuditSummary {
  id: string;
  issues: Issue[];
  n_samples: number;
  classes: string[];
}

export interface VerdictState {
  decision: Decision;
  reviewer: string;
  timestamp: number | null;
  seq: number | null;
}

export interface RankingEntry {
  rank: number;
  subject: Subject;
  score: number;
  verdict: VerdictState | null;
  audio: string[];
  label?: number;
  class_name?: string | null;
}

export interface RankingPage {
  audit: string;
  issue: Issue;
  total: number;
  offset: number;
  entries: RankingEntry[];
  next_offset: number | null;
}

export interface IssueProgress {
  reviewed: number;
  confirmed: number;
  foe_so_far: number | null;
  n_entries: number;
}

export interface ProgressPayload {
  audit: string;
  issues: Record<string, IssueProgress>;
  foe_note: string;
}

export interface Verdict {
  audit: string;
  issue: Issue;
  subject: Subject;
  decision: Decision;
  reviewer: string;
  idempotency_key: string;
}

export function subjectKey(subject: Subject): string {
  return Array.isArray(subject) ? subject.join("|") : subject;
}
