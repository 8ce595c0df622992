/** Payload types for the dialogue session API (mirrors the server JSON). */

export interface ClipInfo {
  clip_id: string;
  length: number;
  caption: string;
}

export interface SessionCreated {
  session_id: string;
  clip_id: string;
  caption: string;
  round_count: number;
  history_window: number;
}

/** One answered round exactly as the server reports it. */
export interface ServerRound {
  round: number;
  question: string;
  answer: string;
  keyword_hit: boolean;
  /** relatedness score in (0,1); null when the keyword gate decided alone */
  r: number | null;
  mode: string;
  elapsed_ms: number;
}

export interface SessionHistory {
  session_id: string;
  clip_id: string;
  history_window: number;
  rounds: ServerRound[];
}

export interface ApiErrorBody {
  error: { code: string; message: string; limit?: number };
}

/** Score above which a question counts as audio-related in the reports;
 * shown as a marker on the r meter. */
export const BUCKET_THRESHOLD = 0.7;
