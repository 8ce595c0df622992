import type { ClipInfo, ServerRound, SessionCreated } from "./types.js";

/**
 * One rendered round. Every field is copied verbatim from a server
 * round; the client never computes model quantities.
 */
export interface RoundCard {
  round: number;
  question: string;
  answer: string;
  keywordHit: boolean;
  r: number | null;
  mode: string;
}

export interface SessionTab {
  sessionId: string;
  clipId: string;
  caption: string;
  historyWindow: number;
  cards: RoundCard[];
  pending: boolean;
  error: string | null;
  /** unsent input, preserved across failed sends */
  draft: string;
}

export function cardFromServer(round: ServerRound): RoundCard {
  return {
    round: round.round,
    question: round.question,
    answer: round.answer,
    keywordHit: round.keyword_hit,
    r: round.r,
    mode: round.mode,
  };
}

/** View state for the whole chat page: clip list plus one tab per session. */
export class ChatStore {
  clips: ClipInfo[] = [];
  tabs: SessionTab[] = [];
  activeSessionId: string | null = null;

  get activeTab(): SessionTab | null {
    return this.tabs.find((t) => t.sessionId === this.activeSessionId) ?? null;
  }

  setClips(clips: ClipInfo[]): void {
    this.clips = clips;
  }

  /** Opens a tab for a created session and makes it active; any previous
   * tab stays untouched so switching clips mid-chat loses nothing. */
  openSession(created: SessionCreated): SessionTab {
    const tab: SessionTab = {
      sessionId: created.session_id,
      clipId: created.clip_id,
      caption: created.caption,
      historyWindow: created.history_window,
      cards: [],
      pending: false,
      error: null,
      draft: "",
    };
    this.tabs.push(tab);
    this.activeSessionId = tab.sessionId;
    return tab;
  }

  activate(sessionId: string): void {
    if (!this.tabs.some((t) => t.sessionId === sessionId)) {
      throw new Error(`unknown session tab ${sessionId}`);
    }
    this.activeSessionId = sessionId;
  }

  closeTab(sessionId: string): void {
    this.tabs = this.tabs.filter((t) => t.sessionId !== sessionId);
    if (this.activeSessionId === sessionId) {
      this.activeSessionId = this.tabs.length
        ? this.tabs[this.tabs.length - 1].sessionId
        : null;
    }
  }

  /** Replaces a tab's cards with the server history, field for field. */
  syncHistory(sessionId: string, rounds: ServerRound[],
              historyWindow?: number): void {
    const tab = this.mustTab(sessionId);
    tab.cards = rounds.map(cardFromServer);
    if (historyWindow !== undefined) {
      tab.historyWindow = historyWindow;
    }
  }

  /** Marks a question in flight; rejects a second one for the session. */
  beginAsk(sessionId: string, text: string): void {
    const tab = this.mustTab(sessionId);
    if (tab.pending) {
      throw new Error("a question is already in flight for this session");
    }
    if (!text.trim()) {
      throw new Error("cannot send an empty question");
    }
    tab.pending = true;
    tab.error = null;
    tab.draft = text;
  }

  /** Appends the server's answered round and clears the input. */
  completeAsk(sessionId: string, round: ServerRound): RoundCard {
    const tab = this.mustTab(sessionId);
    const card = cardFromServer(round);
    tab.cards.push(card);
    tab.pending = false;
    tab.draft = "";
    return card;
  }

  /** Records a failure; the draft stays so the user can retry. */
  failAsk(sessionId: string, message: string): void {
    const tab = this.mustTab(sessionId);
    tab.pending = false;
    tab.error = message;
  }

  /** Round numbers inside the model's context window for the NEXT
   * question: the last `historyWindow` answered rounds, as reported by
   * the server's window size. */
  contextRounds(sessionId: string): number[] {
    const tab = this.mustTab(sessionId);
    return tab.cards.slice(-tab.historyWindow).map((c) => c.round);
  }

  canSend(sessionId: string, text: string): boolean {
    const tab = this.mustTab(sessionId);
    return !tab.pending && text.trim().length > 0;
  }

  private mustTab(sessionId: string): SessionTab {
    const tab = this.tabs.find((t) => t.sessionId === sessionId);
    if (!tab) {
      throw new Error(`unknown session tab ${sessionId}`);
    }
    return tab;
  }
}
