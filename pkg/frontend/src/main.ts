import { ApiClient, ApiError } from "./api.js";
import { ChatStore } from "./state.js";
import {
  renderClipOptions,
  renderExpiredSession,
  renderHistory,
  renderTabStrip,
} from "./render.js";

const STORAGE_KEY = "hear-ui-sessions";

interface PersistedTab {
  sessionId: string;
  clipId: string;
}

function persist(store: ChatStore): void {
  const tabs: PersistedTab[] = store.tabs.map((t) => ({
    sessionId: t.sessionId,
    clipId: t.clipId,
  }));
  localStorage.setItem(STORAGE_KEY, JSON.stringify(tabs));
}

export class ChatApp {
  readonly store = new ChatStore();

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.store.setClips(await this.api.listClips());
    await this.restoreSessions();
    this.draw();
  }

  /** Reopens persisted sessions from the server history; expired ids are
   * dropped with a notice. */
  private async restoreSessions(): Promise<void> {
    const raw = localStorage.getItem(STORAGE_KEY);
    if (!raw) return;
    let saved: PersistedTab[] = [];
    try {
      saved = JSON.parse(raw) as PersistedTab[];
    } catch {
      return;
    }
    for (const entry of saved) {
      try {
        const history = await this.api.getSession(entry.sessionId);
        const tab = this.store.openSession({
          session_id: history.session_id,
          clip_id: history.clip_id,
          caption: "",
          round_count: history.rounds.length,
          history_window: history.history_window,
        });
        this.store.syncHistory(tab.sessionId, history.rounds,
                               history.history_window);
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 404)) throw err;
        this.expiredNotice = true;
      }
    }
    persist(this.store);
  }

  private expiredNotice = false;

  async newSession(clipId: string): Promise<void> {
    const created = await this.api.createSession(clipId);
    this.store.openSession(created);
    persist(this.store);
    this.draw();
  }

  async ask(text: string): Promise<void> {
    const tab = this.store.activeTab;
    if (!tab || !this.store.canSend(tab.sessionId, text)) return;
    this.store.beginAsk(tab.sessionId, text);
    this.draw();
    try {
      const round = await this.api.ask(tab.sessionId, text);
      this.store.completeAsk(tab.sessionId, round);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.store.failAsk(tab.sessionId,
                           "session expired - start a new one");
      } else if (err instanceof ApiError) {
        this.store.failAsk(tab.sessionId, err.message);
      } else {
        this.store.failAsk(tab.sessionId, "network error - retry");
      }
    }
    this.draw();
  }

  draw(): void {
    this.root.replaceChildren();

    const picker = document.createElement("div");
    picker.className = "clip-picker";
    const options = renderClipOptions(this.store.clips);
    picker.append(options);
    if (this.store.clips.length > 0) {
      const open = document.createElement("button");
      open.textContent = "new session";
      open.className = "new-session";
      open.addEventListener("click", () => {
        const select = picker.querySelector("select");
        if (select?.value) void this.newSession(select.value);
      });
      picker.append(open);
    }
    this.root.append(picker);

    const strip = renderTabStrip(this.store.tabs, this.store.activeSessionId);
    strip.addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      const sid = target.dataset.sessionId;
      if (sid) {
        this.store.activate(sid);
        this.draw();
      }
    });
    this.root.append(strip);

    if (this.expiredNotice) {
      this.root.append(renderExpiredSession());
    }

    const tab = this.store.activeTab;
    if (!tab) return;

    const caption = document.createElement("p");
    caption.className = "clip-caption";
    caption.textContent = tab.caption;
    this.root.append(caption, renderHistory(tab));

    const form = document.createElement("form");
    form.className = "ask-form";
    const input = document.createElement("input");
    input.type = "text";
    input.value = tab.draft;
    input.placeholder = "ask about the clip";
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = tab.pending ? "waiting" : "send";
    const refresh = () => {
      send.disabled = !this.store.canSend(tab.sessionId, input.value);
    };
    input.addEventListener("input", refresh);
    refresh();
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.ask(input.value);
    });
    form.append(input, send);
    this.root.append(form);
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const app = new ChatApp(new ApiClient(""), root);
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
