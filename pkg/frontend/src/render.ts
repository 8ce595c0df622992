import type { RoundCard, SessionTab } from "./state.js";
import type { ClipInfo } from "./types.js";
import { BUCKET_THRESHOLD } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Gauge for the relatedness score with the 0.7 bucket marker. */
export function renderScoreMeter(r: number): HTMLElement {
  const meter = el("div", "r-meter");
  meter.dataset.r = String(r);
  const fill = el("div", "r-meter-fill");
  fill.style.width = `${r * 100}%`;
  const marker = el("div", "r-meter-marker");
  marker.style.left = `${BUCKET_THRESHOLD * 100}%`;
  marker.title = `audio-related above ${BUCKET_THRESHOLD}`;
  const label = el("span", "r-meter-label", `r = ${r}`);
  meter.append(fill, marker, label);
  return meter;
}

/** Split bar visualizing the audio weight r against the video weight 1-r.
 * Widths are presentation only; the displayed number is the server's r. */
export function renderWeightBar(r: number): HTMLElement {
  const bar = el("div", "weight-bar");
  const audio = el("div", "weight-audio", "audio");
  audio.style.width = `${r * 100}%`;
  const video = el("div", "weight-video", "video");
  video.style.width = `${(1 - r) * 100}%`;
  bar.append(audio, video);
  return bar;
}

export function renderRoundCard(card: RoundCard, inContext: boolean): HTMLElement {
  const root = el("article", "round-card");
  root.dataset.round = String(card.round);
  if (inContext) root.classList.add("in-context");

  const head = el("header", "round-head");
  head.append(el("span", "round-index", `round ${card.round}`));
  if (card.keywordHit) {
    head.append(el("span", "keyword-badge", "audio keyword"));
  }
  head.append(el("span", "gating-mode", card.mode));
  if (inContext) head.append(el("span", "context-tag", "in context"));

  const question = el("p", "question", card.question);
  const answer = el("p", "answer", card.answer);

  root.append(head, question, answer);
  if (card.r !== null) {
    root.append(renderScoreMeter(card.r), renderWeightBar(card.r));
  }
  return root;
}

export function renderErrorCard(message: string): HTMLElement {
  const root = el("article", "round-card error-card");
  root.append(el("p", "error-text", message));
  root.append(el("p", "error-hint", "your question is still in the input box; press send to retry"));
  return root;
}

export function renderExpiredSession(): HTMLElement {
  const root = el("article", "round-card error-card");
  root.append(el("p", "error-text", "this session no longer exists on the server"));
  root.append(el("p", "error-hint", "pick a clip to start a new session"));
  return root;
}

export function renderHistory(tab: SessionTab): HTMLElement {
  const panel = el("section", "history-panel");
  panel.dataset.rounds = String(tab.cards.length);
  const context = new Set(
    tab.cards.slice(-tab.historyWindow).map((c) => c.round),
  );
  for (const card of tab.cards) {
    panel.append(renderRoundCard(card, context.has(card.round)));
  }
  if (tab.error) panel.append(renderErrorCard(tab.error));
  return panel;
}

export function renderClipOptions(clips: ClipInfo[]): HTMLElement {
  if (clips.length === 0) {
    const empty = el("div", "clips-empty");
    empty.append(el("p", undefined,
      "no clips available - generate a corpus first:"));
    empty.append(el("code", undefined, "hear synth-data --config run.yaml"));
    return empty;
  }
  const select = el("select", "clip-select");
  for (const clip of clips) {
    const option = document.createElement("option");
    option.value = clip.clip_id;
    option.textContent = `${clip.clip_id} (${clip.length} frames)`;
    option.title = clip.caption;
    select.append(option);
  }
  return select;
}

export function renderTabStrip(
  tabs: SessionTab[],
  activeSessionId: string | null,
): HTMLElement {
  const strip = el("nav", "tab-strip");
  for (const tab of tabs) {
    const button = el("button", "tab-button", tab.clipId);
    button.dataset.sessionId = tab.sessionId;
    if (tab.sessionId === activeSessionId) button.classList.add("active");
    if (tab.pending) button.classList.add("pending");
    strip.append(button);
  }
  return strip;
}
