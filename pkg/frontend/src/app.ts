import { ApiClient } from "./api";
import { renderProgress } from "./progress";
import { VerdictQueue } from "./queue";
import type { Decision, Issue, RankingEntry, RankingPage } from "./types";

const ISSUES: Issue[] = ["OT", "ND", "LE"];
const PAGE_SIZE = 25;
const RETRY_MS = 5000;

interface TabState {
  entries: RankingEntry[];
  nextOffset: number | null;
  total: number;
  cursor: number;
}

export interface App {
  element: HTMLElement;
  selectTab(issue: Issue): Promise<void>;
  currentEntry(): RankingEntry | null;
  decide(decision: Decision): Promise<void>;
  refreshProgress(): Promise<void>;
  queue: VerdictQueue;
}

/** Mount the triage app. The displayed order is exactly the service's
 * ranking order: entries are appended page by page and never re-sorted. */
export async function initApp(
  root: HTMLElement,
  options: { baseUrl?: string; reviewer?: string; fetchFn?: typeof fetch; retryMs?: number } = {},
): Promise<App> {
  const api = new ApiClient(options.baseUrl ?? "", options.fetchFn ?? fetch.bind(globalThis));
  const reviewer = options.reviewer ?? "reviewer";
  const queue = new VerdictQueue(api);

  root.innerHTML = `
    <header>
      <h1>audio audit review</h1>
      <nav class="tabs"></nav>
      <div class="banner" hidden></div>
    </header>
    <main>
      <section class="entry-card"><p class="hint">loading…</p></section>
      <aside class="progress"></aside>
    </main>
    <footer class="keys">keys: <b>c</b> confirm · <b>r</b> reject · <b>s</b> skip</footer>
  `;
  const tabsNav = root.querySelector(".tabs") as HTMLElement;
  const card = root.querySelector(".entry-card") as HTMLElement;
  const banner = root.querySelector(".banner") as HTMLElement;
  const progressPanel = root.querySelector(".progress") as HTMLElement;

  const audits = await api.listAudits();
  if (audits.length === 0) {
    card.innerHTML = "<p class='hint'>no audits loaded</p>";
    throw new Error("no audits available");
  }
  const audit = audits[0];

  const tabs = new Map<Issue, TabState>();
  let active: Issue = (audit.issues[0] as Issue) ?? "OT";

  for (const issue of ISSUES) {
    const button = document.createElement("button");
    button.textContent = issue;
    button.dataset.issue = issue;
    button.disabled = !audit.issues.includes(issue);
    button.addEventListener("click", () => void selectTab(issue));
    tabsNav.appendChild(button);
  }

  function setBanner(message: string | null): void {
    if (message === null) {
      banner.hidden = true;
      banner.textContent = "";
    } else {
      banner.hidden = false;
      banner.textContent = message;
    }
  }

  queue.onStateChange = (pendingCount, lastError) => {
    if (pendingCount > 0) {
      setBanner(
        `service unreachable — ${pendingCount} verdict(s) queued locally, retrying` +
          (lastError ? ` (${lastError})` : ""),
      );
    } else {
      setBanner(null);
    }
  };

  async function loadMore(issue: Issue): Promise<void> {
    const state = tabs.get(issue)!;
    if (state.nextOffset === null && state.entries.length > 0) return;
    const page: RankingPage = await api.fetchRanking(
      audit.id,
      issue,
      state.nextOffset ?? 0,
      PAGE_SIZE,
    );
    state.entries.push(...page.entries);
    state.nextOffset = page.next_offset;
    state.total = page.total;
  }

  async function selectTab(issue: Issue): Promise<void> {
    active = issue;
    for (const button of tabsNav.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.issue === issue);
    }
    if (!tabs.has(issue)) {
      tabs.set(issue, { entries: [], nextOffset: null, total: 0, cursor: 0 });
      if (audit.issues.includes(issue)) {
        await loadMore(issue);
      }
    }
    renderCurrent();
  }

  function currentEntry(): RankingEntry | null {
    const state = tabs.get(active);
    if (!state) return null;
    return state.entries[state.cursor] ?? null;
  }

  function renderCurrent(): void {
    const state = tabs.get(active);
    const entry = currentEntry();
    card.innerHTML = "";
    if (!state || entry === null) {
      card.innerHTML = "<p class='hint'>queue finished — nothing left to review</p>";
      return;
    }
    const header = document.createElement("h2");
    header.textContent = `${active} · rank ${entry.rank} of ${state.total}`;
    card.appendChild(header);

    const score = document.createElement("p");
    score.className = "score";
    score.textContent = `score ${entry.score.toFixed(4)}`;
    card.appendChild(score);

    if (active === "LE") {
      const label = document.createElement("p");
      label.className = "label-callout";
      label.textContent = `current label: ${entry.class_name ?? entry.label}`;
      card.appendChild(label);
    }

    const players = document.createElement("div");
    players.className = "players";
    const names = Array.isArray(entry.subject) ? entry.subject : [entry.subject];
    entry.audio.forEach((url, i) => {
      const block = document.createElement("figure");
      const caption = document.createElement("figcaption");
      caption.textContent = entry.audio.length === 2 ? `${"AB"[i]}: ${names[i]}` : names[i];
      const audio = document.createElement("audio");
      audio.controls = true;
      audio.src = api.audioUrl(url);
      audio.preload = "none";
      block.appendChild(caption);
      block.appendChild(audio);
      players.appendChild(block);
    });
    card.appendChild(players);

    if (entry.audio.length === 2) {
      const both = document.createElement("button");
      both.className = "play-both";
      both.textContent = "play both";
      both.addEventListener("click", () => {
        for (const audio of players.querySelectorAll("audio")) {
          void audio.play().catch(() => undefined);
        }
      });
      card.appendChild(both);
    }

    if (entry.verdict) {
      const prior = document.createElement("p");
      prior.className = "prior-verdict";
      prior.textContent = `already ${entry.verdict.decision}ed by ${entry.verdict.reviewer}`;
      card.appendChild(prior);
    }
  }

  async function refreshProgress(): Promise<void> {
    const payload = await api.fetchProgress(audit.id);
    renderProgress(progressPanel, payload);
  }

  async function decide(decision: Decision): Promise<void> {
    const entry = currentEntry();
    const state = tabs.get(active);
    if (!entry || !state) return;
    queue.enqueue(audit.id, active, entry.subject, decision, reviewer);
    state.cursor += 1;
    if (state.nextOffset !== null && state.cursor >= state.entries.length - 2) {
      try {
        await loadMore(active);
      } catch {
        // Pages can wait; verdicts are already queued.
      }
    }
    renderCurrent();
    const acked = await queue.flush();
    if (acked > 0) {
      // The panel only moves after the service acknowledged the write.
      await refreshProgress();
    }
  }

  function onKey(event: KeyboardEvent): void {
    const decision = ({ c: "confirm", r: "reject", s: "skip" } as const)[event.key];
    if (decision) void decide(decision);
  }
  root.ownerDocument.addEventListener("keydown", onKey);

  const timer = setInterval(() => {
    if (queue.pendingCount > 0) {
      void queue.flush().then(async (acked) => {
        if (acked > 0) {
          await refreshProgress();
        }
      });
    }
  }, options.retryMs ?? RETRY_MS);
  if (typeof (timer as unknown as { unref?: () => void }).unref === "function") {
    (timer as unknown as { unref: () => void }).unref();
  }

  await selectTab(active);
  await refreshProgress();

  return { element: root, selectTab, currentEntry, decide, refreshProgress, queue };
}
