import type { ProgressPayload } from "./types";

/** Render the effort-savings panel.
 *
 * The panel is a pure pass-through of the /progress payload: every number on
 * screen (and the raw JSON stashed in data-raw) comes verbatim from the
 * service, never from client-side recomputation.
 */
export function renderProgress(panel: HTMLElement, payload: ProgressPayload | null): void {
  panel.innerHTML = "";
  panel.classList.add("progress-panel");
  const untouched =
    payload !== null &&
    Object.values(payload.issues).every((stats) => stats.reviewed === 0);
  if (payload === null || untouched) {
    if (payload === null) {
      delete panel.dataset.raw;
    } else {
      panel.dataset.raw = JSON.stringify(payload);
    }
    const empty = document.createElement("p");
    empty.className = "progress-empty";
    empty.textContent = "no reviews yet";
    panel.appendChild(empty);
    return;
  }
  panel.dataset.raw = JSON.stringify(payload);
  const table = document.createElement("table");
  table.innerHTML =
    "<thead><tr><th>issue</th><th>reviewed</th><th>confirmed</th>" +
    "<th>FoE so far</th></tr></thead>";
  const body = document.createElement("tbody");
  for (const [issue, stats] of Object.entries(payload.issues)) {
    const row = document.createElement("tr");
    const foe = stats.foe_so_far;
    row.innerHTML =
      `<td>${issue}</td><td>${stats.reviewed}</td><td>${stats.confirmed}</td>` +
      `<td>${foe === null ? "–" : String(foe)}</td>`;
    body.appendChild(row);
  }
  table.appendChild(body);
  panel.appendChild(table);
  const note = document.createElement("p");
  note.className = "progress-note";
  note.textContent = payload.foe_note;
  panel.appendChild(note);
}
