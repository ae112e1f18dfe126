/** Leaderboard table with a task switcher.
 *
 * Pure view over the API payload: rows come sorted by rating and the CI is
 * shown as +up/-down deltas around the rating, the way arena leaderboards
 * conventionally print a 95% interval.
 */
import type { ArenaClient } from "./api.js";
import type { LeaderboardEntry, TaskId } from "./types.js";
import { TASKS } from "./types.js";

export function ciDeltas(entry: LeaderboardEntry): string {
  const up = entry.ci_upper - entry.rating;
  const down = entry.rating - entry.ci_lower;
  return `+${up.toFixed(1)}/-${down.toFixed(1)}`;
}

export class LeaderboardView {
  private task: TaskId = "text_to_image";

  constructor(
    private readonly client: ArenaClient,
    private readonly container: HTMLElement,
  ) {}

  get currentTask(): TaskId {
    return this.task;
  }

  async show(task?: TaskId): Promise<void> {
    if (task !== undefined) this.task = task;
    let payload;
    try {
      payload = await this.client.leaderboard(this.task);
    } catch (error) {
      this.container.textContent = "";
      const banner = document.createElement("div");
      banner.className = "banner error-banner";
      banner.textContent =
        error instanceof Error ? error.message : String(error);
      this.container.appendChild(banner);
      return;
    }
    this.render(payload.status, payload.entries);
  }

  private render(status: string, entries: LeaderboardEntry[]): void {
    const root = this.container;
    root.textContent = "";

    const switcher = document.createElement("div");
    switcher.className = "task-switcher";
    for (const task of TASKS) {
      const button = document.createElement("button");
      button.className = "task-button" + (task === this.task ? " active" : "");
      button.dataset["task"] = task;
      button.textContent = task.replace(/_/g, " ");
      button.addEventListener("click", () => void this.show(task));
      switcher.appendChild(button);
    }
    root.appendChild(switcher);

    if (entries.length === 0) {
      const empty = document.createElement("p");
      empty.className = "empty-state";
      empty.textContent = `No leaderboard yet for this task (${status}).`;
      root.appendChild(empty);
      return;
    }

    const ranked = [...entries].sort((a, b) => b.rating - a.rating);
    const table = document.createElement("table");
    table.className = "leaderboard";
    const head = table.createTHead().insertRow();
    for (const label of ["#", "Model", "Rating", "95% CI", "Battles"]) {
      const cell = document.createElement("th");
      cell.textContent = label;
      head.appendChild(cell);
    }
    const body = table.createTBody();
    ranked.forEach((entry, index) => {
      const row = body.insertRow();
      row.insertCell().textContent = String(index + 1);
      const model = row.insertCell();
      model.className = "model-cell";
      model.textContent = entry.model;
      row.insertCell().textContent = entry.rating.toFixed(1);
      row.insertCell().textContent = ciDeltas(entry);
      row.insertCell().textContent = String(entry.battles);
    });
    root.appendChild(table);
  }
}
