/** The side-by-side battle view.
 *
 * State machine per battle: pending -> submitting -> submitted, with a
 * retriable failed state for network errors.  Model identities are never
 * rendered before the vote lands: the pending DOM holds only the prompt and
 * two anonymous media panes, and the debug reveal control burns the battle
 * server-side without showing names (the next vote just comes back
 * uncounted).  Votes are client-side idempotent: the submitting transition
 * happens synchronously on click, so a double click sends one request.
 */
import { ApiError, ArenaClient } from "./api.js";
import type {
  MediaType,
  Outcome,
  Reveal,
  SampleResponse,
} from "./types.js";
import { OUTCOMES } from "./types.js";

export type VoteState =
  | { kind: "pending" }
  | { kind: "submitting" }
  | { kind: "submitted"; counted: boolean; reveal: Reveal }
  | { kind: "failed"; message: string };

const BUTTON_LABELS: Record<Outcome, string> = {
  leftvote: "Left is better",
  rightvote: "Right is better",
  tievote: "Tie",
  bothbad_vote: "Both are bad",
};

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

function mediaPane(uri: string, media: MediaType, label: string): HTMLElement {
  const pane = el("figure", "media-pane");
  if (media === "video") {
    const video = el("video");
    video.src = uri;
    video.muted = true;
    video.autoplay = true;
    video.loop = true;
    pane.appendChild(video);
  } else {
    const image = el("img");
    image.src = uri;
    image.alt = label + " output";
    pane.appendChild(image);
  }
  pane.appendChild(el("figcaption", "pane-label", label));
  return pane;
}

export class BattleView {
  private battle: SampleResponse | null = null;
  private state: VoteState = { kind: "pending" };
  private notice = "";

  constructor(
    private readonly client: ArenaClient,
    private readonly container: HTMLElement,
  ) {}

  get current(): SampleResponse | null {
    return this.battle;
  }

  get voteState(): VoteState {
    return this.state;
  }

  /** Fetch and show the next battle (the Random Sample action). */
  async next(): Promise<void> {
    try {
      this.battle = await this.client.sampleBattle("text_to_image");
    } catch (error) {
      this.battle = null;
      this.state = {
        kind: "failed",
        message: error instanceof Error ? error.message : String(error),
      };
      this.render();
      return;
    }
    this.state = { kind: "pending" };
    this.notice = "";
    this.render();
  }

  /** Show a battle obtained elsewhere (prefetch, tests). */
  load(battle: SampleResponse): void {
    this.battle = battle;
    this.state = { kind: "pending" };
    this.notice = "";
    this.render();
  }

  private async castVote(outcome: Outcome): Promise<void> {
    if (this.battle === null || this.state.kind !== "pending") return;
    const battleId = this.battle.battle_id;
    this.state = { kind: "submitting" };
    this.setButtonsDisabled(true);
    try {
      const result = await this.client.vote(battleId, outcome);
      this.state = {
        kind: "submitted",
        counted: result.counted,
        reveal: result.reveal,
      };
      this.render();
    } catch (error) {
      if (error instanceof ApiError && error.code === "conflict") {
        // someone already voted this battle; refresh to a fresh sample
        await this.next();
        this.notice = "That battle was already voted on; here is a fresh one.";
        this.render();
        return;
      }
      this.state = {
        kind: "failed",
        message: error instanceof Error ? error.message : String(error),
      };
      this.render();
    }
  }

  private async debugReveal(): Promise<void> {
    if (this.battle === null || this.state.kind !== "pending") return;
    try {
      await this.client.reveal(this.battle.battle_id);
      // identities stay hidden client-side: the battle is still pending,
      // the vote will simply come back uncounted
      this.notice = "Identities were revealed server-side; your vote will not count.";
    } catch (error) {
      this.notice = error instanceof Error ? error.message : String(error);
    }
    this.render();
  }

  private retry(): void {
    if (this.battle === null) {
      void this.next();
      return;
    }
    this.state = { kind: "pending" };
    this.render();
  }

  private setButtonsDisabled(disabled: boolean): void {
    for (const button of this.container.querySelectorAll("button.vote-button")) {
      (button as HTMLButtonElement).disabled = disabled;
    }
  }

  private render(): void {
    const root = this.container;
    root.textContent = "";

    if (this.state.kind === "failed") {
      const banner = el("div", "banner error-banner", this.state.message + " ");
      const retry = el("button", "retry-button", "Retry");
      retry.addEventListener("click", () => this.retry());
      banner.appendChild(retry);
      root.appendChild(banner);
      if (this.battle === null) return;
    }

    if (this.battle === null) {
      root.appendChild(el("p", "empty-state", "No battle loaded yet."));
      return;
    }
    const battle = this.battle;

    if (this.notice) {
      root.appendChild(el("div", "banner notice-banner", this.notice));
    }
    root.appendChild(el("p", "battle-prompt", battle.prompt));

    const panes = el("div", "panes");
    if (battle.source_image_ref) {
      panes.appendChild(mediaPane(battle.source_image_ref, "image", "Source"));
    }
    panes.appendChild(mediaPane(battle.output_a_uri, battle.media_type, "Left"));
    panes.appendChild(mediaPane(battle.output_b_uri, battle.media_type, "Right"));
    root.appendChild(panes);

    const controls = el("div", "vote-controls");
    for (const outcome of OUTCOMES) {
      const button = el("button", "vote-button", BUTTON_LABELS[outcome]);
      button.dataset["outcome"] = outcome;
      button.disabled = this.state.kind !== "pending";
      button.addEventListener("click", () => void this.castVote(outcome));
      controls.appendChild(button);
    }
    root.appendChild(controls);

    if (this.state.kind === "submitted") {
      const { counted, reveal } = this.state;
      const result = el("div", "vote-result");
      result.appendChild(
        el("p", "reveal-line", `Left: ${reveal.model_a} - Right: ${reveal.model_b}`),
      );
      result.appendChild(
        el(
          "p",
          counted ? "counted-line counted" : "counted-line not-counted",
          counted
            ? "Your vote counted."
            : "Your vote did not count: identities were revealed first.",
        ),
      );
      root.appendChild(result);
    }

    const footer = el("div", "battle-footer");
    const sample = el("button", "sample-button", "Random Sample");
    sample.dataset["action"] = "sample";
    sample.addEventListener("click", () => void this.next());
    footer.appendChild(sample);
    const revealButton = el("button", "debug-reveal-button", "Reveal (debug)");
    revealButton.dataset["action"] = "debug-reveal";
    revealButton.disabled = this.state.kind !== "pending";
    revealButton.addEventListener("click", () => void this.debugReveal());
    footer.appendChild(revealButton);
    root.appendChild(footer);
  }
}
