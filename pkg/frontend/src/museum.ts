/** Museum browsing: pick a prompt, see every model's output with the
 * identity shown.  This tab is post-hoc exploration; it emits no votes, so
 * showing names here is fine.
 */
import type { ArenaClient } from "./api.js";
import type { MuseumGroupResponse, TaskId } from "./types.js";

export class MuseumView {
  private task: TaskId = "text_to_image";

  constructor(
    private readonly client: ArenaClient,
    private readonly container: HTMLElement,
  ) {}

  async show(task?: TaskId): Promise<void> {
    if (task !== undefined) this.task = task;
    const root = this.container;
    root.textContent = "";
    let listing;
    try {
      listing = await this.client.museumPrompts(this.task);
    } catch (error) {
      const banner = document.createElement("div");
      banner.className = "banner error-banner";
      banner.textContent = error instanceof Error ? error.message : String(error);
      root.appendChild(banner);
      return;
    }

    const list = document.createElement("ul");
    list.className = "prompt-list";
    for (const prompt of listing.prompts) {
      const item = document.createElement("li");
      const link = document.createElement("button");
      link.className = "prompt-link";
      link.dataset["promptId"] = prompt.prompt_id;
      link.textContent = prompt.prompt_text;
      link.addEventListener("click", () => void this.showGroup(prompt.prompt_id));
      item.appendChild(link);
      list.appendChild(item);
    }
    root.appendChild(list);

    const detail = document.createElement("div");
    detail.className = "museum-detail";
    root.appendChild(detail);
  }

  private async showGroup(promptId: string): Promise<void> {
    const detail = this.container.querySelector(".museum-detail");
    if (!(detail instanceof HTMLElement)) return;
    let group: MuseumGroupResponse;
    try {
      group = await this.client.museumGroup(this.task, promptId);
    } catch (error) {
      detail.textContent = error instanceof Error ? error.message : String(error);
      return;
    }
    detail.textContent = "";
    const heading = document.createElement("h3");
    heading.textContent = group.prompt_text;
    detail.appendChild(heading);
    for (const entry of group.entries) {
      const figure = document.createElement("figure");
      figure.className = "museum-entry";
      if (entry.media_type === "video") {
        const video = document.createElement("video");
        video.src = entry.artifact_uri;
        video.muted = true;
        video.loop = true;
        figure.appendChild(video);
      } else {
        const image = document.createElement("img");
        image.src = entry.artifact_uri;
        image.alt = `output by ${entry.model_id}`;
        figure.appendChild(image);
      }
      const caption = document.createElement("figcaption");
      caption.className = "museum-model";
      caption.textContent = entry.model_id;
      figure.appendChild(caption);
      detail.appendChild(figure);
    }
  }
}
