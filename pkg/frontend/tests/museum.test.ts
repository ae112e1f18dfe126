// Museum browsing shows identities; it is the one place that may.
import { beforeEach, describe, expect, it } from "vitest";

import { ArenaClient } from "../src/api.js";
import { MuseumView } from "../src/museum.js";
import { FixtureService } from "./fixture.js";

describe("museum view", () => {
  let fixture: FixtureService;
  let view: MuseumView;
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    fixture = new FixtureService();
    container = document.createElement("div");
    document.body.appendChild(container);
    view = new MuseumView(new ArenaClient("", fixture.fetchFn), container);
  });

  it("lists prompts and opens a group with model identities visible", async () => {
    await view.show("text_to_image");
    const links = container.querySelectorAll("button.prompt-link");
    expect(links.length).toBe(3);

    (links[1] as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    const captions = [...container.querySelectorAll(".museum-model")].map(
      (node) => node.textContent,
    );
    expect(captions).toEqual([...fixture.models]);
    // one pane per model, media attached
    expect(container.querySelectorAll(".museum-entry img").length).toBe(3);
  });
});
