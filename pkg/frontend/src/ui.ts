/** Application shell: three tabs over one client. */
import { ArenaClient } from "./api.js";
import { BattleView } from "./battle.js";
import { LeaderboardView } from "./leaderboard.js";
import { MuseumView } from "./museum.js";

type TabName = "battle" | "leaderboard" | "museum";

export interface App {
  battle: BattleView;
  leaderboard: LeaderboardView;
  museum: MuseumView;
  showTab(tab: TabName): Promise<void>;
}

export function mountApp(client: ArenaClient, root: HTMLElement): App {
  root.textContent = "";

  const nav = document.createElement("nav");
  nav.className = "tabs";
  const sections = new Map<TabName, HTMLElement>();
  for (const name of ["battle", "leaderboard", "museum"] as const) {
    const button = document.createElement("button");
    button.className = "tab-button";
    button.dataset["tab"] = name;
    button.textContent = name[0]!.toUpperCase() + name.slice(1);
    button.addEventListener("click", () => void app.showTab(name));
    nav.appendChild(button);

    const section = document.createElement("section");
    section.className = `tab-panel ${name}-panel`;
    section.hidden = true;
    sections.set(name, section);
  }
  root.appendChild(nav);
  for (const section of sections.values()) root.appendChild(section);

  const app: App = {
    battle: new BattleView(client, sections.get("battle")!),
    leaderboard: new LeaderboardView(client, sections.get("leaderboard")!),
    museum: new MuseumView(client, sections.get("museum")!),
    async showTab(tab: TabName): Promise<void> {
      for (const [name, section] of sections) section.hidden = name !== tab;
      for (const button of nav.querySelectorAll("button.tab-button")) {
        button.classList.toggle(
          "active",
          (button as HTMLElement).dataset["tab"] === tab,
        );
      }
      if (tab === "battle" && app.battle.current === null) await app.battle.next();
      if (tab === "leaderboard") await app.leaderboard.show();
      if (tab === "museum") await app.museum.show();
    },
  };
  return app;
}
