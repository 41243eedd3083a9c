// Portal wiring: one page, sections A-H, all content fetched from the API.
//
//   A user details        B active repositories   C active pull requests
//   D active work items   E active code reviews   F news feed (view selector)
//   G related people      H search box
//
// Every section renders exactly what the API returns, in API order. Each
// section tracks a request sequence number so a stale response can never
// overwrite a newer one (latest wins).

import { ApiClient, type ActiveItem, type FeedView, type HomePage } from "./api.js";
import {
  el,
  renderActiveItem,
  renderFeedItem,
  renderRelatedPerson,
  renderResult,
  renderUserDetails,
  replaceChildren,
} from "./views.js";

const SECTIONS: Array<{ id: string; label: string; tag: string }> = [
  { id: "section-user-details", label: "User details", tag: "A" },
  { id: "section-active-repositories", label: "Active repositories", tag: "B" },
  { id: "section-active-pull-requests", label: "Active pull requests", tag: "C" },
  { id: "section-active-work-items", label: "Active work items", tag: "D" },
  { id: "section-active-code-reviews", label: "Active code reviews", tag: "E" },
  { id: "section-feed", label: "News feed", tag: "F" },
  { id: "section-related-people", label: "Related people", tag: "G" },
  { id: "section-search", label: "Search", tag: "H" },
];

export class Portal {
  private followed = new Set<string>();
  private feedView: FeedView = "most_recent";
  private feedRequestSeq = 0;
  private searchRequestSeq = 0;
  private lastRequestId = "";
  private page: HomePage | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private user: string,
  ) {
    this.buildSkeleton();
  }

  private section(id: string): HTMLElement {
    return this.root.querySelector(`#${id} .section-body`) as HTMLElement;
  }

  private buildSkeleton(): void {
    this.root.textContent = "";
    const banner = el("div", "error-banner");
    banner.id = "error-banner";
    banner.hidden = true;
    this.root.appendChild(banner);
    for (const spec of SECTIONS) {
      const section = el("section", "portal-section");
      section.id = spec.id;
      const heading = el("h3", "section-heading", `${spec.tag} · ${spec.label}`);
      section.appendChild(heading);
      section.appendChild(el("div", "section-body"));
      this.root.appendChild(section);
    }
    this.buildFeedControls();
    this.buildSearchBox();
  }

  private showError(message: string): void {
    const banner = this.root.querySelector("#error-banner") as HTMLElement;
    banner.textContent = message;
    banner.hidden = false;
  }

  private clearError(): void {
    const banner = this.root.querySelector("#error-banner") as HTMLElement;
    banner.hidden = true;
  }

  async load(): Promise<void> {
    try {
      const page = await this.api.homepage(this.user);
      this.page = page;
      this.clearError();
      this.renderAll(page);
    } catch (err) {
      this.showError(`Could not load homepage: ${(err as Error).message}`);
    }
  }

  private renderAll(page: HomePage): void {
    replaceChildren(this.section("section-user-details"), [
      renderUserDetails(page.user_details),
    ]);
    this.renderActiveSection("section-active-repositories", page.active_repositories);
    this.renderActiveSection("section-active-pull-requests", page.active_pull_requests);
    this.renderActiveSection("section-active-work-items", page.active_work_items);
    this.renderActiveSection("section-active-code-reviews", page.active_code_reviews);
    this.renderFeedItems(page.feed.map(renderFeedItem));
    replaceChildren(
      this.section("section-related-people"),
      page.related_people.map(renderRelatedPerson),
    );
  }

  private renderActiveSection(id: string, items: ActiveItem[]): void {
    const list = el("ul", "item-list");
    for (const item of items) {
      list.appendChild(
        renderActiveItem(item, this.followed.has(item.id), (it, next) =>
          void this.toggleFollow(it, next),
        ),
      );
    }
    replaceChildren(this.section(id), [list]);
  }

  // -- feed (F) --

  private buildFeedControls(): void {
    const body = this.section("section-feed");
    const selector = el("select", "feed-view-selector") as HTMLSelectElement;
    selector.id = "feed-view";
    for (const view of ["most_recent", "relevance", "team_only"]) {
      const option = el("option", "", view) as HTMLOptionElement;
      option.value = view;
      selector.appendChild(option);
    }
    selector.addEventListener("change", () => {
      this.feedView = selector.value as FeedView;
      void this.refreshFeed();
    });
    body.appendChild(selector);
    const list = el("ul", "item-list");
    list.id = "feed-list";
    body.appendChild(list);
  }

  private renderFeedItems(rows: HTMLElement[]): void {
    const list = this.root.querySelector("#feed-list") as HTMLElement;
    replaceChildren(list, rows);
  }

  async refreshFeed(): Promise<void> {
    const seq = ++this.feedRequestSeq;
    try {
      const response = await this.api.feed(this.user, this.feedView);
      if (seq !== this.feedRequestSeq) return; // a newer request won
      this.clearError();
      this.renderFeedItems(response.items.map(renderFeedItem));
    } catch (err) {
      if (seq !== this.feedRequestSeq) return;
      this.showError(`Feed unavailable: ${(err as Error).message}`);
    }
  }

  // -- follows (B-E) --

  async toggleFollow(item: ActiveItem, next: boolean): Promise<void> {
    try {
      const response = await this.api.follow(this.user, item.id, next);
      this.clearError();
      // Server state wins; no optimistic divergence after settle.
      this.followed = new Set(response.followed_items);
      if (this.page) this.renderAll(this.page);
      await this.refreshFeed();
    } catch (err) {
      if (err instanceof TypeError) {
        // Network is gone, not a rejection: stop offering toggles.
        for (const node of this.root.querySelectorAll(".follow-toggle")) {
          (node as HTMLButtonElement).disabled = true;
        }
        this.showError("Follow unavailable while offline");
        return;
      }
      this.showError(`Follow failed: ${(err as Error).message}`);
    }
  }

  // -- search (H) --

  private buildSearchBox(): void {
    const body = this.section("section-search");
    const input = el("input", "search-input") as HTMLInputElement;
    input.id = "search-input";
    input.placeholder = "Search artifacts and experts";
    const button = el("button", "search-button", "Search");
    button.id = "search-button";
    button.addEventListener("click", () => void this.search(input.value));
    input.addEventListener("keydown", (ev) => {
      if ((ev as KeyboardEvent).key === "Enter") void this.search(input.value);
    });
    const hint = el("div", "search-hint");
    hint.id = "search-hint";
    hint.hidden = true;
    const results = el("div", "search-results");
    results.id = "search-results";
    body.append(input, button, hint, results);
  }

  async search(text: string): Promise<void> {
    const seq = ++this.searchRequestSeq;
    const hint = this.root.querySelector("#search-hint") as HTMLElement;
    const resultsBox = this.root.querySelector("#search-results") as HTMLElement;
    try {
      const response = await this.api.recommend(text, "", this.user);
      if (seq !== this.searchRequestSeq) return;
      this.clearError();
      this.lastRequestId = response.request_id;
      if (response.flags.includes("empty-query")) {
        hint.textContent = "Type a few words about the task to search.";
        hint.hidden = false;
        resultsBox.textContent = "";
        return;
      }
      hint.hidden = true;
      const onClick = (result: { doc_id: string }) =>
        void this.api.click(this.lastRequestId, result.doc_id).catch(() => {
          // click telemetry is fire-and-forget
        });
      const artifacts = el("ul", "item-list results-artifacts");
      artifacts.id = "results-artifacts";
      for (const r of response.artifacts) artifacts.appendChild(renderResult(r, onClick));
      const experts = el("ul", "item-list results-experts");
      experts.id = "results-experts";
      for (const r of response.experts) experts.appendChild(renderResult(r, onClick));
      replaceChildren(resultsBox, [
        el("h4", "", "Artifacts"),
        artifacts,
        el("h4", "", "Experts"),
        experts,
      ]);
    } catch (err) {
      if (seq !== this.searchRequestSeq) return;
      this.showError(`Search failed: ${(err as Error).message}`);
    }
  }
}

export async function mountPortal(
  root: HTMLElement,
  api: ApiClient,
  user: string,
): Promise<Portal> {
  const portal = new Portal(root, api, user);
  await portal.load();
  await portal.refreshFeed();
  return portal;
}
