// Pure DOM builders: API payloads in, elements out. No state, no fetching.

import type {
  ActiveItem,
  FeedItem,
  RankedResult,
  RelatedPerson,
  UserDetails,
} from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function linkOrSpan(text: string, url: string): HTMLElement {
  if (url) {
    const anchor = el("a", "item-link", text);
    anchor.setAttribute("href", url);
    anchor.setAttribute("target", "_blank");
    return anchor;
  }
  return el("span", "item-link", text);
}

export function renderUserDetails(details: UserDetails): HTMLElement {
  const box = el("div", "user-details");
  box.appendChild(el("h2", "user-name", details.name));
  if (details.title) box.appendChild(el("div", "user-title", details.title));
  const expertise = el("div", "user-expertise");
  for (const term of details.expertise) {
    expertise.appendChild(el("span", "expertise-term", term));
  }
  box.appendChild(expertise);
  return box;
}

export function renderActiveItem(
  item: ActiveItem,
  followed: boolean,
  onToggle: (item: ActiveItem, next: boolean) => void,
): HTMLElement {
  const row = el("li", "active-item");
  row.dataset.itemId = item.id;
  row.appendChild(linkOrSpan(item.title || item.id, item.url));
  if (item.state) row.appendChild(el("span", "item-state", item.state));
  const button = el("button", "follow-toggle", followed ? "Unfollow" : "Follow");
  button.dataset.followed = String(followed);
  button.addEventListener("click", () => onToggle(item, !followed));
  row.appendChild(button);
  return row;
}

export function renderFeedItem(item: FeedItem): HTMLElement {
  const row = el("li", "feed-item");
  row.dataset.eventId = item.event_id;
  if (item.followed) row.classList.add("followed");
  const line = `${item.timestamp}  ${item.actor}  ${item.event_kind}  ${item.subject}`;
  row.appendChild(el("span", "feed-line", line));
  if (item.followed) row.appendChild(el("span", "followed-badge", "following"));
  return row;
}

export function renderRelatedPerson(person: RelatedPerson): HTMLElement {
  const row = el("li", "related-person");
  row.appendChild(el("span", "person-name", person.name));
  row.appendChild(el("span", "person-count", `${person.shared_count} shared`));
  return row;
}

export function renderResult(
  result: RankedResult,
  onClick: (result: RankedResult) => void,
): HTMLElement {
  const row = el("li", "search-result");
  row.dataset.docId = result.doc_id;
  const proximity = result.proximity === null ? "-" : String(result.proximity);
  const label = `${result.final_rank}. ${result.doc_id}`;
  const button = el("button", "result-link", label);
  button.addEventListener("click", () => onClick(result));
  row.appendChild(button);
  row.appendChild(
    el("span", "result-meta", `relevance ${result.relevance.toFixed(2)} · proximity ${proximity}`),
  );
  return row;
}

export function replaceChildren(parent: HTMLElement, children: HTMLElement[]): void {
  parent.textContent = "";
  for (const child of children) parent.appendChild(child);
}
