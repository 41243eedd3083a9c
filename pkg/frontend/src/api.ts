// Typed client for the sociograph HTTP API. All rendering data comes from
// these endpoints; the portal computes no scores of its own.

export interface RankedResult {
  doc_id: string;
  doc_kind: string;
  relevance: number;
  proximity: number | null;
  final_rank: number;
}

export interface RecommendResponse {
  request_id: string;
  artifacts: RankedResult[];
  experts: RankedResult[];
  flags: string[];
}

export interface FeedItem {
  event_id: string;
  actor: string;
  subject: string;
  event_kind: string;
  timestamp: string;
  repo: string;
  followed: boolean;
}

export interface ActiveItem {
  id: string;
  title: string;
  state: string;
  repo: string;
  last_event_at: string;
  url: string;
}

export interface UserDetails {
  user: string;
  name: string;
  title: string;
  expertise: string[];
}

export interface RelatedPerson {
  user: string;
  name: string;
  shared_count: number;
}

export interface HomePage {
  user_details: UserDetails;
  active_repositories: ActiveItem[];
  active_pull_requests: ActiveItem[];
  active_work_items: ActiveItem[];
  active_code_reviews: ActiveItem[];
  feed: FeedItem[];
  related_people: RelatedPerson[];
}

export type FeedView = "most_recent" | "relevance" | "team_only";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      try {
        const body = await response.json();
        if (body && body.message) message = body.message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, message);
    }
    return (await response.json()) as T;
  }

  homepage(user: string): Promise<HomePage> {
    return this.request(`/homepage/${encodeURIComponent(user)}`);
  }

  feed(user: string, view: FeedView, limit = 25): Promise<{ items: FeedItem[] }> {
    const params = new URLSearchParams({ view, limit: String(limit) });
    return this.request(`/feed/${encodeURIComponent(user)}?${params}`);
  }

  recommend(title: string, description: string, requester: string, k = 10): Promise<RecommendResponse> {
    return this.request(`/recommend`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ title, description, requester, k }),
    });
  }

  follow(user: string, item: string, followed: boolean): Promise<{ followed_items: string[] }> {
    return this.request(`/follow`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ user, item, followed }),
    });
  }

  click(requestId: string, docId: string): Promise<{ status: string }> {
    return this.request(`/click`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ request_id: requestId, doc_id: docId }),
    });
  }
}
