// Typed client for the recommendation service. The UI talks to the server
// only through these endpoints.

export interface CueChip {
  label: string;
  source: string;
  weight: number;
}

export interface ItemCard {
  item_id: string;
  board?: string;
  title?: string;
  cues?: CueChip[];
  image_scent?: number | null;
  score?: number;
}

export interface DietView {
  consumed_cues: Record<string, number>;
  viewed_items: string[];
  distinct_cues: number;
  total_consumed: number;
  items_viewed: number;
}

export interface CostView {
  steps: number;
  retrievals: number;
  elapsed_ms: number;
}

export interface SessionView {
  id: string;
  user: string;
  query: string;
  phase: 'results' | 'recommended';
  patch: ItemCard[];
  diet: DietView;
  cost: CostView;
  no_matches: boolean;
  warning: string | null;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export class ForageApi {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; items: number; dim: number }> {
    return this.request('/health');
  }

  createSession(user: string, query: string): Promise<SessionView> {
    return this.request('/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ user, query }),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  selectCue(sessionId: string, cueLabel: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/preferences`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ cue_label: cueLabel }),
    });
  }
}
