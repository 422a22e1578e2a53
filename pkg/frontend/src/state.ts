import {
  ApiError,
  ExplanationPayload,
  PredictedLink,
  ServiceClient,
  Subgraph,
  TECHNIQUES,
  Technique,
} from './api.js';

export type PanelStatus = 'idle' | 'loading' | 'loaded' | 'no-evidence' | 'error';

export interface PanelState {
  status: PanelStatus;
  explanation?: ExplanationPayload;
  message?: string;
}

export type VerdictStatus = 'recorded' | 'already-recorded' | 'pending';

export interface ReviewViewState {
  subgraph: Subgraph | null;
  selectedLink: PredictedLink | null;
  panels: Record<Technique, PanelState>;
  verdicts: Map<string, VerdictStatus>; // key: `${link_id}:${technique}`
  annotator: string;
  banner: string | null;
}

export function emptyPanels(): Record<Technique, PanelState> {
  return {
    verification: { status: 'idle' },
    anchors: { status: 'idle' },
    path_ranking: { status: 'idle' },
  };
}

export function initialState(): ReviewViewState {
  return {
    subgraph: null,
    selectedLink: null,
    panels: emptyPanels(),
    verdicts: new Map(),
    annotator: '',
    banner: null,
  };
}

export function verdictKey(linkId: string, technique: Technique): string {
  return `${linkId}:${technique}`;
}

/** Owns the view state and the talking-to-the-service choreography; rendering
 *  subscribes to change notifications and stays dumb. */
export class ReviewStore {
  state: ReviewViewState = initialState();
  private listeners: Array<() => void> = [];

  constructor(private client: ServiceClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  setAnnotator(annotator: string): void {
    this.state.annotator = annotator;
    this.notify();
  }

  async loadSubgraph(nodeId: string, radius = 2): Promise<void> {
    try {
      this.state.subgraph = await this.client.subgraph(nodeId, radius);
      this.state.banner = null;
      // a previously selected link must stay a member of the displayed list
      const ids = new Set(this.state.subgraph.predicted_links.map((p) => p.link_id));
      if (this.state.selectedLink && !ids.has(this.state.selectedLink.link_id)) {
        this.state.selectedLink = null;
        this.state.panels = emptyPanels();
      }
    } catch (err) {
      this.state.banner = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }

  /** Selecting a predicted link fires all three explanation fetches
   *  concurrently; each panel resolves on its own. */
  selectLink(link: PredictedLink): Promise<void[]> {
    const shown = this.state.subgraph?.predicted_links ?? [];
    if (!shown.some((p) => p.link_id === link.link_id)) {
      throw new Error(`link ${link.link_id} is not in the displayed predictions`);
    }
    this.state.selectedLink = link;
    this.state.panels = {
      verification: { status: 'loading' },
      anchors: { status: 'loading' },
      path_ranking: { status: 'loading' },
    };
    this.notify();
    return Promise.all(TECHNIQUES.map((t) => this.fetchPanel(link.link_id, t)));
  }

  private async fetchPanel(linkId: string, technique: Technique): Promise<void> {
    try {
      const explanation = await this.client.explanation(linkId, technique);
      this.state.panels[technique] = { status: 'loaded', explanation };
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.state.panels[technique] = { status: 'no-evidence', message: err.detail };
      } else {
        this.state.panels[technique] = {
          status: 'error',
          message: err instanceof Error ? err.message : String(err),
        };
      }
    }
    this.notify();
  }

  canSubmit(technique: Technique): boolean {
    return (
      this.state.selectedLink !== null &&
      this.state.annotator.trim() !== '' &&
      this.state.panels[technique].status === 'loaded'
    );
  }

  async submitVerdict(technique: Technique, verdict: 'agree' | 'disagree'): Promise<void> {
    const link = this.state.selectedLink;
    if (!link || !this.canSubmit(technique)) {
      throw new Error('verdict requires a selected link, an annotator id, and a loaded panel');
    }
    const key = verdictKey(link.link_id, technique);
    try {
      const recorded = await this.client.submitFeedback(
        link.link_id,
        technique,
        this.state.annotator.trim(),
        verdict,
      );
      this.state.verdicts.set(key, recorded ? 'recorded' : 'already-recorded');
    } catch (err) {
      // keep the verdict pending so the user can retry
      this.state.verdicts.set(key, 'pending');
      this.state.banner = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }
}
