import { ServiceClient, TECHNIQUES, Technique } from './api.js';
import { renderSubgraph } from './graph.js';
import {
  renderAnchorsPanel,
  renderComparisonTable,
  renderDashboard,
  renderPathPanel,
  renderVerificationPanel,
} from './panels.js';
import { ReviewStore, verdictKey } from './state.js';

const ANNOTATOR_KEY = 'linkexplain.annotator';

const PANEL_RENDERERS: Record<Technique, typeof renderVerificationPanel> = {
  verification: renderVerificationPanel,
  anchors: renderAnchorsPanel,
  path_ranking: renderPathPanel,
};

function feedbackRow(store: ReviewStore, technique: Technique): HTMLElement {
  const row = document.createElement('div');
  row.className = 'feedback-row';
  const link = store.state.selectedLink;
  const status = link ? store.state.verdicts.get(verdictKey(link.link_id, technique)) : undefined;
  for (const verdict of ['agree', 'disagree'] as const) {
    const button = document.createElement('button');
    button.textContent = verdict;
    button.className = `verdict ${verdict}`;
    button.disabled = !store.canSubmit(technique) || status === 'recorded';
    button.addEventListener('click', () => void store.submitVerdict(technique, verdict));
    row.appendChild(button);
  }
  if (status) {
    const badge = document.createElement('span');
    badge.className = `verdict-status ${status}`;
    badge.textContent =
      status === 'recorded' ? 'recorded' : status === 'already-recorded' ? 'already recorded' : 'pending — retry';
    row.appendChild(badge);
  }
  return row;
}

export function mountApp(root: HTMLElement, client: ServiceClient): ReviewStore {
  const store = new ReviewStore(client);

  root.innerHTML = `
    <header>
      <h1>Link review console</h1>
      <form id="focus-form">
        <input id="focus-node" placeholder="node id" />
        <input id="focus-radius" type="number" value="2" min="0" max="6" />
        <button type="submit">Load subgraph</button>
      </form>
      <label>Annotator <input id="annotator" placeholder="your id" /></label>
    </header>
    <div id="banner" hidden></div>
    <main>
      <div id="canvas"></div>
      <aside id="panels"></aside>
    </main>
    <footer><div id="dashboard"></div></footer>
  `;

  const annotatorInput = root.querySelector<HTMLInputElement>('#annotator')!;
  annotatorInput.value = localStorage.getItem(ANNOTATOR_KEY) ?? '';
  store.setAnnotator(annotatorInput.value);
  annotatorInput.addEventListener('input', () => {
    localStorage.setItem(ANNOTATOR_KEY, annotatorInput.value);
    store.setAnnotator(annotatorInput.value);
  });

  const form = root.querySelector<HTMLFormElement>('#focus-form')!;
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const nodeId = root.querySelector<HTMLInputElement>('#focus-node')!.value.trim();
    const radius = Number(root.querySelector<HTMLInputElement>('#focus-radius')!.value);
    if (nodeId) void store.loadSubgraph(nodeId, radius);
  });

  const refreshDashboard = async () => {
    try {
      const report = await client.agreementReport();
      root.querySelector('#dashboard')!.replaceChildren(renderDashboard(report));
    } catch {
      // dashboard is best-effort; the banner already covers hard failures
    }
  };

  store.onChange(() => {
    const banner = root.querySelector<HTMLElement>('#banner')!;
    banner.hidden = store.state.banner === null;
    banner.textContent = store.state.banner ?? '';

    const canvas = root.querySelector<HTMLElement>('#canvas')!;
    if (store.state.subgraph) {
      renderSubgraph(canvas, store.state.subgraph, {
        onSelectLink: (link) => void store.selectLink(link),
      });
    }

    const panels = root.querySelector<HTMLElement>('#panels')!;
    panels.replaceChildren();
    for (const technique of TECHNIQUES) {
      const panel = PANEL_RENDERERS[technique](store.state.panels[technique]);
      panel.appendChild(feedbackRow(store, technique));
      panels.appendChild(panel);
    }
    if (store.state.subgraph && store.state.selectedLink) {
      panels.appendChild(renderComparisonTable(store.state.subgraph, store.state.selectedLink));
    }
  });

  // refresh the dashboard after every verdict round-trip
  const originalSubmit = store.submitVerdict.bind(store);
  store.submitVerdict = async (technique, verdict) => {
    await originalSubmit(technique, verdict);
    await refreshDashboard();
  };

  void refreshDashboard();
  return store;
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  mountApp(document.getElementById('app')!, new ServiceClient(''));
}
