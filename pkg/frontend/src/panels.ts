import {
  AgreementReport,
  AnchorsPayload,
  PathPayload,
  PredictedLink,
  Subgraph,
  VerificationPayload,
} from './api.js';
import { PanelState } from './state.js';

// Pure DOM builders for the right-hand side of the console. Everything shown
// comes verbatim from a service payload; these functions never invent text.

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

function emptyState(container: HTMLElement, message: string): void {
  container.appendChild(el('p', 'empty-state', message));
}

function panelShell(title: string, state: PanelState): HTMLElement {
  const panel = el('section', 'panel');
  panel.appendChild(el('h3', undefined, title));
  if (state.status === 'idle') emptyState(panel, 'Select a predicted link to load evidence.');
  if (state.status === 'loading') emptyState(panel, 'Loading…');
  if (state.status === 'no-evidence') emptyState(panel, 'No evidence of this kind.');
  if (state.status === 'error') emptyState(panel, `Failed to load: ${state.message ?? 'unknown error'}`);
  return panel;
}

/** Wrap every occurrence of either display name in <mark>. Case-insensitive,
 *  leaves the rest of the snippet untouched. */
export function highlightNames(snippet: string, names: string[]): DocumentFragment {
  const fragment = document.createDocumentFragment();
  const escaped = names
    .filter((n) => n.length > 0)
    .map((n) => n.replace(/[.*+?^${}()|[\]\\]/g, '\\$&'));
  if (escaped.length === 0) {
    fragment.appendChild(document.createTextNode(snippet));
    return fragment;
  }
  const pattern = new RegExp(`(${escaped.join('|')})`, 'gi');
  for (const piece of snippet.split(pattern)) {
    if (piece === '') continue;
    if (pattern.test(piece) && escaped.some((e) => new RegExp(`^${e}$`, 'i').test(piece))) {
      const mark = el('mark', 'name-hit', piece);
      fragment.appendChild(mark);
    } else {
      fragment.appendChild(document.createTextNode(piece));
    }
  }
  return fragment;
}

export function renderVerificationPanel(state: PanelState): HTMLElement {
  const panel = panelShell('Verification', state);
  if (state.status !== 'loaded' || state.explanation?.technique !== 'verification') return panel;
  const payload: VerificationPayload = state.explanation.payload;
  if (payload.passages.length === 0) {
    emptyState(panel, 'No evidence of this kind.');
    return panel;
  }
  const list = el('ol', 'passages');
  for (const passage of payload.passages) {
    const item = el('li', 'passage');
    const snippet = el('blockquote', 'snippet');
    snippet.appendChild(highlightNames(passage.snippet, [payload.link.u, payload.link.v]));
    item.appendChild(snippet);
    const both = passage.mentions.u_found && passage.mentions.v_found;
    item.appendChild(
      el('span', 'meta', `${passage.doc_id} · ${both ? 'both mentioned' : 'one mentioned'}`),
    );
    list.appendChild(item);
  }
  panel.appendChild(list);
  return panel;
}

export function renderAnchorsPanel(state: PanelState): HTMLElement {
  const panel = panelShell('Anchors', state);
  if (state.status !== 'loaded' || state.explanation?.technique !== 'anchors') return panel;
  const payload: AnchorsPayload = state.explanation.payload;
  const list = el('ul', 'predicates');
  for (const predicate of payload.predicates) {
    const symbol = { '==': '=', '<=': '≤', '>=': '≥' }[predicate.comparator] ?? predicate.comparator;
    list.appendChild(el('li', 'predicate', `${predicate.feature} ${symbol} ${predicate.constant}`));
  }
  panel.appendChild(list);
  const pct = (payload.precision * 100).toFixed(1);
  panel.appendChild(
    el('p', 'precision', `When these conditions hold, the model links ${pct}% of the time.`),
  );
  panel.appendChild(
    el('span', 'meta', `coverage ${(payload.coverage * 100).toFixed(1)}% · ${payload.samples_used} samples`),
  );
  return panel;
}

export function renderPathPanel(state: PanelState): HTMLElement {
  const panel = panelShell('Connecting paths', state);
  if (state.status !== 'loaded' || state.explanation?.technique !== 'path_ranking') return panel;
  const payload: PathPayload = state.explanation.payload;
  if (!payload.top_path) {
    emptyState(panel, 'No evidence of this kind.');
    return panel;
  }
  const top = el('div', 'top-path');
  top.appendChild(el('strong', undefined, 'Top path'));
  top.appendChild(el('p', 'path-line', renderPathLine(payload.top_path)));
  panel.appendChild(top);
  const alternatives = payload.paths.slice(1);
  if (alternatives.length > 0) {
    panel.appendChild(el('strong', undefined, 'Alternatives'));
    const list = el('ol', 'alternatives');
    for (const alt of alternatives) {
      list.appendChild(el('li', 'path-line', `${renderPathLine(alt)} (${alt.score.toFixed(3)})`));
    }
    panel.appendChild(list);
  }
  return panel;
}

function renderPathLine(path: { nodes: string[]; relations: string[] }): string {
  const parts: string[] = [path.nodes[0]];
  for (let i = 0; i < path.relations.length; i++) {
    parts.push(`—${path.relations[i]}→`, path.nodes[i + 1]);
  }
  return parts.join(' ');
}

/** Two-column side-by-side attribute table for the pair of nodes. */
export function renderComparisonTable(subgraph: Subgraph, link: PredictedLink): HTMLElement {
  const wrapper = el('section', 'panel comparison');
  wrapper.appendChild(el('h3', undefined, 'Node comparison'));
  const u = subgraph.nodes.find((n) => n.id === link.u);
  const v = subgraph.nodes.find((n) => n.id === link.v);
  if (!u || !v) {
    emptyState(wrapper, 'Nodes not in the current view.');
    return wrapper;
  }
  const table = el('table', 'attr-table');
  const head = el('tr');
  head.appendChild(el('th', undefined, ''));
  head.appendChild(el('th', undefined, u.id));
  head.appendChild(el('th', undefined, v.id));
  table.appendChild(head);
  const keys = [...new Set([...Object.keys(u.attributes), ...Object.keys(v.attributes)])].sort();
  for (const key of keys) {
    const row = el('tr', u.attributes[key] === v.attributes[key] ? 'attr-same' : 'attr-diff');
    row.appendChild(el('th', undefined, key));
    row.appendChild(el('td', undefined, u.attributes[key] ?? '—'));
    row.appendChild(el('td', undefined, v.attributes[key] ?? '—'));
    table.appendChild(row);
  }
  wrapper.appendChild(table);
  return wrapper;
}

export function renderDashboard(report: AgreementReport): HTMLElement {
  const wrapper = el('section', 'panel dashboard');
  wrapper.appendChild(el('h3', undefined, 'Annotator agreement'));
  const table = el('table', 'agreement-table');
  const head = el('tr');
  for (const column of ['Technique', 'Agreements', 'Total', 'Rate']) {
    head.appendChild(el('th', undefined, column));
  }
  table.appendChild(head);
  for (const technique of Object.keys(report).sort()) {
    const entry = report[technique];
    const row = el('tr', 'agreement-row');
    row.appendChild(el('th', undefined, technique));
    row.appendChild(el('td', undefined, String(entry.agreements)));
    row.appendChild(el('td', undefined, String(entry.total)));
    row.appendChild(
      el('td', undefined, entry.rate === null ? '—' : `${(entry.rate * 100).toFixed(0)}%`),
    );
    table.appendChild(row);
  }
  wrapper.appendChild(table);
  return wrapper;
}
