import * as d3 from 'd3';
import { PredictedLink, Subgraph } from './api.js';

interface SimNode extends d3.SimulationNodeDatum {
  id: string;
  label: string;
}

interface SimLink extends d3.SimulationLinkDatum<SimNode> {
  kind: 'existing' | 'predicted';
  relation: string;
  prediction?: PredictedLink;
}

const LABEL_COLOR: Record<string, string> = {
  Person: '#4e79a7',
  Organization: '#f28e2b',
  Location: '#59a14f',
};

export interface SubgraphCanvasOptions {
  width?: number;
  height?: number;
  onSelectLink?: (link: PredictedLink) => void;
  /** Skip force-layout ticks (tests only care about element counts). */
  runSimulation?: boolean;
}

/** Render the node-link view into `container` as an SVG. Existing edges are
 *  solid gray; predicted links are dashed red and clickable. */
export function renderSubgraph(
  container: HTMLElement,
  subgraph: Subgraph,
  options: SubgraphCanvasOptions = {},
): SVGSVGElement {
  const width = options.width ?? 720;
  const height = options.height ?? 520;
  container.replaceChildren();

  const nodes: SimNode[] = subgraph.nodes.map((n) => ({ id: n.id, label: n.label }));
  const links: SimLink[] = [
    ...subgraph.edges.map(
      (e): SimLink => ({ source: e.source, target: e.target, kind: 'existing', relation: e.relation_type }),
    ),
    ...subgraph.predicted_links.map(
      (p): SimLink => ({ source: p.u, target: p.v, kind: 'predicted', relation: 'predicted', prediction: p }),
    ),
  ];

  const svg = d3
    .select(container)
    .append('svg')
    .attr('viewBox', `0 0 ${width} ${height}`)
    .attr('width', width)
    .attr('height', height);

  const linkSel = svg
    .append('g')
    .selectAll('line')
    .data(links)
    .join('line')
    .attr('class', (d) => (d.kind === 'predicted' ? 'link predicted' : 'link existing'))
    .attr('stroke', (d) => (d.kind === 'predicted' ? '#e15759' : '#bbb'))
    .attr('stroke-dasharray', (d) => (d.kind === 'predicted' ? '6 3' : null))
    .attr('stroke-width', (d) => (d.kind === 'predicted' ? 2.5 : 1.2));

  linkSel
    .filter((d) => d.kind === 'predicted')
    .style('cursor', 'pointer')
    .on('click', (_event, d) => {
      if (d.prediction && options.onSelectLink) options.onSelectLink(d.prediction);
    });

  const nodeSel = svg
    .append('g')
    .selectAll('circle')
    .data(nodes)
    .join('circle')
    .attr('class', 'node')
    .attr('r', (d) => (d.id === subgraph.center ? 9 : 6))
    .attr('fill', (d) => LABEL_COLOR[d.label] ?? '#9c755f');

  nodeSel.append('title').text((d) => d.id);

  const simulation = d3
    .forceSimulation(nodes)
    .force('charge', d3.forceManyBody().strength(-120))
    .force('center', d3.forceCenter(width / 2, height / 2))
    .force(
      'link',
      d3
        .forceLink<SimNode, SimLink>(links)
        .id((d) => d.id)
        .distance(60),
    )
    .stop();

  if (options.runSimulation !== false) {
    simulation.tick(120);
  }

  linkSel
    .attr('x1', (d) => (d.source as SimNode).x ?? 0)
    .attr('y1', (d) => (d.source as SimNode).y ?? 0)
    .attr('x2', (d) => (d.target as SimNode).x ?? 0)
    .attr('y2', (d) => (d.target as SimNode).y ?? 0);
  nodeSel.attr('cx', (d) => d.x ?? 0).attr('cy', (d) => d.y ?? 0);

  return svg.node() as SVGSVGElement;
}
