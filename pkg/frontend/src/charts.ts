/**
 * Inline SVG chart renderers, one per visualization kind.
 *
 * Every renderer is a pure function of (columns, rows) plus two optional
 * gesture callbacks and returns a detached element:
 *
 *   - marks carry data-category with the first column's value, so a click
 *     anywhere on a mark resolves to one category;
 *   - a click on empty chart background fires onBackground (the deselect
 *     gesture);
 *   - the rendered dataset is mirrored into data-dataset on the root for
 *     inspection and tests.
 *
 * choropleth draws region outlines when the registry covers every row,
 * and otherwise falls back to a clickable bar chart.
 */

import { hasAllRegions, regionPath } from './regions';
import type { Cell, ColumnSpec, VisKind } from './types';

export interface ChartHandlers {
  onMark?: (category: string) => void;
  onBackground?: () => void;
}

const WIDTH = 640;
const HEIGHT = 280;
const PAD = 36;

const SVG_NS = 'http://www.w3.org/2000/svg';

function svgElement(tag: string, attrs: Record<string, string | number>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) {
    el.setAttribute(k, String(v));
  }
  return el;
}

function chartRoot(kind: VisKind, rows: Cell[][]): HTMLDivElement {
  const root = document.createElement('div');
  root.className = `chart chart-${kind}`;
  root.dataset.kind = kind;
  root.dataset.dataset = JSON.stringify(rows);
  return root;
}

function wireClicks(root: HTMLElement, handlers: ChartHandlers): void {
  root.addEventListener('click', (ev) => {
    const target = ev.target as Element | null;
    const mark = target?.closest?.('[data-category]');
    if (mark instanceof Element) {
      handlers.onMark?.(mark.getAttribute('data-category') ?? '');
    } else {
      handlers.onBackground?.();
    }
  });
}

function asNumber(cell: Cell): number {
  const n = typeof cell === 'number' ? cell : Number(cell);
  return Number.isFinite(n) ? n : 0;
}

function extent(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    // flat series still needs a nonzero span to scale into
    hi = lo + 1;
  }
  return [lo, hi];
}

function baseSvg(): SVGElement {
  return svgElement('svg', {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: '100%',
    role: 'img',
  });
}

export function renderLine(
  columns: ColumnSpec[],
  rows: Cell[][],
  handlers: ChartHandlers = {},
): HTMLElement {
  const root = chartRoot('line', rows);
  const svg = baseSvg();
  const ys = rows.map((r) => asNumber(r[1] ?? null));
  const [lo, hi] = extent(ys);
  const step = rows.length > 1 ? (WIDTH - 2 * PAD) / (rows.length - 1) : 0;
  const x = (i: number) => PAD + i * step;
  const y = (v: number) => HEIGHT - PAD - ((v - lo) / (hi - lo)) * (HEIGHT - 2 * PAD);

  const points = rows.map((r, i) => `${x(i)},${y(asNumber(r[1] ?? null))}`).join(' ');
  svg.appendChild(
    svgElement('polyline', { points, fill: 'none', stroke: '#2563eb', 'stroke-width': 2 }),
  );
  rows.forEach((r, i) => {
    const dot = svgElement('circle', {
      cx: x(i),
      cy: y(asNumber(r[1] ?? null)),
      r: 4,
      fill: '#2563eb',
    });
    dot.setAttribute('data-category', String(r[0] ?? ''));
    svg.appendChild(dot);
  });
  root.appendChild(svg);
  appendAxisLabels(root, columns);
  wireClicks(root, handlers);
  return root;
}

export function renderBar(
  columns: ColumnSpec[],
  rows: Cell[][],
  handlers: ChartHandlers = {},
): HTMLElement {
  const root = chartRoot('bar', rows);
  const svg = baseSvg();
  const ys = rows.map((r) => asNumber(r[1] ?? null));
  const [, hi] = extent([0, ...ys]);
  const band = rows.length > 0 ? (WIDTH - 2 * PAD) / rows.length : 0;

  rows.forEach((r, i) => {
    const value = asNumber(r[1] ?? null);
    const h = (value / hi) * (HEIGHT - 2 * PAD);
    const rect = svgElement('rect', {
      x: PAD + i * band + band * 0.1,
      y: HEIGHT - PAD - h,
      width: band * 0.8,
      height: Math.max(h, 1),
      fill: '#2563eb',
    });
    rect.setAttribute('data-category', String(r[0] ?? ''));
    svg.appendChild(rect);

    const label = svgElement('text', {
      x: PAD + i * band + band / 2,
      y: HEIGHT - PAD + 14,
      'text-anchor': 'middle',
      'font-size': 11,
    });
    label.textContent = String(r[0] ?? '');
    svg.appendChild(label);
  });
  root.appendChild(svg);
  appendAxisLabels(root, columns);
  wireClicks(root, handlers);
  return root;
}

export function renderScatter(
  columns: ColumnSpec[],
  rows: Cell[][],
  handlers: ChartHandlers = {},
): HTMLElement {
  const root = chartRoot('scatter', rows);
  const svg = baseSvg();
  const xs = rows.map((r) => asNumber(r[0] ?? null));
  const ys = rows.map((r) => asNumber(r[1] ?? null));
  const [xlo, xhi] = extent(xs);
  const [ylo, yhi] = extent(ys);
  rows.forEach((r, i) => {
    const dot = svgElement('circle', {
      cx: PAD + (((xs[i] ?? 0) - xlo) / (xhi - xlo)) * (WIDTH - 2 * PAD),
      cy: HEIGHT - PAD - (((ys[i] ?? 0) - ylo) / (yhi - ylo)) * (HEIGHT - 2 * PAD),
      r: 4,
      fill: '#2563eb',
      'fill-opacity': 0.7,
    });
    dot.setAttribute('data-category', String(r[0] ?? ''));
    svg.appendChild(dot);
  });
  root.appendChild(svg);
  appendAxisLabels(root, columns);
  wireClicks(root, handlers);
  return root;
}

export function renderTable(columns: ColumnSpec[], rows: Cell[][]): HTMLElement {
  const root = chartRoot('table', rows);
  const table = document.createElement('table');
  const head = table.createTHead().insertRow();
  for (const c of columns) {
    const th = document.createElement('th');
    th.textContent = c.name;
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (const r of rows) {
    const tr = body.insertRow();
    for (const cell of r) {
      tr.insertCell().textContent = cell === null ? '' : String(cell);
    }
  }
  root.appendChild(table);
  return root;
}

export function renderSingleValue(columns: ColumnSpec[], rows: Cell[][]): HTMLElement {
  const root = chartRoot('single_value', rows);
  const value = document.createElement('div');
  value.className = 'single-value';
  value.textContent = String(rows[0]?.[0] ?? '');
  const caption = document.createElement('div');
  caption.className = 'single-value-label';
  caption.textContent = columns[0]?.name ?? '';
  root.append(value, caption);
  return root;
}

export function renderChoropleth(
  columns: ColumnSpec[],
  rows: Cell[][],
  handlers: ChartHandlers = {},
): HTMLElement {
  const names = rows.map((r) => String(r[0] ?? ''));
  if (!hasAllRegions(names)) {
    const fallback = renderBar(columns, rows, handlers);
    fallback.classList.add('choropleth-fallback');
    return fallback;
  }
  const root = chartRoot('choropleth', rows);
  const svg = svgElement('svg', { viewBox: '0 0 960 600', width: '100%', role: 'img' });
  const ys = rows.map((r) => asNumber(r[1] ?? null));
  const [lo, hi] = extent(ys);
  rows.forEach((r, i) => {
    const name = String(r[0] ?? '');
    const share = ((ys[i] ?? 0) - lo) / (hi - lo);
    const region = svgElement('path', {
      d: regionPath(name) ?? '',
      fill: '#2563eb',
      'fill-opacity': 0.25 + 0.75 * share,
      stroke: '#ffffff',
    });
    region.setAttribute('data-category', name);
    svg.appendChild(region);
  });
  root.appendChild(svg);
  wireClicks(root, handlers);
  return root;
}

function appendAxisLabels(root: HTMLElement, columns: ColumnSpec[]): void {
  if (columns.length < 2) return;
  const caption = document.createElement('div');
  caption.className = 'axis-caption';
  caption.textContent = `${columns[1]?.name} by ${columns[0]?.name}`;
  root.appendChild(caption);
}

export function renderChart(
  kind: VisKind,
  columns: ColumnSpec[],
  rows: Cell[][],
  handlers: ChartHandlers = {},
): HTMLElement {
  switch (kind) {
    case 'choropleth':
      return renderChoropleth(columns, rows, handlers);
    case 'line':
      return renderLine(columns, rows, handlers);
    case 'bar':
      return renderBar(columns, rows, handlers);
    case 'scatter':
      return renderScatter(columns, rows, handlers);
    case 'single_value':
      return renderSingleValue(columns, rows);
    case 'table':
      return renderTable(columns, rows);
  }
}
