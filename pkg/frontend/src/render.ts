// Interface renderer: a pure function from (spec document, view states)
// to a DOM tree. All live behavior is injected through handlers so the
// session layer owns every network side effect.

import { renderChart } from './charts';
import { renderWidget } from './widgets';
import type { InterfaceDoc, Selection, ViewState } from './types';
import { SUPPORTED_SPEC_VERSION } from './types';

export interface RenderHandlers {
  onWidgetDelta?: (viewId: string, nodeId: number, selection: Selection) => void;
  onMark?: (viewId: string, category: string) => void;
  onBackground?: (viewId: string) => void;
}

function errorCard(message: string): HTMLElement {
  const card = document.createElement('div');
  card.className = 'error-card';
  card.setAttribute('role', 'alert');
  card.textContent = message;
  return card;
}

/** One view cell: chart, widget row, and a SQL inspector drawer. */
export function renderViewCell(
  doc: InterfaceDoc,
  viewId: string,
  state: ViewState,
  handlers: RenderHandlers,
): HTMLElement {
  const view = doc.views.find((v) => v.view_id === viewId);
  const cell = document.createElement('section');
  cell.className = 'view-cell';
  cell.dataset.viewId = viewId;
  if (!view) {
    cell.appendChild(errorCard(`no view ${viewId} in spec`));
    return cell;
  }

  try {
    const chart = renderChart(view.visualization, state.columns, state.rows, {
      onMark: (category) => handlers.onMark?.(viewId, category),
      onBackground: () => handlers.onBackground?.(viewId),
    });
    cell.appendChild(chart);

    const bar = document.createElement('div');
    bar.className = 'widget-bar';
    for (const widget of view.widgets) {
      const selection = state.assignment[String(widget.node_id)];
      bar.appendChild(
        renderWidget(widget, selection, (nodeId, sel) =>
          handlers.onWidgetDelta?.(viewId, nodeId, sel),
        ),
      );
    }
    cell.appendChild(bar);

    const drawer = document.createElement('details');
    drawer.className = 'sql-inspector';
    const summary = document.createElement('summary');
    summary.textContent = 'SQL';
    const sql = document.createElement('pre');
    sql.className = 'sql-text';
    sql.textContent = state.sql;
    drawer.append(summary, sql);
    cell.appendChild(drawer);
  } catch (exc) {
    // a broken view must not blank the page
    cell.replaceChildren(errorCard(`view ${viewId} failed to render: ${String(exc)}`));
  }
  return cell;
}

export function renderInterface(
  doc: InterfaceDoc,
  states: Record<string, ViewState>,
  handlers: RenderHandlers = {},
): HTMLElement {
  const root = document.createElement('div');
  root.className = 'interface';
  if (doc.spec_version !== SUPPORTED_SPEC_VERSION) {
    root.appendChild(
      errorCard(
        `unsupported spec version ${doc.spec_version} (this client speaks ${SUPPORTED_SPEC_VERSION})`,
      ),
    );
    return root;
  }
  for (const cellSpec of doc.layout.cells) {
    const state = states[cellSpec.view];
    if (!state) {
      root.appendChild(errorCard(`missing state for ${cellSpec.view}`));
      continue;
    }
    root.appendChild(renderViewCell(doc, cellSpec.view, state, handlers));
  }
  return root;
}
