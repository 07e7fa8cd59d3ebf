// Live session over one created interface.
//
// The server is the source of truth: widget state and datasets only ever
// change by applying a ViewState the server returned. Each user gesture
// maps to exactly one state call per driven view, queued through the
// ApiClient so concurrent gestures serialize. No SQL is ever built here.

import type { ApiClient } from './api';
import { renderInterface, renderViewCell } from './render';
import { controlSnapshot } from './widgets';
import type {
  Assignment,
  InterfaceDoc,
  InterfaceResponse,
  Selection,
  ViewState,
} from './types';

export type ErrorSink = (message: string, retry: () => void) => void;

export class ClientSession {
  readonly interfaceId: string;
  readonly doc: InterfaceDoc;
  readonly states: Record<string, ViewState>;
  /** Creation-time assignments, used by restore_default deselects. */
  private readonly initial: Record<string, Assignment>;
  private root: HTMLElement;

  constructor(
    private api: ApiClient,
    response: InterfaceResponse,
    private mount: HTMLElement,
    private onError: ErrorSink = () => {},
  ) {
    this.interfaceId = response.interface_id;
    this.doc = response.interface;
    this.states = { ...response.state };
    this.initial = Object.fromEntries(
      Object.entries(response.state).map(([id, s]) => [id, { ...s.assignment }]),
    );
    this.root = this.renderAll();
  }

  private handlers() {
    return {
      onWidgetDelta: (viewId: string, nodeId: number, sel: Selection) =>
        this.sendDelta(viewId, { [String(nodeId)]: sel }),
      onMark: (viewId: string, category: string) => this.markClick(viewId, category),
      onBackground: (viewId: string) => this.deselect(viewId),
    };
  }

  private renderAll(): HTMLElement {
    const root = renderInterface(this.doc, this.states, this.handlers());
    this.mount.replaceChildren(root);
    return root;
  }

  /** Re-render just the cell whose state changed. */
  private applyViewState(state: ViewState): void {
    this.states[state.view_id] = state;
    const stale = this.root.querySelector(`[data-view-id="${state.view_id}"]`);
    const fresh = renderViewCell(this.doc, state.view_id, state, this.handlers());
    if (stale) {
      stale.replaceWith(fresh);
    } else {
      this.root.appendChild(fresh);
    }
  }

  private sendDelta(viewId: string, delta: Record<string, Selection>): void {
    const attempt = () => {
      this.api
        .updateState(this.interfaceId, viewId, delta)
        .then((state) => this.applyViewState(state))
        .catch((exc) => this.onError(String(exc), attempt));
    };
    attempt();
  }

  /** Mark click on a source view drives each interaction wired to it. */
  private markClick(viewId: string, category: string): void {
    for (const inter of this.doc.interactions) {
      if (inter.source_view !== viewId) continue;
      const delta: Record<string, Selection> = {};
      if (inter.opt_node !== null) {
        delta[String(inter.opt_node)] = { kind: 'opt', on: true };
      }
      delta[String(inter.value_node)] = { kind: 'value', value: category };
      this.sendDelta(inter.target_view, delta);
    }
  }

  /** Background click clears each interaction per its deselect policy. */
  private deselect(viewId: string): void {
    for (const inter of this.doc.interactions) {
      if (inter.source_view !== viewId) continue;
      if (inter.on_deselect === 'opt_off' && inter.opt_node !== null) {
        this.sendDelta(inter.target_view, {
          [String(inter.opt_node)]: { kind: 'opt', on: false },
        });
      } else {
        const fallback = this.initial[inter.target_view]?.[String(inter.value_node)];
        if (fallback) {
          this.sendDelta(inter.target_view, {
            [String(inter.value_node)]: fallback,
          });
        }
      }
    }
  }

  /** Rows currently rendered in a view's chart (parsed back from the DOM). */
  datasetOf(viewId: string): unknown[][] {
    const chart = this.root.querySelector(
      `[data-view-id="${viewId}"] .chart`,
    ) as HTMLElement | null;
    return chart ? JSON.parse(chart.dataset.dataset ?? '[]') : [];
  }

  sqlOf(viewId: string): string {
    const pre = this.root.querySelector(`[data-view-id="${viewId}"] .sql-text`);
    return pre?.textContent ?? '';
  }

  /**
   * Canonical text snapshot of every rendered control and dataset, for
   * comparing a live-gesture session against a cold load of the same
   * server state.
   */
  snapshot(): string {
    const lines: string[] = [];
    for (const cell of this.root.querySelectorAll('[data-view-id]')) {
      const viewId = cell.getAttribute('data-view-id');
      const chart = cell.querySelector('.chart') as HTMLElement | null;
      lines.push(`${viewId} chart=${chart?.dataset.dataset ?? 'none'}`);
      for (const widget of cell.querySelectorAll('[data-widget-id]')) {
        lines.push(`  ${controlSnapshot(widget)}`);
      }
      lines.push(`  sql=${cell.querySelector('.sql-text')?.textContent ?? ''}`);
    }
    return lines.join('\n');
  }
}

/** Cold-load a session from the server's current record of an interface. */
export async function loadSession(
  api: ApiClient,
  interfaceId: string,
  mount: HTMLElement,
  onError?: ErrorSink,
): Promise<ClientSession> {
  const response = await api.getInterface(interfaceId);
  return new ClientSession(api, response, mount, onError);
}
