// Wire types for the querydeck JSON API. Field names mirror the server
// payloads exactly; everything here is data, no behavior.

export type SemanticType = 'categorical' | 'quantitative' | 'temporal' | 'geographic';

export type VisKind =
  | 'choropleth'
  | 'line'
  | 'bar'
  | 'scatter'
  | 'table'
  | 'single_value';

export type WidgetKind =
  | 'toggle'
  | 'button_set'
  | 'dropdown'
  | 'checkbox_group'
  | 'multiselect'
  | 'slider';

export type Selection =
  | { kind: 'index'; index: number }
  | { kind: 'value'; value: string | number }
  | { kind: 'number'; number: number }
  | { kind: 'index_set'; indices: number[] }
  | { kind: 'value_set'; values: (string | number)[] }
  | { kind: 'opt'; on: boolean };

/** Node-id (stringified) to selection, as acknowledged by the server. */
export type Assignment = Record<string, Selection>;

export interface ColumnSpec {
  name: string;
  semantic_type: SemanticType;
}

export interface WidgetOptions {
  choices?: (string | number)[];
  attribute?: string;
  lo?: number;
  hi?: number;
}

export interface WidgetSpec {
  widget_id: string;
  kind: WidgetKind;
  node_id: number;
  label: string;
  options: WidgetOptions;
}

export interface ViewSpec {
  view_id: string;
  template: string;
  default_sql: string;
  visualization: VisKind;
  columns: ColumnSpec[];
  widgets: WidgetSpec[];
}

export interface InteractionSpec {
  interaction_id: string;
  event: string;
  source_view: string;
  column: string;
  target_view: string;
  value_node: number;
  opt_node: number | null;
  on_deselect: 'opt_off' | 'restore_default';
}

export interface LayoutCell {
  view: string;
  y: number;
  height: number;
}

export interface InterfaceDoc {
  spec_version: number;
  screen: { width: number; height: number };
  layout: { kind: string; cells: LayoutCell[] };
  views: ViewSpec[];
  interactions: InteractionSpec[];
  cost: number;
}

export type Cell = string | number | null;

export interface ViewState {
  view_id: string;
  assignment: Assignment;
  sql: string;
  columns: ColumnSpec[];
  rows: Cell[][];
}

export interface UploadResponse {
  table: string;
  columns: { name: string; storage_type: string; semantic_type: SemanticType }[];
  row_count: number;
}

export interface TranslateResponse {
  results: { nl: string; sps: string | null; attempts: number; errors: string[] }[];
}

export interface InterfaceResponse {
  interface_id: string;
  interface: InterfaceDoc;
  state: Record<string, ViewState>;
}

export const SUPPORTED_SPEC_VERSION = 1;
