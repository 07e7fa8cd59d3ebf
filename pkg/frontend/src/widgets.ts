// Widget renderers: one interactive control per choice node.
//
// A widget reflects the server-acknowledged selection passed in, and turns
// user input into exactly one wire Selection via onDelta. A node absent
// from the current assignment is unreachable (hidden behind an Off
// toggle), so its control renders disabled.

import type { Selection, WidgetSpec } from './types';

export type DeltaHandler = (nodeId: number, selection: Selection) => void;

function widgetRoot(widget: WidgetSpec): HTMLDivElement {
  const root = document.createElement('div');
  root.className = `widget widget-${widget.kind}`;
  root.dataset.widgetId = widget.widget_id;
  root.dataset.nodeId = String(widget.node_id);
  const label = document.createElement('span');
  label.className = 'widget-label';
  label.textContent = widget.label;
  root.appendChild(label);
  return root;
}

function selectedIndex(selection: Selection | undefined, choices: (string | number)[]): number {
  if (!selection) return 0;
  if (selection.kind === 'index') return selection.index;
  if (selection.kind === 'value') {
    const i = choices.findIndex((c) => String(c) === String(selection.value));
    return i >= 0 ? i : 0;
  }
  return 0;
}

function selectedIndexSet(
  selection: Selection | undefined,
  choices: (string | number)[],
): Set<number> {
  if (!selection) return new Set([0]);
  if (selection.kind === 'index_set') return new Set(selection.indices);
  if (selection.kind === 'value_set') {
    return new Set(
      selection.values
        .map((v) => choices.findIndex((c) => String(c) === String(v)))
        .filter((i) => i >= 0),
    );
  }
  return new Set([0]);
}

/** Selection for picking one choice: index for fragments, value for domains. */
function oneOf(widget: WidgetSpec, i: number): Selection {
  const choices = widget.options.choices ?? [];
  if (widget.options.attribute !== undefined) {
    return { kind: 'value', value: choices[i] as string | number };
  }
  return { kind: 'index', index: i };
}

function someOf(widget: WidgetSpec, picked: number[]): Selection {
  const choices = widget.options.choices ?? [];
  if (widget.options.attribute !== undefined) {
    return { kind: 'value_set', values: picked.map((i) => choices[i] as string | number) };
  }
  return { kind: 'index_set', indices: picked };
}

export function renderWidget(
  widget: WidgetSpec,
  selection: Selection | undefined,
  onDelta: DeltaHandler,
): HTMLElement {
  const root = widgetRoot(widget);
  const disabled = selection === undefined;
  const choices = widget.options.choices ?? [];

  switch (widget.kind) {
    case 'toggle': {
      const input = document.createElement('input');
      input.type = 'checkbox';
      input.checked = selection?.kind === 'opt' && selection.on;
      input.disabled = disabled;
      input.addEventListener('change', () => {
        onDelta(widget.node_id, { kind: 'opt', on: input.checked });
      });
      root.appendChild(input);
      break;
    }

    case 'button_set': {
      const current = selectedIndex(selection, choices);
      choices.forEach((choice, i) => {
        const btn = document.createElement('button');
        btn.type = 'button';
        btn.textContent = String(choice);
        btn.disabled = disabled;
        if (i === current && !disabled) btn.classList.add('active');
        btn.addEventListener('click', () => {
          onDelta(widget.node_id, oneOf(widget, i));
        });
        root.appendChild(btn);
      });
      break;
    }

    case 'dropdown': {
      const select = document.createElement('select');
      select.disabled = disabled;
      choices.forEach((choice, i) => {
        const option = document.createElement('option');
        option.value = String(i);
        option.textContent = String(choice);
        select.appendChild(option);
      });
      select.selectedIndex = selectedIndex(selection, choices);
      select.addEventListener('change', () => {
        onDelta(widget.node_id, oneOf(widget, select.selectedIndex));
      });
      root.appendChild(select);
      break;
    }

    case 'checkbox_group': {
      const picked = selectedIndexSet(selection, choices);
      choices.forEach((choice, i) => {
        const wrap = document.createElement('label');
        const box = document.createElement('input');
        box.type = 'checkbox';
        box.value = String(i);
        box.checked = picked.has(i);
        box.disabled = disabled;
        box.addEventListener('change', () => {
          const on = Array.from(
            root.querySelectorAll<HTMLInputElement>('input[type=checkbox]'),
          )
            .filter((b) => b.checked)
            .map((b) => Number(b.value));
          if (on.length === 0) {
            // a subset may not go empty; bounce the box back on
            box.checked = true;
            return;
          }
          onDelta(widget.node_id, someOf(widget, on));
        });
        wrap.append(box, document.createTextNode(String(choice)));
        root.appendChild(wrap);
      });
      break;
    }

    case 'multiselect': {
      const select = document.createElement('select');
      select.multiple = true;
      select.disabled = disabled;
      const picked = selectedIndexSet(selection, choices);
      choices.forEach((choice, i) => {
        const option = document.createElement('option');
        option.value = String(i);
        option.textContent = String(choice);
        option.selected = picked.has(i);
        select.appendChild(option);
      });
      select.addEventListener('change', () => {
        const on = Array.from(select.selectedOptions).map((o) => Number(o.value));
        if (on.length === 0) return;
        onDelta(widget.node_id, someOf(widget, on));
      });
      root.appendChild(select);
      break;
    }

    case 'slider': {
      const input = document.createElement('input');
      input.type = 'range';
      const lo = widget.options.lo ?? 0;
      const hi = widget.options.hi ?? 100;
      input.min = String(lo);
      input.max = String(hi);
      input.step = 'any';
      input.value = String(selection?.kind === 'number' ? selection.number : lo);
      input.disabled = disabled;
      const readout = document.createElement('span');
      readout.className = 'slider-value';
      readout.textContent = input.value;
      input.addEventListener('change', () => {
        readout.textContent = input.value;
        onDelta(widget.node_id, { kind: 'number', number: Number(input.value) });
      });
      root.append(input, readout);
      break;
    }
  }
  return root;
}

/** Canonical text form of one rendered widget's visible state. */
export function controlSnapshot(root: Element): string {
  const id = root.getAttribute('data-widget-id') ?? '?';
  const parts: string[] = [];
  for (const el of root.querySelectorAll('input, select, button')) {
    if (el instanceof HTMLInputElement) {
      const state = el.type === 'checkbox' ? String(el.checked) : el.value;
      parts.push(`${el.type}:${state}${el.disabled ? ':disabled' : ''}`);
    } else if (el instanceof HTMLSelectElement) {
      const picked = Array.from(el.selectedOptions)
        .map((o) => o.value)
        .join('+');
      parts.push(`select:${picked}${el.disabled ? ':disabled' : ''}`);
    } else if (el instanceof HTMLButtonElement) {
      parts.push(
        `button:${el.textContent}:${el.classList.contains('active')}${el.disabled ? ':disabled' : ''}`,
      );
    }
  }
  return `${id}[${parts.join(' ')}]`;
}
