// End-to-end drive against a live service: real HTTP, real DOM events,
// no stubs. Requires a server on E2E_BASE (default 127.0.0.1:8766)
// started with a pinned clock of 2022-10-01.

import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { App } from '../src/app';

const BASE = process.env.E2E_BASE ?? 'http://127.0.0.1:8766';

async function waitFor(check: () => boolean, what: string): Promise<void> {
  const deadline = Date.now() + 10000;
  while (!check()) {
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}

describe('live service drive', () => {
  it('runs upload, translate, create, and gestures over real HTTP', async () => {
    const root = document.createElement('div');
    document.body.appendChild(root);
    const app = new App(root, BASE);

    const csv = readFileSync(
      join(process.cwd(), '..', 'tests', 'fixtures', 'covid.csv'),
      'utf8',
    );
    const schema = await app.upload('covid', csv);
    expect(schema.row_count).toBe(18);
    expect(root.querySelector('.schema-panel h3')?.textContent).toContain('covid');

    const box = root.querySelector('.question-box') as HTMLTextAreaElement;
    box.value = [
      'Show total cases or deaths by state',
      'How are daily cases trending, overall or for one state, over recent windows?',
    ].join('\n');
    await app.ask();

    const session = app.session!;
    expect(session).not.toBeNull();
    expect(root.querySelectorAll('.view-cell')).toHaveLength(2);
    const fullRange = session.datasetOf('view_1');
    expect(fullRange.length).toBeGreaterThan(0);

    // click the Texas mark, let the real state call land
    const mark = root.querySelector('[data-view-id="view_0"] [data-category="Texas"]')!;
    mark.dispatchEvent(new MouseEvent('click', { bubbles: true }));
    await waitFor(
      () => session.sqlOf('view_1').includes("state = 'Texas'"),
      'Texas filter',
    );
    expect(session.datasetOf('view_1').map((r) => r[1])).toEqual([
      340, 410, 365, 420, 440, 455,
    ]);

    // deselect brings the full range back
    const chart = root.querySelector('[data-view-id="view_0"] .chart')!;
    chart.dispatchEvent(new MouseEvent('click', { bubbles: false }));
    await waitFor(
      () => !session.sqlOf('view_1').includes('Texas'),
      'filter removal',
    );
    expect(session.datasetOf('view_1')).toEqual(fullRange);
  });
});
