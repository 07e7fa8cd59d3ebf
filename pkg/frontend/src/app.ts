// Application shell: dataset upload, schema panel, question box, and the
// mounted live interface. Everything below talks to the service through
// one ApiClient; errors surface as a toast with a retry action.

import { ApiClient } from './api';
import { ClientSession } from './session';
import type { UploadResponse } from './types';

export class App {
  readonly api: ApiClient;
  session: ClientSession | null = null;

  private schemaPanel: HTMLElement;
  private questionBox: HTMLTextAreaElement;
  private interfaceMount: HTMLElement;
  private toast: HTMLElement;

  constructor(
    private root: HTMLElement,
    base = '',
  ) {
    this.api = new ApiClient(base);
    root.innerHTML = `
      <header class="topbar">
        <label class="upload">
          Dataset name <input type="text" class="dataset-name" value="data">
        </label>
        <input type="file" class="dataset-file" accept=".csv">
        <button type="button" class="upload-btn">Upload CSV</button>
      </header>
      <aside class="schema-panel"></aside>
      <div class="ask">
        <textarea class="question-box" rows="2"
          placeholder="Ask about the data, one question per line"></textarea>
        <button type="button" class="ask-btn">Send</button>
      </div>
      <main class="interface-mount"></main>
      <div class="toast" hidden></div>
    `;
    this.schemaPanel = root.querySelector('.schema-panel') as HTMLElement;
    this.questionBox = root.querySelector('.question-box') as HTMLTextAreaElement;
    this.interfaceMount = root.querySelector('.interface-mount') as HTMLElement;
    this.toast = root.querySelector('.toast') as HTMLElement;

    (root.querySelector('.upload-btn') as HTMLButtonElement).addEventListener('click', () => {
      void this.uploadFromPicker();
    });
    (root.querySelector('.ask-btn') as HTMLButtonElement).addEventListener('click', () => {
      void this.ask();
    });
  }

  showError = (message: string, retry: () => void): void => {
    this.toast.hidden = false;
    this.toast.replaceChildren();
    const text = document.createElement('span');
    text.textContent = message;
    const button = document.createElement('button');
    button.type = 'button';
    button.textContent = 'Retry';
    button.addEventListener('click', () => {
      this.toast.hidden = true;
      retry();
    });
    this.toast.append(text, button);
  };

  private async uploadFromPicker(): Promise<void> {
    const file = (this.root.querySelector('.dataset-file') as HTMLInputElement).files?.[0];
    if (!file) return;
    const name = (this.root.querySelector('.dataset-name') as HTMLInputElement).value;
    await this.upload(name, await file.text());
  }

  async upload(name: string, csv: string): Promise<UploadResponse> {
    const schema = await this.api.uploadDataset(name, csv);
    this.renderSchema(schema);
    return schema;
  }

  private renderSchema(schema: UploadResponse): void {
    const title = document.createElement('h3');
    title.textContent = `${schema.table} (${schema.row_count} rows)`;
    const list = document.createElement('ul');
    for (const col of schema.columns) {
      const item = document.createElement('li');
      item.textContent = `${col.name}: ${col.storage_type}, ${col.semantic_type}`;
      list.appendChild(item);
    }
    this.schemaPanel.replaceChildren(title, list);
  }

  /** Translate the typed questions and mount the generated interface. */
  async ask(): Promise<void> {
    const questions = this.questionBox.value
      .split('\n')
      .map((q) => q.trim())
      .filter((q) => q.length > 0);
    if (questions.length === 0) return;
    try {
      const translated = await this.api.translate(questions);
      const templates = translated.results
        .map((r) => r.sps)
        .filter((s): s is string => s !== null);
      const response = await this.api.createInterface(templates);
      this.session = new ClientSession(
        this.api,
        response,
        this.interfaceMount,
        this.showError,
      );
    } catch (exc) {
      this.showError(String(exc), () => void this.ask());
    }
  }
}
