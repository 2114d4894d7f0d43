/** DOM wiring: one page, one session, no game logic.
 *
 * Everything rendered here is a projection of ViewState through the
 * pure models in render.ts; user input only ever becomes reset/step
 * messages.
 */
import { actionCount, controlModel, fieldPanels, gridModel, legendModel } from "./render";
import { SessionClient, type ViewState } from "./session";
import { completedLines, fileBody, partialLines, suggestedName, triggerDownload } from "./trajectory";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  id?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (id) node.id = id;
  if (text) node.textContent = text;
  return node;
}

export interface App {
  root: HTMLElement;
  refresh(): void;
  download(): string | null;
}

export function mount(doc: Document, client: SessionClient, envs: string[]): App {
  const root = el(doc, "div", "app");

  const controlsBar = el(doc, "div", "setup");
  const envSelect = el(doc, "select", "env-select") as HTMLSelectElement;
  for (const env of envs) {
    const opt = el(doc, "option", undefined, env) as HTMLOptionElement;
    opt.value = env;
    envSelect.appendChild(opt);
  }
  const splitInput = el(doc, "input", "split-input") as HTMLInputElement;
  splitInput.value = "train";
  const seedInput = el(doc, "input", "seed-input") as HTMLInputElement;
  seedInput.placeholder = "seed (blank = fresh)";
  const resetBtn = el(doc, "button", "reset", "new episode") as HTMLButtonElement;
  controlsBar.append(envSelect, splitInput, seedInput, resetBtn);

  const status = el(doc, "div", "status", "disconnected");
  const banner = el(doc, "div", "banner");
  banner.hidden = true;
  const outcome = el(doc, "div", "outcome");
  const board = el(doc, "table", "board");
  const legend = el(doc, "dl", "legend");
  const fields = el(doc, "div", "fields");
  const actionsBox = el(doc, "div", "controls");
  const downloadBtn = el(doc, "button", "download", "download trajectory") as HTMLButtonElement;
  downloadBtn.disabled = true;

  root.append(controlsBar, status, banner, outcome, board, fields, legend, actionsBox, downloadBtn);

  resetBtn.onclick = () => {
    const seed = seedInput.value.trim();
    client.reset({
      env: envSelect.value,
      split: splitInput.value.trim() || "train",
      ...(seed === "" ? {} : { seed: Number(seed) }),
    });
  };

  function currentLines(state: ViewState): string[] | null {
    if (state.done) return completedLines(state.done);
    if (state.episode && state.episode.steps.length > 0) {
      return partialLines(state.episode);
    }
    return null;
  }

  downloadBtn.onclick = () => {
    const lines = currentLines(client.state);
    if (!lines) return;
    const name = suggestedName(
      client.state.episode?.request.env ?? "episode",
      client.state.done?.outcome ?? "incomplete",
    );
    triggerDownload(doc, name, fileBody(lines));
  };

  function renderBoard(state: ViewState): void {
    board.textContent = "";
    if (!state.obs) return;
    const model = gridModel(state.obs);
    const nav = state.obs.actions.kind === "nav_coordinates" ? controlModel(state.obs.actions) : null;
    const navCols = new Map<number, number>();
    if (nav && nav.kind === "nav_coordinates") {
      for (const { action, column } of nav.columns) navCols.set(column, action);
    }
    for (const rowModel of model.rows) {
      const tr = el(doc, "tr");
      rowModel.forEach((cell, x) => {
        const td = el(doc, "td", undefined, cell.glyph);
        td.title = cell.title;
        td.style.backgroundColor = cell.color;
        if (navCols.has(x)) {
          td.classList.add("col-highlight");
          const action = navCols.get(x)!;
          td.onclick = () => client.step(action);
        }
        tr.appendChild(td);
      });
      board.appendChild(tr);
    }
  }

  function renderControls(state: ViewState): void {
    actionsBox.textContent = "";
    if (!state.obs || state.obs.done) return;
    const model = controlModel(state.obs.actions);
    if (model.kind === "fixed") {
      for (const { action, label } of model.buttons) {
        const b = el(doc, "button", undefined, label) as HTMLButtonElement;
        b.className = "action";
        b.dataset.action = String(action);
        b.onclick = () => client.step(action);
        actionsBox.appendChild(b);
      }
    } else if (model.kind === "text_choices") {
      const list = el(doc, "ol");
      list.className = "choice-list";
      for (const { action, text } of model.items) {
        const li = el(doc, "li");
        const b = el(doc, "button", undefined, text) as HTMLButtonElement;
        b.className = "action";
        b.dataset.action = String(action);
        b.onclick = () => client.step(action);
        li.appendChild(b);
        list.appendChild(li);
      }
      actionsBox.appendChild(list);
    } else {
      for (const { action, column } of model.columns) {
        const b = el(doc, "button", undefined, `go toward column ${column}`) as HTMLButtonElement;
        b.className = "action nav-col";
        b.dataset.action = String(action);
        b.onclick = () => client.step(action);
        actionsBox.appendChild(b);
      }
      if (model.stopAction !== null) {
        const b = el(doc, "button", undefined, "stop") as HTMLButtonElement;
        b.className = "action nav-stop";
        b.dataset.action = String(model.stopAction);
        b.onclick = () => client.step(model.stopAction!);
        actionsBox.appendChild(b);
      }
    }
  }

  function render(state: ViewState): void {
    const ep = state.episode;
    const reward = state.obs?.reward;
    status.textContent =
      `${state.connection}` +
      (state.obs
        ? ` | step ${state.obs.step}` +
          (reward === null || reward === undefined ? "" : ` | reward ${reward.toFixed(3)}`) +
          (ep ? ` | return ${ep.cumulative.toFixed(3)}` : "")
        : "");
    banner.hidden = state.error === null;
    banner.textContent = state.error ? `${state.error.code}: ${state.error.message}` : "";
    outcome.textContent = state.done
      ? `episode over: ${state.done.outcome} (return ${state.done.return.toFixed(3)}, ${state.done.steps} steps)`
      : "";
    if (state.obs && actionCount(state.obs.actions) === 0) {
      banner.hidden = false;
      banner.textContent = "server sent an empty action set";
    }
    renderBoard(state);
    renderControls(state);
    fields.textContent = "";
    legend.textContent = "";
    if (state.obs) {
      for (const panel of fieldPanels(state.obs)) {
        const box = el(doc, "section");
        box.className = "field";
        box.append(el(doc, "h3", undefined, panel.name), el(doc, "p", undefined, panel.text));
        fields.appendChild(box);
      }
      for (const entry of legendModel(state.obs)) {
        const dt = el(doc, "dt", undefined, String(entry.id));
        dt.style.backgroundColor = entry.color;
        legend.append(dt, el(doc, "dd", undefined, entry.word));
      }
    }
    downloadBtn.disabled = currentLines(state) === null;
  }

  client.subscribe(render);
  render(client.state);
  return {
    root,
    refresh: () => render(client.state),
    download: () => {
      const lines = currentLines(client.state);
      return lines ? fileBody(lines) : null;
    },
  };
}

export async function loadEnvIds(baseUrl: string): Promise<string[]> {
  const res = await fetch(`${baseUrl}/envs`);
  if (!res.ok) throw new Error(`env listing failed: ${res.status}`);
  const body = (await res.json()) as { envs: string[] };
  return body.envs;
}

export function startInBrowser(doc: Document, wsUrl: string, httpUrl: string): void {
  const client = new SessionClient(wsUrl, (url) => new WebSocket(url) as never);
  loadEnvIds(httpUrl)
    .then((envs) => {
      const app = mount(doc, client, envs);
      doc.body.appendChild(app.root);
      return client.connect();
    })
    .catch((err) => {
      const msg = doc.createElement("pre");
      msg.textContent = `failed to start: ${err}`;
      doc.body.appendChild(msg);
    });
}
