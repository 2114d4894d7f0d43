import { beforeEach, describe, expect, it } from "vitest";

import { mount, type App } from "../src/app";
import { SessionClient, type SocketLike } from "../src/session";

import obsRtfm from "./fixtures/obs_rtfm.json";
import obsTextchoice from "./fixtures/obs_textchoice.json";
import obsNavgraph from "./fixtures/obs_navgraph.json";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.onclose?.();
  }

  push(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }
}

let sock: FakeSocket;
let client: SessionClient;
let app: App;

beforeEach(async () => {
  document.body.textContent = "";
  sock = new FakeSocket();
  client = new SessionClient("ws://test", () => sock);
  app = mount(document, client, ["rtfm", "messenger", "textchoice", "navgraph", "crawler"]);
  document.body.appendChild(app.root);
  const opened = client.connect();
  sock.onopen?.();
  await opened;
});

function lastSent(): Record<string, unknown> {
  return JSON.parse(sock.sent[sock.sent.length - 1]);
}

describe("setup bar", () => {
  it("lists every environment in the selector", () => {
    const opts = [...document.querySelectorAll<HTMLOptionElement>("#env-select option")];
    expect(opts.map((o) => o.value)).toEqual([
      "rtfm",
      "messenger",
      "textchoice",
      "navgraph",
      "crawler",
    ]);
  });

  it("the reset button sends env, split and seed from the inputs", () => {
    (document.querySelector("#env-select") as HTMLSelectElement).value = "rtfm";
    (document.querySelector("#split-input") as HTMLInputElement).value = "eval";
    (document.querySelector("#seed-input") as HTMLInputElement).value = "11";
    (document.querySelector("#reset") as HTMLButtonElement).click();
    expect(lastSent()).toEqual({ type: "reset", env: "rtfm", split: "eval", seed: 11 });
  });

  it("a blank seed is omitted so the server draws one", () => {
    (document.querySelector("#reset") as HTMLButtonElement).click();
    expect("seed" in lastSent()).toBe(false);
  });
});

describe("board and panels", () => {
  beforeEach(() => {
    sock.push(obsRtfm);
  });

  it("the table matches the grid dimensions", () => {
    const rows = document.querySelectorAll("#board tr");
    expect(rows.length).toBe((obsRtfm as { grid: unknown[][] }).grid.length);
    expect(rows[0].querySelectorAll("td").length).toBe(
      (obsRtfm as { grid: unknown[][] }).grid[0].length,
    );
  });

  it("cells carry hover titles and hashed colors", () => {
    const cells = [...document.querySelectorAll<HTMLTableCellElement>("#board td")];
    const titled = cells.filter((c) => c.title.length > 0);
    expect(titled.length).toBeGreaterThan(0);
    expect(titled.every((c) => c.style.backgroundColor !== "")).toBe(true);
  });

  it("field panels show the name and full text", () => {
    const sections = [...document.querySelectorAll("#fields section.field")];
    const fixture = obsRtfm as { fields: { name: string; text: string }[] };
    expect(sections.map((s) => s.querySelector("h3")!.textContent)).toEqual(
      fixture.fields.map((f) => f.name),
    );
    expect(sections.map((s) => s.querySelector("p")!.textContent)).toEqual(
      fixture.fields.map((f) => f.text),
    );
  });

  it("the legend pairs ids with words", () => {
    const fixture = obsRtfm as { legend: Record<string, string> };
    const dts = [...document.querySelectorAll("#legend dt")].map((n) => n.textContent);
    const dds = [...document.querySelectorAll("#legend dd")].map((n) => n.textContent);
    const expected = Object.entries(fixture.legend).sort(
      (a, b) => Number(a[0]) - Number(b[0]),
    );
    expect(dts).toEqual(expected.map(([id]) => id));
    expect(dds).toEqual(expected.map(([, word]) => word));
  });

  it("the status line tracks step and return", () => {
    const status = document.querySelector("#status")!;
    expect(status.textContent).toContain("open");
    expect(status.textContent).toContain("step 0");
  });
});

describe("action controls per descriptor kind", () => {
  it("fixed actions render one labeled button each and clicks step", () => {
    sock.push(obsRtfm);
    const buttons = [...document.querySelectorAll<HTMLButtonElement>("#controls button.action")];
    const fixture = obsRtfm as { actions: { labels: string[] } };
    expect(buttons.map((b) => b.textContent)).toEqual(fixture.actions.labels);
    buttons[2].click();
    expect(lastSent()).toEqual({ type: "step", action: 2 });
  });

  it("text choices render as a scrollable ordered list", () => {
    sock.push(obsTextchoice);
    const list = document.querySelector("#controls ol.choice-list")!;
    const fixture = obsTextchoice as { actions: { choices: string[] } };
    const items = [...list.querySelectorAll("li button")];
    expect(items.length).toBe(fixture.actions.choices.length);
    expect(items[5].textContent).toBe(fixture.actions.choices[5]);
    (items[5] as HTMLButtonElement).click();
    expect(lastSent()).toEqual({ type: "step", action: 5 });
  });

  it("nav actions render column buttons, a stop button and board highlights", () => {
    sock.push(obsNavgraph);
    const fixture = obsNavgraph as { actions: { columns: number[]; stop: boolean } };
    const cols = [...document.querySelectorAll<HTMLButtonElement>("#controls button.nav-col")];
    expect(cols.length).toBe(fixture.actions.columns.length);
    expect(cols[0].textContent).toBe(`go toward column ${fixture.actions.columns[0]}`);
    const stop = document.querySelector<HTMLButtonElement>("#controls button.nav-stop");
    expect(stop).not.toBeNull();
    expect(Number(stop!.dataset.action)).toBe(fixture.actions.columns.length);

    const highlighted = [...document.querySelectorAll("#board td.col-highlight")];
    expect(highlighted.length).toBeGreaterThan(0);
    (highlighted[0] as HTMLTableCellElement).click();
    const msg = lastSent();
    expect(msg.type).toBe("step");
    expect(fixture.actions.columns[msg.action as number]).toBeDefined();

    stop!.click();
    expect(lastSent()).toEqual({ type: "step", action: fixture.actions.columns.length });
  });
});

describe("banner, outcome and download", () => {
  beforeEach(() => {
    sock.push(obsRtfm);
  });

  it("server errors surface in the banner and the board stays", () => {
    const cellsBefore = document.querySelectorAll("#board td").length;
    sock.push({ type: "error", code: "bad_action", message: "out of range" });
    const banner = document.querySelector<HTMLElement>("#banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("bad_action");
    expect(document.querySelectorAll("#board td").length).toBe(cellsBefore);
  });

  it("the banner hides again on the next frame", () => {
    sock.push({ type: "error", code: "bad_action", message: "out of range" });
    sock.push({ ...obsRtfm, step: 1, reward: 0.0 });
    expect(document.querySelector<HTMLElement>("#banner")!.hidden).toBe(true);
  });

  it("download is disabled until there is something to save", () => {
    const btn = document.querySelector<HTMLButtonElement>("#download")!;
    expect(btn.disabled).toBe(true);
    expect(app.download()).toBeNull();
    sock.push({ ...obsRtfm, step: 1, reward: 0.0 });
    expect(btn.disabled).toBe(false);
  });

  it("after done the download body is the server trajectory verbatim", () => {
    const lines = ['{"kind": "header"}', '{"kind": "step", "i": 0}', '{"kind": "footer"}'];
    sock.push({ ...obsRtfm, step: 1, reward: 0.0 });
    sock.push({ type: "done", outcome: "win", return: 1.0, steps: 1, trajectory: lines });
    expect(document.querySelector("#outcome")!.textContent).toContain("win");
    expect(app.download()).toBe(lines.join("\n") + "\n");
  });

  it("a dropped connection still lets the partial log download", () => {
    const step = (document.querySelector("#controls button.action") as HTMLButtonElement);
    step.click();
    sock.push({ ...obsRtfm, step: 1, reward: 0.0 });
    sock.close();
    expect(document.querySelector("#status")!.textContent).toContain("closed");
    const body = app.download();
    expect(body).not.toBeNull();
    const rows = body!.trim().split("\n").map((l) => JSON.parse(l));
    expect(rows[0].kind).toBe("header");
    expect(rows[rows.length - 1]).toMatchObject({ outcome: "incomplete" });
  });
});
