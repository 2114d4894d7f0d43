import { beforeEach, describe, expect, it } from "vitest";

import { SessionClient, type SocketLike } from "../src/session";
import { fileBody, partialLines } from "../src/trajectory";

import obsMessenger from "./fixtures/obs_messenger.json";

/** Scriptable stand-in for a websocket; tests drive both directions. */
class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  open(): void {
    this.onopen?.();
  }

  push(msg: unknown): void {
    this.onmessage?.({ data: typeof msg === "string" ? msg : JSON.stringify(msg) });
  }
}

function obsFrame(step: number, reward: number | null, done = false) {
  return { ...obsMessenger, step, reward, done };
}

let sock: FakeSocket;
let client: SessionClient;

beforeEach(async () => {
  sock = new FakeSocket();
  client = new SessionClient("ws://test", () => sock);
  const opened = client.connect();
  sock.open();
  await opened;
});

describe("handshake and reset", () => {
  it("connect resolves once the socket opens", () => {
    expect(client.state.connection).toBe("open");
  });

  it("reset sends the request and the first obs starts a fresh log", () => {
    client.reset({ env: "messenger", seed: 4 });
    expect(JSON.parse(sock.sent[0])).toEqual({
      type: "reset",
      env: "messenger",
      seed: 4,
    });
    sock.push(obsFrame(0, null));
    expect(client.state.obs?.step).toBe(0);
    expect(client.state.episode?.steps).toEqual([]);
    expect(client.state.episode?.cumulative).toBe(0);
    expect(client.state.episode?.resetDigest).toBe(obsMessenger.digest);
    expect(client.state.done).toBeNull();
  });

  it("stepping before any episode raises a client-side banner", () => {
    client.step(2);
    expect(client.state.error?.code).toBe("client");
    expect(sock.sent).toHaveLength(0);
  });
});

describe("stepping", () => {
  beforeEach(() => {
    client.reset({ env: "messenger", seed: 4 });
    sock.push(obsFrame(0, null));
  });

  it("logs each transition with the action that caused it", () => {
    client.step(3);
    sock.push(obsFrame(1, 0.0));
    client.step(1);
    sock.push(obsFrame(2, 0.0));
    expect(JSON.parse(sock.sent[1])).toEqual({ type: "step", action: 3 });
    const steps = client.state.episode!.steps;
    expect(steps.map((s) => [s.i, s.action])).toEqual([
      [0, 3],
      [1, 1],
    ]);
    expect(steps.every((s) => /^[0-9a-f]{16}$/.test(s.digest))).toBe(true);
  });

  it("accumulates reward across the episode", () => {
    client.step(0);
    sock.push(obsFrame(1, 0.5));
    client.step(0);
    sock.push(obsFrame(2, -0.2));
    expect(client.state.episode!.cumulative).toBeCloseTo(0.3, 12);
  });

  it("a done frame parks the summary without clearing the board", () => {
    client.step(0);
    sock.push(obsFrame(1, 0.0));
    sock.push({
      type: "done",
      outcome: "win",
      return: 1.0,
      steps: 1,
      trajectory: ["{}", "{}"],
    });
    expect(client.state.done?.outcome).toBe("win");
    expect(client.state.obs).not.toBeNull();
    expect(client.state.episode!.steps).toHaveLength(1);
  });

  it("a second reset replaces the log", () => {
    client.step(0);
    sock.push(obsFrame(1, 1.0));
    client.reset({ env: "messenger", seed: 9 });
    sock.push(obsFrame(0, null));
    expect(client.state.episode!.steps).toHaveLength(0);
    expect(client.state.episode!.cumulative).toBe(0);
    expect(client.state.episode!.request.seed).toBe(9);
  });
});

describe("failure paths", () => {
  beforeEach(() => {
    client.reset({ env: "messenger", seed: 4 });
    sock.push(obsFrame(0, null));
  });

  it("server errors raise the banner and leave the board untouched", () => {
    const before = client.state.obs;
    const log = client.state.episode;
    sock.push({ type: "error", code: "bad_action", message: "out of range" });
    expect(client.state.error?.code).toBe("bad_action");
    expect(client.state.obs).toBe(before);
    expect(client.state.episode).toBe(log);
  });

  it("the banner clears on the next good frame", () => {
    sock.push({ type: "error", code: "bad_action", message: "out of range" });
    client.step(0);
    sock.push(obsFrame(1, 0.0));
    expect(client.state.error).toBeNull();
  });

  it("an off-schema frame is reported, not thrown", () => {
    sock.push("{nope");
    expect(client.state.error?.code).toBe("client");
    expect(client.state.error?.message).toContain("off-schema");
  });

  it("disconnect mid-episode preserves the partial log", () => {
    client.step(2);
    sock.push(obsFrame(1, 0.0));
    sock.close();
    expect(client.state.connection).toBe("closed");
    const ep = client.state.episode!;
    expect(ep.steps).toHaveLength(1);

    const lines = partialLines(ep);
    const header = JSON.parse(lines[0]);
    const footer = JSON.parse(lines[lines.length - 1]);
    expect(header.kind).toBe("header");
    expect(header.env).toBe("messenger");
    expect(header.seed).toBe(4);
    expect(header.reset_digest).toBe(obsMessenger.digest);
    expect(footer).toMatchObject({ kind: "footer", outcome: "incomplete", steps: 1 });
    expect(fileBody(lines).endsWith("\n")).toBe(true);
    expect(fileBody(lines).trim().split("\n")).toHaveLength(3);
  });

  it("stepping after the drop is refused client-side", () => {
    sock.close();
    const sentBefore = sock.sent.length;
    client.step(0);
    expect(client.state.error?.code).toBe("client");
    expect(sock.sent).toHaveLength(sentBefore);
  });
});

describe("subscriptions", () => {
  it("listeners fire on every state change and can detach", () => {
    let calls = 0;
    const off = client.subscribe(() => {
      calls += 1;
    });
    client.reset({ env: "messenger" });
    sock.push(obsFrame(0, null));
    expect(calls).toBe(1);
    off();
    sock.push(obsFrame(1, 0.0));
    expect(calls).toBe(1);
  });
});
