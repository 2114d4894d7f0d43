import { describe, expect, it } from "vitest";

import { decodeServer, encodeReset, encodeStep, ObsMessage } from "../src/protocol";

import obsRtfm from "./fixtures/obs_rtfm.json";
import obsMessenger from "./fixtures/obs_messenger.json";
import obsCrawler from "./fixtures/obs_crawler.json";
import obsTextchoice from "./fixtures/obs_textchoice.json";
import obsNavgraph from "./fixtures/obs_navgraph.json";

const FIXTURES = {
  rtfm: obsRtfm,
  messenger: obsMessenger,
  crawler: obsCrawler,
  textchoice: obsTextchoice,
  navgraph: obsNavgraph,
};

describe("server frame decoding", () => {
  it("accepts every captured obs fixture unchanged", () => {
    for (const [name, fixture] of Object.entries(FIXTURES)) {
      const msg = decodeServer(JSON.stringify(fixture));
      expect(msg.type, name).toBe("obs");
      expect(msg, name).toEqual(fixture);
    }
  });

  it("accepts done and error frames", () => {
    const done = decodeServer(
      JSON.stringify({
        type: "done",
        outcome: "win",
        return: 0.92,
        steps: 4,
        trajectory: ["{}", "{}"],
      }),
    );
    expect(done.type).toBe("done");
    const err = decodeServer(
      JSON.stringify({ type: "error", code: "bad_action", message: "out of range" }),
    );
    expect(err.type).toBe("error");
  });

  it("rejects frames missing required keys", () => {
    const broken = { ...obsRtfm } as Record<string, unknown>;
    delete broken.digest;
    expect(() => decodeServer(JSON.stringify(broken))).toThrow();
  });

  it("rejects a malformed digest", () => {
    const broken = { ...obsRtfm, digest: "NOT-A-DIGEST" };
    expect(() => decodeServer(JSON.stringify(broken))).toThrow();
  });

  it("rejects unknown message types and stray keys", () => {
    expect(() => decodeServer(JSON.stringify({ type: "telemetry" }))).toThrow();
    const extra = { ...obsRtfm, secret: 1 };
    expect(() => decodeServer(JSON.stringify(extra))).toThrow();
  });

  it("rejects an unknown error code", () => {
    expect(() =>
      decodeServer(JSON.stringify({ type: "error", code: "surprise", message: "" })),
    ).toThrow();
  });

  it("schema object validates fixtures directly", () => {
    expect(ObsMessage.safeParse(obsNavgraph).success).toBe(true);
  });
});

describe("client frame encoding", () => {
  it("reset carries env, split, seed, overrides", () => {
    const raw = encodeReset({
      env: "rtfm",
      split: "val",
      seed: 12,
      overrides: { height: 4 },
    });
    expect(JSON.parse(raw)).toEqual({
      type: "reset",
      env: "rtfm",
      split: "val",
      seed: 12,
      overrides: { height: 4 },
    });
  });

  it("reset omits optional fields it was not given", () => {
    expect(JSON.parse(encodeReset({ env: "crawler" }))).toEqual({
      type: "reset",
      env: "crawler",
    });
  });

  it("step is a bare integer action", () => {
    expect(JSON.parse(encodeStep(3))).toEqual({ type: "step", action: 3 });
  });

  it("step rejects fractional and negative actions", () => {
    expect(() => encodeStep(1.5)).toThrow();
    expect(() => encodeStep(-1)).toThrow();
  });
});
