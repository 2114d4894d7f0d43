/** Trajectory files on the client side.
 *
 * Finished episodes download the server's own record verbatim, so the
 * file is exactly what the CLI verifier expects.  For an unfinished
 * episode (dropped link, user walked away) we serialize the client log
 * in the same line format with outcome "incomplete".
 */
import type { Done } from "./protocol";
import type { EpisodeLog } from "./session";

export const FORMAT_VERSION = 1;

export function completedLines(done: Done): string[] {
  return done.trajectory;
}

export function partialLines(ep: EpisodeLog): string[] {
  const header = {
    kind: "header",
    version: FORMAT_VERSION,
    env: ep.request.env,
    split: ep.request.split ?? "train",
    seed: ep.request.seed ?? null,
    overrides: ep.request.overrides ?? {},
    reset_digest: ep.resetDigest,
    started: ep.startedAt,
  };
  const steps = ep.steps.map((s) => ({
    kind: "step",
    i: s.i,
    action: s.action,
    reward: s.reward,
    done: s.done,
    digest: s.digest,
  }));
  const footer = {
    kind: "footer",
    outcome: "incomplete",
    return: ep.cumulative,
    steps: ep.steps.length,
    ended: new Date().toISOString(),
  };
  return [JSON.stringify(header), ...steps.map((s) => JSON.stringify(s)), JSON.stringify(footer)];
}

export function fileBody(lines: string[]): string {
  return lines.join("\n") + "\n";
}

export function suggestedName(env: string, outcome: string): string {
  const stamp = new Date().toISOString().replace(/[:.]/g, "-");
  return `${env}-${outcome}-${stamp}.jsonl`;
}

/** Wire a browser download; no-op outside a DOM (tests read fileBody). */
export function triggerDownload(doc: Document, name: string, body: string): void {
  const blob = new Blob([body], { type: "application/jsonl" });
  const url = URL.createObjectURL(blob);
  const a = doc.createElement("a");
  a.href = url;
  a.download = name;
  doc.body.appendChild(a);
  a.click();
  a.remove();
  URL.revokeObjectURL(url);
}
