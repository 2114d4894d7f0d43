/** Wire types for the play service's websocket session protocol.
 *
 * The schemas mirror the server's published JSON schema; every inbound
 * message is validated before it can reach view state, so a malformed
 * frame surfaces as an error banner rather than a partial board.
 */
import { z } from "zod";

export const FixedDescriptor = z
  .object({
    kind: z.literal("fixed"),
    labels: z.array(z.string()).min(1),
  })
  .strict();

export const TextChoicesDescriptor = z
  .object({
    kind: z.literal("text_choices"),
    choices: z.array(z.string()).min(1),
  })
  .strict();

export const NavDescriptor = z
  .object({
    kind: z.literal("nav_coordinates"),
    columns: z.array(z.number().int().nonnegative()),
    stop: z.boolean(),
  })
  .strict();

export const ActionDescriptor = z.discriminatedUnion("kind", [
  FixedDescriptor,
  TextChoicesDescriptor,
  NavDescriptor,
]);

export const ObsMessage = z
  .object({
    type: z.literal("obs"),
    step: z.number().int().nonnegative(),
    reward: z.number().nullable(),
    done: z.boolean(),
    digest: z.string().regex(/^[0-9a-f]{16}$/),
    grid: z.array(z.array(z.array(z.number().int()))),
    legend: z.record(z.string(), z.string()),
    fields: z.array(z.object({ name: z.string(), text: z.string() }).strict()),
    joint: z.string(),
    actions: ActionDescriptor,
  })
  .strict();

export const DoneMessage = z
  .object({
    type: z.literal("done"),
    outcome: z.enum(["win", "loss", "limit"]),
    return: z.number(),
    steps: z.number().int().nonnegative(),
    trajectory: z.array(z.string()),
  })
  .strict();

export const ErrorMessage = z
  .object({
    type: z.literal("error"),
    code: z.enum([
      "bad_message",
      "unknown_env",
      "bad_reset",
      "no_episode",
      "bad_action",
      "idle_timeout",
      "internal",
    ]),
    message: z.string(),
  })
  .strict();

export const ServerMessage = z.discriminatedUnion("type", [
  ObsMessage,
  DoneMessage,
  ErrorMessage,
]);

export type Obs = z.infer<typeof ObsMessage>;
export type Done = z.infer<typeof DoneMessage>;
export type ErrorMsg = z.infer<typeof ErrorMessage>;
export type Server = z.infer<typeof ServerMessage>;
export type Actions = z.infer<typeof ActionDescriptor>;

export interface ResetRequest {
  env: string;
  split?: string;
  seed?: number;
  overrides?: Record<string, unknown>;
}

export function encodeReset(req: ResetRequest): string {
  return JSON.stringify({ type: "reset", ...req });
}

export function encodeStep(action: number): string {
  if (!Number.isInteger(action) || action < 0) {
    throw new Error(`action must be a non-negative integer, got ${action}`);
  }
  return JSON.stringify({ type: "step", action });
}

/** Parse one inbound frame; throws ZodError on anything off-schema. */
export function decodeServer(raw: string): Server {
  return ServerMessage.parse(JSON.parse(raw));
}
