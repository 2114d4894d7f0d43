/** Pure view models computed from server messages.
 *
 * Nothing in here steps the game or invents state: every output field
 * is a re-arrangement of one obs message, which keeps the view honest
 * and lets tests compare models directly against raw fixtures.
 */
import { colorFor, PAD_ID } from "./colors";
import type { Actions, Obs } from "./protocol";

const GLYPHS: Record<string, string> = {
  "<unk>": "?",
  unseen: "?",
  wall: "#",
  floor: ".",
  you: "@",
  gold: "$",
  stairs: ">",
};

export function glyphFor(word: string): string {
  return GLYPHS[word] ?? (word ? word[0] : " ");
}

export interface CellModel {
  ids: number[];
  words: string[];
  color: string;
  glyph: string;
  title: string;
}

export interface GridModel {
  height: number;
  width: number;
  rows: CellModel[][];
}

export function gridModel(obs: Obs): GridModel {
  const rows = obs.grid.map((row) =>
    row.map((cell) => {
      const ids = cell.filter((id) => id !== PAD_ID);
      const words = ids.map((id) => obs.legend[String(id)] ?? "?");
      const top = ids.length ? ids[ids.length - 1] : PAD_ID;
      return {
        ids,
        words,
        color: colorFor(top),
        glyph: ids.length ? glyphFor(words[words.length - 1]) : " ",
        title: words.join(" + "),
      };
    }),
  );
  return { height: rows.length, width: rows[0]?.length ?? 0, rows };
}

export interface LegendEntry {
  id: number;
  word: string;
  color: string;
}

export function legendModel(obs: Obs): LegendEntry[] {
  return Object.entries(obs.legend)
    .map(([id, word]) => ({ id: Number(id), word, color: colorFor(Number(id)) }))
    .sort((a, b) => a.id - b.id);
}

export interface FieldPanel {
  name: string;
  text: string;
}

export function fieldPanels(obs: Obs): FieldPanel[] {
  return obs.fields.map((f) => ({ name: f.name, text: f.text }));
}

export type ControlModel =
  | { kind: "fixed"; buttons: { action: number; label: string }[] }
  | { kind: "text_choices"; items: { action: number; text: string }[] }
  | {
      kind: "nav_coordinates";
      columns: { action: number; column: number }[];
      stopAction: number | null;
    };

export function controlModel(actions: Actions): ControlModel {
  switch (actions.kind) {
    case "fixed":
      return {
        kind: "fixed",
        buttons: actions.labels.map((label, action) => ({ action, label })),
      };
    case "text_choices":
      return {
        kind: "text_choices",
        items: actions.choices.map((text, action) => ({ action, text })),
      };
    case "nav_coordinates":
      return {
        kind: "nav_coordinates",
        columns: actions.columns.map((column, action) => ({ action, column })),
        stopAction: actions.stop ? actions.columns.length : null,
      };
  }
}

/** Count of action slots the server will accept for this descriptor. */
export function actionCount(actions: Actions): number {
  switch (actions.kind) {
    case "fixed":
      return actions.labels.length;
    case "text_choices":
      return actions.choices.length;
    case "nav_coordinates":
      return actions.columns.length + (actions.stop ? 1 : 0);
  }
}
