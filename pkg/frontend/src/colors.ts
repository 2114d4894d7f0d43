/** Deterministic symbol palette.
 *
 * Hue comes from hashing the symbol id, so the same id renders the same
 * color in every session and tab without any server coordination.  The
 * two reserved ids keep fixed, muted styles so boards stay legible.
 */

export const UNK_ID = 0;
export const PAD_ID = 1;

/** FNV-1a over the decimal digits of the id, 32-bit. */
export function hashId(id: number): number {
  let h = 0x811c9dc5;
  for (const ch of String(id)) {
    h ^= ch.charCodeAt(0);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

export function colorFor(id: number): string {
  if (id === PAD_ID) return "hsl(0, 0%, 13%)";
  if (id === UNK_ID) return "hsl(0, 0%, 45%)";
  const h = hashId(id);
  const hue = h % 360;
  const sat = 55 + (h >>> 9) % 30;
  const light = 38 + (h >>> 17) % 22;
  return `hsl(${hue}, ${sat}%, ${light}%)`;
}
