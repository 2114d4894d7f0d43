"""Panoramic graph navigation with landmark instructions.

A world is a jittered street lattice of ~210 nodes.  Every node carries
a 24x100 symbol panorama downsampled from a synthetic high-resolution
token field (23x23 patches, inverse-frequency class weighting so rare
landmark symbols survive the vote).  Instructions describe a path as
turns taken at named landmarks; actions are the panorama columns of the
outgoing edges plus stop.  Movement rewards are potential-shaped on
graph distance to the goal, so partial progress telescopes.

The manual variant replaces landmark words in the panorama with opaque
marker symbols and adds a text field mapping markers to names.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import (
    Environment,
    NavChoices,
    Observation,
    TextBundle,
    TextField,
    Vocabulary,
    register,
    relative_position,
    split_for_key,
    stable_hash64,
)

PANO_H, PANO_W = 24, 100
PATCH = 23
HIGH_H, HIGH_W = PANO_H * PATCH, PANO_W * PATCH

MATERIALS = (
    "sky", "tree", "building", "roof", "pole", "sign", "window", "wall",
    "door", "road", "sidewalk", "grass", "car", "fence", "bush", "rock",
    "water", "sand", "bridge",
)
LANDMARKS = (
    "bakery", "cafe", "bank", "library", "cinema", "museum", "pharmacy",
    "florist", "hotel", "church", "school", "market", "fountain", "statue",
    "tower", "clock",
)
MARKS = tuple(f"mark{i}" for i in range(len(LANDMARKS)))

# (zone top row in panorama cells, per-material weights)
_ZONES = (
    (0, 9, {"sky": 0.76, "tree": 0.08, "building": 0.08, "roof": 0.04,
            "pole": 0.02, "sign": 0.02}),
    (9, 17, {"building": 0.34, "window": 0.22, "wall": 0.18, "door": 0.06,
             "sign": 0.06, "tree": 0.08, "pole": 0.03, "roof": 0.03}),
    (17, 24, {"road": 0.38, "sidewalk": 0.22, "grass": 0.12, "car": 0.10,
              "fence": 0.06, "bush": 0.05, "rock": 0.03, "water": 0.02,
              "sand": 0.01, "bridge": 0.01}),
)

TURN_WORDS = ("left", "right", "straight")


def _build_vocab() -> Vocabulary:
    words = list(MATERIALS) + list(LANDMARKS) + list(MARKS)
    words += "head toward the turn left right at go straight stop marks".split()
    return Vocabulary(words)


VOCAB = _build_vocab()

# dense class codes (sorted token ids) used by the downsampler internals
CLASS_IDS = np.array(
    sorted(VOCAB.id_of(w) for w in MATERIALS + LANDMARKS), dtype=np.int64
)
_CODE_OF = {int(t): i for i, t in enumerate(CLASS_IDS)}
N_CLASSES = len(CLASS_IDS)


def heading_to_column(degrees: float, width: int) -> int:
    """Panorama column of a compass heading; width columns span 360."""
    return int(math.floor((degrees % 360.0) * width / 360.0))


def downsample_patch(patch: np.ndarray, freqs: np.ndarray, alpha: float) -> int:
    """Reference single-patch vote: weight counts by 1/f(c)**alpha.

    freqs is indexed by token id.  Ties break toward the smallest id;
    alpha 0 is a plain majority vote.
    """
    ids, counts = np.unique(np.asarray(patch).ravel(), return_counts=True)
    best_id, best_v = -1, -1.0
    for token, count in zip(ids, counts):
        v = float(count) / float(freqs[token]) ** alpha
        if v > best_v:
            best_id, best_v = int(token), v
    return best_id


def _argmax_codes(counts: np.ndarray, code_freqs: np.ndarray, alpha: float) -> np.ndarray:
    """(n, C) patch count matrix -> (n,) winning class codes."""
    safe = np.where(code_freqs > 0, code_freqs, 1.0)
    votes = counts / safe[None, :] ** alpha
    return np.argmax(votes, axis=1)


def downsample_image(image: np.ndarray, freqs: np.ndarray, alpha: float,
                     patch: int = PATCH) -> np.ndarray:
    """Patchwise vote over a (h*patch, w*patch) token image -> (h, w)."""
    hh, ww = image.shape
    h, w = hh // patch, ww // patch
    codes = np.empty_like(image, dtype=np.int64)
    for token, code in _CODE_OF.items():
        codes[image == token] = code
    idx = (np.arange(hh)[:, None] // patch) * w + (np.arange(ww)[None, :] // patch)
    counts = np.bincount(
        (idx * N_CLASSES + codes).ravel(), minlength=h * w * N_CLASSES
    ).reshape(h * w, N_CLASSES).astype(np.float64)
    win = _argmax_codes(counts, freqs[CLASS_IDS], alpha)
    return CLASS_IDS[win].reshape(h, w).astype(np.int32)


@dataclass(frozen=True)
class NavGraphConfig:
    world_seed: int = 0
    lattice_rows: int = 15
    lattice_cols: int = 14
    spacing: float = 10.0
    jitter: float = 3.0
    extra_edge_keep: float = 0.6
    alpha: float = 1.0
    path_hops: tuple[int, int] = (4, 8)

    def key(self) -> tuple:
        return (
            self.world_seed, self.lattice_rows, self.lattice_cols, self.spacing,
            self.jitter, self.extra_edge_keep, self.alpha,
        )


@dataclass
class NavWorld:
    positions: np.ndarray                     # (n, 2) float64
    neighbors: list[list[tuple[int, float]]]  # per node: (nbr id, bearing deg)
    panos: np.ndarray                         # (n, 24, 100) int32 token ids
    lm_type: np.ndarray                       # (n,) int32 index into LANDMARKS
    freqs: np.ndarray                         # (vocab,) float64 global counts

    @property
    def n(self) -> int:
        return len(self.positions)


def _bearing(positions: np.ndarray, a: int, b: int) -> float:
    dx, dy = positions[b] - positions[a]
    return float(math.degrees(math.atan2(dx, dy)) % 360.0)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _zone_tables() -> list[tuple[int, int, np.ndarray, np.ndarray]]:
    tables = []
    for top, bot, weights in _ZONES:
        codes = np.array(
            [_CODE_OF[VOCAB.id_of(m)] for m in weights], dtype=np.int64
        )
        p = np.array(list(weights.values()), dtype=np.float64)
        tables.append((top * PATCH, bot * PATCH, np.cumsum(p / p.sum()), codes))
    return tables


def _stamp(codes: np.ndarray, code: int, row_cells: tuple[int, int],
           center_col: int, width_cells: int) -> None:
    r0, r1 = row_cells[0] * PATCH, row_cells[1] * PATCH
    half = width_cells * PATCH // 2
    cols = (np.arange(center_col - half, center_col + half)) % HIGH_W
    codes[r0:r1, cols] = code


def build_world(cfg: NavGraphConfig) -> NavWorld:
    rng = np.random.default_rng(stable_hash64(("navworld", cfg.key())))
    rows, cols = cfg.lattice_rows, cfg.lattice_cols
    n = rows * cols
    positions = np.empty((n, 2), dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            positions[r * cols + c] = (
                c * cfg.spacing + rng.uniform(-cfg.jitter, cfg.jitter),
                r * cfg.spacing + rng.uniform(-cfg.jitter, cfg.jitter),
            )

    candidates = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                candidates.append((i, i + 1))
            if r + 1 < rows:
                candidates.append((i, i + cols))
    order = rng.permutation(len(candidates))
    uf = _UnionFind(n)
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for k in order:
        a, b = candidates[int(k)]
        if uf.union(a, b) or rng.random() < cfg.extra_edge_keep:
            neighbors[a].append((b, _bearing(positions, a, b)))
            neighbors[b].append((a, _bearing(positions, b, a)))
    for lst in neighbors:
        lst.sort()

    lm_type = rng.integers(0, len(LANDMARKS), size=n).astype(np.int32)
    lm_heading = rng.uniform(0.0, 360.0, size=n)

    zones = _zone_tables()
    all_counts = np.empty((n, PANO_H * PANO_W, N_CLASSES), dtype=np.uint16)
    patch_idx = (
        (np.arange(HIGH_H)[:, None] // PATCH) * PANO_W
        + (np.arange(HIGH_W)[None, :] // PATCH)
    )
    for i in range(n):
        prng = np.random.default_rng(stable_hash64(("pano", cfg.key(), i)))
        codes = np.empty((HIGH_H, HIGH_W), dtype=np.int64)
        for r0, r1, cdf, zone_codes in zones:
            u = prng.random((r1 - r0, HIGH_W))
            codes[r0:r1] = zone_codes[np.searchsorted(cdf, u)]
        own = _CODE_OF[VOCAB.id_of(LANDMARKS[lm_type[i]])]
        own_col = int(lm_heading[i] / 360.0 * HIGH_W)
        _stamp(codes, own, (10, 14), own_col, 3)
        for nbr, bearing in neighbors[i]:
            mark = _CODE_OF[VOCAB.id_of(LANDMARKS[lm_type[nbr]])]
            _stamp(codes, mark, (11, 13), int(bearing / 360.0 * HIGH_W), 2)
        all_counts[i] = np.bincount(
            (patch_idx * N_CLASSES + codes).ravel(),
            minlength=PANO_H * PANO_W * N_CLASSES,
        ).reshape(PANO_H * PANO_W, N_CLASSES)

    code_freqs = all_counts.sum(axis=(0, 1), dtype=np.float64)
    freqs = np.zeros(len(VOCAB), dtype=np.float64)
    freqs[CLASS_IDS] = code_freqs
    panos = np.empty((n, PANO_H, PANO_W), dtype=np.int32)
    for i in range(n):
        win = _argmax_codes(all_counts[i].astype(np.float64), code_freqs, cfg.alpha)
        panos[i] = CLASS_IDS[win].reshape(PANO_H, PANO_W)
    return NavWorld(positions, neighbors, panos, lm_type, freqs)


def save_world(world: NavWorld, path: str) -> None:
    src, dst, bearing = [], [], []
    for a, lst in enumerate(world.neighbors):
        for b, deg in lst:
            src.append(a)
            dst.append(b)
            bearing.append(deg)
    np.savez_compressed(
        path,
        positions=world.positions,
        panos=world.panos,
        lm_type=world.lm_type,
        freqs=world.freqs,
        edge_src=np.array(src, dtype=np.int32),
        edge_dst=np.array(dst, dtype=np.int32),
        edge_bearing=np.array(bearing, dtype=np.float64),
    )


def load_world(path: str) -> NavWorld:
    data = np.load(path)
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(len(data["positions"]))]
    for a, b, deg in zip(data["edge_src"], data["edge_dst"], data["edge_bearing"]):
        neighbors[int(a)].append((int(b), float(deg)))
    for lst in neighbors:
        lst.sort()
    return NavWorld(
        data["positions"], neighbors, data["panos"], data["lm_type"], data["freqs"]
    )


_WORLD_CACHE: dict[tuple, NavWorld] = {}


def get_world(cfg: NavGraphConfig) -> NavWorld:
    key = cfg.key()
    if key not in _WORLD_CACHE:
        _WORLD_CACHE[key] = build_world(cfg)
    return _WORLD_CACHE[key]


def _bfs(world: NavWorld, source: int) -> tuple[np.ndarray, np.ndarray]:
    """Hop distances and BFS parents from source, neighbors in id order."""
    dist = np.full(world.n, -1, dtype=np.int64)
    parent = np.full(world.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for a in frontier:
            for b, _ in world.neighbors[a]:
                if dist[b] < 0:
                    dist[b] = dist[a] + 1
                    parent[b] = a
                    nxt.append(b)
        frontier = nxt
    return dist, parent


def _edge_bearing(world: NavWorld, a: int, b: int) -> float:
    for nbr, deg in world.neighbors[a]:
        if nbr == b:
            return deg
    raise ValueError(f"no edge {a}->{b}")


def _turn(incoming: float, outgoing: float) -> str:
    delta = (outgoing - incoming + 540.0) % 360.0 - 180.0
    if abs(delta) <= 30.0:
        return "straight"
    return "left" if delta < 0 else "right"


@register
class NavGraphEnv(Environment):
    env_id = "navgraph"
    step_limit = 64

    #: manual variant renders opaque marks and ships a mapping field
    uses_marks = False

    def __init__(self, split: str = "train", seed: int = 0, **overrides) -> None:
        super().__init__(split, seed)
        self.cfg = NavGraphConfig(**overrides)
        self.world = get_world(self.cfg)
        self._legend = VOCAB.legend()

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        return (PANO_H, PANO_W, 1)

    @property
    def vocab(self) -> Vocabulary:
        return VOCAB

    @property
    def has_agent_cell(self) -> bool:
        return False

    # -- episode construction ---------------------------------------------

    def _instruction(self, path: list[int]) -> tuple[str, tuple, tuple]:
        world = self.world
        names = [LANDMARKS[world.lm_type[v]] for v in path]
        clauses = [f"head toward the {names[1]}"]
        turns = []
        for i in range(1, len(path) - 1):
            t = _turn(
                _edge_bearing(world, path[i - 1], path[i]),
                _edge_bearing(world, path[i], path[i + 1]),
            )
            turns.append(t)
            verb = "go straight at the" if t == "straight" else f"turn {t} at the"
            clauses.append(f"{verb} {names[i]}")
        clauses.append(f"stop at the {names[-1]}")
        return " . ".join(clauses), tuple(names[1:]), tuple(turns)

    def _generate(self, rng: np.random.Generator) -> Observation:
        world = self.world
        lo, hi = self.cfg.path_hops
        for _ in range(10_000):
            start = int(rng.integers(world.n))
            dist, parent = _bfs(world, start)
            mask = (dist >= lo) & (dist <= hi)
            pool = np.flatnonzero(mask)
            if len(pool) == 0:
                continue
            goal = int(pool[int(rng.integers(len(pool)))])
            path = [goal]
            while path[-1] != start:
                path.append(int(parent[path[-1]]))
            path.reverse()
            text, lm_seq, turn_seq = self._instruction(path)
            if split_for_key(("nav", lm_seq, turn_seq)) == self.split:
                break
        else:
            raise RuntimeError("could not sample an instruction in this split")

        self.start, self.goal = start, goal
        self.gold_path = tuple(path)
        self.instruction_key = ("nav", lm_seq, turn_seq)
        self.node = start
        self.heading = _edge_bearing(world, path[0], path[1])
        self.dist_to_goal, _ = _bfs(world, goal)
        self._instruction_text = text

        if self.uses_marks:
            perm = rng.permutation(len(LANDMARKS))
            self._mark_lut = np.arange(len(VOCAB), dtype=np.int32)
            for t, m in enumerate(perm):
                self._mark_lut[VOCAB.id_of(LANDMARKS[t])] = VOCAB.id_of(MARKS[m])
            mentioned = sorted({LANDMARKS[world.lm_type[v]] for v in path[1:]})
            extras = [w for w in LANDMARKS if w not in mentioned][:2]
            sentences = [
                f"the {MARKS[perm[LANDMARKS.index(w)]]} marks the {w}"
                for w in mentioned + extras
            ]
            order = rng.permutation(len(sentences))
            self._manual_text = " . ".join(sentences[i] for i in order)

        self._fields = self._make_fields()
        return self._observe()

    def _make_fields(self) -> TextBundle:
        fields = [
            TextField(
                "instructions",
                self._instruction_text,
                tuple(VOCAB.tokenize(self._instruction_text)),
            )
        ]
        if self.uses_marks:
            fields.append(
                TextField(
                    "manual", self._manual_text, tuple(VOCAB.tokenize(self._manual_text))
                )
            )
        joint = " . ".join(f.text for f in fields)
        return TextBundle(tuple(fields), joint, tuple(VOCAB.tokenize(joint)))

    # -- rendering ---------------------------------------------------------

    def _observe(self) -> Observation:
        pano = self.world.panos[self.node]
        if self.uses_marks:
            pano = self._mark_lut[pano]
        shift = heading_to_column(self.heading, PANO_W) - PANO_W // 2
        grid = np.roll(pano, -shift, axis=1)[:, :, None].astype(np.int32)

        edges = []
        for nbr, bearing in self.world.neighbors[self.node]:
            rel = (bearing - self.heading + 180.0) % 360.0
            edges.append((heading_to_column(rel, PANO_W), nbr, bearing))
        edges.sort()
        self._edges = edges
        actions = NavChoices(tuple(col for col, _, _ in edges), stop=True)
        relpos = relative_position(PANO_H, PANO_W, None)
        return Observation(grid, self._fields, relpos, actions, self._legend)

    # -- stepping ------------------------------------------------------------

    def _apply(self, action: int) -> tuple[Observation, float, bool, dict]:
        if action == len(self._edges):
            win = self.node == self.goal
            info = {"stopped": True}
            if win:
                info["win"] = True
            return self._observe(), (1.0 if win else -1.0), True, info
        _, nbr, bearing = self._edges[action]
        before = int(self.dist_to_goal[self.node])
        self.node = nbr
        self.heading = bearing
        shaped = float(before - int(self.dist_to_goal[self.node]))
        return self._observe(), shaped, False, {"shaped": shaped}


@register
class NavGraphManualEnv(NavGraphEnv):
    env_id = "navgraph_manual"
    uses_marks = True


def gold_actions(env: NavGraphEnv) -> list[int]:
    """Action indices following the gold path from reset, then stop."""
    out = []
    node, heading = env.node, env.heading
    for nxt in env.gold_path[1:]:
        edges = []
        for nbr, bearing in env.world.neighbors[node]:
            rel = (bearing - heading + 180.0) % 360.0
            edges.append((heading_to_column(rel, PANO_W), nbr, bearing))
        edges.sort()
        idx = next(i for i, (_, nbr, _) in enumerate(edges) if nbr == nxt)
        out.append(idx)
        node, heading = nxt, edges[idx][2]
    out.append(len(env.world.neighbors[node]))
    return out
