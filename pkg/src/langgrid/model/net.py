"""The grounded policy network.

Pipeline: grid cells embed as summed token vectors and concatenate with
relative positions; text fields and the joint string run through
bidirectional recurrent encoders; a stack of text-modulated
convolutional layers fuses the two, each layer conditioning its
modulation on a static field summary, a field attention, and a joint
token attention, all queried by the layer's spatial max; the flattened
final plane maps to the policy feature H.

Field-level poolings use the order-independent sorted sum, so shuffling
the input fields reproduces the summary and attention vectors bit for
bit.

Variants: state (recurrent H), local_conv (egocentric crop pathway),
entity_attn (per-cell attention over field tokens as extra channels),
concat_fields (joint encoding is the concatenation of field encodings).
Heads: fixed action MLP, scored text choices, panorama column scores
plus a learned stop.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import PAD_ID, stable_hash64
from . import ops
from .batch import Packed
from .config import ModelConfig
from .tape import Var


@dataclass
class ModelOutput:
    logits: Var                       # (B, A_max), invalid slots -inf
    mask: np.ndarray                  # (B, A_max) bool
    value: Var                        # (B,)
    state: tuple[np.ndarray, np.ndarray] | None
    state_vars: tuple[Var, Var] | None
    probes: dict = field(default_factory=dict)


class Reader:
    """Policy/value network over packed observation batches."""

    def __init__(self, cfg: ModelConfig) -> None:
        self.cfg = cfg
        self.params: dict[str, Var] = {}
        self._build()

    # -- parameters -----------------------------------------------------------

    def _rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng(stable_hash64(("init", self.cfg.seed, name)))

    def _uniform(self, name: str, shape: tuple[int, ...], scale: float) -> Var:
        data = self._rng(name).uniform(-scale, scale, shape).astype(self.cfg.np_dtype)
        var = Var(data)
        self.params[name] = var
        return var

    def _dense(self, name: str, fan_in: int, fan_out: int) -> Var:
        return self._uniform(name, (fan_in, fan_out), np.sqrt(6.0 / (fan_in + fan_out)))

    def _bias(self, name: str, n: int) -> Var:
        var = Var(np.zeros(n, dtype=self.cfg.np_dtype))
        self.params[name] = var
        return var

    def _conv(self, name: str, c_in: int, c_out: int) -> Var:
        scale = np.sqrt(6.0 / (c_in * 9 + c_out * 9))
        return self._uniform(name, (c_out, c_in, 3, 3), scale)

    def _lstm_params(self, prefix: str, d_in: int, h: int) -> None:
        self._dense(f"{prefix}.Wx", d_in, 4 * h)
        self._dense(f"{prefix}.Wh", h, 4 * h)
        b = self._bias(f"{prefix}.b", 4 * h)
        b.data[h : 2 * h] = 1.0  # open forget gates at init

    def _build(self) -> None:
        cfg = self.cfg
        d, r, c = cfg.d_emb, cfg.r, cfg.d_film
        h, w, _ = cfg.grid

        E = self._uniform("embed", (cfg.vocab_size, d), np.sqrt(3.0 / d))
        E.data[PAD_ID] = 0.0

        half = r // 2
        self._lstm_params("field.fwd", d, half)
        self._lstm_params("field.bwd", d, half)
        if cfg.variant != "concat_fields":
            self._lstm_params("joint.fwd", d, half)
            self._lstm_params("joint.bwd", d, half)
        self._dense("tokscore.W", r, 1)
        self._bias("tokscore.b", 1)
        self._dense("fieldscore.W", r, 1)
        self._bias("fieldscore.b", 1)

        c0 = d + 2
        if cfg.variant == "entity_attn":
            self._dense("entity.Wq", d, r)
            c0 += r
        self._c0 = c0
        for layer in range(cfg.films):
            c_in = c0 if layer == 0 else c + c0
            self._conv(f"film{layer}.vis.W", c_in, c)
            self._bias(f"film{layer}.vis.b", c)
            self._conv(f"film{layer}.mod.W", c_in, c)
            self._bias(f"film{layer}.mod.b", c)
            self._dense(f"film{layer}.qa.W", c_in, r)
            self._bias(f"film{layer}.qa.b", r)
            self._dense(f"film{layer}.qj.W", c_in, r)
            self._bias(f"film{layer}.qj.b", r)
            self._dense(f"film{layer}.gamma.W", 3 * r, c)
            self._bias(f"film{layer}.gamma.b", c)
            self._dense(f"film{layer}.beta.W", 3 * r, c)
            self._bias(f"film{layer}.beta.b", c)

        flat = c * h * w
        if cfg.variant == "local_conv":
            self._conv("local.W", c0, c)
            self._bias("local.b", c)
            flat += c * 25
        self._dense("head.H.W", flat, cfg.d_final)
        self._bias("head.H.b", cfg.d_final)

        if cfg.variant == "state":
            self._lstm_params("state", cfg.d_final, cfg.d_final)

        if cfg.action_kind == "fixed":
            self._dense("pi.W1", cfg.d_final, cfg.d_final)
            self._bias("pi.b1", cfg.d_final)
            self._dense("pi.W2", cfg.d_final, cfg.n_actions)
            self._bias("pi.b2", cfg.n_actions)
        elif cfg.action_kind == "text_choices":
            self._lstm_params("choice.fwd", d, half)
            self._lstm_params("choice.bwd", d, half)
            self._dense("choice.Wq", cfg.d_final, r)
            self._bias("choice.bq", r)
            self._dense("choice.Ws", r, 1)
            self._bias("choice.bs", 1)
        elif cfg.action_kind == "nav_coordinates":
            self._dense("nav.W", d, cfg.d_final)
            self._bias("nav.b", cfg.d_final)
            self._uniform("nav.stop", (1, d), np.sqrt(3.0 / d))
        else:
            raise ValueError(cfg.action_kind)

        self._dense("value.W", cfg.d_final, 1)
        self._bias("value.b", 1)

    # -- utilities --------------------------------------------------------------

    def apply_constraints(self) -> None:
        """Re-pin rows the optimizer must not move (the pad embedding)."""
        self.params["embed"].data[PAD_ID] = 0.0

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def initial_state(self, batch: int) -> tuple[np.ndarray, np.ndarray] | None:
        if self.cfg.variant != "state":
            return None
        z = np.zeros((batch, self.cfg.d_final), dtype=self.cfg.np_dtype)
        return z, z.copy()

    @property
    def is_recurrent(self) -> bool:
        return self.cfg.variant == "state"

    def n_parameters(self) -> int:
        return sum(p.data.size for p in self.params.values())

    # -- encoders ---------------------------------------------------------------

    def _bilstm(self, prefix: str, x: Var, lengths: np.ndarray):
        """(B, T, d) -> per-token states (B, T, r) and final state (B, r)."""
        B = x.data.shape[0]
        half = self.cfg.r // 2
        p = self.params
        zeros = ops.constant(np.zeros((B, half), dtype=self.cfg.np_dtype))
        fwd, _, _ = ops.lstm(
            x, zeros, zeros, p[f"{prefix}.fwd.Wx"], p[f"{prefix}.fwd.Wh"],
            p[f"{prefix}.fwd.b"],
        )
        x_rev = ops.reverse_padded(x, lengths)
        bwd_rev, _, _ = ops.lstm(
            x_rev, zeros, zeros, p[f"{prefix}.bwd.Wx"], p[f"{prefix}.bwd.Wh"],
            p[f"{prefix}.bwd.b"],
        )
        bwd = ops.reverse_padded(bwd_rev, lengths)
        states = ops.concat([fwd, bwd], axis=-1)
        final = ops.concat(
            [ops.gather_steps(fwd, lengths - 1), ops.gather_steps(bwd_rev, lengths - 1)],
            axis=-1,
        )
        return states, final

    def _token_pool(self, states: Var, lengths: np.ndarray) -> Var:
        """Score-weighted convex pooling over the token axis."""
        B, T, _ = states.data.shape
        p = self.params
        scores = ops.reshape(ops.linear(states, p["tokscore.W"], p["tokscore.b"]), (B, T))
        mask = np.arange(T)[None, :] < lengths[:, None]
        probs = ops.masked_softmax(scores, mask)
        return ops.reshape(ops.bmm(ops.reshape(probs, (B, 1, T)), states), (B, self.cfg.r))

    def _encode_text(self, batch: Packed):
        """Field reps N (B, n, r), static summary C, joint states D + mask."""
        p = self.params
        E = p["embed"]
        B = batch.batch
        reps = []
        token_states: list[Var] = []
        token_masks: list[np.ndarray] = []
        for ids, lengths in zip(batch.fields, batch.field_lengths):
            emb = ops.embedding(E, ids)
            states, _ = self._bilstm("field", emb, lengths)
            reps.append(ops.reshape(self._token_pool(states, lengths), (B, 1, self.cfg.r)))
            token_states.append(states)
            token_masks.append(np.arange(ids.shape[1])[None, :] < lengths[:, None])
        N = ops.concat(reps, axis=1)

        cs = ops.reshape(
            ops.linear(N, p["fieldscore.W"], p["fieldscore.b"]), (B, len(batch.fields))
        )
        C = ops.convex_pool_sorted(N, cs)

        if self.cfg.variant == "concat_fields":
            D = ops.concat(token_states, axis=1)
            D_mask = np.concatenate(token_masks, axis=1)
        else:
            emb = ops.embedding(E, batch.joint)
            D, _ = self._bilstm("joint", emb, batch.joint_length)
            T = batch.joint.shape[1]
            D_mask = np.arange(T)[None, :] < batch.joint_length[:, None]
        return N, C, D, D_mask, token_states, token_masks

    # -- fused trunk --------------------------------------------------------------

    def _film_layer(self, layer: int, X: Var, N: Var, C: Var, D: Var,
                    D_mask: np.ndarray, probes: dict) -> Var:
        p = self.params
        B = X.data.shape[0]
        r, c = self.cfg.r, self.cfg.d_film
        n = N.data.shape[1]

        s = ops.spatial_max(X)
        qa = ops.linear(s, p[f"film{layer}.qa.W"], p[f"film{layer}.qa.b"])
        sa = ops.reshape(ops.bmm(N, ops.reshape(qa, (B, r, 1))), (B, n))
        A = ops.convex_pool_sorted(N, sa)

        qj = ops.linear(s, p[f"film{layer}.qj.W"], p[f"film{layer}.qj.b"])
        m = D.data.shape[1]
        sj = ops.reshape(ops.bmm(D, ops.reshape(qj, (B, r, 1))), (B, m))
        pj = ops.masked_softmax(sj, D_mask)
        T = ops.reshape(ops.bmm(ops.reshape(pj, (B, 1, m)), D), (B, r))

        xt = ops.concat([C, A, T], axis=-1)
        gamma = ops.linear(xt, p[f"film{layer}.gamma.W"], p[f"film{layer}.gamma.b"])
        beta = ops.linear(xt, p[f"film{layer}.beta.W"], p[f"film{layer}.beta.b"])

        vis = ops.conv2d_same(X, p[f"film{layer}.vis.W"], p[f"film{layer}.vis.b"])
        mod = ops.conv2d_same(X, p[f"film{layer}.mod.W"], p[f"film{layer}.mod.b"])
        filmed = ops.add(
            ops.mul(mod, ops.reshape(gamma, (B, c, 1, 1))),
            ops.reshape(beta, (B, c, 1, 1)),
        )
        V = ops.relu(ops.add(vis, filmed))
        probes.setdefault("film_in", []).append(X.data)
        probes.setdefault("A", []).append(A.data)
        probes.setdefault("text_cond", []).append(xt.data)
        probes.setdefault("film_out", []).append(V.data)
        return V

    def _base_plane(self, batch: Packed, token_states, token_masks, probes):
        """Cell embeddings U (B, h, w, d) and input plane Z (B, c0, h, w)."""
        B = batch.batch
        h, w, k = self.cfg.grid
        d = self.cfg.d_emb
        emb = ops.embedding(self.params["embed"], batch.grid)   # (B,h,w,k,d)
        U = ops.sum_axis(emb, 3)
        parts = [U, ops.constant(batch.relpos)]
        if self.cfg.variant == "entity_attn":
            K = ops.concat(token_states, axis=1)                # (B, M, r)
            K_mask = np.concatenate(token_masks, axis=1)
            q = ops.linear(ops.reshape(U, (B, h * w, d)), self.params["entity.Wq"])
            scores = ops.bmm(q, ops.moveaxis(K, 1, 2))          # (B, hw, M)
            probs = ops.masked_softmax(scores, K_mask[:, None, :])
            ent = ops.bmm(probs, K)                             # (B, hw, r)
            parts.append(ops.reshape(ent, (B, h, w, self.cfg.r)))
            probes["entity_attn"] = probs.data
        Z = ops.moveaxis(ops.concat(parts, axis=-1), 3, 1)
        return U, Z

    # -- heads -------------------------------------------------------------------

    def _head_fixed(self, H: Var, batch: Packed):
        p = self.params
        hidden = ops.relu(ops.linear(H, p["pi.W1"], p["pi.b1"]))
        logits = ops.linear(hidden, p["pi.W2"], p["pi.b2"])
        mask = batch.action_mask()
        return logits, mask

    def _head_choices(self, H: Var, batch: Packed):
        p = self.params
        B, J, L = batch.choice_tokens.shape
        ids = batch.choice_tokens.reshape(B * J, L)
        lengths = batch.choice_lengths.reshape(B * J)
        emb = ops.embedding(p["embed"], ids)
        _, final = self._bilstm("choice", emb, np.maximum(lengths, 1))
        g = ops.reshape(final, (B, J, self.cfg.r))
        q = ops.linear(H, p["choice.Wq"], p["choice.bq"])
        inter = ops.mul(g, ops.reshape(q, (B, 1, self.cfg.r)))
        logits = ops.reshape(ops.linear(inter, p["choice.Ws"], p["choice.bs"]), (B, J))
        return logits, batch.action_mask()

    def _head_nav(self, H: Var, U: Var, batch: Packed):
        p = self.params
        B = batch.batch
        h = self.cfg.grid[0]
        cols = batch.nav_columns                                  # (B, J)
        J = cols.shape[1]
        u_cols = ops.mul_const(ops.sum_axis(U, 1), 1.0 / h)       # (B, w, d)
        picked = ops.gather_seq(u_cols, cols)                     # (B, J, d)
        stop = ops.reshape(
            ops.linear(ops.constant(np.ones((B, 1), dtype=self.cfg.np_dtype)),
                       self.params["nav.stop"]),
            (B, 1, self.cfg.d_emb),
        )
        cand = ops.concat([picked, stop], axis=1)                 # (B, J+1, d)
        proj = ops.linear(cand, p["nav.W"], p["nav.b"])           # (B, J+1, final)
        scores = ops.reshape(
            ops.bmm(proj, ops.reshape(H, (B, self.cfg.d_final, 1))), (B, J + 1)
        )
        # env action i is edge i for i < n_edges, stop at i == n_edges
        A = batch.max_actions
        n_edges = batch.n_actions - 1
        perm = np.where(
            np.arange(A)[None, :] < n_edges[:, None], np.arange(A)[None, :], J
        )
        logits = ops.reshape(
            ops.gather_seq(ops.reshape(scores, (B, J + 1, 1)), perm), (B, A)
        )
        return logits, batch.action_mask()

    # -- forward -----------------------------------------------------------------

    def forward(self, batch: Packed,
                state: tuple[np.ndarray, np.ndarray] | None = None,
                state_vars: tuple[Var, Var] | None = None) -> ModelOutput:
        """Run the batch; for the state variant pass the carried (h, c).

        state_vars, when given, chains gradients across steps inside one
        learner unroll; otherwise state is treated as a constant input.
        """
        cfg = self.cfg
        probes: dict = {}
        N, C, D, D_mask, token_states, token_masks = self._encode_text(batch)
        probes["C"] = C.data
        U, Z = self._base_plane(batch, token_states, token_masks, probes)

        X = Z
        V = None
        for layer in range(cfg.films):
            V = self._film_layer(layer, X, N, C, D, D_mask, probes)
            X = ops.concat([V, Z], axis=1)

        B = batch.batch
        flat = [ops.reshape(V, (B, cfg.d_film * cfg.grid[0] * cfg.grid[1]))]
        if cfg.variant == "local_conv":
            crop = ops.crop_window(Z, batch.agent, 5)
            loc = ops.relu(ops.conv2d_same(crop, self.params["local.W"],
                                           self.params["local.b"]))
            flat.append(ops.reshape(loc, (B, cfg.d_film * 25)))
        H = ops.tanh(ops.linear(ops.concat(flat, axis=-1) if len(flat) > 1 else flat[0],
                                self.params["head.H.W"], self.params["head.H.b"]))
        probes["H"] = H.data

        new_state = None
        new_state_vars = None
        if cfg.variant == "state":
            if state_vars is not None:
                h0, c0 = state_vars
            else:
                if state is None:
                    state = self.initial_state(B)
                h0 = ops.constant(state[0])
                c0 = ops.constant(state[1])
            p = self.params
            hseq, h_last, c_last = ops.lstm(
                ops.reshape(H, (B, 1, cfg.d_final)), h0, c0,
                p["state.Wx"], p["state.Wh"], p["state.b"],
            )
            H = ops.add(H, h_last)
            new_state = (h_last.data.copy(), c_last.data.copy())
            new_state_vars = (h_last, c_last)
        probes["H_out"] = H.data

        if cfg.action_kind == "fixed":
            logits, mask = self._head_fixed(H, batch)
        elif cfg.action_kind == "text_choices":
            logits, mask = self._head_choices(H, batch)
        else:
            logits, mask = self._head_nav(H, U, batch)

        value = ops.reshape(ops.linear(H, self.params["value.W"], self.params["value.b"]),
                            (B,))
        return ModelOutput(logits, mask, value, new_state, new_state_vars, probes)
