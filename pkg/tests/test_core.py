"""Hashing, vocabulary, splits, observation digests, and the registry."""
import numpy as np
import pytest

from langgrid.core import (
    DEFAULT_SPLITS,
    FixedActions,
    Observation,
    PAD_ID,
    SplitSpec,
    TextBundle,
    TextField,
    UNK_ID,
    Vocabulary,
    env_ids,
    hash_bucket,
    make,
    relative_position,
    split_for_key,
    split_for_seed,
    stable_hash64,
    stable_hash_hex,
)


class TestStableHash:
    def test_frozen_values(self):
        # Pinned outputs: a change here silently invalidates every
        # recorded trajectory and split assignment.
        assert stable_hash64(("episode", "rtfm", 7)) == 13873472575262580627
        assert stable_hash_hex(("episode", "rtfm", 7)) == "c08879cd69a65f93"
        arr = np.arange(6, dtype=np.int32).reshape(2, 3)
        assert stable_hash64(arr) == 4798812945889981487

    def test_type_tags_distinguish(self):
        assert stable_hash64((True, 1)) != stable_hash64((1, 1))
        assert stable_hash64((1, 1)) != stable_hash64(("1", 1))
        assert stable_hash64(0) != stable_hash64(0.0)

    def test_container_sensitivity(self, rng):
        for _ in range(50):
            a = tuple(int(x) for x in rng.integers(0, 5, size=4))
            b = list(a)
            assert stable_hash64(a) == stable_hash64(tuple(b))
            assert stable_hash64((a, ())) != stable_hash64((a, (0,)))

    def test_dict_order_invariant(self):
        assert stable_hash64({"a": 2, "b": 1}) == stable_hash64({"b": 1, "a": 2})

    def test_numpy_scalar_matches_python(self):
        assert stable_hash64(np.int64(9)) == stable_hash64(9)
        assert stable_hash64(np.float32(0.5)) == stable_hash64(float(np.float32(0.5)))


class TestVocabulary:
    def test_reserved_ids(self):
        v = Vocabulary(["cat", "bat"])
        assert v.id_of("<unk>") == UNK_ID == 0
        assert v.id_of("<pad>") == PAD_ID == 1
        assert v.word_of(v.id_of("bat")) == "bat"

    def test_sorted_and_stable(self):
        a = Vocabulary(["zeta", "alpha", "mid"])
        b = Vocabulary(["mid", "zeta", "alpha", "alpha"])
        assert a.words == b.words
        assert a.id_of("alpha") < a.id_of("mid") < a.id_of("zeta")

    def test_unknown_maps_to_unk(self):
        v = Vocabulary(["known"])
        assert v.tokenize("known missing")[1] == UNK_ID

    def test_legend_round_trip(self):
        v = Vocabulary(["wall", "you"])
        legend = v.legend()
        for word in ("wall", "you"):
            assert legend[v.id_of(word)] == word


class TestSplits:
    def test_default_ranges(self):
        assert split_for_seed(0) == "train"
        assert split_for_seed(999_999) == "train"
        assert split_for_seed(1_000_000) == "val"
        assert split_for_seed(2_000_000) == "test"
        with pytest.raises(ValueError):
            split_for_seed(3_000_000)

    def test_seed_in_folds(self):
        spec = DEFAULT_SPLITS
        s = spec.seed_in("train", 1234)
        assert 0 <= s < 1_000_000

    def test_bucket_shares(self):
        # 7/2/1 split of the ten hash buckets.
        counts = {"train": 0, "val": 0, "test": 0}
        for i in range(5000):
            counts[split_for_key(("k", i))] += 1
        assert counts["train"] > counts["val"] > counts["test"] > 0
        assert abs(counts["train"] / 5000 - 0.7) < 0.05

    def test_bucket_is_hash_mod_ten(self):
        for i in range(100):
            key = ("probe", i)
            assert hash_bucket(key) == stable_hash64(key) % 10

    def test_custom_spec_rejects_overlap(self):
        with pytest.raises(ValueError):
            SplitSpec({"train": (0, 10), "val": (5, 15)})


class TestObservation:
    def _obs(self, grid):
        h, w, _ = grid.shape
        f = TextField("goal", "get gold", (4, 5))
        return Observation(
            grid=grid,
            text=TextBundle(fields=(f,), joint_text="get gold", joint_tokens=(4, 5)),
            relpos=relative_position(h, w, (0, 0)),
            actions=FixedActions(labels=("up", "down")),
            legend={2: "wall"},
        )

    def test_digest_is_16_hex(self):
        obs = self._obs(np.ones((3, 3, 1), dtype=np.int32))
        d = obs.digest()
        assert len(d) == 16 and int(d, 16) >= 0

    def test_digest_sensitive_to_grid(self):
        g = np.ones((3, 3, 1), dtype=np.int32)
        a = self._obs(g).digest()
        g2 = g.copy()
        g2[1, 1, 0] = 2
        assert self._obs(g2).digest() != a

    def test_relative_position_range(self):
        rp = relative_position(5, 7, (2, 3))
        assert rp.shape == (5, 7, 2)
        assert rp.dtype == np.float32
        assert abs(float(rp[2, 3, 0])) < 1e-9 and abs(float(rp[2, 3, 1])) < 1e-9
        assert float(np.abs(rp).max()) <= 1.0


class TestRegistry:
    def test_all_envs_registered(self):
        ids = env_ids()
        for required in ("rtfm", "messenger", "crawler", "textchoice",
                         "navgraph", "navgraph_manual"):
            assert required in ids

    def test_make_rejects_unknown(self):
        with pytest.raises(ValueError):
            make("not_an_env")

    def test_make_rejects_bad_split(self):
        with pytest.raises(ValueError):
            make("rtfm", split="nope")
