import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from golden import EXAMPLE_NB
from nbsr import _pykernels, kernels
from nbsr.features import feature_strings, featurize
from nbsr.scorer import LinearModel, ModelFormatError, score_all, update
from nbsr.transitions import FINISH, SHIFT, initial, reduce, replay

INVENTORY = [SHIFT, FINISH, reduce("NP", 2), reduce("S", 3)]


def small_model(**kw):
    return LinearModel(INVENTORY, bits=16, **kw)


def test_initial_features(example):
    fs = feature_strings(initial(example.tokens()))
    assert "b0.w=the" in fs and "b0.p=DT" in fs
    assert "s0.l=<none>" in fs
    assert not any(f.startswith("s0.l=") and f != "s0.l=<none>" for f in fs)


def test_features_deterministic(example):
    a = replay(example.tokens(), EXAMPLE_NB[:5])
    b = replay(example.tokens(), EXAMPLE_NB[:5])
    assert np.array_equal(featurize(a), featurize(b))


def test_features_mid_parse(example):
    c = replay(example.tokens(), EXAMPLE_NB[:10])  # stack [NP, VP, .]
    fs = feature_strings(c)
    assert "s1.l=VP" in fs and "s2.l=NP" in fs
    c = replay(example.tokens(), EXAMPLE_NB[:9])  # stack [NP, VP]
    fs = feature_strings(c)
    assert "s0.l=VP" in fs and "s1.l=NP" in fs and "s0.ar=3/0" in fs


def test_zero_model(example):
    scores = score_all(small_model(), initial(example.tokens()))
    assert set(scores) == set(INVENTORY)
    assert all(v == 0.0 for v in scores.values())


def test_update_direction(example):
    m = small_model()
    c = initial(example.tokens())
    before = score_all(m, c)
    update(m, c, SHIFT, FINISH)
    after = score_all(m, c)
    assert after[SHIFT] > before[SHIFT]
    assert after[FINISH] < before[FINISH]
    assert max([SHIFT, FINISH], key=after.get) == SHIFT


def test_same_transition_update_is_noop(example):
    m = small_model()
    update(m, initial(example.tokens()), SHIFT, SHIFT)
    assert not m.weights.any() and not m.totals.any()


def test_constant_feature_keeps_differences(example):
    m = small_model()
    c = initial(example.tokens())
    update(m, c, SHIFT, FINISH)
    feats = featurize(c)
    base = m.scores(feats, INVENTORY)
    m.weights += 0.5  # every (feature, transition) bucket gains the same amount
    shifted = m.scores(feats, INVENTORY)
    diffs = shifted - base
    assert np.allclose(diffs, diffs[0])


def test_averaging(example):
    m = small_model()
    c = initial(example.tokens())
    assert np.array_equal(m.averaged().weights, m.weights)
    update(m, c, SHIFT, FINISH)
    m.tick()
    m.tick()
    avg = m.averaged()
    # one update at step 1, averaged over 3 steps -> 2/3 of the final weight
    nz = m.weights != 0
    assert np.allclose(avg.weights[nz], m.weights[nz] * 2 / 3)


def test_perceptron_separable():
    rng = np.random.default_rng(0)
    labels = [SHIFT, FINISH, reduce("NP", 2)]
    m = LinearModel(labels, bits=18)
    data = []
    for k in range(60):
        feats = np.unique(rng.integers(0, 2**63, 8, dtype=np.uint64))
        data.append((feats, labels[k % 3]))
    for _ in range(20):
        for feats, gold in data:
            pred = max(labels, key=lambda t: (m.score_map(feats, labels)[t], -labels.index(t)))
            m.update(feats, gold, pred)
            m.tick()
    correct = sum(max(labels, key=m.score_map(f, labels).get) == g for f, g in data)
    assert correct == len(data)


def test_serialization_round_trip(example, tmp_path):
    m = small_model(root_label="S")
    c = initial(example.tokens())
    for t in EXAMPLE_NB[:4]:
        update(m, c, SHIFT, reduce("NP", 2))
        m.tick()
    path = tmp_path / "m.bin"
    m.save(path)
    loaded = LinearModel.load(path)
    for k in range(len(EXAMPLE_NB)):
        ck = replay(example.tokens(), EXAMPLE_NB[:k])
        assert score_all(loaded, ck) == score_all(m, ck)
    assert loaded.to_bytes() == m.to_bytes()
    assert loaded.root_label == "S" and loaded.transitions == m.transitions


def test_loader_rejects_bad_files():
    data = small_model().to_bytes()
    bumped = data[:8] + (2).to_bytes(4, "little") + data[12:]
    with pytest.raises(ModelFormatError, match="version"):
        LinearModel.from_bytes(bumped)
    with pytest.raises(ModelFormatError):
        LinearModel.from_bytes(b"garbage")
    with pytest.raises(ModelFormatError):
        LinearModel.from_bytes(data[:-3] if len(data) > 40 else data + b"x")


def test_system_from_inventory():
    m = small_model()
    system = m.system()
    assert system.inventory == {("NP", 2), ("S", 3)}


@given(st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=30, unique=True),
       st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=10))
def test_backends_agree(feats, trans):
    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    from nbsr import _kernels
    f = np.array(sorted(feats), dtype=np.uint64)
    t = np.array(trans, dtype=np.uint64)
    mask = (1 << 12) - 1
    out = {}
    for name, impl in (("py", _pykernels), ("c", _kernels)):
        w, u = np.zeros(mask + 1), np.zeros(mask + 1)
        impl.update(w, u, f, int(t[0]), int(t[-1]), mask, 3.0)
        w += np.arange(mask + 1) * 0.25
        s = np.empty(len(t))
        impl.score(w, f, t, mask, s)
        out[name] = (w, u, s)
    assert np.array_equal(out["py"][0], out["c"][0])
    assert np.array_equal(out["py"][1], out["c"][1])
    assert np.array_equal(out["py"][2], out["c"][2])
    assert _pykernels.bucket(int(f[0]), int(t[0]), mask) == _kernels.bucket(int(f[0]), int(t[0]), mask)
