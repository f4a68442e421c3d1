import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attention_hardness.errors import GenerationError, KindError, ShapeError
from attention_hardness.problems import (ProblemInstance, bhfp_to_bhcp, generate, load_instance, oracle,
                                         ovp_to_bhfp, ovp_to_tvpp, pair_dots, pair_sqdists, save_instance,
                                         tvpp_t1_linear)
from attention_hardness.tensor_core import BinaryVectorSet


def inst(kind, a, b, t=None):
    return ProblemInstance(kind, BinaryVectorSet(np.array(a)), BinaryVectorSet(np.array(b)), t)


def brute(kind, a, b, t):
    """Pairwise scan written independently of the library oracle."""
    for x in a:
        for y in b:
            dot = sum(int(p) * int(q) for p, q in zip(x, y))
            dist = sum((int(p) - int(q)) ** 2 for p, q in zip(x, y))
            if (kind == "OVP" and dot == 0) or (kind == "TVPP" and dot >= t) \
                    or (kind == "BHFP" and dist >= t) or (kind == "BHCP" and dist < t):
                return True
    return False


def test_oracle_examples():
    assert oracle(inst("OVP", [[1, 0]], [[0, 1]]))
    assert not oracle(inst("OVP", [[1, 1]], [[1, 0]]))
    assert oracle(inst("TVPP", [[1, 1]], [[1, 1]], 2))


def test_bhcp_strict_and_bhfp_inclusive():
    a, b = [[1, 0, 0]], [[0, 1, 0]]          # squared distance 2
    assert not oracle(inst("BHCP", a, b, 2))
    assert oracle(inst("BHCP", a, b, 3))
    assert oracle(inst("BHFP", a, b, 2))
    assert not oracle(inst("BHFP", a, b, 3))


def test_instance_validation():
    with pytest.raises(ShapeError):
        inst("OVP", [[1, 0]], [[1, 0, 1]])
    with pytest.raises(KindError):
        inst("XYZ", [[1]], [[1]])
    with pytest.raises(ValueError):
        inst("TVPP", [[1]], [[1]], 0)
    with pytest.raises(ValueError):
        inst("BHCP", [[1]], [[1]], 2)
    with pytest.raises(ValueError):
        inst("OVP", [[1]], [[1]], 1)
    assert inst("BHFP", [[1]], [[1]], 0).threshold == 0


def test_ovp_to_tvpp_examples():
    t = ovp_to_tvpp(inst("OVP", [[1, 0]], [[0, 1]]))
    assert t.A.tolist() == [[1, 0, 0, 1]] and t.B.tolist() == [[1, 0, 1, 1]] and t.threshold == 2
    assert pair_dots(t.A, t.B)[0, 0] == 2
    ones = inst("OVP", [[1, 1, 1]], [[1, 1, 1]])
    assert pair_dots(ovp_to_tvpp(ones).A, ovp_to_tvpp(ones).B)[0, 0] == 0
    assert not oracle(ovp_to_tvpp(ones)) and not oracle(ones)
    z = inst("OVP", [[0]], [[0]])
    assert oracle(z) and oracle(ovp_to_tvpp(z)) and pair_dots(ovp_to_tvpp(z).A, ovp_to_tvpp(z).B)[0, 0] == 1


def test_ovp_to_bhfp_examples():
    f = ovp_to_bhfp(inst("OVP", [[1, 0]], [[0, 1]]))
    assert f.A.tolist() == [[1, 0, 0, 1, 0, 0]] and f.B.tolist() == [[0, 1, 0, 0, 1, 0]]
    assert pair_sqdists(f.A, f.B)[0, 0] == 4 and f.threshold == 4
    z = ovp_to_bhfp(inst("OVP", [[0]], [[0]]))
    assert pair_sqdists(z.A, z.B)[0, 0] == 2 and oracle(z)


def test_bhfp_to_bhcp_examples():
    f = inst("BHFP", [[1, 0]], [[1, 1]], 1)
    c = bhfp_to_bhcp(f)
    assert c.B.tolist() == [[0, 0]] and pair_sqdists(c.A, c.B)[0, 0] == 1 and c.threshold == 2
    same = bhfp_to_bhcp(inst("BHFP", [[1, 0, 1]], [[1, 0, 1]], 3))
    assert pair_sqdists(same.A, same.B)[0, 0] == 3 and same.threshold == 1


def test_reductions_reject_wrong_kind():
    t = inst("TVPP", [[1]], [[1]], 1)
    for fn in (ovp_to_tvpp, ovp_to_bhfp, bhfp_to_bhcp):
        with pytest.raises(KindError):
            fn(t)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 16), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_reduction_identities_and_sizes(n, d, seed):
    o = generate("OVP", n, d, seed=seed)
    t, f = ovp_to_tvpp(o), ovp_to_bhfp(o)
    c = bhfp_to_bhcp(f)
    dots = pair_dots(o.A, o.B)
    assert (t.d, f.d, c.d) == (2 * d, 3 * d, 3 * d)
    assert (pair_dots(t.A, t.B) == d - dots).all()
    assert (pair_sqdists(f.A, f.B) == 2 * d - 2 * dots).all()
    assert (pair_sqdists(c.A, c.B) == f.d - pair_sqdists(f.A, f.B)).all()
    assert oracle(o) == oracle(t) == oracle(f) == oracle(c)
    for s in (t, f, c):
        assert set(np.unique(np.concatenate([s.A.bits, s.B.bits]))) <= {0, 1}


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["OVP", "TVPP", "BHFP", "BHCP"]), st.integers(1, 6), st.integers(1, 6),
       st.integers(0, 2**32 - 1), st.data())
def test_oracle_matches_pairwise_scan(kind, n, d, seed, data):
    t = None if kind == "OVP" else data.draw(st.integers(1 if kind == "TVPP" else 0, d))
    x = generate(kind, n, d, t, seed=seed)
    assert oracle(x) == brute(kind, x.A.tolist(), x.B.tolist(), t)


@pytest.mark.parametrize("kind", ["OVP", "TVPP", "BHFP", "BHCP"])
def test_planted_answers(kind):
    rng = np.random.default_rng(11)
    for _ in range(60):
        n, d = int(rng.integers(1, 12)), int(rng.integers(1, 9))
        t = None if kind == "OVP" else int(rng.integers(1, d + 1))
        assert oracle(generate(kind, n, d, t, "yes", seed=rng))
        assert not oracle(generate(kind, n, d, t, "no", seed=rng))


def test_planted_tvpp_full_threshold_has_all_ones_witness():
    x = generate("TVPP", 4, 4, 4, "yes", seed=5)
    ones = [1, 1, 1, 1]
    assert ones in x.A.tolist() and ones in x.B.tolist()


def test_planted_ovp_no_small():
    x = generate("OVP", 2, 2, planted="no", seed=3)
    assert (pair_dots(x.A, x.B) > 0).all()


def test_generate_is_deterministic():
    for kind, t in (("OVP", None), ("TVPP", 2), ("BHCP", 3)):
        for planted in ("yes", "no", "random"):
            assert generate(kind, 6, 5, t, planted, seed=42) == generate(kind, 6, 5, t, planted, seed=42)


def test_generation_errors():
    with pytest.raises(GenerationError):
        generate("BHCP", 3, 3, 0, "yes")
    with pytest.raises(GenerationError):
        generate("BHFP", 3, 3, 0, "no")


def test_instance_file_round_trip(tmp_path):
    x = generate("BHCP", 5, 7, 3, "yes", seed=9)
    path = tmp_path / "inst.json"
    save_instance(x, path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"kind", "n", "d", "threshold", "A", "B"}
    assert load_instance(path) == x
    doc["n"] = 6
    with pytest.raises(ShapeError):
        ProblemInstance.from_dict(doc)


def test_tvpp_t1_linear_helper():
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = generate("TVPP", int(rng.integers(1, 8)), int(rng.integers(1, 6)), 1, seed=rng)
        assert tvpp_t1_linear(x) == oracle(x)
    with pytest.raises(ValueError):
        tvpp_t1_linear(inst("TVPP", [[1, 1]], [[1, 1]], 2))
