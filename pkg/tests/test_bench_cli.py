import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attention_hardness import cli
from attention_hardness.bench import (BenchRecord, emit_csv, emit_json, fit_exponent, fit_power_law,
                                      parse_csv, parse_json, run_scaling, taylor_sweep)
from attention_hardness.errors import ConfigError
from attention_hardness.problems import generate, save_instance


def synthetic(ns, times):
    return [BenchRecord("exp_dot", n, 8, 0, 3, t, 0.0, int(n * n)) for n, t in zip(ns, times)]


def test_fit_recovers_quadratic_and_linear():
    ns = [256, 512, 1024, 2048, 4096]
    assert abs(fit_exponent(synthetic(ns, [n ** 2 * 1e-9 for n in ns])).slope - 2.0) <= 1e-9
    fit = fit_exponent(synthetic(ns, [3.7e-6 * n for n in ns]))
    assert abs(fit.slope - 1.0) <= 1e-9 and fit.r_squared == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(1e-9, 1e3), st.lists(st.integers(2, 10**6), min_size=3, max_size=8, unique=True))
def test_fit_pure_power_laws(k, c, ns):
    fit = fit_power_law(ns, [c * n ** k for n in ns])
    assert abs(fit.slope - k) <= 1e-9
    assert 0.0 <= fit.r_squared <= 1.0


def test_fit_rejects_degenerate_inputs():
    with pytest.raises(ConfigError):
        fit_power_law([4, 4, 4], [1, 2, 3])
    with pytest.raises(ConfigError):
        fit_power_law([1, 2], [1, 2])
    with pytest.raises(ConfigError):
        fit_exponent(synthetic([8, 8, 16], [1, 1, 2]))


def test_record_invariants():
    with pytest.raises(ConfigError):
        BenchRecord("poly", 8, 2, 2, 1, 0.1, 0.0, 10)
    with pytest.raises(ConfigError):
        BenchRecord("poly", 8, 2, 2, 3, 0.1, -1.0, 10)


def test_run_scaling_small():
    recs = run_scaling("exp_dot", [16, 32, 64], d=4, reps=3)
    assert [r.n for r in recs] == [16, 32, 64]
    assert all(r.reps == 3 and r.std_seconds >= 0 for r in recs)
    assert abs(fit_exponent(recs, "op_count").slope - 2.0) < 1e-9
    poly = run_scaling("poly", [64, 128, 256], d=2, p=2, reps=3)
    assert abs(fit_exponent(poly, "op_count").slope - 1.0) < 1e-9


def test_run_scaling_preconditions():
    with pytest.raises(ConfigError):
        run_scaling("exp_dot", [16, 32, 64], reps=1)
    with pytest.raises(ConfigError):
        run_scaling("exp_dot", [16, 32], reps=3)
    with pytest.raises(ConfigError):
        run_scaling("exp_dot", [32, 16, 64], reps=3)
    with pytest.raises(ConfigError):
        run_scaling("cosine", [16, 32, 64], reps=3)


def test_csv_and_json_round_trip():
    recs = run_scaling("softmax", [8, 16, 32], d=2, reps=3, seed=5)
    assert parse_csv(emit_csv(recs)) == recs
    assert parse_json(emit_json(recs)) == recs
    assert emit_csv(recs).splitlines()[0] == "kernel,n,d,p,reps,mean_seconds,std_seconds,op_count"


def test_taylor_sweep_shape():
    sweep = taylor_sweep(6, n=8, d=4, seed=1)
    assert [p for p, _ in sweep] == list(range(7))
    errs = [e for _, e in sweep]
    assert all(a >= b for a, b in zip(errs, errs[1:]))


def test_taylor_sweep_order_zero_is_uniform_average_error():
    import math
    from attention_hardness.attention_ref import AttentionSpec, softmax_attention
    from attention_hardness.tensor_core import DenseMatrix
    n, d = 8, 4
    rng = np.random.default_rng(3)
    s = 1 / math.sqrt(d)
    q, k, v = rng.uniform(-s, s, (n, d)), rng.uniform(-s, s, (n, d)), rng.uniform(-1, 1, (n, d))
    ref = softmax_attention(AttentionSpec("softmax_dot"), DenseMatrix(q), DenseMatrix(v), K=DenseMatrix(k)).to_numpy()
    want = np.abs(np.tile(v.mean(0), (n, 1)) - ref).max()
    assert taylor_sweep(0, n=n, d=d, seed=3)[0][1] == pytest.approx(want, rel=1e-12)


def test_taylor_sweep_rejects_unbounded_inputs():
    with pytest.raises(ConfigError):
        taylor_sweep(3, n=8, d=4, input_scale=2.0)


def test_taylor_sweep_records_degenerate_orders():
    out = taylor_sweep(3, C=40.0, n=16, d=4, seed=0)
    assert any(err is None for _, err in out)
    assert out[0][1] is not None


# --- command line --------------------------------------------------------------

def test_cli_verify_reductions(capsys):
    assert cli.main(["verify", "reductions", "--trials", "200", "--seed", "7"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["disagreements"] == 0


def test_cli_verify_gadgets(capsys):
    assert cli.main(["verify", "gadgets", "--variant", "l2_rbf:multiplicative", "--mu", "0.5",
                     "--trials", "20", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "check,variant,mu,instances,disagreements" and lines[1].endswith(",40,0")


def test_cli_decide(tmp_path, capsys):
    path = tmp_path / "yes.json"
    save_instance(generate("TVPP", 8, 5, 3, "yes", seed=0), path)
    assert cli.main(["decide", "--instance", str(path), "--variant", "exp_dot:exact"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["decision"] is True and report["oracle_agreement"] is True


def test_cli_decide_writes_out_file(tmp_path):
    inst, out = tmp_path / "no.json", tmp_path / "report.json"
    save_instance(generate("BHCP", 6, 4, 2, "no", seed=0), inst)
    assert cli.main(["decide", "--instance", str(inst), "--variant", "l2_rbf:exact", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["decision"] is False


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["--no-such-flag"]) == 2
    assert cli.main(["verify", "gadgets", "--variant", "nope:exact"]) == 2
    assert cli.main(["verify", "gadgets", "--variant", "l2_rbf:additive", "--mu", "0.5", "--trials", "1"]) == 2
    assert cli.main(["decide", "--instance", str(tmp_path / "missing.json"), "--variant", "exp_dot"]) == 2
    capsys.readouterr()


def test_cli_bench_scaling(tmp_path):
    out = tmp_path / "scaling.csv"
    assert cli.main(["bench", "scaling", "--kernel", "poly", "--sizes", "32,64,128", "--d", "2",
                     "--format", "csv", "--out", str(out)]) == 0
    recs = parse_csv(out.read_text())
    assert [r.n for r in recs] == [32, 64, 128]
    assert cli.main(["bench", "scaling", "--kernel", "poly", "--sizes", "32,64,128", "--reps", "1"]) == 2


def test_cli_bench_taylor(capsys):
    assert cli.main(["bench", "taylor", "--p-max", "4", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["p"] for r in rows] == [0, 1, 2, 3, 4]


def test_cli_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv(cli.SEED_ENV, "11")
    cli.main(["bench", "taylor", "--p-max", "1"])
    env_run = capsys.readouterr().out
    cli.main(["bench", "taylor", "--p-max", "1", "--seed", "11"])
    assert capsys.readouterr().out == env_run
    cli.main(["bench", "taylor", "--p-max", "1", "--seed", "12"])
    assert capsys.readouterr().out != env_run


def test_cli_global_flags_before_subcommand(capsys):
    assert cli.main(["--format", "csv", "--seed", "3", "bench", "taylor", "--p-max", "1"]) == 0
    assert capsys.readouterr().out.startswith("p,max_abs_error")
