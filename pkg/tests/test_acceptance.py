"""End-to-end acceptance suite.

Each test covers one headline guarantee and prints a single [PASS]/[FAIL]
line (run with ``pytest -s`` to see them on success).
"""

import json
import sys
import time
from statistics import median

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from shapbox import (
    ExplainerConfig,
    SubprocessModel,
    create_app,
    encode_request,
    exact_shapley,
    explain,
    find_varying_features,
    load_model,
    summarize_background,
)
from shapbox.cli import main as cli_main
from shapbox.errors import SubprocessAdapterError

from conftest import (
    DATA_DIR,
    FIXTURE_DIR,
    permute_tree_doc,
    random_linear_model,
    random_tree_doc,
    random_tree_model,
)


def _report(name, ok):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    assert ok, name


def _random_case(rng, n_features, allow_tree=True):
    if allow_tree and rng.random() < 0.5:
        model = random_tree_model(rng, n_features)
    else:
        model = random_linear_model(rng, n_features)
    x = rng.standard_normal(n_features)
    n_bg = int(rng.choice([1, 5]))
    bg = rng.standard_normal((n_bg, n_features))
    return model, x, bg


def test_oracle_exactness():
    rng = np.random.default_rng(100)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n_features = int(rng.integers(2, 11))
        model, x, bg = _random_case(rng, n_features)
        oracle = exact_shapley(model, x, bg)
        estimate = explain(model, x, bg, ExplainerConfig(n_samples=2**22))
        worst = max(worst, float(np.max(np.abs(estimate.phi - oracle.phi))))
        worst = max(worst, abs(estimate.base_value - oracle.base_value))
    elapsed = time.perf_counter() - start
    _report(
        f"oracle exactness: 50 cases, max deviation {worst:.2e} <= 1e-6, "
        f"{elapsed:.1f}s < 60s",
        worst <= 1e-6 and elapsed < 60.0,
    )


def test_efficiency_identity():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(1000):
        n_features = int(rng.integers(2, 13))
        model, x, bg = _random_case(rng, n_features)
        budget = None if rng.random() < 0.3 else int(rng.integers(2, 2**n_features))
        result = explain(model, x, bg, ExplainerConfig(n_samples=budget,
                                                       seed=int(rng.integers(1000))))
        f_x = float(np.asarray(model(x[None, :]), dtype=float)[0])
        gap = abs(result.base_value + result.phi.sum() - f_x)
        worst = max(worst, gap / max(1.0, abs(f_x)))
    _report(
        f"efficiency identity: 1000 cases, worst relative gap {worst:.2e} <= 1e-9",
        worst <= 1e-9,
    )


def test_null_player():
    rng = np.random.default_rng(102)
    ok = True
    for _ in range(200):
        n_features = int(rng.integers(3, 12))
        model, x, bg = _random_case(rng, n_features)
        n_pinned = int(rng.integers(1, n_features - 1))
        pinned = rng.choice(n_features, size=n_pinned, replace=False)
        bg[:, pinned] = x[pinned]
        result = explain(model, x, bg, ExplainerConfig(seed=int(rng.integers(1000))))
        ok = ok and all(result.phi[j] == 0.0 for j in pinned)
    _report("null player: 200 cases, pinned features attribute exactly 0", ok)


def test_symmetry_under_permutation():
    # tree models keep permuted evaluation bitwise identical, so equivariance
    # can be checked to the last bit under full enumeration
    rng = np.random.default_rng(103)
    ok = True
    for _ in range(100):
        n_features = int(rng.integers(2, 9))
        doc = random_tree_doc(rng, n_features)
        perm = [int(p) for p in rng.permutation(n_features)]
        model = load_model(doc)
        permuted_model = load_model(permute_tree_doc(doc, perm))

        x = rng.standard_normal(n_features)
        bg = rng.standard_normal((int(rng.choice([1, 5])), n_features))
        x_perm = np.empty_like(x)
        x_perm[perm] = x
        bg_perm = np.empty_like(bg)
        bg_perm[:, perm] = bg

        phi = explain(model, x, bg).phi
        phi_perm = explain(permuted_model, x_perm, bg_perm).phi
        ok = ok and all(phi_perm[perm[j]] == phi[j] for j in range(n_features))
    _report("symmetry: 100 cases, permutation equivariance bit-identical", ok)


def test_determinism():
    rng = np.random.default_rng(104)
    ok = True
    for _ in range(100):
        n_features = int(rng.integers(2, 14))
        model, x, bg = _random_case(rng, n_features)
        budget = None if rng.random() < 0.3 else int(rng.integers(2, 500))
        cfg = ExplainerConfig(n_samples=budget, seed=int(rng.integers(10**6)))
        a = explain(model, x, bg, cfg)
        b = explain(model, x, bg, cfg)
        ok = ok and a.phi.tolist() == b.phi.tolist()
        ok = ok and a.base_value == b.base_value
        ok = ok and a.samples_used == b.samples_used
    _report("determinism: 100 cases, repeat runs bit-identical", ok)


@pytest.fixture(scope="module")
def demo_engine():
    model = load_model(DATA_DIR / "loan-demo.model.json")
    from shapbox import load_dataset

    dataset = load_dataset(DATA_DIR / "loan-demo.csv")
    background = summarize_background(dataset, "median")
    with open(DATA_DIR / "demo-config.json") as fh:
        config = json.load(fh)
    return model, dataset, background, config


def test_convergence(demo_engine):
    model, _, background, config = demo_engine
    x = np.array(config["presets"][0], dtype=float)
    x[5] = background[0, 5]  # pin one feature so 15 vary
    assert int(find_varying_features(x, background).sum()) == 15

    reference = explain(model, x, background, ExplainerConfig(n_samples=2**22))
    assert reference.samples_used == 2**15 - 2
    spread = float(reference.phi.max() - reference.phi.min())

    budgets = [256, 512, 1024, 2048, 4096]
    errors = []
    for budget in budgets:
        per_seed = [
            float(np.mean(np.abs(
                explain(model, x, background,
                        ExplainerConfig(n_samples=budget, seed=seed)).phi
                - reference.phi
            )))
            for seed in range(20)
        ]
        errors.append(float(np.mean(per_seed)))

    inversions = [
        (errors[i + 1] - errors[i]) / errors[i]
        for i in range(len(errors) - 1)
        if errors[i + 1] > errors[i]
    ]
    ok = len(inversions) <= 1 and all(v <= 0.05 for v in inversions)
    ok = ok and errors[-1] <= 0.02 * spread
    _report(
        "convergence: errors "
        + " -> ".join(f"{e:.5f}" for e in errors)
        + f", final <= {0.02 * spread:.5f}, inversions {len(inversions)}",
        ok,
    )


def test_performance(demo_engine):
    model, _, background, config = demo_engine
    x = np.array(config["presets"][0], dtype=float)
    times = []
    for run in range(50):
        start = time.perf_counter()
        explain(model, x, background, ExplainerConfig(seed=run))
        times.append((time.perf_counter() - start) * 1000.0)
    med = median(times)
    _report(f"performance: median {med:.1f} ms < 200 ms over 50 runs", med < 200.0)


def test_protocol_conformance(tmp_path):
    ok = True

    # golden transcript: exact request bytes out, predictions back
    log = tmp_path / "wire.log"
    command = f"{sys.executable} {FIXTURE_DIR / 'recording_child.py'} {log}"
    with SubprocessModel(command) as model:
        out = model([[3.0, 4.0]])
    ok = ok and out.tolist() == [0.0]
    ok = ok and log.read_text() == '{"id":1,"rows":[[3.0,4.0]]}\n'
    ok = ok and encode_request(1, [[3.0, 4.0]]) == '{"id":1,"rows":[[3.0,4.0]]}'

    # error injection: each misbehaving child must raise the adapter error
    for child, timeout in (
        ("slow_child.py", 0.5),
        ("mismatch_child.py", 10.0),
        ("exit_child.py", 10.0),
    ):
        command = f"{sys.executable} {FIXTURE_DIR / child}"
        with SubprocessModel(command, timeout=timeout) as model:
            try:
                model([[1.0]])
                ok = False
            except SubprocessAdapterError:
                pass
    _report("protocol conformance: golden transcript and error injection", ok)


def test_cli_api_parity(demo_engine):
    model, dataset, background, _ = demo_engine
    app = create_app(model, dataset.feature_names, background)
    client = TestClient(app)
    runner = CliRunner()

    rng = np.random.default_rng(105)
    picks = rng.choice(dataset.n_rows, size=20, replace=False)
    ok = True
    for row_index in picks:
        instance = [float(v) for v in dataset.rows[row_index]]
        api_doc = client.post(
            "/api/explain", json={"instance": instance, "seed": 0}
        ).json()
        result = runner.invoke(
            cli_main,
            [
                "explain",
                "--model", str(DATA_DIR / "loan-demo.model.json"),
                "--background", str(DATA_DIR / "loan-demo.csv"),
                "--background-mode", "median",
                "--instance", json.dumps(instance),
                "--seed", "0",
            ],
        )
        assert result.exit_code == 0, result.output
        cli_doc = json.loads(result.output)
        ok = ok and cli_doc["phi"] == api_doc["phi"]
        ok = ok and cli_doc["base_value"] == api_doc["base_value"]
        ok = ok and cli_doc["prediction"] == api_doc["prediction"]
    _report("cli/api parity: 20 fixtures bit-identical", ok)
