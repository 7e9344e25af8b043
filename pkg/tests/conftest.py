import json
from pathlib import Path

import numpy as np
import pytest

from shapbox import LinearModel, load_model

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"


class CountingModel:
    """Wraps a prediction function and records the size of every batch."""

    def __init__(self, fn):
        self.fn = fn
        self.batch_sizes = []

    def __call__(self, rows):
        rows = np.asarray(rows, dtype=float)
        self.batch_sizes.append(rows.shape[0])
        return self.fn(rows)


def random_tree_doc(rng, n_features, n_trees=8, depth=3, leaf_scale=0.5,
                    transform="identity"):
    """Random small ensemble document; thresholds sit in the data range used by tests."""
    trees = []
    for _ in range(n_trees):
        nodes = []

        def grow(level):
            idx = len(nodes)
            if level >= depth or rng.random() < 0.25:
                nodes.append({"leaf": float(rng.uniform(-leaf_scale, leaf_scale))})
                return idx
            nodes.append(None)
            left = grow(level + 1)
            right = grow(level + 1)
            nodes[idx] = {
                "feature": int(rng.integers(0, n_features)),
                "threshold": float(rng.uniform(-1.5, 1.5)),
                "left": left,
                "right": right,
            }
            return idx

        grow(0)
        trees.append({"nodes": nodes, "root": 0})
    return {
        "type": "gbdt",
        "base_score": float(rng.uniform(-0.5, 0.5)),
        "transform": transform,
        "n_features": n_features,
        "trees": trees,
    }


def random_tree_model(rng, n_features, **kwargs):
    return load_model(random_tree_doc(rng, n_features, **kwargs))


def permute_tree_doc(doc, perm):
    """Relabel feature indices: new index perm[j] plays old feature j's role."""
    out = json.loads(json.dumps(doc))
    for tree in out["trees"]:
        for node in tree["nodes"]:
            if "feature" in node:
                node["feature"] = perm[node["feature"]]
    return out


def random_linear_model(rng, n_features, integer=False):
    if integer:
        weights = rng.integers(-4, 5, n_features).astype(float)
        bias = float(rng.integers(-3, 4))
    else:
        weights = rng.standard_normal(n_features)
        bias = float(rng.standard_normal())
    return LinearModel(weights=np.asarray(weights), bias=bias)


@pytest.fixture(scope="session")
def demo_model():
    return load_model(DATA_DIR / "loan-demo.model.json")


@pytest.fixture(scope="session")
def demo_dataset():
    from shapbox import load_dataset

    return load_dataset(DATA_DIR / "loan-demo.csv")


@pytest.fixture(scope="session")
def demo_config():
    with open(DATA_DIR / "demo-config.json") as fh:
        return json.load(fh)
