"""Regenerate the bundled loan-demo fixtures (model, dataset, presets).

Deterministic: rerunning produces byte-identical files.  The ensemble is
hand-assembled rather than trained; its decisive split is the credit score at
700, with the remaining trees adding small corrections over every feature.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "data"

CONTINUOUS = [
    ("loan_amount", 1_000, 40_000),
    ("annual_income", 20_000, 200_000),
    ("fico_score", 600, 850),
    ("dti_ratio", 0, 40),
    ("interest_rate", 5, 25),
    ("revolving_util", 0, 100),
    ("open_accounts", 1, 30),
    ("total_accounts", 2, 60),
    ("employment_years", 0, 40),
]
CATEGORICAL = [
    ("term", {"0": "36 months", "1": "60 months"}),
    ("home_ownership", {"0": "rent", "1": "mortgage", "2": "own", "3": "other"}),
    ("purpose", {"0": "debt consolidation", "1": "credit card", "2": "home improvement",
                 "3": "major purchase", "4": "medical", "5": "small business", "6": "other"}),
    ("grade", {"0": "A", "1": "B", "2": "C", "3": "D", "4": "E", "5": "F", "6": "G"}),
    ("verification_status", {"0": "not verified", "1": "source verified", "2": "verified"}),
    ("application_type", {"0": "individual", "1": "joint"}),
    ("state_region", {"0": "northeast", "1": "southeast", "2": "midwest",
                      "3": "southwest", "4": "west"}),
]
FEATURES = [name for name, *_ in CONTINUOUS] + [name for name, _ in CATEGORICAL]
FICO = FEATURES.index("fico_score")


def make_dataset(rng: np.random.Generator, n_rows: int = 400) -> np.ndarray:
    cols = []
    for _, lo, hi in CONTINUOUS:
        cols.append(np.round(rng.uniform(lo, hi, n_rows), 2))
    for _, codes in CATEGORICAL:
        cols.append(rng.integers(0, len(codes), n_rows).astype(float))
    return np.column_stack(cols)


def make_model(rng: np.random.Generator, data: np.ndarray) -> dict:
    trees = []

    # Decisive credit-score stump: below 700 pushes hard toward rejection.
    trees.append({
        "nodes": [
            {"feature": FICO, "threshold": 700.0, "left": 1, "right": 2},
            {"leaf": -1.6},
            {"leaf": 0.9},
        ],
        "root": 0,
    })

    # Small corrective trees over every feature, thresholds at data quantiles.
    n_features = data.shape[1]
    for t in range(29):
        depth = int(rng.integers(2, 5))
        nodes = []

        def grow(level: int) -> int:
            idx = len(nodes)
            if level >= depth:
                nodes.append({"leaf": round(float(rng.uniform(-0.05, 0.05)), 4)})
                return idx
            feature = int((t + idx + level * 3) % n_features) if rng.random() < 0.5 \
                else int(rng.integers(0, n_features))
            q = float(rng.uniform(0.2, 0.8))
            threshold = round(float(np.quantile(data[:, feature], q)), 3)
            nodes.append(None)
            left = grow(level + 1)
            right = grow(level + 1)
            nodes[idx] = {"feature": feature, "threshold": threshold,
                          "left": left, "right": right}
            return idx

        grow(0)
        trees.append({"nodes": nodes, "root": 0})

    return {
        "type": "gbdt",
        "base_score": 0.0,
        "transform": "sigmoid",
        "n_features": n_features,
        "trees": trees,
    }


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(7)
    data = make_dataset(rng)
    model_doc = make_model(rng, data)

    import sys

    sys.path.insert(0, str(OUT.parent / "src"))
    from shapbox.models import load_model

    model = load_model(model_doc)

    # Label: actual model decision with a little noise, so the CSV looks real.
    probs = model(data)
    labels = (probs + rng.normal(0, 0.05, len(probs)) > 0.5).astype(int)

    # Presets: profiles whose decision flips when fico_score crosses 700.
    median = np.median(data, axis=0)
    presets = []
    candidates = rng.permutation(len(data))
    for i in candidates:
        row = data[i].copy()
        low, high = row.copy(), row.copy()
        low[FICO], high[FICO] = 660.0, 720.0
        p_low, p_high = model(np.stack([low, high]))
        if p_low < 0.45 and p_high > 0.55:
            presets.append([round(float(v), 2) for v in low])
        if len(presets) == 4:
            break
    assert len(presets) == 4, "could not find 4 flip-capable presets; adjust seed"

    with open(OUT / "loan-demo.model.json", "w") as fh:
        json.dump(model_doc, fh, indent=1)
        fh.write("\n")

    header = FEATURES + ["repaid"]
    lines = [",".join(header)]
    for row, label in zip(data, labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{label}")
    (OUT / "loan-demo.csv").write_text("\n".join(lines) + "\n")

    sidecar = {
        "label_column": "repaid",
        "display_names": {
            "loan_amount": "Loan amount ($)",
            "annual_income": "Annual income ($)",
            "fico_score": "Credit score",
            "dti_ratio": "Debt-to-income (%)",
            "interest_rate": "Interest rate (%)",
            "revolving_util": "Revolving utilization (%)",
            "open_accounts": "Open accounts",
            "total_accounts": "Total accounts",
            "employment_years": "Employment years",
            "term": "Term",
            "home_ownership": "Home ownership",
            "purpose": "Purpose",
            "grade": "Grade",
            "verification_status": "Verification",
            "application_type": "Application type",
            "state_region": "Region",
        },
        "categorical": {name: codes for name, codes in CATEGORICAL},
    }
    with open(OUT / "loan-demo.meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=1)
        fh.write("\n")

    # A handful of instances for the bench command.
    bench_rows = data[candidates[:5]]
    lines = [",".join(FEATURES)]
    for row in bench_rows:
        lines.append(",".join(repr(float(v)) for v in row))
    (OUT / "loan-demo.instances.csv").write_text("\n".join(lines) + "\n")

    # Frontend demo configuration: controls, presets, decision rendering.
    features_cfg = []
    for j, name in enumerate(FEATURES):
        spec: dict = {"name": name, "label": sidecar["display_names"][name]}
        if name in sidecar["categorical"]:
            spec["kind"] = "categorical"
            spec["codes"] = sidecar["categorical"][name]
        else:
            spec["kind"] = "continuous"
            spec["min"] = float(np.floor(data[:, j].min()))
            spec["max"] = float(np.ceil(data[:, j].max()))
        features_cfg.append(spec)
    demo_config = {
        "api_base": "http://127.0.0.1:8787",
        "decision": {
            "threshold": 0.5,
            "label": "approval likelihood",
            "positive": "Approved",
            "negative": "Rejected",
        },
        "features": features_cfg,
        "presets": presets,
    }
    with open(OUT / "demo-config.json", "w") as fh:
        json.dump(demo_config, fh, indent=1)
        fh.write("\n")

    print(f"wrote fixtures to {OUT}")
    print("preset decision probabilities:",
          [round(float(p), 3) for p in model(np.array(presets))])


if __name__ == "__main__":
    main()
