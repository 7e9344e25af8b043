"""Brute-force Shapley computation over all feature subsets.

Exponential in the number of varying features; intended as ground truth for
small inputs, which is exactly what the estimator's tests need.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    Coalition,
    Explanation,
    ModelFn,
    _call_model,
    _validate_background,
    _validate_instance,
    aggregate_outputs,
    build_masked_rows,
    find_varying_features,
)
from .errors import CostGuardError

MAX_EXACT_FEATURES = 20


def exact_shapley(model: ModelFn, x, bg, tol: float = 1e-8) -> Explanation:
    """Exact attributions via the classic subset-average formula.

    Evaluates the background-averaged model output v(S) for every subset S of
    the varying features in a single batched model call, then accumulates each
    feature's weighted marginal contributions.  Order-independent summation
    keeps results bitwise stable under feature relabeling.
    """
    x = _validate_instance(x)
    bg = _validate_background(bg, x.size)
    varying = find_varying_features(x, bg, tol)
    n_varying = int(varying.sum())
    if n_varying > MAX_EXACT_FEATURES:
        raise CostGuardError(
            f"exact computation refused for {n_varying} varying features "
            f"(limit {MAX_EXACT_FEATURES})"
        )

    f_x = float(_call_model(model, x[None, :])[0])
    phi = np.zeros(x.size)
    if n_varying == 0:
        return Explanation(
            base_value=f_x, phi=phi, samples_used=0, varying_mask=varying, seed=0
        )

    n_subsets = 2 ** n_varying
    coalitions = [Coalition(mask=m, size=m.bit_count()) for m in range(n_subsets)]
    rows = build_masked_rows(x, bg, coalitions, varying)
    values = aggregate_outputs(_call_model(model, rows), bg.shape[0])

    # Ordering weight for a subset of size s: s! (n-s-1)! / n! == 1 / (n * C(n-1, s)),
    # computed from exact integer binomials.
    size_weight = [
        1.0 / (n_varying * math.comb(n_varying - 1, s)) for s in range(n_varying)
    ]

    phi_varying = np.empty(n_varying)
    for j in range(n_varying):
        bit = 1 << j
        terms = [
            size_weight[mask.bit_count()] * (values[mask | bit] - values[mask])
            for mask in range(n_subsets)
            if not mask & bit
        ]
        phi_varying[j] = math.fsum(terms)

    phi[varying] = phi_varying
    return Explanation(
        base_value=float(values[0]),
        phi=phi,
        samples_used=n_subsets,
        varying_mask=varying,
        seed=0,
    )
