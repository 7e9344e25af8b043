"""Kernel-weighted Shapley value estimation for black-box batch predictors.

The pipeline mirrors the classic kernel formulation: enumerate or sample
feature coalitions, synthesize masked input rows against a background set,
run one batched model call, and recover per-feature attributions from a
constrained weighted least-squares fit.  The empty and full coalitions carry
infinite kernel weight, so they are enforced as hard boundary constraints
(via variable elimination) instead of entering the regression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    ModelContractError,
    NumericError,
    ShapeMismatchError,
)

ModelFn = Callable[[np.ndarray], np.ndarray]

#: Sampling budget used when the caller does not pin one explicitly.
def auto_budget(n_varying: int) -> int:
    """Default coalition budget: full enumeration when cheap, else a flat cap."""
    return min(2 ** n_varying - 2, 2 * n_varying + 2048)


def kernel_weight(n_features: int, subset_size: int) -> float:
    """Kernel weight for a coalition of ``subset_size`` features out of ``n_features``.

    Computed as (n-1) / (C(n, s) * s * (n - s)) with an exact integer binomial,
    which stays well-behaved for feature counts well past 64.

    Raises:
        ValueError: for the boundary sizes 0 and ``n_features`` (infinite
            weight; those coalitions are handled via constraints, never
            sampled) and for sizes outside ``[0, n_features]``.
    """
    if n_features < 2:
        raise ValueError(f"kernel weight needs at least 2 features, got {n_features}")
    if subset_size < 0 or subset_size > n_features:
        raise ValueError(
            f"subset size {subset_size} outside [0, {n_features}]"
        )
    if subset_size == 0 or subset_size == n_features:
        raise ValueError(
            f"subset size {subset_size} of {n_features} has infinite kernel weight; "
            "boundary coalitions are enforced as constraints, not sampled"
        )
    denom = math.comb(n_features, subset_size) * subset_size * (n_features - subset_size)
    return (n_features - 1) / denom


@dataclass(frozen=True)
class Coalition:
    """Subset of the varying features, as a bitmask (bit j = feature j present)."""

    mask: int
    size: int

    def indices(self) -> list[int]:
        return [j for j in range(self.mask.bit_length()) if self.mask >> j & 1]

    def bits(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=np.int64)
        out[self.indices()] = 1
        return out

    @staticmethod
    def from_indices(indices: Sequence[int]) -> "Coalition":
        mask = 0
        for j in indices:
            mask |= 1 << int(j)
        return Coalition(mask=mask, size=len(indices))


@dataclass
class WeightedSample:
    """One regression row: coalition, kernel-derived weight, aggregated model output."""

    coalition: Coalition
    weight: float
    output: Optional[float] = None


@dataclass
class ExplainerConfig:
    """Knobs for one explanation run.

    ``n_samples=None`` means AUTO: full enumeration when it fits the flat cap,
    partial sampling otherwise.  Explicit budgets are clamped from above to the
    number of non-boundary coalitions; budgets below 2 are rejected.
    """

    n_samples: Optional[int] = None
    seed: int = 0
    vary_tolerance: float = 1e-8


@dataclass
class Explanation:
    """Per-feature attributions for one instance.

    ``base_value + phi.sum()`` reproduces the model output on the instance
    (efficiency); non-varying features carry exactly zero.
    """

    base_value: float
    phi: np.ndarray
    samples_used: int
    varying_mask: np.ndarray
    seed: int

    @property
    def no_varying_features(self) -> bool:
        """Diagnostic: the instance matched the background everywhere."""
        return not bool(self.varying_mask.any())

    @property
    def prediction(self) -> float:
        return float(self.base_value + self.phi.sum())


def _validate_instance(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ShapeMismatchError(f"instance must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("instance contains non-finite values")
    return arr


def _validate_background(bg, n_features: int) -> np.ndarray:
    arr = np.asarray(bg, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ShapeMismatchError(f"background must be a 2-D matrix, got shape {arr.shape}")
    if arr.shape[1] != n_features:
        raise ShapeMismatchError(
            f"background width {arr.shape[1]} != instance width {n_features}"
        )
    if not np.all(np.isfinite(arr)):
        raise NumericError("background contains non-finite values")
    return arr


def find_varying_features(x, bg, tol: float = 1e-8) -> np.ndarray:
    """Boolean mask of features whose instance value differs from the background.

    A feature varies iff it differs from at least one background row by more
    than ``tol`` (absolute).  Non-varying features are excluded from sampling
    and receive an attribution of exactly zero.
    """
    x = _validate_instance(x)
    bg = _validate_background(bg, x.size)
    return np.any(np.abs(bg - x[None, :]) > tol, axis=0)


def _level_order(n_varying: int) -> list[int]:
    """Coalition sizes ordered outside-in: 1, n-1, 2, n-2, ..."""
    order = []
    for s in range(1, n_varying // 2 + 1):
        order.append(s)
        if s != n_varying - s:
            order.append(n_varying - s)
    return order


def sample_coalitions(n_varying: int, budget: int, seed: int) -> list[WeightedSample]:
    """Choose the coalitions entering the regression, with their weights.

    With budget covering all ``2^n - 2`` non-boundary coalitions, every one is
    enumerated once at its kernel weight.  Otherwise size levels are filled
    outside-in (sizes 1 and n-1 first, since they carry the largest kernel
    weight): levels that fit the remaining budget are fully enumerated, each
    member at its kernel weight, except that trailing levels are traded back
    into the random budget while that lowers the residual mass per root-draw
    ratio (enumerating a large, light level while starving the random fill
    raises estimator variance).  The leftover budget is spent on random
    coalitions drawn from the non-enumerated sizes in proportion to their
    kernel-weight mass, paired with their complements when possible; each
    size's mass is then shared among its sampled coalitions by multiplicity.
    Deterministic given ``(n_varying, budget, seed)``.
    """
    if budget < 2:
        raise ConfigError(f"coalition budget must be >= 2, got {budget}")
    if n_varying < 2:
        raise ConfigError(f"sampling needs at least 2 varying features, got {n_varying}")

    total = 2 ** n_varying - 2
    levels = _level_order(n_varying)
    masses = {s: math.comb(n_varying, s) * kernel_weight(n_varying, s) for s in levels}

    remaining = min(budget, total)
    enumerated: list[int] = []
    leftover: list[int] = []
    for s in levels:
        count = math.comb(n_varying, s)
        if count <= remaining and not leftover:
            enumerated.append(s)
            remaining -= count
        else:
            leftover.append(s)

    residual_mass = sum(masses[s] for s in leftover)
    while remaining > 0 and leftover and enumerated:
        s_last = enumerated[-1]
        count = math.comb(n_varying, s_last)
        grown = residual_mass + masses[s_last]
        if grown / math.sqrt(remaining + count) < residual_mass / math.sqrt(remaining):
            enumerated.pop()
            leftover.insert(0, s_last)
            remaining += count
            residual_mass = grown
        else:
            break

    samples: list[WeightedSample] = []
    for s in enumerated:
        w = kernel_weight(n_varying, s)
        for combo in combinations(range(n_varying), s):
            samples.append(WeightedSample(Coalition.from_indices(combo), w))

    if remaining > 0 and leftover:
        rng = np.random.default_rng(seed)
        probs = np.array([masses[s] for s in leftover]) / residual_mass
        leftover_set = set(leftover)
        full_mask = (1 << n_varying) - 1
        counts: dict[int, int] = {}
        size_draws = {s: 0 for s in leftover}
        filled = 0
        while filled < remaining:
            s = int(rng.choice(leftover, p=probs))
            picked = rng.choice(n_varying, size=s, replace=False)
            mask = 0
            for j in picked:
                mask |= 1 << int(j)
            counts[mask] = counts.get(mask, 0) + 1
            size_draws[s] += 1
            filled += 1
            complement = n_varying - s
            if filled < remaining and complement in leftover_set:
                comp_mask = full_mask ^ mask
                counts[comp_mask] = counts.get(comp_mask, 0) + 1
                size_draws[complement] += 1
                filled += 1
        for mask, c in counts.items():
            s = mask.bit_count()
            samples.append(
                WeightedSample(
                    Coalition(mask=mask, size=s), masses[s] * c / size_draws[s]
                )
            )

    return samples


def build_masked_rows(x, bg, coalitions: Sequence[Coalition], varying_mask) -> np.ndarray:
    """Synthesize model input rows for every (coalition, background row) pair.

    Present and non-varying positions take the instance's value; masked-out
    positions take the background row's value.  Row order is coalition-major,
    background-row-minor.
    """
    x = _validate_instance(x)
    bg = _validate_background(bg, x.size)
    varying_mask = np.asarray(varying_mask, dtype=bool)
    if varying_mask.size != x.size:
        raise ShapeMismatchError("varying mask width does not match instance width")

    varying_idx = np.flatnonzero(varying_mask)
    n_bg = bg.shape[0]
    out = np.empty((len(coalitions) * n_bg, x.size), dtype=float)
    fixed_cols = np.flatnonzero(~varying_mask)
    for k, coalition in enumerate(coalitions):
        present = varying_idx[coalition.indices()]
        block = bg.copy()
        block[:, fixed_cols] = x[fixed_cols]
        block[:, present] = x[present]
        out[k * n_bg : (k + 1) * n_bg] = block
    return out


def aggregate_outputs(raw, n_background: int) -> np.ndarray:
    """Average raw model outputs over each coalition's background rows."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size % n_background != 0:
        raise ShapeMismatchError(
            f"output length {raw.size} not divisible by background size {n_background}"
        )
    return raw.reshape(-1, n_background).mean(axis=1)


def _dyadic_ints(values: Sequence[float]) -> tuple[list[int], int]:
    """Represent finite floats exactly as integers over a shared power-of-two scale."""
    fracs = [Fraction(v) for v in values]
    shift = max(f.denominator.bit_length() - 1 for f in fracs)
    return [f.numerator << (shift - (f.denominator.bit_length() - 1)) for f in fracs], shift


def _solve_exact(design: np.ndarray, weights: np.ndarray, y_adj: list[Fraction],
                 delta: Fraction) -> Optional[np.ndarray]:
    """Exact rational solve of the eliminated normal equations.

    All inputs are dyadic rationals, so the constrained weighted least-squares
    solution is computed exactly and rounded to float once per coefficient.
    This makes full-enumeration results bitwise invariant under feature
    relabeling.  Returns None on a zero pivot (rank deficiency); the caller
    falls back to the floating-point minimum-norm path.
    """
    n_rows, n_cols = design.shape
    w_ints, _w_shift = _dyadic_ints(weights)

    # Gram matrix: sum_k w_k d_k d_k^T, grouped by distinct weight for exact
    # integer accumulation.
    gram = np.zeros((n_cols, n_cols), dtype=object)
    for w_val in set(w_ints):
        rows = design[[i for i, wi in enumerate(w_ints) if wi == w_val]]
        gram += w_val * (rows.T.astype(object) @ rows.astype(object))

    # Right-hand side: sum_k w_k d_ka y_adj_k, exact via integer numerators.
    y_nums = [f.numerator for f in y_adj]
    y_dens = [f.denominator.bit_length() - 1 for f in y_adj]
    y_shift = max(y_dens)
    y_scaled = [n << (y_shift - d) for n, d in zip(y_nums, y_dens)]
    rhs: list[Fraction] = []
    for a in range(n_cols):
        acc = 0
        col = design[:, a]
        for k in range(n_rows):
            d = int(col[k])
            if d:
                acc += d * w_ints[k] * y_scaled[k]
        rhs.append(Fraction(acc, 1 << y_shift))

    # Gaussian elimination over exact rationals (weights' shared scale cancels
    # between gram and rhs only up to 2^w_shift; keep it explicit on rhs).
    aug = [
        [Fraction(int(gram[i][j])) for j in range(n_cols)] + [rhs[i]]
        for i in range(n_cols)
    ]
    for col in range(n_cols):
        pivot_row = next((r for r in range(col, n_cols) if aug[r][col] != 0), None)
        if pivot_row is None:
            return None
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        pv = aug[col][col]
        for r in range(n_cols):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col] / pv
                aug[r] = [aug[r][c] - factor * aug[col][c] for c in range(n_cols + 1)]
    sol = [aug[i][n_cols] / aug[i][i] for i in range(n_cols)]
    last = delta - sum(sol, Fraction(0))
    return np.array([float(v) for v in sol] + [float(last)])


def solve_weighted_regression(
    samples: Sequence[WeightedSample], f_x: float, phi0: float, n_varying: int
) -> np.ndarray:
    """Recover attributions from weighted coalition outputs.

    The boundary conditions g(empty) = phi0 and g(full) = f_x are enforced by
    eliminating the last varying feature: phi_last = (f_x - phi0) - sum(rest).
    The reduced system is solved exactly (rational arithmetic) when the sample
    set is a complete enumeration, and via a minimum-norm least-squares
    factorization otherwise.
    """
    if not samples:
        raise ConfigError("no weighted samples to regress on")
    if not (math.isfinite(f_x) and math.isfinite(phi0)):
        raise NumericError("f_x and phi0 must be finite")

    weights = np.array([s.weight for s in samples], dtype=float)
    if not weights.any():
        raise ConfigError("all regression weights are zero")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ConfigError("regression weights must be finite and nonnegative")
    for k, s in enumerate(samples):
        if s.output is None or not math.isfinite(s.output):
            raise NumericError(f"non-finite model output for coalition index {k}")
        if not (1 <= s.coalition.size <= n_varying - 1):
            raise ConfigError(
                f"coalition index {k} has boundary size {s.coalition.size}"
            )

    y = np.array([s.output for s in samples], dtype=float)
    z = np.stack([s.coalition.bits(n_varying) for s in samples])
    design = z[:, :-1] - z[:, -1:]
    delta = f_x - phi0

    is_complete = len(samples) == 2 ** n_varying - 2 and (
        len({s.coalition.mask for s in samples}) == len(samples)
    )
    if is_complete:
        delta_frac = Fraction(f_x) - Fraction(phi0)
        y_adj = [
            Fraction(float(yk)) - Fraction(phi0) - int(zl) * delta_frac
            for yk, zl in zip(y, z[:, -1])
        ]
        phi = _solve_exact(design, weights, y_adj, delta_frac)
        if phi is not None:
            return phi

    y_adj_f = y - phi0 - z[:, -1] * delta
    sqrt_w = np.sqrt(weights)
    solution, *_ = np.linalg.lstsq(design * sqrt_w[:, None], y_adj_f * sqrt_w, rcond=None)
    return np.concatenate([solution, [delta - solution.sum()]])


def _call_model(model: ModelFn, rows: np.ndarray) -> np.ndarray:
    out = np.asarray(model(rows), dtype=float).reshape(-1)
    if out.size != rows.shape[0]:
        raise ModelContractError(
            f"model returned {out.size} outputs for {rows.shape[0]} rows"
        )
    if not np.all(np.isfinite(out)):
        raise ModelContractError("model returned non-finite outputs")
    return out


def explain(model: ModelFn, x, bg, config: Optional[ExplainerConfig] = None) -> Explanation:
    """Attribute one prediction to its input features.

    ``model`` must accept a (rows, features) matrix and return one finite
    value per row.  Exactly three model calls are made: the background batch,
    the instance itself, and one batch covering every masked row.
    """
    cfg = config or ExplainerConfig()
    x = _validate_instance(x)
    bg = _validate_background(bg, x.size)

    bg_out = _call_model(model, bg)
    phi0 = float(np.mean(bg_out))
    f_x = float(_call_model(model, x[None, :])[0])

    varying = find_varying_features(x, bg, cfg.vary_tolerance)
    n_varying = int(varying.sum())
    phi = np.zeros(x.size)

    if n_varying == 0:
        return Explanation(
            base_value=f_x, phi=phi, samples_used=0, varying_mask=varying, seed=cfg.seed
        )
    if n_varying == 1:
        phi[np.flatnonzero(varying)[0]] = f_x - phi0
        return Explanation(
            base_value=phi0, phi=phi, samples_used=0, varying_mask=varying, seed=cfg.seed
        )

    total = 2 ** n_varying - 2
    if cfg.n_samples is None:
        budget = auto_budget(n_varying)
    else:
        if cfg.n_samples < 2:
            raise ConfigError(f"budget must be >= 2, got {cfg.n_samples}")
        budget = min(cfg.n_samples, total)

    samples = sample_coalitions(n_varying, budget, cfg.seed)
    rows = build_masked_rows(x, bg, [s.coalition for s in samples], varying)
    outputs = aggregate_outputs(_call_model(model, rows), bg.shape[0])
    for sample, out in zip(samples, outputs):
        sample.output = float(out)

    phi[varying] = solve_weighted_regression(samples, f_x, phi0, n_varying)
    return Explanation(
        base_value=phi0,
        phi=phi,
        samples_used=len(samples),
        varying_mask=varying,
        seed=cfg.seed,
    )
