import math

import pytest

from shapbox import kernel_weight, sample_coalitions
from shapbox.errors import ConfigError


def test_full_enumeration_small():
    samples = sample_coalitions(3, 100, 0)
    masks = {s.coalition.mask for s in samples}
    assert masks == {0b001, 0b010, 0b100, 0b011, 0b101, 0b110}
    for s in samples:
        assert s.weight == kernel_weight(3, s.coalition.size)


def test_budget_8_of_4_enumerates_outer_levels():
    samples = sample_coalitions(4, 8, 0)
    assert len(samples) == 8
    sizes = sorted(s.coalition.size for s in samples)
    assert sizes == [1, 1, 1, 1, 3, 3, 3, 3]
    for s in samples:
        assert s.weight == kernel_weight(4, s.coalition.size)


def test_two_features_budget_two():
    samples = sample_coalitions(2, 2, 0)
    assert {s.coalition.mask for s in samples} == {0b01, 0b10}
    assert all(s.weight == 0.5 for s in samples)


def test_budget_below_two_rejected():
    with pytest.raises(ConfigError):
        sample_coalitions(4, 1, 0)


def test_single_varying_feature_rejected():
    with pytest.raises(ConfigError):
        sample_coalitions(1, 10, 0)


def test_no_boundary_coalitions_ever():
    for budget in (2, 7, 30, 1000):
        for s in sample_coalitions(6, budget, 3):
            assert 1 <= s.coalition.size <= 5
            assert 0 < s.coalition.mask < 2**6 - 1


def test_deterministic_per_seed():
    a = sample_coalitions(10, 100, 42)
    b = sample_coalitions(10, 100, 42)
    assert [(s.coalition.mask, s.weight) for s in a] == [
        (s.coalition.mask, s.weight) for s in b
    ]


def test_seed_changes_random_fill():
    a = {s.coalition.mask for s in sample_coalitions(12, 200, 0)}
    b = {s.coalition.mask for s in sample_coalitions(12, 200, 1)}
    assert a != b


def test_sample_count_bounded_by_budget():
    for budget in (2, 50, 300, 5000):
        samples = sample_coalitions(13, budget, 7)
        assert len(samples) <= budget
        assert len({s.coalition.mask for s in samples}) == len(samples)


def test_weights_positive_and_finite():
    for s in sample_coalitions(15, 999, 5):
        assert s.weight > 0 and math.isfinite(s.weight)


def test_full_enumeration_exact_threshold():
    n = 5
    samples = sample_coalitions(n, 2**n - 2, 0)
    assert len(samples) == 2**n - 2
    assert len({s.coalition.mask for s in samples}) == 2**n - 2


def test_enumerated_levels_keep_kernel_mass():
    # outer levels, always enumerated: each member at its kernel weight
    samples = sample_coalitions(12, 500, 0)
    by_size = {}
    for s in samples:
        by_size.setdefault(s.coalition.size, []).append(s)
    for size in (1, 11):
        group = by_size[size]
        assert len(group) == math.comb(12, size)
        assert all(s.weight == kernel_weight(12, size) for s in group)


def test_random_fill_mass_per_size():
    # each non-enumerated size represented in the output carries exactly its
    # level's kernel-weight mass, split by multiplicity
    n, budget = 12, 500
    samples = sample_coalitions(n, budget, 3)
    enumerated_sizes = {
        size
        for size in range(1, n)
        if sum(1 for s in samples if s.coalition.size == size) == math.comb(n, size)
    }
    by_size = {}
    for s in samples:
        if s.coalition.size not in enumerated_sizes:
            by_size.setdefault(s.coalition.size, 0.0)
            by_size[s.coalition.size] += s.weight
    for size, mass in by_size.items():
        expected = math.comb(n, size) * kernel_weight(n, size)
        assert mass == pytest.approx(expected, rel=1e-12)
