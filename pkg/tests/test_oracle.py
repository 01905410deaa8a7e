from __future__ import annotations

from fractions import Fraction

import pytest

from bobw import (
    FeasibilityResult,
    PreconditionError,
    ResourceCapError,
    check_sdef_instance,
    enumerate_efx,
    estimate,
    exact_distribution_charity,
    get_fixture,
    iter_charity_branches,
    replay_swap_trace,
    sdef_feasibility,
)
from bobw.rng import SplitMix64

from helpers import lex_instance

F = Fraction


def _bundles(alloc):
    return tuple(tuple(sorted(b)) for b in alloc.bundles)


def test_enumerate_efx_pinned_canonical_order():
    allocs = enumerate_efx(get_fixture("FIX-A"))
    assert [_bundles(a) for a in allocs] == [
        ((0,), (1,), (2, 3)),
        ((0,), (2, 3), (1,)),
        ((2, 3), (0,), (1,)),
        ((2,), (0,), (1, 3)),
    ]


def test_enumerate_efx_respects_the_cap():
    rng = SplitMix64(700)
    big = lex_instance(rng, 10, 8)  # 10^8 assignment vectors
    with pytest.raises(ResourceCapError):
        enumerate_efx(big)


def test_mixture_feasibility_finds_the_unique_weights():
    inst = get_fixture("FIX-D")
    supports = enumerate_efx(inst)
    assert [_bundles(a) for a in supports] == [((0,), (1, 2)), ((1, 2), (0,))]
    res = sdef_feasibility(inst, supports)
    assert res.feasible
    assert res.weights == (F(1, 2), F(1, 2))
    assert res.certificate is None
    # the witness really is dominance-fair, checked here against the audit
    rows = [
        [sum((w for w, a in zip(res.weights, supports) if g in a.bundles[i]), start=F(0))
         for g in range(inst.m)]
        for i in range(inst.n)
    ]
    assert check_sdef_instance(inst, rows).passed


def test_mixture_infeasibility_yields_a_certificate():
    inst = get_fixture("FIX-A")
    res = sdef_feasibility(inst, enumerate_efx(inst))
    assert not res.feasible
    assert res.weights is None
    cert = res.certificate
    labels = [c["label"] for c in cert["constraints"]]
    assert labels == [
        "agent 1 vs 0, top-1 prefix",
        "agent 1 vs 0, top-4 prefix",
        "agent 1 vs 2, top-3 prefix",
        "agent 2 vs 0, top-4 prefix",
    ]
    ids = {c["id"] for c in cert["constraints"]}
    derived = set()
    for step in cert["steps"]:
        assert set(step["from"]) <= ids | derived
        derived.add(step["derived"])
    assert cert["contradiction"] in derived


def test_single_support_certificate_is_direct():
    inst = get_fixture("FIX-D")
    res = sdef_feasibility(inst, enumerate_efx(inst)[:1])
    assert not res.feasible
    cert = res.certificate
    assert cert["steps"] == []
    assert [c["label"] for c in cert["constraints"]] == ["agent 0 vs 1, top-3 prefix"]


def test_feasibility_result_json():
    inst = get_fixture("FIX-D")
    res = sdef_feasibility(inst, enumerate_efx(inst))
    js = res.to_json()
    assert js == {"feasible": True, "weights": ["1/2", "1/2"]}


def test_branch_enumeration_covers_the_whole_tree():
    inst = get_fixture("FIX-E")
    branches = list(iter_charity_branches(inst))
    assert len(branches) == 6
    assert sum((p for p, _, _ in branches), start=F(0)) == 1
    for prob, alloc, trace in branches:
        assert prob > 0
        assert replay_swap_trace(inst, trace) == alloc


def test_exact_distribution_of_the_swap_loop():
    inst = get_fixture("FIX-E")
    dist = exact_distribution_charity(inst, algorithm=3)
    outcomes = {(_bundles(a), tuple(sorted(a.pool))): w for w, a in dist.support}
    assert outcomes == {
        (((0,), (2,)), (1,)): F(1, 2),
        (((1,), (0,)), (2,)): F(1, 2),
    }


def test_exact_distribution_with_pool_shrinking_post_pass():
    inst = get_fixture("FIX-E")
    dist = exact_distribution_charity(inst, algorithm=4)
    outcomes = {(_bundles(a), tuple(sorted(a.pool))): w for w, a in dist.support}
    assert outcomes == {
        (((0,), (1, 2)), ()): F(1, 2),
        (((1, 2), (0,)), ()): F(1, 2),
    }


def test_branch_caps_and_algorithm_validation():
    inst = get_fixture("FIX-E")
    with pytest.raises(ResourceCapError):
        exact_distribution_charity(inst, algorithm=3, leaf_cap=2)
    with pytest.raises(PreconditionError):
        exact_distribution_charity(inst, algorithm=5)


def test_estimate_is_deterministic_and_calibrated():
    def sampler(seed):
        return seed

    def coin(seed):
        return float(SplitMix64(seed).below(2))

    a = estimate(sampler, coin, n_samples=2000, seed=42)
    b = estimate(sampler, coin, n_samples=2000, seed=42)
    assert a == b
    assert a.n == 2000
    assert abs(a.mean - 0.5) <= 3 * a.stderr
    assert a.ci_low == a.mean - 3 * a.stderr
    assert a.ci_high == a.mean + 3 * a.stderr


def test_estimate_rejects_small_sample_counts():
    with pytest.raises(PreconditionError):
        estimate(lambda s: s, float, n_samples=999, seed=1)
