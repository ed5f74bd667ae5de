import pytest

from expostmatch.core import complete_instance
from expostmatch.errors import CapExceededError
from expostmatch.expost import (
    enumerate_stable_support_matchings,
    find_consistent_stable,
    max_stable_decomposition,
)
from expostmatch.gen import gen_random_instance, gen_random_mixture
from expostmatch.matching import is_weakly_stable
from expostmatch.oracle import expost_oracle
from expostmatch.randmatch import RandomMatching, recombine
from expostmatch.rationals import ONE, RAT

from helpers import rand_bistochastic, stable_matchings_complete


def entries_of(p):
    return dict(p.entries)


def test_worked_example_improved(ex1):
    inst, _, p_improved, m1, m2 = ex1
    res = max_stable_decomposition(inst, p_improved)
    assert res.is_expost_stable
    assert res.max_stable_probability == ONE
    assert res.considered == 2
    assert recombine(res.decomposition, inst.n).entries == p_improved.entries
    for t in res.decomposition.terms:
        assert t.weakly_stable
        assert is_weakly_stable(inst, t.matching).stable
    # the only stable support matchings are the two published witnesses
    support = enumerate_stable_support_matchings(inst, p_improved)
    assert {m.pairs for m in support} == {m1.pairs, m2.pairs}
    weights = {t.matching.pairs: t.weight for t in res.decomposition.terms}
    assert weights == {m1.pairs: RAT(1, 2), m2.pairs: RAT(1, 2)}


def test_worked_example_uniform(ex1):
    inst, p_uniform = ex1[:2]
    res = max_stable_decomposition(inst, p_uniform)
    assert res.is_expost_stable
    assert res.considered == 8
    assert recombine(res.decomposition, inst.n).entries == p_uniform.entries
    assert len(enumerate_stable_support_matchings(inst, p_uniform)) == 8


def test_mixtures_decompose_fully():
    for seed in range(30):
        n = 2 + seed % 4
        inst = gen_random_instance(n, tie_model="weak", seed=seed)
        p = gen_random_mixture(inst, k=2 + seed % 4, seed=seed + 7)
        res = max_stable_decomposition(inst, p)
        assert res.is_expost_stable, (seed, res.max_stable_probability)
        assert recombine(res.decomposition, n).entries == p.entries
        assert all(t.weakly_stable for t in res.decomposition.terms)


def test_partial_mass_matrices_report_exact_max():
    # random bistochastic matrices usually are not ex-post stable; the
    # maximum must match the oracle and the decomposition must still
    # recombine to p exactly, with the unstable leftover marked
    hits = 0
    for seed in range(24):
        n = 2 + seed % 3
        inst = gen_random_instance(n, tie_model="strict", seed=seed)
        p = rand_bistochastic(n, seed=seed * 3 + 1)
        res = max_stable_decomposition(inst, p)
        ok, _ = expost_oracle(inst, p)
        assert res.is_expost_stable == ok
        assert recombine(res.decomposition, n).entries == p.entries
        stable_mass = sum(
            (t.weight for t in res.decomposition.terms if t.weakly_stable), RAT(0)
        )
        assert stable_mass == res.max_stable_probability
        if not res.is_expost_stable:
            hits += 1
            assert any(not t.weakly_stable for t in res.decomposition.terms)
            for t in res.decomposition.terms:
                assert t.weakly_stable == is_weakly_stable(inst, t.matching).stable
    assert hits > 5


def test_enumeration_matches_reference_filter():
    for seed in range(12):
        n = 2 + seed % 3
        inst = gen_random_instance(n, tie_model="weak", seed=seed + 50)
        p = gen_random_mixture(inst, k=3, seed=seed)
        support = {
            m.pairs for m in enumerate_stable_support_matchings(inst, p)
        }
        expect = set()
        for pairs in stable_matchings_complete(inst):
            if all(p.get(a, o) > 0 for a, o in pairs):
                expect.add(tuple(sorted(pairs)))
        assert support == expect


def test_cap_is_enforced_and_carried(ex1):
    inst, p_uniform = ex1[:2]
    assert len(enumerate_stable_support_matchings(inst, p_uniform)) == 8
    with pytest.raises(CapExceededError) as err:
        enumerate_stable_support_matchings(inst, p_uniform, cap=3)
    assert err.value.cap == 3
    with pytest.raises(CapExceededError):
        max_stable_decomposition(inst, p_uniform, cap=3)


def test_find_consistent_stable_agrees_with_enumeration():
    found_none = 0
    for seed in range(30):
        n = 2 + seed % 3
        inst = gen_random_instance(n, tie_model="weak", seed=seed + 11)
        if seed % 2:
            p = rand_bistochastic(n, seed=seed)
        else:
            p = gen_random_mixture(inst, k=2, seed=seed)
        m = find_consistent_stable(inst, p)
        support = enumerate_stable_support_matchings(inst, p)
        if m is None:
            found_none += 1
            assert support == []
        else:
            assert support
            ci, cp = complete_instance(inst, p)
            assert is_weakly_stable(ci, m).stable
            assert all(cp.get(a, o) > 0 for a, o in m)
    assert found_none > 0


def test_incomplete_instance_decomposes_in_completed_market():
    from helpers import stable_matchings_incomplete
    inst = gen_random_instance(3, density=0.6, seed=1)
    assert not inst.complete
    m1, m2 = sorted(stable_matchings_incomplete(inst), key=sorted)[:2]
    half = RAT(1, 2)
    entries = {}
    for m in (m1, m2):
        for pair in m:
            entries[pair] = entries.get(pair, RAT(0)) + half
    p = RandomMatching(3, entries)
    res = max_stable_decomposition(inst, p)
    assert res.is_expost_stable
    ci, cp = complete_instance(inst, p)
    got = recombine(res.decomposition, ci.n)
    assert got.entries == cp.entries
    # terms live in the completed market and restrict to stable
    # matchings of the original one
    for t in res.decomposition.terms:
        restricted = frozenset(
            (a, o) for a, o in t.matching
            if not a.startswith("__dummy") and not o.startswith("__dummy")
        )
        assert restricted in (m1, m2)


def test_interchangeable_agents_are_lifted_not_lost():
    # two agents with identical rows everywhere: the quotient search
    # sees one representative but the decomposition must still be a
    # lottery over matchings of the full market
    from expostmatch.core import Instance
    inst = Instance.from_tiers(
        agents=["x", "y", "z"],
        items=["u", "v", "w"],
        preferences={
            "x": [["u", "v", "w"]],
            "y": [["u", "v", "w"]],
            "z": [["u", "v", "w"]],
        },
        priorities={
            "u": [["x", "y", "z"]],
            "v": [["x", "y", "z"]],
            "w": [["x", "y", "z"]],
        },
    )
    third = RAT(1, 3)
    p = RandomMatching(3, {(a, o): third for a in inst.agents for o in inst.items})
    res = max_stable_decomposition(inst, p)
    assert res.is_expost_stable
    assert recombine(res.decomposition, 3).entries == p.entries
    # quotient collapses the all-ties market to very few representatives
    assert res.considered < 6