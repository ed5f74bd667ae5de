"""Instance and matrix generators.

Three families live here: a small worked example with two contrasting
matrices, gadget reductions that turn restricted exact-cover-by-3-sets
instances into matching markets whose decomposability encodes the
cover question, and seeded random generators for property testing.
All matrix entries are exact rationals.
"""

from __future__ import annotations

import random

from .core import Instance, _require_valid
from .errors import InputError
from .matching import DeterministicMatching, deferred_acceptance
from .oracle import X3CInstance, validate_x3c
from .randmatch import RandomMatching, validate_random_matching
from .rationals import ONE, RAT, ZERO

REDUCTION_VARIANTS = ("strict-dich", "dich-dich", "deg3", "consistent")


def gen_example1():
    """The 4x4 worked example: instance, two matrices, two matchings.

    Returns (instance, p_uniform, p_improved, m1, m2).  p_uniform is
    the lottery obtained by breaking all priority ties uniformly at
    random and running the proposal algorithm on each strict draw;
    p_improved is the simultaneous-eating outcome, which every agent
    weakly prefers.  Both are ex-post stable; m1 and m2 are the two
    stable support matchings that witness it for p_improved.
    """
    inst = Instance.from_tiers(
        agents=["a", "b", "c", "d"],
        items=["o1", "o2", "o3", "o4"],
        preferences={
            "a": [["o1"], ["o3"], ["o4"], ["o2"]],
            "b": [["o1"], ["o4"], ["o3"], ["o2"]],
            "c": [["o2"], ["o3"], ["o4"], ["o1"]],
            "d": [["o2"], ["o4"], ["o3"], ["o1"]],
        },
        priorities={
            "o1": [["a", "b"], ["c"], ["d"]],
            "o2": [["c", "d"], ["a"], ["b"]],
            "o3": [["b"], ["d"], ["a", "c"]],
            "o4": [["a"], ["c"], ["b", "d"]],
        },
    )
    half, three8, one8 = RAT(1, 2), RAT(3, 8), RAT(1, 8)
    uniform = RandomMatching(4, {
        ("a", "o1"): half, ("b", "o1"): half,
        ("c", "o2"): half, ("d", "o2"): half,
        ("a", "o3"): three8, ("b", "o4"): three8,
        ("c", "o3"): three8, ("d", "o4"): three8,
        ("a", "o4"): one8, ("b", "o3"): one8,
        ("c", "o4"): one8, ("d", "o3"): one8,
    })
    improved = RandomMatching(4, {
        ("a", "o1"): half, ("a", "o3"): half,
        ("b", "o1"): half, ("b", "o4"): half,
        ("c", "o2"): half, ("c", "o3"): half,
        ("d", "o2"): half, ("d", "o4"): half,
    })
    validate_random_matching(uniform, inst)
    validate_random_matching(improved, inst)
    m1 = DeterministicMatching(
        [("a", "o1"), ("b", "o4"), ("c", "o3"), ("d", "o2")])
    m2 = DeterministicMatching(
        [("a", "o3"), ("b", "o1"), ("c", "o2"), ("d", "o4")])
    return inst, uniform, improved, m1, m2


def gen_x3c_reduction(x3c: X3CInstance, variant: str):
    """Build the matching market encoding an exact-cover instance.

    Variants:
      strict-dich  strict preferences, dichotomous priorities; the
                   matrix decomposes into weakly stable matchings iff
                   a cover exists.
      dich-dich    ties on both sides, same equivalence.
      consistent   strict-dich market with the two suitor rows frozen
                   to a single column each; a stable support matching
                   exists iff a cover exists.
      deg3         incomplete instance, every list of length at most
                   3, same decomposability equivalence.
    """
    validate_x3c(x3c)
    if variant in ("strict-dich", "dich-dich", "consistent"):
        return _reduction_two_suitors(x3c, variant)
    if variant == "deg3":
        return _reduction_degree_three(x3c)
    raise InputError("unknown reduction variant %r" % (variant,))


def _occurrence_elements(x3c):
    """1-based element index of the l-th member of each set."""
    eidx = {e: i + 1 for i, e in enumerate(x3c.elements)}
    return {(j + 1, l + 1): eidx[e]
            for j, s in enumerate(x3c.sets) for l, e in enumerate(s)}


def _reduction_two_suitors(x3c, variant):
    m = len(x3c.sets)
    occ = _occurrence_elements(x3c)
    jl = [(j, l) for j in range(1, m + 1) for l in range(1, 4)]
    nxt = {1: 2, 2: 3, 3: 1}
    prv = {1: 3, 2: 1, 3: 2}

    c = {(j, l): "c%d_%d" % (j, l) for (j, l) in jl}
    d = {(j, l): "d%d_%d" % (j, l) for (j, l) in jl}
    x = {(j, l): "x%d_%d" % (j, l) for (j, l) in jl}
    y = {(j, l): "y%d_%d" % (j, l) for (j, l) in jl}
    a = {i: "a%d" % i for i in range(1, len(x3c.elements) + 1)}
    z = ["z%d" % k for k in range(1, m + 1)]

    agents = ([c[k] for k in jl] + [d[k] for k in jl] + z + ["s1", "s2"])
    items = ([a[i] for i in sorted(a)] + [x[k] for k in jl]
             + [y[k] for k in jl] + ["o1", "o2"])
    all_x = sorted(x.values())
    all_y = sorted(y.values())

    def strict_tail(top):
        seen = set(top)
        return [[o] for o in sorted(set(items) - seen)]

    strict = variant != "dich-dich"
    preferences = {}
    for (j, l) in jl:
        head = [a[occ[(j, l)]], y[(j, l)], x[(j, prv[l])]]
        if strict:
            top = head + [x[(j, l)]]
            preferences[c[(j, l)]] = [[o] for o in top] + strict_tail(top)
        else:
            preferences[c[(j, l)]] = [head, sorted(set(items) - set(head))]
        if strict:
            top = [x[(j, l)], y[(j, l)]]
            preferences[d[(j, l)]] = [[o] for o in top] + strict_tail(top)
        else:
            preferences[d[(j, l)]] = [sorted(items)]
    if strict:
        s1_top = ["o2"] + all_y + ["o1"]
        preferences["s1"] = [[o] for o in s1_top] + strict_tail(s1_top)
        preferences["s2"] = [["o1"], ["o2"]] + strict_tail(["o1", "o2"])
        for zk in z:
            preferences[zk] = [[o] for o in all_x] + strict_tail(all_x)
    else:
        head = ["o2"] + all_y
        preferences["s1"] = [head, sorted(set(items) - set(head))]
        preferences["s2"] = [sorted(items)]
        for zk in z:
            preferences[zk] = [sorted(items)]

    priorities = {}
    owners = {i: [] for i in a}
    for (j, l) in jl:
        owners[occ[(j, l)]].append(c[(j, l)])
    for i, name in a.items():
        priorities[name] = [owners[i], sorted(set(agents) - set(owners[i]))]
    for (j, l) in jl:
        top = [c[(j, l)], c[(j, nxt[l])]]
        priorities[x[(j, l)]] = [top, sorted(set(agents) - set(top))]
        top = [d[(j, l)], "s1"]
        priorities[y[(j, l)]] = [top, sorted(set(agents) - set(top))]
    priorities["o1"] = [sorted(agents)]
    priorities["o2"] = [sorted(agents)]

    third, two3 = RAT(1, 3), RAT(2, 3)
    entries = {}
    for (j, l) in jl:
        entries[(c[(j, l)], a[occ[(j, l)]])] = third
        entries[(c[(j, l)], x[(j, l)])] = third
        entries[(c[(j, l)], y[(j, l)])] = third
        entries[(d[(j, l)], x[(j, l)])] = third
        entries[(d[(j, l)], y[(j, l)])] = two3
        for zk in z:
            entries[(zk, x[(j, l)])] = RAT(1, 3 * m)
    if variant == "consistent":
        entries[("s1", "o1")] = ONE
        entries[("s2", "o2")] = ONE
    else:
        entries[("s1", "o1")] = third
        entries[("s1", "o2")] = two3
        entries[("s2", "o1")] = two3
        entries[("s2", "o2")] = third

    inst = Instance.from_tiers(agents, items, preferences, priorities)
    _require_valid(inst)
    p = RandomMatching(len(agents), entries)
    validate_random_matching(p, inst)
    return inst, p


def _reduction_degree_three(x3c):
    m = len(x3c.sets)
    occ = _occurrence_elements(x3c)
    jl = [(j, l) for j in range(1, m + 1) for l in range(1, 4)]

    def g(k, j, l):
        return "%dg_%d_%d" % (k, j, l)

    def xx(k, j, l):
        return "%dx_%d_%d" % (k, j, l)

    def cc(k, j, l):
        return "%dc_%d_%d" % (k, j, l)

    def hh(k, j, l):
        return "%dh_%d_%d" % (k, j, l)

    a = {i: "a%d" % i for i in range(1, len(x3c.elements) + 1)}
    z = {i: "z%d" % i for i in range(1, len(x3c.elements) + 1)}

    def next_o(j, l):
        if l < 3:
            return "o%d_%d" % (j, l + 1)
        return "o%d_%d" % (1 if j == m else j + 1, 1)

    agents, items = [], []
    preferences, priorities = {}, {}
    entries = {}
    third, two3 = RAT(1, 3), RAT(2, 3)
    for (j, l) in jl:
        lm1 = 3 if l == 1 else l - 1
        lp1 = 1 if l == 3 else l + 1
        dn, sn = "d%d_%d" % (j, l), "s%d_%d" % (j, l)
        yn, on = "y%d_%d" % (j, l), "o%d_%d" % (j, l)
        agents += [cc(k, j, l) for k in (1, 2, 3, 4)]
        agents += [hh(k, j, l) for k in (1, 2, 3)]
        agents += [dn, sn]
        items += [g(k, j, l) for k in (1, 2, 3)]
        items += [xx(k, j, l) for k in (1, 2, 3, 4)]
        items += [yn, on]

        preferences[cc(1, j, l)] = [[g(2, j, l), xx(1, j, lp1)], [g(1, j, l)]]
        preferences[cc(2, j, l)] = [[xx(3, j, l), g(1, j, l)]]
        preferences[cc(3, j, l)] = [[a[occ[(j, l)]], g(2, j, l), g(3, j, l)]]
        preferences[cc(4, j, l)] = [[yn, g(3, j, l)]]
        preferences[hh(1, j, l)] = [[xx(1, j, l), xx(2, j, l)]]
        preferences[hh(2, j, l)] = [[xx(1, j, l), xx(3, j, l)]]
        preferences[hh(3, j, l)] = [[xx(3, j, l), xx(4, j, l)]]
        preferences[dn] = [[xx(4, j, l), yn]]
        preferences[sn] = [[on, yn], [next_o(j, l)]]

        priorities[xx(1, j, l)] = [[hh(2, j, l), cc(1, j, lm1)], [hh(1, j, l)]]
        priorities[xx(2, j, l)] = [[hh(1, j, l), z[occ[(j, l)]]]]
        priorities[xx(3, j, l)] = [[hh(2, j, l), hh(3, j, l), cc(2, j, l)]]
        priorities[xx(4, j, l)] = [[hh(3, j, l), dn]]
        priorities[g(1, j, l)] = [[cc(1, j, l), cc(2, j, l)]]
        priorities[g(2, j, l)] = [[cc(3, j, l), cc(1, j, l)]]
        priorities[g(3, j, l)] = [[cc(3, j, l), cc(4, j, l)]]
        priorities[yn] = [[dn, sn], [cc(4, j, l)]]
        if l == 1:
            prev_s = "s%d_%d" % (m if j == 1 else j - 1, 3)
            priorities[on] = [["s%d_%d" % (j, 1), prev_s]]
        elif l == 2:
            priorities[on] = [["s%d_%d" % (j, 1), "s%d_%d" % (j, 2)]]
        else:
            priorities[on] = [["s%d_%d" % (j, 2), "s%d_%d" % (j, 3)]]

        entries[(cc(3, j, l), a[occ[(j, l)]])] = third
        entries[(cc(1, j, l), g(1, j, l))] = third
        entries[(cc(2, j, l), g(1, j, l))] = two3
        entries[(cc(3, j, l), g(2, j, l))] = third
        entries[(cc(1, j, l), g(2, j, l))] = two3
        entries[(cc(3, j, l), g(3, j, l))] = third
        entries[(cc(4, j, l), g(3, j, l))] = two3
        entries[(cc(2, j, l), xx(3, j, l))] = third
        entries[(cc(4, j, l), yn)] = third
        entries[(hh(1, j, l), xx(1, j, l))] = third
        entries[(hh(2, j, l), xx(1, j, l))] = two3
        entries[(hh(1, j, l), xx(2, j, l))] = two3
        entries[(z[occ[(j, l)]], xx(2, j, l))] = third
        entries[(hh(2, j, l), xx(3, j, l))] = third
        entries[(hh(3, j, l), xx(3, j, l))] = third
        entries[(hh(3, j, l), xx(4, j, l))] = two3
        entries[(dn, xx(4, j, l))] = third
        entries[(dn, yn)] = two3
        entries[(sn, on)] = two3
        entries[(sn, next_o(j, l))] = third

    for i in sorted(a):
        holders = sorted(cc(3, j, l) for (j, l) in jl if occ[(j, l)] == i)
        priorities[a[i]] = [holders]
        twos = sorted(xx(2, j, l) for (j, l) in jl if occ[(j, l)] == i)
        preferences[z[i]] = [twos]
        agents.append(z[i])
        items.append(a[i])

    inst = Instance.from_tiers(agents, items, preferences, priorities,
                               complete=False)
    _require_valid(inst)
    p = RandomMatching(len(agents), entries)
    validate_random_matching(p, inst)
    return inst, p


TIE_MODELS = ("strict", "dichotomous", "weak")


def gen_random_instance(n, tie_model="weak", density=1.0, seed=0,
                        n_items=None):
    """Seeded random instance in the requested preference class.

    tie_model "strict" gives singleton tiers, "dichotomous" at most
    two tiers per order, "weak" random tier partitions.  density 1.0
    yields a complete instance; below 1.0 each pair is acceptable
    independently with that probability and acceptability is mutual,
    so the instance is marked incomplete.  n_items defaults to n for
    a square market.
    """
    if tie_model not in TIE_MODELS:
        raise InputError("tie_model must be one of %s" % (TIE_MODELS,))
    if n_items is None:
        n_items = n
    if n < 1 or n_items < 1:
        raise InputError("need at least one agent and one item")
    rng = random.Random(seed)
    complete = density >= 1.0
    agents = ["a%d" % (i + 1) for i in range(n)]
    items = ["o%d" % (k + 1) for k in range(n_items)]
    if complete:
        acceptable = {(a, o) for a in agents for o in items}
    else:
        acceptable = {(a, o) for a in agents for o in items
                      if rng.random() < density}

    def tiers_for(pool):
        pool = list(pool)
        rng.shuffle(pool)
        if tie_model == "strict" or len(pool) == 1:
            return [[name] for name in pool]
        if tie_model == "dichotomous":
            cut = rng.randint(1, len(pool) - 1)
            return [pool[:cut], pool[cut:]]
        tiers = []
        for name in pool:
            if tiers and rng.random() < 0.5:
                tiers[-1].append(name)
            else:
                tiers.append([name])
        return tiers

    preferences = {}
    for a in agents:
        pool = [o for o in items if (a, o) in acceptable]
        if pool:
            preferences[a] = tiers_for(pool)
    priorities = {}
    for o in items:
        pool = [a for a in agents if (a, o) in acceptable]
        if pool:
            priorities[o] = tiers_for(pool)
    inst = Instance.from_tiers(agents, items, preferences, priorities,
                               complete=complete)
    _require_valid(inst)
    return inst


def gen_random_mixture(inst, k=3, seed=0):
    """Convex mixture of k seeded tie-broken proposal outcomes.

    Every term is weakly stable by construction, so the mixture is
    ex-post stable with certainty.  Needs a complete square instance.
    """
    if not inst.complete or len(inst.agents) != len(inst.items):
        raise InputError("mixtures need a complete square instance")
    if k < 1:
        raise InputError("k must be positive")
    rng = random.Random(seed)
    picks = []
    for _ in range(k):
        w = rng.randint(1, 9)
        mt = deferred_acceptance(inst, seed=rng.randrange(2 ** 30))
        picks.append((w, mt))
    total = sum(w for w, _ in picks)
    entries = {}
    for w, mt in picks:
        q = RAT(w, total)
        for pair in mt:
            entries[pair] = entries.get(pair, ZERO) + q
    p = RandomMatching(len(inst.agents), entries)
    validate_random_matching(p, inst)
    return p


def probabilistic_serial(inst):
    """Exact simultaneous-eating outcome on a complete square instance.

    Agents eat their most preferred non-exhausted items at unit speed,
    splitting equally inside a tie; the clock runs to 1 through the
    finitely many exhaustion events, all in rational arithmetic.
    """
    _require_valid(inst)
    if not inst.complete or len(inst.agents) != len(inst.items):
        raise InputError("simultaneous eating needs a complete square instance")
    remaining = {o: ONE for o in inst.items}
    eaten = {}
    t = ZERO
    while t < ONE:
        cand = {}
        for ag in inst.agents:
            rk = inst.pref_rank[ag]
            live = [o for o in inst.items if remaining[o] > 0]
            best = min(rk[o] for o in live)
            cand[ag] = [o for o in live if rk[o] == best]
        rate = {}
        for ag in inst.agents:
            share = RAT(1, len(cand[ag]))
            for o in cand[ag]:
                rate[o] = rate.get(o, ZERO) + share
        dt = ONE - t
        for o, r in rate.items():
            if remaining[o] / r < dt:
                dt = remaining[o] / r
        assert dt > 0
        for ag in inst.agents:
            share = RAT(1, len(cand[ag])) * dt
            for o in cand[ag]:
                eaten[(ag, o)] = eaten.get((ag, o), ZERO) + share
        for o, r in rate.items():
            remaining[o] -= r * dt
        t += dt
    p = RandomMatching(len(inst.agents), eaten)
    validate_random_matching(p, inst)
    return p
