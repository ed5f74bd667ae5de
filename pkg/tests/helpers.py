"""Shared generators and brute-force reference implementations.

Everything here is deliberately naive: definitional double loops and
exhaustive enumeration, kept independent of the library's optimized
code paths so tests can catch the two disagreeing.
"""

import random

from expostmatch.randmatch import RandomMatching
from expostmatch.rationals import RAT, ZERO


def rand_bistochastic(n, seed, kmax=None, names=True):
    """Random exact-rational bistochastic matrix.

    Convex combination of k random permutation matrices with random
    integer weights, k drawn from [2, kmax] (default 2n).  With
    names=True rows are a1..an and columns o1..on, matching
    gen_random_instance.
    """
    rng = random.Random(seed)
    k = rng.randint(2, kmax if kmax is not None else 2 * n)
    weights = [rng.randint(1, 9) for _ in range(k)]
    total = sum(weights)
    entries = {}
    for w in weights:
        perm = list(range(n))
        rng.shuffle(perm)
        q = RAT(w, total)
        for i, j in enumerate(perm):
            key = ("a%d" % (i + 1), "o%d" % (j + 1)) if names else (i, j)
            entries[key] = entries.get(key, ZERO) + q
    return RandomMatching(n, entries)


def naive_blocking_pairs(inst, pairs, strong=False):
    """Blocking pairs of a (possibly partial) matching, by definition.

    pairs is any iterable of (agent, item) tuples using only mutually
    acceptable pairs.  A pair (i, o) not in the matching blocks when
    both sides would strictly improve (an unmatched side always counts
    as strictly improving).  With strong=True one strict side plus one
    weak side is already a block.
    """
    pairs = set(pairs)
    item_of = {a: o for a, o in pairs}
    agent_of = {o: a for a, o in pairs}
    out = []
    for i in inst.agents:
        pr = inst.pref_rank[i]
        for o in inst.items:
            if o not in pr or i not in inst.prio_rank[o]:
                continue
            if (i, o) in pairs:
                continue
            qr = inst.prio_rank[o]
            mi = item_of.get(i)
            if mi is None:
                gain_i = 1
            elif pr[o] < pr[mi]:
                gain_i = 1
            elif pr[o] == pr[mi]:
                gain_i = 0
            else:
                continue
            mo = agent_of.get(o)
            if mo is None:
                gain_o = 1
            elif qr[i] < qr[mo]:
                gain_o = 1
            elif qr[i] == qr[mo]:
                gain_o = 0
            else:
                continue
            if gain_i and gain_o:
                out.append((i, o))
            elif strong and (gain_i or gain_o):
                out.append((i, o))
    return out


def stable_matchings_incomplete(inst):
    """All weakly stable partial matchings of an incomplete instance.

    Full enumeration over matchings made of mutually acceptable pairs,
    which is fine at the sizes the tests use.  Returns a set of
    frozensets of pairs.
    """
    agents = list(inst.agents)
    acceptable = {
        a: [o for o in inst.items if inst.mutually_acceptable(a, o)]
        for a in agents
    }
    out = set()
    cur = []
    used = set()

    def rec(k):
        if k == len(agents):
            if not naive_blocking_pairs(inst, cur):
                out.add(frozenset(cur))
            return
        a = agents[k]
        rec(k + 1)
        for o in acceptable[a]:
            if o in used:
                continue
            used.add(o)
            cur.append((a, o))
            rec(k + 1)
            cur.pop()
            used.remove(o)

    rec(0)
    return out


def stable_matchings_complete(inst):
    """All weakly stable perfect matchings of a complete instance.

    Backtracking over agents with the one safe prune: a mutual-strict
    block between two already-placed pairs cannot unblock later.
    Leaves are re-filtered with the definitional check anyway.
    """
    agents = list(inst.agents)
    items = list(inst.items)
    n = len(agents)
    assert len(items) == n
    out = set()
    cur = []
    used = [False] * n

    def clashes(a, o):
        pr = inst.pref_rank[a]
        qr = inst.prio_rank[o]
        for a2, o2 in cur:
            pr2 = inst.pref_rank[a2]
            qr2 = inst.prio_rank[o2]
            if pr[o2] < pr[o] and qr2[a] < qr2[a2]:
                return True
            if pr2[o] < pr2[o2] and qr[a2] < qr[a]:
                return True
        return False

    def rec(k):
        if k == n:
            if not naive_blocking_pairs(inst, cur):
                out.add(frozenset(cur))
            return
        a = agents[k]
        for j, o in enumerate(items):
            if used[j] or clashes(a, o):
                continue
            used[j] = True
            cur.append((a, o))
            rec(k + 1)
            cur.pop()
            used[j] = False

    rec(0)
    return out


def all_support_matchings(p):
    """Perfect matchings inside the support of p, brute force."""
    agents = sorted({a for a, _ in p.entries})
    supp = {a: sorted(o for a2, o in p.entries if a2 == a) for a in agents}
    out = []
    cur = []
    used = set()

    def rec(k):
        if k == len(agents):
            out.append(frozenset(cur))
            return
        a = agents[k]
        for o in supp[a]:
            if o in used:
                continue
            used.add(o)
            cur.append((a, o))
            rec(k + 1)
            cur.pop()
            used.remove(o)

    rec(0)
    return out
