"""Random matchings: bistochastic matrices and lottery decompositions.

A random matching is an n-by-n bistochastic matrix of exact rationals,
stored sparsely by (agent, item) name.  birkhoff_decompose writes one
as a convex combination of permutation matchings; the combination is
trimmed to at most n*n - 2n + 2 terms, which is the dimension bound for
the polytope of bistochastic matrices and therefore always reachable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bipartite import find_perfect_matching
from .errors import InputError
from .matching import DeterministicMatching, is_weakly_stable
from .rationals import ONE, RAT, ZERO


class RandomMatching:
    """Sparse exact-rational matrix keyed by (agent, item) names."""

    __slots__ = ("n", "entries")

    def __init__(self, n, entries):
        self.n = int(n)
        clean = {}
        for (a, o), q in entries.items():
            q = RAT(q)
            if q != 0:
                clean[(a, o)] = q
        self.entries = clean

    def get(self, agent, item):
        return self.entries.get((agent, item), ZERO)

    def support(self):
        return tuple(sorted(self.entries))

    def __eq__(self, other):
        if not isinstance(other, RandomMatching):
            return NotImplemented
        return self.n == other.n and self.entries == other.entries

    def __repr__(self):
        return f"RandomMatching(n={self.n}, {len(self.entries)} nonzeros)"


def matrix_of_matching(matching, n):
    """The 0/1 random matching putting all mass on one matching."""
    return RandomMatching(n, {(a, o): ONE for a, o in matching})


def validate_random_matching(p, inst=None):
    """Raise InputError unless p is bistochastic (and fits inst if given)."""
    if p.n < 1:
        raise InputError("matrix size must be at least 1")
    rows = {}
    cols = {}
    for (a, o), q in p.entries.items():
        if q < 0:
            raise InputError(f"matrix entry ({a!r}, {o!r}) is negative")
        rows[a] = rows.get(a, ZERO) + q
        cols[o] = cols.get(o, ZERO) + q
    if inst is not None:
        if p.n != inst.n:
            raise InputError(f"matrix size {p.n} does not match instance size {inst.n}")
        for a in rows:
            if a not in inst.pref_rank:
                raise InputError(f"matrix row for unknown agent {a!r}")
        for o in cols:
            if o not in inst.prio_rank:
                raise InputError(f"matrix column for unknown item {o!r}")
        for (a, o) in p.entries:
            if not inst.mutually_acceptable(a, o):
                raise InputError(
                    f"matrix entry ({a!r}, {o!r}) is not a mutually acceptable pair"
                )
        agent_names = inst.agents
        item_names = inst.items
    else:
        if len(rows) != p.n or len(cols) != p.n:
            raise InputError(
                f"matrix must touch exactly {p.n} agents and items, "
                f"got {len(rows)} and {len(cols)}"
            )
        agent_names = rows.keys()
        item_names = cols.keys()
    for a in agent_names:
        if rows.get(a, ZERO) != ONE:
            raise InputError(f"row sum for agent {a!r} is {rows.get(a, ZERO)}, not 1")
    for o in item_names:
        if cols.get(o, ZERO) != ONE:
            raise InputError(f"column sum for item {o!r} is {cols.get(o, ZERO)}, not 1")


@dataclass
class DecompositionTerm:
    weight: object
    matching: DeterministicMatching
    weakly_stable: bool = None
    strongly_stable: bool = None


@dataclass
class Decomposition:
    terms: list

    @property
    def total_weight(self):
        return sum((t.weight for t in self.terms), ZERO)

    @property
    def stable_probability(self):
        """Mass on weakly stable terms, or None if some flag is unset."""
        total = ZERO
        for t in self.terms:
            if t.weakly_stable is None:
                return None
            if t.weakly_stable:
                total += t.weight
        return total


def recombine(decomp, n) -> RandomMatching:
    """Weighted sum of the terms' permutation matrices."""
    acc = {}
    for t in decomp.terms:
        for a, o in t.matching:
            acc[(a, o)] = acc.get((a, o), ZERO) + t.weight
    return RandomMatching(n, acc)


def _find_dependence(vectors, dim):
    """A nontrivial combination summing to zero, as {index: coeff}.

    Incremental Gaussian elimination with combination tracking; returns
    the first dependence found, or None if the vectors are independent.
    """
    pivots = []
    for k, vec in enumerate(vectors):
        cur = list(vec)
        combo = {k: ONE}
        for pi, pvec, pcombo in pivots:
            f = cur[pi]
            if f != 0:
                for idx, pv in enumerate(pvec):
                    if pv != 0:
                        cur[idx] -= f * pv
                for j, cf in pcombo.items():
                    combo[j] = combo.get(j, ZERO) - f * cf
        pivot = next((i for i, v in enumerate(cur) if v != 0), None)
        if pivot is None:
            return combo
        inv = cur[pivot]
        cur = [v / inv for v in cur]
        combo = {j: cf / inv for j, cf in combo.items()}
        pivots.append((pivot, cur, combo))
    return None


def _trim_to_dimension_bound(terms, n):
    """Cancel linearly dependent terms until at most (n-1)^2 + 1 remain.

    Coefficients of a dependence always sum to zero (every permutation
    matrix has total mass n), so shifting weights along it keeps both
    the recombination and the total weight unchanged.
    """
    bound = n * n - 2 * n + 2
    if len(terms) <= bound:
        return terms
    agents = sorted({a for t in terms for a, _ in t.matching})
    items = sorted({o for t in terms for _, o in t.matching})
    ai = {a: i for i, a in enumerate(agents)}
    oi = {o: i for i, o in enumerate(items)}

    def vec(t):
        v = [ZERO] * (n * n)
        for a, o in t.matching:
            v[ai[a] * n + oi[o]] = ONE
        return v

    while len(terms) > bound:
        combo = _find_dependence([vec(t) for t in terms], n * n)
        assert combo is not None, "more terms than the span dimension must be dependent"
        step = min(
            (terms[j].weight / cf, j) for j, cf in combo.items() if cf > 0
        )[0]
        kept = []
        for j, t in enumerate(terms):
            w = t.weight - step * combo.get(j, ZERO)
            if w != 0:
                kept.append(DecompositionTerm(w, t.matching, t.weakly_stable, t.strongly_stable))
        terms = kept
    return terms


def birkhoff_decompose(p, inst=None) -> Decomposition:
    """Write a bistochastic matrix as a lottery over perfect matchings.

    Greedy: find a perfect matching inside the support, subtract the
    smallest weight along it, repeat; then trim to the dimension bound.
    When an instance is supplied each term is annotated with its weak
    stability.
    """
    validate_random_matching(p, inst)
    agents = sorted({a for a, _ in p.entries})
    items = sorted({o for _, o in p.entries})
    ai = {a: i for i, a in enumerate(agents)}
    oi = {o: i for i, o in enumerate(items)}
    n = p.n

    work = dict(p.entries)
    terms = []
    while work:
        adj = [[] for _ in range(n)]
        for (a, o) in sorted(work):
            adj[ai[a]].append(oi[o])
        match = find_perfect_matching(adj, n)
        if match is None:
            raise InputError("matrix has no perfect matching in its support")
        pairs = [(agents[u], items[v]) for u, v in enumerate(match)]
        theta = min(work[pr] for pr in pairs)
        for pr in pairs:
            left = work[pr] - theta
            if left == 0:
                del work[pr]
            else:
                work[pr] = left
        terms.append(DecompositionTerm(theta, DeterministicMatching(pairs)))

    terms = _trim_to_dimension_bound(terms, n)
    if inst is not None:
        for t in terms:
            t.weakly_stable = is_weakly_stable(inst, t.matching).stable
    return Decomposition(terms)
