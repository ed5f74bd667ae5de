"""Brute-force reference implementations for cross-checking.

Everything here trades speed for transparency: plain backtracking over
the support graph, a dense two-phase simplex tableau instead of the
sifting solver, and a tiny exact-cover search.  The point is that none
of it shares code with the production decision paths, so agreement
between the two is meaningful evidence rather than an identity test.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import complete_instance
from .errors import CapExceededError, InputError
from .matching import DeterministicMatching, is_weakly_stable
from .randmatch import RandomMatching
from .rationals import ONE, RAT, ZERO


@dataclass(frozen=True)
class X3CInstance:
    """Exact cover by three-sets, occurrence-bounded variant."""

    elements: tuple
    sets: tuple  # tuple of 3-element tuples

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "sets", tuple(tuple(s) for s in self.sets))


def validate_x3c(x3c: X3CInstance):
    """Reject anything but the restricted form the reductions assume.

    Ground set size 3n, every set has three distinct known elements,
    and every element occurs in exactly three sets.
    """
    elems = x3c.elements
    if len(set(elems)) != len(elems):
        raise InputError("duplicate elements in X3C instance")
    if len(elems) == 0 or len(elems) % 3 != 0:
        raise InputError("X3C ground set size must be a positive multiple of 3")
    known = set(elems)
    count = {e: 0 for e in elems}
    for s in x3c.sets:
        if len(s) != 3 or len(set(s)) != 3:
            raise InputError("X3C sets must have exactly 3 distinct elements")
        for e in s:
            if e not in known:
                raise InputError("X3C set mentions unknown element %r" % (e,))
            count[e] += 1
    bad = [e for e in elems if count[e] != 3]
    if bad:
        raise InputError(
            "restricted X3C needs every element in exactly 3 sets; "
            "violated by %r" % (bad[0],)
        )


def solve_x3c(x3c: X3CInstance):
    """Find an exact cover (tuple of set indices) or None.

    Depth-first over the element with the fewest usable sets, which is
    plenty for the instance sizes the reductions are run on.
    """
    validate_x3c(x3c)
    sets_of = {e: [] for e in x3c.elements}
    for j, s in enumerate(x3c.sets):
        for e in s:
            sets_of[e].append(j)
    covered = set()
    chosen = []

    def search():
        if len(covered) == len(x3c.elements):
            return True
        best = None
        best_opts = None
        for e in x3c.elements:
            if e in covered:
                continue
            opts = [
                j for j in sets_of[e]
                if not any(e2 in covered for e2 in x3c.sets[j])
            ]
            if best_opts is None or len(opts) < len(best_opts):
                best, best_opts = e, opts
                if not opts:
                    return False
        for j in best_opts:
            covered.update(x3c.sets[j])
            chosen.append(j)
            if search():
                return True
            chosen.pop()
            covered.difference_update(x3c.sets[j])
        return False

    if search():
        return tuple(sorted(chosen))
    return None


def enumerate_consistent_matchings(inst, p, cap=1_000_000):
    """All perfect matchings inside the support of p, stability ignored.

    Incomplete instances are completed first.  Plain backtracking in
    instance order; raises CapExceededError past cap matchings.
    """
    inst, p = complete_instance(inst, p)
    n = inst.n
    items_of = {a: [] for a in inst.agents}
    for (a, o) in sorted(p.entries):
        items_of[a].append(o)
    agents = list(inst.agents)
    found = []
    used = set()
    assigned = []

    def search(pos):
        if pos == n:
            if len(found) >= cap:
                raise CapExceededError(
                    "more than %d support matchings" % cap, cap
                )
            found.append(DeterministicMatching(zip(agents, assigned)))
            return
        for o in items_of[agents[pos]]:
            if o in used:
                continue
            used.add(o)
            assigned.append(o)
            search(pos + 1)
            assigned.pop()
            used.remove(o)

    search(0)
    found.sort(key=lambda m: m.pairs)
    return found


def lp_membership(p, matchings):
    """Is p a convex combination of the given matchings?  Exact.

    Dense two-phase simplex over rationals with Bland's rule; entirely
    separate from the sifting solver.  Returns (feasible, weights)
    where weights maps matching index to a positive rational.
    """
    cells = set(p.entries)
    for m in matchings:
        cells.update(m.pairs)
    cells = sorted(cells)
    nrow = len(cells)
    ncol = len(matchings)
    cell_row = {c: r for r, c in enumerate(cells)}
    # T[r] = structural coefficients + rhs; artificial basis implicit.
    T = [[ZERO] * ncol + [p.entries.get(cells[r], ZERO)] for r in range(nrow)]
    for j, m in enumerate(matchings):
        for pair in m.pairs:
            T[cell_row[pair]][j] = ONE
    # w row: reduced costs of the artificial total, valid while basic
    # columns stay zeroed by the pivoting below.
    W = [ZERO] * (ncol + 1)
    for r in range(nrow):
        for j in range(ncol + 1):
            W[j] += T[r][j]
    basis = [None] * nrow  # None marks an artificial still in place
    while True:
        enter = None
        for j in range(ncol):
            if W[j] > 0:
                enter = j
                break
        if enter is None:
            break
        leave = None
        ratio = None
        leave_id = None
        for r in range(nrow):
            if T[r][enter] > 0:
                t = T[r][-1] / T[r][enter]
                # Bland: ties broken by lowest basic variable id, with
                # artificials ordered after the structural columns.
                vid = basis[r] if basis[r] is not None else ncol + r
                if ratio is None or t < ratio or (t == ratio and vid < leave_id):
                    ratio, leave, leave_id = t, r, vid
        assert leave is not None, "phase one cannot be unbounded"
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for r in range(nrow):
            if r != leave and T[r][enter] != 0:
                f = T[r][enter]
                T[r] = [v - f * w for v, w in zip(T[r], T[leave])]
        if W[enter] != 0:
            f = W[enter]
            W = [v - f * w for v, w in zip(W, T[leave])]
        basis[leave] = enter
    if W[-1] != 0:
        return False, None
    weights = {}
    for r in range(nrow):
        if basis[r] is not None and T[r][-1] != 0:
            weights[basis[r]] = weights.get(basis[r], ZERO) + T[r][-1]
    # Sanity: the claimed mix really reassembles p.
    mix = {}
    for j, w in weights.items():
        for pair in matchings[j].pairs:
            mix[pair] = mix.get(pair, ZERO) + w
    assert all(q == 0 for q in (p.entries.get(c, ZERO) - mix.get(c, ZERO)
                                for c in cells)), "membership recombination"
    return True, weights


def expost_oracle(inst, p, cap=1_000_000):
    """Ex-post stability by full enumeration plus dense LP membership."""
    inst, p = complete_instance(inst, p)
    mats = enumerate_consistent_matchings(inst, p, cap)
    stable = [m for m in mats if is_weakly_stable(inst, m).stable]
    feasible, weights = lp_membership(p, stable)
    if not feasible:
        return False, None
    return True, [(w, stable[j]) for j, w in sorted(weights.items())]


def robust_oracle(inst, p, cap=1_000_000):
    """Robustness by checking every support matching directly."""
    inst, p = complete_instance(inst, p)
    for m in enumerate_consistent_matchings(inst, p, cap):
        report = is_weakly_stable(inst, m)
        if not report.stable:
            bp = report.blocking_pairs[0]
            return False, (bp.agent, bp.item, m)
    return True, None
