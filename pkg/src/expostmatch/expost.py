"""Ex-post stability: lotteries over weakly stable matchings.

A random matching p is ex-post stable when it can be written as a
convex combination of weakly stable matchings.  Every matching usable
in such a combination lives inside the support of p, so the decision
procedure is: enumerate the weakly stable matchings consistent with the
support, then maximize the probability mass assignable to them by an
exact packing LP.  p is ex-post stable exactly when that maximum is 1;
whatever mass is left over is factored through a Birkhoff decomposition
of the (renormalized) remainder, giving a full lottery whose stable
part is as large as possible.

The enumeration backtracks over agents in ascending support degree with
two accelerators that matter on adversarial inputs:

* forced-assignment propagation: an agent or item down to one remaining
  partner is matched immediately, and dead ends (no partner left) are
  cut on the spot;
* incremental blocking checks: a pair is tested against both earlier
  sides of every potential block the moment it is placed, which is
  enough because any block is visible at the later of its two
  placements.

Interchangeable agents (identical preferences, identical standing in
every priority, identical matrix rows) are additionally collapsed: only
canonically ordered representatives are enumerated, the LP sees one
aggregated row per (class, item), and chosen representatives are lifted
back to full matchings by cyclic shifts inside each class.  Everything
stays exact throughout.
"""

from __future__ import annotations

import math
from array import array
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import complete_instance
from .errors import CapExceededError
from .lp import CsrColumns, solve_packing_lp
from .matching import DeterministicMatching, is_weakly_stable
from .randmatch import (
    Decomposition,
    DecompositionTerm,
    RandomMatching,
    birkhoff_decompose,
)
from .rationals import ONE, RAT, ZERO


class _Hit(Exception):
    """Unwinds the search as soon as a first-hit query succeeds."""


class _StableSupportSearch:
    """Backtracking search for weakly stable support-restricted matchings."""

    def __init__(self, inst, p, classes=None):
        agents = list(inst.agents)
        items = list(inst.items)
        n = len(agents)
        self.agent_names = agents
        self.item_names = items
        self.n = n
        aidx = {a: k for k, a in enumerate(agents)}
        oidx = {o: k for k, o in enumerate(items)}

        pref = [[0] * n for _ in range(n)]
        for k, a in enumerate(agents):
            rk = inst.pref_rank[a]
            row = pref[k]
            for j, o in enumerate(items):
                row[j] = rk[o]
        prio = [[0] * n for _ in range(n)]
        for j, o in enumerate(items):
            rk = inst.prio_rank[o]
            row = prio[j]
            for k, a in enumerate(agents):
                row[k] = rk[a]
        self.pref = pref
        self.prio = prio

        support = [[] for _ in range(n)]
        item_support = [[] for _ in range(n)]
        for (a, o), _q in p.entries.items():
            support[aidx[a]].append(oidx[o])
            item_support[oidx[o]].append(aidx[a])
        for lst in support:
            lst.sort()
        for lst in item_support:
            lst.sort()
        self.support = support
        self.item_support = item_support

        # Forward-checking table.  Once (a, o) is matched, a support cell
        # (w, o2) is dead when pairing w with o2 would leave a blocking
        # pair against (a, o): either a strictly prefers o2 and o2
        # strictly favours a over w, or o strictly favours w's rival a2
        # who strictly prefers o to o2.  Candidate blockers range over
        # the whole instance because blocks are not support-bound, but
        # the holder side always comes from the support, so the dead
        # cells can be precomputed per support pair.
        forbid_cells = {}
        for a in range(n):
            pa = pref[a]
            for o in support[a]:
                cells = []
                r = pa[o]
                for o2 in range(n):
                    if pa[o2] < r:
                        po2 = prio[o2]
                        ra = po2[a]
                        cells.extend(
                            (j, o2) for j in item_support[o2] if po2[j] > ra
                        )
                po = prio[o]
                r = po[a]
                for a2 in range(n):
                    if po[a2] < r:
                        pa2 = pref[a2]
                        ro = pa2[o]
                        cells.extend(
                            (a2, o3) for o3 in support[a2] if pa2[o3] > ro
                        )
                forbid_cells[(a, o)] = tuple(cells)
        self.forbid_cells = forbid_cells
        self.forbidden = bytearray(n * n)

        self.class_of = [-1] * n
        self.pos_in_class = [0] * n
        self.class_members = []
        if classes:
            for cid, members in enumerate(classes):
                idxs = sorted(aidx[a] for a in members)
                self.class_members.append(idxs)
                for pos, a in enumerate(idxs):
                    self.class_of[a] = cid
                    self.pos_in_class[a] = pos

        self.order = sorted(range(n), key=lambda a: (len(support[a]), a))
        self.assigned_item = [-1] * n
        self.assigned_agent = [-1] * n
        self.avail_agent = [len(support[a]) for a in range(n)]
        self.avail_item = [len(item_support[o]) for o in range(n)]
        self.unassigned = n
        self.trail = []
        self.root_pairs = []
        self.root_ok = self._root_propagate()

    # -- propagation ---------------------------------------------------

    def _root_propagate(self):
        queue = deque()
        for a in range(self.n):
            if self.avail_agent[a] == 1:
                queue.append((a, self.support[a][0]))
        for o in range(self.n):
            if self.avail_item[o] == 1:
                queue.append((self.item_support[o][0], o))
        ok = self._propagate(queue)
        if ok:
            self.root_pairs = [
                (a, self.assigned_item[a])
                for a in range(self.n)
                if self.assigned_item[a] >= 0
            ]
        return ok

    def _propagate(self, queue):
        while queue:
            a, o = queue.popleft()
            cur = self.assigned_item[a]
            if cur == o:
                continue
            if cur >= 0 or self.assigned_agent[o] >= 0:
                return False
            if not self._assign(a, o, queue):
                return False
        return True

    def _assign(self, a, o, queue):
        assigned_item = self.assigned_item
        assigned_agent = self.assigned_agent

        cid = self.class_of[a]
        if cid >= 0:
            mypos = self.pos_in_class[a]
            for m in self.class_members[cid]:
                om = assigned_item[m]
                if om < 0 or m == a:
                    continue
                if self.pos_in_class[m] < mypos:
                    if om >= o:
                        return False
                elif om <= o:
                    return False

        n = self.n
        forbidden = self.forbidden
        trail = self.trail
        assigned_item[a] = o
        assigned_agent[o] = a
        self.unassigned -= 1
        trail.append((0, a, o))

        support = self.support
        item_support = self.item_support
        avail_item = self.avail_item
        avail_agent = self.avail_agent
        base_a = a * n
        for o2 in support[a]:
            if o2 == o or assigned_agent[o2] >= 0 or forbidden[base_a + o2]:
                continue
            avail_item[o2] -= 1
            trail.append((2, o2, 0))
            left = avail_item[o2]
            if left == 0:
                return False
            if left == 1:
                for cand in item_support[o2]:
                    if assigned_item[cand] < 0 and not forbidden[cand * n + o2]:
                        queue.append((cand, o2))
                        break
        for a2 in item_support[o]:
            if a2 == a or assigned_item[a2] >= 0 or forbidden[a2 * n + o]:
                continue
            avail_agent[a2] -= 1
            trail.append((1, a2, 0))
            left = avail_agent[a2]
            if left == 0:
                return False
            if left == 1:
                for cand in support[a2]:
                    if assigned_agent[cand] < 0 and not forbidden[a2 * n + cand]:
                        queue.append((a2, cand))
                        break

        # Kill every cell that can no longer appear beside (a, o).  A dead
        # cell that is already matched means the block is live now.
        for w, o2 in self.forbid_cells[(a, o)]:
            if assigned_agent[o2] == w:
                return False
            if assigned_item[w] >= 0 or assigned_agent[o2] >= 0:
                continue
            idx = w * n + o2
            if forbidden[idx]:
                continue
            forbidden[idx] = 1
            trail.append((3, w, o2))
            left = avail_agent[w] - 1
            avail_agent[w] = left
            if left == 0:
                return False
            if left == 1:
                for cand in support[w]:
                    if assigned_agent[cand] < 0 and not forbidden[w * n + cand]:
                        queue.append((w, cand))
                        break
            left = avail_item[o2] - 1
            avail_item[o2] = left
            if left == 0:
                return False
            if left == 1:
                for cand in item_support[o2]:
                    if assigned_item[cand] < 0 and not forbidden[cand * n + o2]:
                        queue.append((cand, o2))
                        break
        return True

    def _undo(self, mark):
        trail = self.trail
        while len(trail) > mark:
            kind, x, y = trail.pop()
            if kind == 0:
                self.assigned_item[x] = -1
                self.assigned_agent[y] = -1
                self.unassigned += 1
            elif kind == 1:
                self.avail_agent[x] += 1
            elif kind == 2:
                self.avail_item[x] += 1
            else:
                self.forbidden[x * self.n + y] = 0
                self.avail_agent[x] += 1
                self.avail_item[y] += 1

    # -- search --------------------------------------------------------

    def run(self, emit):
        """Depth-first search; emit() is called once per matching found."""
        if not self.root_ok:
            return
        self._search(emit)

    def _search(self, emit):
        if self.unassigned == 0:
            emit()
            return
        # Branch on the unassigned agent with the fewest live options.
        # Propagation has already consumed every domain of size one, so
        # anything at two is minimal and the scan can stop there.
        order = self.order
        avail = self.avail_agent
        assigned_item = self.assigned_item
        a = -1
        best = None
        for cand in order:
            if assigned_item[cand] >= 0:
                continue
            av = avail[cand]
            if av == 2:
                a = cand
                break
            if best is None or av < best:
                a, best = cand, av
        assigned_agent = self.assigned_agent
        forbidden = self.forbidden
        base = a * self.n
        for o in self.support[a]:
            if assigned_agent[o] >= 0 or forbidden[base + o]:
                continue
            mark = len(self.trail)
            if self._propagate(deque([(a, o)])):
                self._search(emit)
            self._undo(mark)

    def current_pairs(self):
        return [(a, self.assigned_item[a]) for a in range(self.n)]


def _clone_classes(inst, p):
    """Groups of agents interchangeable for both stability and mass.

    Two agents qualify when they have the same preference order, sit in
    the same tier of every item's priority, and own identical matrix
    rows.  Swapping such agents inside a matching preserves weak
    stability and support, so one canonical representative per orbit is
    enough for the decomposition LP.
    """
    rows = {a: [] for a in inst.agents}
    for (a, o), q in sorted(p.entries.items()):
        rows[a].append((o, q))
    sig = {}
    for a in inst.agents:
        key = (
            inst.preferences[a],
            tuple(inst.prio_rank[o][a] for o in inst.items),
            tuple(rows[a]),
        )
        sig.setdefault(key, []).append(a)
    return [members for members in sig.values() if len(members) >= 2]


@dataclass
class ExpostResult:
    max_stable_probability: object
    decomposition: Decomposition
    is_expost_stable: bool
    considered: int


def enumerate_stable_support_matchings(inst, p, cap=100_000):
    """All weakly stable perfect matchings inside the support of p.

    Incomplete instances are completed first.  Results are sorted and
    re-verified with the standalone stability check; the cap bounds how
    many matchings may be collected before giving up.
    """
    inst, p = complete_instance(inst, p)
    search = _StableSupportSearch(inst, p)
    agent_names = search.agent_names
    item_names = search.item_names
    found = []

    def emit():
        if len(found) >= cap:
            raise CapExceededError(
                f"more than {cap} stable matchings in the support", cap
            )
        found.append(
            DeterministicMatching(
                (agent_names[a], item_names[o]) for a, o in search.current_pairs()
            )
        )

    search.run(emit)
    for m in found:
        assert is_weakly_stable(inst, m).stable, "enumerated matching failed recheck"
    found.sort(key=lambda m: m.pairs)
    return found


def find_consistent_stable(inst, p, cap=100_000):
    """One weakly stable matching inside the support of p, or None.

    The canonical-representative restriction is safe here: an orbit of
    interchangeable agents contains a stable matching exactly when its
    canonical member is one.
    """
    inst, p = complete_instance(inst, p)
    search = _StableSupportSearch(inst, p, classes=_clone_classes(inst, p))
    agent_names = search.agent_names
    item_names = search.item_names

    def emit():
        raise _Hit

    try:
        search.run(emit)
    except _Hit:
        m = DeterministicMatching(
            (agent_names[a], item_names[o]) for a, o in search.current_pairs()
        )
        assert is_weakly_stable(inst, m).stable, "search hit failed recheck"
        return m
    return None


def _greedy_peel(columns, rhs):
    """Cheap first pass at a full decomposition before any LP runs.

    Repeatedly takes the lowest-numbered column, scanning onward from
    the last pick, that still fits inside the positive part of the
    residual, and peels off its bottleneck weight.  Every peel zeroes at
    least one row, so the loop ends within len(rhs) rounds.  Returns
    (total, weights); a total of one is a complete exact decomposition,
    anything less gets discarded by the caller in favour of the LP.
    """
    m = len(rhs)
    ncols = len(columns)
    if ncols == 0 or m == 0:
        return ZERO, {}
    flat = columns.flat
    starts = columns.starts
    dead = np.zeros(m, dtype=np.int8)
    chunk = 8192

    residual = [RAT(v) for v in rhs]

    def bottleneck(g):
        theta = None
        for r in columns[g].tolist():
            q = residual[r]
            if theta is None or q < theta:
                theta = q
        return theta

    def best_fit(lo, hi):
        # First chunk holding any fitting column wins; within it, prefer
        # the fattest peel so the residual shrinks in few large steps.
        for base in range(lo, hi, chunk):
            top = min(base + chunk, hi)
            seg_lo = int(starts[base])
            sums = np.add.reduceat(
                dead[flat[seg_lo : int(starts[top])]], starts[base:top] - seg_lo
            )
            hits = np.nonzero(sums == 0)[0]
            if hits.size:
                best = None
                best_theta = None
                for k in hits[:64].tolist():
                    g = base + k
                    theta = bottleneck(g)
                    if best_theta is None or theta > best_theta:
                        best, best_theta = g, theta
                return best, best_theta
        return None, None

    weights = {}
    total = ZERO
    pos = 0
    while total != ONE:
        g, theta = best_fit(pos, ncols)
        if g is None and pos:
            g, theta = best_fit(0, pos)
        if g is None:
            break
        for r in columns[g].tolist():
            left = residual[r] - theta
            residual[r] = left
            if left == 0:
                dead[r] = 1
        weights[g] = weights.get(g, ZERO) + theta
        total += theta
        pos = g + 1 if g + 1 < ncols else 0
    return total, weights


def max_stable_decomposition(inst, p, cap=100_000) -> ExpostResult:
    """Maximize the probability mass on weakly stable matchings.

    Returns the exact maximum, a full decomposition of p achieving it
    (stable terms first, then a Birkhoff factorization of the leftover
    mass), and the verdict max == 1.  Incomplete instances are
    completed first, so the decomposition refers to the completed
    market.  The cap bounds the number of enumerated representatives.
    """
    inst, p = complete_instance(inst, p)
    n = inst.n
    classes = _clone_classes(inst, p)
    search = _StableSupportSearch(inst, p, classes=classes)

    aidx = {a: k for k, a in enumerate(search.agent_names)}
    class_size = {}
    for cid, members in enumerate(search.class_members):
        class_size[cid] = len(members)

    oidx = {o: k for k, o in enumerate(search.item_names)}
    pval = {(aidx[a], oidx[o]): q for (a, o), q in p.entries.items()}

    root_set = set(search.root_pairs)
    free_agents = [a for a in range(n) if (a, search.assigned_item[a]) not in root_set]

    row_of_key = {}
    row_rhs = []
    row_keys = []

    def row_id(key, rhs):
        r = row_of_key.get(key)
        if r is None:
            r = len(row_keys)
            row_of_key[key] = r
            row_keys.append(key)
            row_rhs.append(rhs)
        return r

    col_pool = array("i")
    emitted = [0]

    class_of = search.class_of
    assigned_item = search.assigned_item

    def emit():
        if emitted[0] >= cap:
            raise CapExceededError(
                f"more than {cap} stable matchings in the support", cap
            )
        emitted[0] += 1
        append = col_pool.append
        for a in free_agents:
            o = assigned_item[a]
            cid = class_of[a]
            if cid >= 0:
                key = ("c", cid, o)
                rhs = class_size[cid] * pval[(search.class_members[cid][0], o)]
            else:
                key = ("p", a, o)
                rhs = pval[(a, o)]
            append(row_id(key, rhs))

    search.run(emit)
    considered = emitted[0]
    if considered and free_agents:
        kmat = np.frombuffer(col_pool, dtype=np.int32).reshape(considered, -1)
    else:
        kmat = np.zeros((considered, len(free_agents)), dtype=np.int32)

    # Partition refinement over the collected pool: rows sharing one
    # membership pattern across all columns collapse to a single LP
    # constraint with the tightest right-hand side, and the root-forced
    # pairs collapse to one row shared by every column.  Every column
    # has one cell per free agent, so the pool is a dense id matrix and
    # the grouping is a bytes-level comparison of incidence rows.
    nrows = len(row_keys)
    if nrows:
        incidence = np.zeros((nrows, considered), dtype=bool)
        colix = np.repeat(np.arange(considered, dtype=np.int64), kmat.shape[1])
        incidence[kmat.ravel(), colix] = True
        block_of_pattern = {}
        block_of = np.empty(nrows, dtype=np.int32)
        lp_rhs = []
        for r, pattern in enumerate(np.packbits(incidence, axis=1)):
            key = pattern.tobytes()
            b = block_of_pattern.get(key)
            if b is None:
                b = len(lp_rhs)
                block_of_pattern[key] = b
                lp_rhs.append(row_rhs[r])
            elif row_rhs[r] < lp_rhs[b]:
                lp_rhs[b] = row_rhs[r]
            block_of[r] = b
        del incidence
    else:
        block_of = np.asarray([], dtype=np.int32)
        lp_rhs = []
    root_row = None
    if search.root_pairs and considered:
        root_row = len(lp_rhs)
        lp_rhs.append(min(pval[pr] for pr in search.root_pairs))

    # Columns in flat/starts form: per-column sorted unique block ids,
    # then the shared root row appended to each.
    if nrows:
        bmat = np.sort(block_of[kmat], axis=1)
        keep = np.ones(bmat.shape, dtype=bool)
        keep[:, 1:] = bmat[:, 1:] != bmat[:, :-1]
        counts = keep.sum(axis=1, dtype=np.int64)
        extra = 0 if root_row is None else 1
        starts = np.zeros(considered + 1, dtype=np.int64)
        np.cumsum(counts + extra, out=starts[1:])
        flat = np.empty(int(starts[-1]), dtype=np.int32)
        rank = np.arange(int(counts.sum()), dtype=np.int64)
        rank -= np.repeat(np.cumsum(counts) - counts, counts)
        flat[np.repeat(starts[:-1], counts) + rank] = bmat[keep]
        if root_row is not None:
            flat[starts[1:] - 1] = root_row
        columns = CsrColumns(flat, starts)
    elif considered and root_row is not None:
        # Every agent was forced at the root, so each column is just the
        # shared root row.
        starts = np.arange(considered + 1, dtype=np.int64)
        columns = CsrColumns(np.full(considered, root_row, dtype=np.int32), starts)
    else:
        starts = np.zeros(considered + 1, dtype=np.int64)
        columns = CsrColumns(np.asarray([], dtype=np.int32), starts)

    # A greedy peel is dramatically cheaper than the simplex and often
    # already proves the answer on structured inputs.  Any shortfall is
    # settled by the LP; one is a sound cap on its value because every
    # agent covers its own unit row mass, so the solve may stop there.
    value, lp_weights = _greedy_peel(columns, lp_rhs)
    if value != ONE:
        lp = solve_packing_lp(columns, lp_rhs, stop_at=ONE)
        value, lp_weights = lp.value, lp.weights

    agent_names = search.agent_names
    item_names = search.item_names

    def rep_assignments(g):
        """Pairs of the g-th representative, grouped for lifting."""
        plain = list(search.root_pairs)
        per_class = {}
        for r in kmat[g].tolist():
            key = row_keys[r]
            if key[0] == "p":
                plain.append((key[1], key[2]))
            else:
                per_class.setdefault(key[1], []).append(key[2])
        for items in per_class.values():
            items.sort()
        return plain, per_class

    terms = []
    used = {}
    for g in sorted(lp_weights):
        lam = lp_weights[g]
        plain, per_class = rep_assignments(g)
        if not per_class:
            shifts = 1
        else:
            shifts = math.lcm(*(len(v) for v in per_class.values()))
        for t in range(shifts):
            pairs = list(plain)
            for cid, its in per_class.items():
                members = search.class_members[cid]
                k = len(its)
                for pos, m in enumerate(members):
                    pairs.append((m, its[(pos + t) % k]))
            matching = DeterministicMatching(
                (agent_names[a], item_names[o]) for a, o in pairs
            )
            w = lam / shifts
            if matching in used:
                terms[used[matching]].weight += w
            else:
                used[matching] = len(terms)
                terms.append(DecompositionTerm(w, matching, weakly_stable=True))

    if value != ONE:
        residual = dict(p.entries)
        for t in terms:
            for a, o in t.matching:
                left = residual[(a, o)] - t.weight
                if left == 0:
                    del residual[(a, o)]
                else:
                    residual[(a, o)] = left
        rest = ONE - value
        scaled = {pair: q / rest for pair, q in residual.items()}
        leftover = birkhoff_decompose(RandomMatching(n, scaled), inst)
        for t in leftover.terms:
            terms.append(
                DecompositionTerm(t.weight * rest, t.matching, weakly_stable=t.weakly_stable)
            )

    return ExpostResult(
        max_stable_probability=value,
        decomposition=Decomposition(terms),
        is_expost_stable=value == ONE,
        considered=considered,
    )
