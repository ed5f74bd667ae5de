"""Exact LP solving over 0/1 columns, tuned for huge column pools.

Two problems show up when decomposing random matchings:

* packing:   maximize sum(lam)  subject to  A lam <= b, lam >= 0
* equality:  find any lam >= 0 with  A lam = b  (phase-one simplex)

Columns are sparse 0/1 vectors (sets of row indices).  There can be
tens of thousands of them, so the solver works on a growing active
subset: solve to optimality on the active columns, price the full pool
exactly, pull in a batch of violating columns, repeat.  A final clean
pricing pass certifies global optimality.

Everything is exact.  The simplex core keeps an explicit basis inverse
in rational arithmetic.  Entering picks the most violated column, with
a fallback to Bland's rule whenever a degenerate plateau drags on, so
the solve stays finite without paying Bland's crawl everywhere.
Pricing scans are vectorized: the dual vector is scaled to a common
denominator and summed per column with numpy int64 when it fits,
otherwise a float screen narrows the pool and the few candidates are
re-checked rationally (the screen's error is orders of magnitude below
the acceptance margin, so no violating column can slip through).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rationals import ONE, RAT, ZERO


class CsrColumns:
    """Immutable column pool in flat/starts form.

    Behaves like a sequence of integer-array columns, so the solvers can
    take either a plain list of row-id tuples or one of these without
    flattening twice.  starts has one extra trailing entry at len(flat).
    """

    def __init__(self, flat, starts):
        self.flat = np.asarray(flat)
        self.starts = np.asarray(starts, dtype=np.int64)
        assert self.starts[-1] == len(self.flat)

    def __len__(self):
        return len(self.starts) - 1

    def __getitem__(self, g):
        return self.flat[self.starts[g] : self.starts[g + 1]]


class _ColumnSet:
    """A subset of columns prepared for vectorized exact pricing."""

    def __init__(self, columns, ids=None):
        self.columns = columns
        if ids is None and isinstance(columns, CsrColumns):
            self.ids = list(range(len(columns)))
            self.flat = columns.flat
            self.starts = columns.starts[:-1]
            lengths = np.diff(columns.starts)
            self.maxlen = int(lengths.max()) if len(lengths) else 0
            return
        self.ids = sorted(range(len(columns))) if ids is None else sorted(ids)
        flat = []
        starts = []
        maxlen = 0
        for g in self.ids:
            col = columns[g]
            assert len(col) > 0, "columns must be nonempty"
            starts.append(len(flat))
            flat.extend(col)
            if len(col) > maxlen:
                maxlen = len(col)
        self.flat = np.asarray(flat, dtype=np.int64)
        self.starts = np.asarray(starts, dtype=np.int64)
        self.maxlen = maxlen

    def violating(self, y, cost):
        """Global ids of columns with cost - y.col > 0, decided exactly."""
        if not self.ids:
            return []
        dens = [int(q.denominator) for q in y]
        scale = math.lcm(*dens) if dens else 1
        nums = [int(q * scale) for q in y]
        maxabs = max((abs(v) for v in nums), default=0)
        cd = int(RAT(cost) * scale)
        bits = maxabs.bit_length() + (self.maxlen + 1).bit_length()
        if bits <= 62 and abs(cd).bit_length() <= 62:
            arr = np.fromiter(nums, dtype=np.int64, count=len(nums))
            sums = np.add.reduceat(arr[self.flat], self.starts)
            hits = np.nonzero(sums < cd)[0]
            return [self.ids[k] for k in hits.tolist()]
        # The duals grew past int64: screen with normalized floats, then
        # confirm candidates rationally.  Column sums of <=maxlen values
        # in [-1, 1] carry float error well under 1e-10, so the 1e-9
        # margin cannot miss a true violation.
        ymax = max((abs(q) for q in y), default=ZERO)
        if ymax == 0:
            return list(self.ids) if cost > 0 else []
        yf = np.array([float(q / ymax) for q in y], dtype=np.float64)
        sums = np.add.reduceat(yf[self.flat], self.starts)
        try:
            chat = float(RAT(cost) / ymax)
        except OverflowError:  # pragma: no cover - forces full rational scan
            chat = float("inf")
        cand = np.nonzero(sums < chat + 1e-9)[0]
        out = []
        for k in cand.tolist():
            g = self.ids[k]
            total = ZERO
            for r in self.columns[g]:
                total += y[r]
            if total < cost:
                out.append(g)
        return out

    def violating_batch(self, y, cost, k, skip):
        """Up to k violating global ids, most violated first.

        Returns an empty list exactly when no column outside skip has
        cost - y.col > 0, so emptiness certifies optimality just like a
        full violating() scan would.  skip never hides violations: it
        only ever holds columns whose reduced cost is nonpositive at
        this dual (the already-active ones).
        """
        if not self.ids:
            return []
        dens = [int(q.denominator) for q in y]
        scale = math.lcm(*dens) if dens else 1
        nums = [int(q * scale) for q in y]
        maxabs = max((abs(v) for v in nums), default=0)
        cd = int(RAT(cost) * scale)
        bits = maxabs.bit_length() + (self.maxlen + 1).bit_length()
        if bits <= 62 and abs(cd).bit_length() <= 62:
            arr = np.fromiter(nums, dtype=np.int64, count=len(nums))
            sums = np.add.reduceat(arr[self.flat], self.starts)
            hits = np.nonzero(sums < cd)[0]
            if hits.size > k + len(skip):
                part = np.argpartition(sums[hits], k + len(skip) - 1)
                hits = hits[part[: k + len(skip)]]
                hits = hits[np.argsort(sums[hits], kind="stable")]
            else:
                hits = hits[np.argsort(sums[hits], kind="stable")]
            out = []
            for j in hits.tolist():
                g = self.ids[j]
                if g not in skip:
                    out.append(g)
                    if len(out) == k:
                        break
            return out
        ymax = max((abs(q) for q in y), default=ZERO)
        if ymax == 0:
            out = []
            if cost > 0:
                for g in self.ids:
                    if g not in skip:
                        out.append(g)
                        if len(out) == k:
                            break
            return out
        yf = np.array([float(q / ymax) for q in y], dtype=np.float64)
        sums = np.add.reduceat(yf[self.flat], self.starts)
        try:
            chat = float(RAT(cost) / ymax)
        except OverflowError:  # pragma: no cover - forces full rational scan
            chat = float("inf")
        out = []
        for j in np.argsort(sums, kind="stable").tolist():
            if sums[j] >= chat + 1e-9:
                break
            g = self.ids[j]
            if g in skip:
                continue
            total = ZERO
            for r in self.columns[g]:
                total += y[r]
            if total < cost:
                out.append(g)
                if len(out) == k:
                    break
        return out

    def most_violating(self, y, cost, skip):
        """One violating global id, greatest violation first, or None.

        skip holds ids that must not be proposed (the basic columns;
        their reduced costs are exactly zero anyway, so skipping them
        never hides a violation).  Uses the same int64/float screens as
        violating(), so a None is just as trustworthy.
        """
        if not self.ids:
            return None
        dens = [int(q.denominator) for q in y]
        scale = math.lcm(*dens) if dens else 1
        nums = [int(q * scale) for q in y]
        maxabs = max((abs(v) for v in nums), default=0)
        cd = int(RAT(cost) * scale)
        bits = maxabs.bit_length() + (self.maxlen + 1).bit_length()
        if bits <= 62 and abs(cd).bit_length() <= 62:
            arr = np.fromiter(nums, dtype=np.int64, count=len(nums))
            sums = np.add.reduceat(arr[self.flat], self.starts)
            while True:
                k = int(np.argmin(sums))
                if sums[k] >= cd:
                    return None
                g = self.ids[k]
                if g not in skip:
                    return g
                sums[k] = cd
        ymax = max((abs(q) for q in y), default=ZERO)
        if ymax == 0:
            if cost > 0:
                for g in self.ids:
                    if g not in skip:
                        return g
            return None
        yf = np.array([float(q / ymax) for q in y], dtype=np.float64)
        sums = np.add.reduceat(yf[self.flat], self.starts)
        try:
            chat = float(RAT(cost) / ymax)
        except OverflowError:  # pragma: no cover - forces full rational scan
            chat = float("inf")
        for k in np.argsort(sums, kind="stable").tolist():
            if sums[k] >= chat + 1e-9:
                return None
            g = self.ids[k]
            if g in skip:
                continue
            total = ZERO
            for r in self.columns[g]:
                total += y[r]
            if total < cost:
                return g
        return None


class _SiftingSimplex:
    """Revised simplex (explicit inverse, Bland) over an active column set.

    Variable ids: 0..m-1 are the base variables (slacks for packing,
    artificials for equality), m+g is the structural column with global
    id g.  The basis starts at the base variables, which is feasible
    because b >= 0.
    """

    def __init__(self, columns, b, struct_cost, base_cost, batch=400, stop_at=None):
        self.columns = columns
        self.m = len(b)
        self.b = [RAT(v) for v in b]
        for v in self.b:
            assert v >= 0, "right-hand side must be nonnegative"
        self.struct_cost = RAT(struct_cost)
        self.base_cost = RAT(base_cost)
        self.batch = batch
        self.stop_at = None if stop_at is None else RAT(stop_at)
        self.pool = _ColumnSet(columns)
        self.active_ids = []
        self.active_gids = set()
        self.active = _ColumnSet(columns, [])
        m = self.m
        self.Binv = [[ONE if i == j else ZERO for j in range(m)] for i in range(m)]
        self.xB = list(self.b)
        self.basis = list(range(m))
        self.in_basis = set(self.basis)

    def _dual(self):
        m = self.m
        y = [ZERO] * m
        for i, vid in enumerate(self.basis):
            c = self.base_cost if vid < m else self.struct_cost
            if c == 0:
                continue
            row = self.Binv[i]
            for r in range(m):
                if row[r] != 0:
                    y[r] += c * row[r]
        return y

    def _direction(self, vid):
        m = self.m
        if vid < m:
            return [self.Binv[r][vid] for r in range(m)]
        rows = self.columns[vid - m]
        if hasattr(rows, "tolist"):
            rows = rows.tolist()
        d = []
        for r in range(m):
            br = self.Binv[r]
            total = ZERO
            for c in rows:
                total += br[c]
            d.append(total)
        return d

    def _entering(self, y, bland):
        # Base variables first, smallest id; they are few and cheap.
        for i in range(self.m):
            if i not in self.in_basis and self.base_cost - y[i] > 0:
                return i
        if bland:
            # Bland: smallest id with positive reduced cost.
            for g in self.active.violating(y, self.struct_cost):
                vid = self.m + g
                if vid not in self.in_basis:
                    return vid
            return None
        skip = {vid - self.m for vid in self.in_basis if vid >= self.m}
        g = self.active.most_violating(y, self.struct_cost, skip)
        return None if g is None else self.m + g

    def _pivot(self, vid):
        d = self._direction(vid)
        best_t = None
        rhat = None
        leave_id = None
        for r in range(self.m):
            if d[r] > 0:
                t = self.xB[r] / d[r]
                if best_t is None or t < best_t or (t == best_t and self.basis[r] < leave_id):
                    best_t, rhat, leave_id = t, r, self.basis[r]
        if rhat is None:
            raise ArithmeticError("LP is unbounded, which valid inputs cannot produce")
        piv = d[rhat]
        self.Binv[rhat] = [v / piv for v in self.Binv[rhat]]
        brow = self.Binv[rhat]
        self.xB[rhat] = best_t
        for r in range(self.m):
            if r == rhat:
                continue
            f = d[r]
            if f == 0:
                continue
            br = self.Binv[r]
            for c in range(self.m):
                if brow[c] != 0:
                    br[c] -= f * brow[c]
            self.xB[r] -= f * best_t
        self.in_basis.discard(self.basis[rhat])
        self.basis[rhat] = vid
        self.in_basis.add(vid)
        return best_t == 0

    def _objective(self):
        value = ZERO
        for i, vid in enumerate(self.basis):
            c = self.base_cost if vid < self.m else self.struct_cost
            if c != 0:
                value += c * self.xB[i]
        return value

    def _solve_active(self):
        """Optimize over the active set; None means stop_at was reached.

        Entering is greedy (most violated column) while the objective
        moves; after a long run of degenerate pivots it falls back to
        Bland until the plateau is escaped, which keeps the whole solve
        finite: a Bland stretch cannot cycle, and every exit from it
        strictly improves the objective.
        """
        stop_at = self.stop_at
        streak = 0
        while True:
            if stop_at is not None and self._objective() >= stop_at:
                return None
            y = self._dual()
            vid = self._entering(y, bland=streak >= 64)
            if vid is None:
                return y
            if self._pivot(vid):
                streak += 1
            else:
                streak = 0

    def solve(self):
        """Returns (value, structural weights by global id, dual).

        When stop_at is given it must be a sound upper bound on the
        objective; hitting it proves optimality, so the solve can end
        without a certifying pricing pass (dual comes back None then).
        """
        while True:
            y = self._solve_active()
            if y is None:
                fresh = None
            else:
                fresh = self.pool.violating_batch(
                    y, self.struct_cost, self.batch, self.active_gids
                )
            if not fresh:
                value = ZERO
                weights = {}
                for i, vid in enumerate(self.basis):
                    c = self.base_cost if vid < self.m else self.struct_cost
                    value += c * self.xB[i]
                    if vid >= self.m and self.xB[i] != 0:
                        weights[vid - self.m] = self.xB[i]
                return value, weights, y
            # Purge: at this point no active column prices favourably,
            # so only the basic ones are worth keeping around.  Anything
            # dropped stays in the pool and can come back later.
            keep = {vid - self.m for vid in self.in_basis if vid >= self.m}
            keep.update(fresh)
            self.active_ids = sorted(keep)
            self.active_gids = set(keep)
            self.active = _ColumnSet(self.columns, self.active_ids)


@dataclass
class LPResult:
    value: object
    weights: dict
    dual: list


def solve_packing_lp(columns, b, batch=400, stop_at=None) -> LPResult:
    """maximize sum(lam) subject to A lam <= b, lam >= 0, exactly.

    stop_at, when given, must be an externally justified upper bound on
    the optimum; the solve halts as soon as the objective reaches it.
    The dual is None on that early exit.
    """
    sx = _SiftingSimplex(
        columns, b, struct_cost=1, base_cost=0, batch=batch, stop_at=stop_at
    )
    value, weights, dual = sx.solve()
    return LPResult(value, weights, dual)


def solve_equality_lp(columns, b, batch=400):
    """Some lam >= 0 with A lam = b, or None if infeasible.

    Phase-one simplex: artificials cost -1, so the optimum is 0 exactly
    when the system is feasible.  A negative optimum comes with a dual
    vector y satisfying y.A_j >= 0 for every column and y.b < 0, which
    is a Farkas certificate of infeasibility; the clean pricing pass
    that ended the solve already verified the first half column by
    column.
    """
    sx = _SiftingSimplex(columns, b, struct_cost=0, base_cost=-1, batch=batch)
    value, weights, _ = sx.solve()
    if value < 0:
        return None
    return weights
