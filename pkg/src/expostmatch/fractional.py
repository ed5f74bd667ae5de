"""Fractional stability of random matchings, weak and strong.

For a pair (i, o), write W_i(o) for the mass agent i places on items
weakly better than o, S_i(o) for strictly better, and analogously
W_o(i), S_o(i) on the item side over agents.  The checks are:

* weak:   W_i(o) + W_o(i) - p(i, o) >= 1 for every pair;
* strong: W_i(o) + S_o(i) >= 1  (agent-side ties count)
     and  S_i(o) + W_o(i) >= 1  (item-side ties count), for every pair.

"Weakly better" includes the pair's own tier, so W always contains
p(i, o) itself.  A violation records the failing condition and its
left-hand side.  Both checks require a complete instance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .randmatch import validate_random_matching
from .rationals import ONE, ZERO


@dataclass
class FractionalViolation:
    agent: str
    item: str
    condition: str  # "weak", "agent-ties" or "item-ties"
    lhs: object


@dataclass
class FractionalReport:
    stable: bool
    violations: list

    def __bool__(self):
        return self.stable


def _tier_prefixes(order, mass):
    """(weak_prefix, strict_prefix) per tier of the order.

    mass maps a name to its probability; weak_prefix[t] is the total
    mass on tiers 0..t, strict_prefix[t] on tiers 0..t-1.
    """
    weak = []
    strict = []
    running = ZERO
    for tier in order.tiers:
        strict.append(running)
        for nm in tier:
            running += mass.get(nm, ZERO)
        weak.append(running)
    return weak, strict


def _prepare(inst, p):
    if not inst.complete:
        raise InputError("fractional stability needs a complete instance")
    validate_random_matching(p, inst)
    agent_weak = {}
    agent_strict = {}
    for i in inst.agents:
        mass = {o: q for (a, o), q in p.entries.items() if a == i}
        agent_weak[i], agent_strict[i] = _tier_prefixes(inst.preferences[i], mass)
    item_weak = {}
    item_strict = {}
    for o in inst.items:
        mass = {a: q for (a, it), q in p.entries.items() if it == o}
        item_weak[o], item_strict[o] = _tier_prefixes(inst.priorities[o], mass)
    return agent_weak, agent_strict, item_weak, item_strict


def is_fractionally_stable(inst, p) -> FractionalReport:
    aw, _, iw, _ = _prepare(inst, p)
    out = []
    for i in inst.agents:
        pr = inst.pref_rank[i]
        for o in inst.items:
            lhs = aw[i][pr[o]] + iw[o][inst.prio_rank[o][i]] - p.get(i, o)
            if lhs < ONE:
                out.append(FractionalViolation(i, o, "weak", lhs))
    out.sort(key=lambda v: (v.agent, v.item))
    return FractionalReport(not out, out)


def is_fractionally_strongly_stable(inst, p) -> FractionalReport:
    aw, as_, iw, is_ = _prepare(inst, p)
    out = []
    for i in inst.agents:
        pr = inst.pref_rank[i]
        for o in inst.items:
            t_o = pr[o]
            t_i = inst.prio_rank[o][i]
            lhs1 = aw[i][t_o] + is_[o][t_i]
            if lhs1 < ONE:
                out.append(FractionalViolation(i, o, "agent-ties", lhs1))
            lhs2 = as_[i][t_o] + iw[o][t_i]
            if lhs2 < ONE:
                out.append(FractionalViolation(i, o, "item-ties", lhs2))
    out.sort(key=lambda v: (v.agent, v.item, v.condition))
    return FractionalReport(not out, out)


def _naive_weak_lhs(inst, p, i, o):
    """Direct double loop, kept as an independent cross-check for tests."""
    pr = inst.pref_rank[i]
    qr = inst.prio_rank[o]
    total = ZERO
    for o2 in inst.items:
        if pr[o2] <= pr[o]:
            total += p.get(i, o2)
    for j in inst.agents:
        if qr[j] <= qr[i]:
            total += p.get(j, o)
    return total - p.get(i, o)


def _naive_strong_lhs(inst, p, i, o):
    pr = inst.pref_rank[i]
    qr = inst.prio_rank[o]
    strict_items = sum((p.get(i, o2) for o2 in inst.items if pr[o2] < pr[o]), ZERO)
    tied_items = sum((p.get(i, o2) for o2 in inst.items if pr[o2] == pr[o]), ZERO)
    strict_agents = sum((p.get(j, o) for j in inst.agents if qr[j] < qr[i]), ZERO)
    tied_agents = sum((p.get(j, o) for j in inst.agents if qr[j] == qr[i]), ZERO)
    lhs1 = strict_items + tied_items + strict_agents
    lhs2 = strict_items + strict_agents + tied_agents
    return lhs1, lhs2
