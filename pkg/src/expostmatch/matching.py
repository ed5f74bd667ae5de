"""Deterministic matchings: stability checks, tie-breaking, deferred acceptance.

A pair (i, o) outside a matching blocks it when both sides would rather
be together than stay put.  With weak orders there are two readings:

* weak stability tolerates ties: a block needs BOTH sides to strictly
  improve ("strict" block);
* strong stability tolerates nothing: a block needs both sides to
  weakly improve with at least one strict ("tie" block when one side is
  merely indifferent).

Unmatched sides count as strict improvement, which makes the same
definitions work for partial matchings on incomplete instances.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .core import Instance, WeakOrder
from .errors import InputError


class DeterministicMatching:
    """An assignment of agents to distinct items, not necessarily total."""

    __slots__ = ("pairs", "_by_agent", "_by_item")

    def __init__(self, assignment):
        pairs = assignment.items() if isinstance(assignment, dict) else assignment
        self.pairs = tuple(sorted(pairs))
        by_agent = {}
        by_item = {}
        for a, o in self.pairs:
            if a in by_agent:
                raise InputError(f"agent {a!r} is matched twice")
            if o in by_item:
                raise InputError(f"item {o!r} is matched twice")
            by_agent[a] = o
            by_item[o] = a
        self._by_agent = by_agent
        self._by_item = by_item

    def item_of(self, agent):
        return self._by_agent.get(agent)

    def agent_of(self, item):
        return self._by_item.get(item)

    def as_dict(self):
        return dict(self._by_agent)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __eq__(self, other):
        if not isinstance(other, DeterministicMatching):
            return NotImplemented
        return self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        inner = ", ".join(f"{a}->{o}" for a, o in self.pairs)
        return f"DeterministicMatching({inner})"


@dataclass
class BlockingPair:
    agent: str
    item: str
    kind: str  # "strict": both sides strictly improve; "tie": one side ties


@dataclass
class StabilityReport:
    stable: bool
    blocking_pairs: list

    def __bool__(self):
        return self.stable


def _check_matching_fits(inst, matching):
    for a, o in matching:
        if a not in inst.pref_rank or o not in inst.prio_rank:
            raise InputError(f"matched pair ({a!r}, {o!r}) is outside the instance")
        if not inst.mutually_acceptable(a, o):
            raise InputError(f"matched pair ({a!r}, {o!r}) is not mutually acceptable")


def _collect_blocks(inst, matching, strong):
    blocks = []
    for i in inst.agents:
        pr = inst.pref_rank[i]
        mi = matching.item_of(i)
        mi_rank = pr[mi] if mi is not None else None
        for o in inst.items:
            if o == mi:
                continue
            if o not in pr:
                continue
            qr = inst.prio_rank[o]
            if i not in qr:
                continue
            # agent side
            if mi_rank is None:
                agent_gain = "strict"
            elif pr[o] < mi_rank:
                agent_gain = "strict"
            elif pr[o] == mi_rank:
                agent_gain = "tie"
            else:
                continue
            # item side
            mo = matching.agent_of(o)
            if mo is None:
                item_gain = "strict"
            else:
                ro = qr[mo]
                if qr[i] < ro:
                    item_gain = "strict"
                elif qr[i] == ro:
                    item_gain = "tie"
                else:
                    continue
            if agent_gain == "strict" and item_gain == "strict":
                blocks.append(BlockingPair(i, o, "strict"))
            elif strong and (agent_gain == "strict" or item_gain == "strict"):
                blocks.append(BlockingPair(i, o, "tie"))
    blocks.sort(key=lambda b: (b.agent, b.item))
    return blocks


def is_weakly_stable(inst, matching) -> StabilityReport:
    """No pair where both sides strictly improve."""
    _check_matching_fits(inst, matching)
    blocks = _collect_blocks(inst, matching, strong=False)
    return StabilityReport(not blocks, blocks)


def is_strongly_stable(inst, matching) -> StabilityReport:
    """No pair where both sides weakly improve, one strictly."""
    _check_matching_fits(inst, matching)
    blocks = _collect_blocks(inst, matching, strong=True)
    return StabilityReport(not blocks, blocks)


def break_ties(inst, seed=0) -> Instance:
    """Strict version of an instance: shuffle inside every tier.

    One seeded generator drives all shuffles, agents first then items,
    each side in instance order, so results are reproducible.
    """
    rng = random.Random(seed)

    def strictify(order):
        flat = []
        for tier in order.tiers:
            tier = list(tier)
            rng.shuffle(tier)
            flat.extend(tier)
        return WeakOrder([(nm,) for nm in flat])

    prefs = {a: strictify(inst.preferences[a]) for a in inst.agents if a in inst.preferences}
    prios = {o: strictify(inst.priorities[o]) for o in inst.items if o in inst.priorities}
    return Instance(inst.agents, inst.items, prefs, prios, inst.complete)


def deferred_acceptance(inst, seed=0) -> DeterministicMatching:
    """Agent-proposing deferred acceptance after seeded tie-breaking.

    On complete instances the result is a perfect matching that is
    weakly stable for the original weak orders.  Incomplete instances
    are handled too: proposals only go to mutually acceptable items and
    agents who run out of options stay unmatched.
    """
    strict = break_ties(inst, seed)
    plist = {}
    for a in strict.agents:
        order = strict.preferences.get(a)
        ranked = list(order) if order is not None else []
        plist[a] = [o for o in ranked if a in strict.prio_rank.get(o, {})]

    nxt = {a: 0 for a in strict.agents}
    holder = {}
    free = deque(strict.agents)
    while free:
        a = free.popleft()
        if nxt[a] >= len(plist[a]):
            continue
        o = plist[a][nxt[a]]
        nxt[a] += 1
        inc = holder.get(o)
        if inc is None:
            holder[o] = a
        elif strict.prio_rank[o][a] < strict.prio_rank[o][inc]:
            holder[o] = a
            free.append(inc)
        else:
            free.append(a)
    return DeterministicMatching({a: o for o, a in holder.items()})
