"""Instance model: agents, items, weak preference and priority orders.

A weak order is a list of indifference tiers, best tier first.  Agents
rank items (preferences), items rank agents (priorities).  An instance
is *complete* when every order covers the whole opposite side and both
sides have equal size; incomplete instances can be turned into complete
ones with complete_instance, which appends dummy agents and items in a
way that preserves the stability structure of the original market.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import InputError
from .rationals import ONE, ZERO


class WeakOrder:
    """A weak order over names, given as a sequence of indifference tiers.

    Names inside each tier are stored sorted, so two orders expressing
    the same ranking compare equal no matter how the input listed ties.
    Construction itself never raises; structural problems (duplicates,
    empty tiers, unknown names) are collected by validate_instance so a
    whole file's worth of issues can be reported in one pass.
    """

    __slots__ = ("tiers", "_rank")

    def __init__(self, tiers):
        norm = []
        for tier in tiers:
            if isinstance(tier, str):
                tier = (tier,)
            norm.append(tuple(sorted(tier)))
        self.tiers = tuple(norm)
        rank = {}
        for level, tier in enumerate(self.tiers):
            for name in tier:
                if name not in rank:
                    rank[name] = level
        self._rank = rank

    def rank(self, name):
        """Tier index of name; lower is better.  KeyError if unranked."""
        return self._rank[name]

    def __contains__(self, name):
        return name in self._rank

    def __iter__(self):
        for tier in self.tiers:
            yield from tier

    def __len__(self):
        return len(self._rank)

    @property
    def is_strict(self):
        return all(len(tier) == 1 for tier in self.tiers)

    def strictly_prefers(self, a, b):
        return self._rank[a] < self._rank[b]

    def weakly_prefers(self, a, b):
        return self._rank[a] <= self._rank[b]

    def indifferent(self, a, b):
        return self._rank[a] == self._rank[b]

    def __eq__(self, other):
        if not isinstance(other, WeakOrder):
            return NotImplemented
        return self.tiers == other.tiers

    def __hash__(self):
        return hash(self.tiers)

    def __repr__(self):
        return f"WeakOrder({[list(t) for t in self.tiers]})"


_EMPTY_ORDER = WeakOrder(())


@dataclass(frozen=True)
class Instance:
    """A two-sided market: agents with preferences, items with priorities.

    preferences maps each agent to a WeakOrder over items, priorities
    maps each item to a WeakOrder over agents.  complete declares the
    intent that all orders cover the whole opposite side; it is checked
    by validate_instance, not enforced on construction.
    """

    agents: tuple
    items: tuple
    preferences: dict
    priorities: dict
    complete: bool = True

    @classmethod
    def from_tiers(cls, agents, items, preferences, priorities, complete=True):
        prefs = {
            a: (w if isinstance(w, WeakOrder) else WeakOrder(w))
            for a, w in preferences.items()
        }
        prios = {
            o: (w if isinstance(w, WeakOrder) else WeakOrder(w))
            for o, w in priorities.items()
        }
        return cls(tuple(agents), tuple(items), prefs, prios, complete)

    @property
    def n(self):
        return len(self.agents)

    @cached_property
    def pref_rank(self):
        """agent -> {item -> tier index}; missing orders give empty maps."""
        return {
            a: self.preferences.get(a, _EMPTY_ORDER)._rank for a in self.agents
        }

    @cached_property
    def prio_rank(self):
        """item -> {agent -> tier index}; missing orders give empty maps."""
        return {
            o: self.priorities.get(o, _EMPTY_ORDER)._rank for o in self.items
        }

    def mutually_acceptable(self, agent, item):
        return item in self.pref_rank.get(agent, {}) and agent in self.prio_rank.get(item, {})


@dataclass
class Violation:
    code: str
    message: str


@dataclass
class ValidationReport:
    ok: bool
    violations: list

    def summary(self):
        if self.ok:
            return "instance is valid"
        return "; ".join(f"[{v.code}] {v.message}" for v in self.violations)


def validate_instance(inst) -> ValidationReport:
    """Collect every structural problem in an instance.

    Violation codes: duplicate-name, dangling-reference, empty-tier,
    duplicate-entry, size-mismatch, incomplete-preference,
    incomplete-priority.
    """
    out = []

    def bad(code, message):
        out.append(Violation(code, message))

    for kind, names in (("agent", inst.agents), ("item", inst.items)):
        seen = set()
        for nm in names:
            if nm in seen:
                bad("duplicate-name", f"{kind} name {nm!r} appears more than once")
            seen.add(nm)

    agentset = set(inst.agents)
    itemset = set(inst.items)

    for a in inst.preferences:
        if a not in agentset:
            bad("dangling-reference", f"preferences given for unknown agent {a!r}")
    for o in inst.priorities:
        if o not in itemset:
            bad("dangling-reference", f"priorities given for unknown item {o!r}")

    def check_order(owner_kind, owner, order, universe, ranked_kind):
        covered = set()
        for tier in order.tiers:
            if not tier:
                bad("empty-tier", f"{owner_kind} {owner!r} has an empty indifference tier")
            for nm in tier:
                if nm not in universe:
                    bad(
                        "dangling-reference",
                        f"{owner_kind} {owner!r} ranks unknown {ranked_kind} {nm!r}",
                    )
                if nm in covered:
                    bad("duplicate-entry", f"{owner_kind} {owner!r} ranks {nm!r} more than once")
                covered.add(nm)
        return covered

    for a in inst.agents:
        order = inst.preferences.get(a)
        covered = (
            check_order("agent", a, order, itemset, "item") if order is not None else set()
        )
        if inst.complete:
            missing = sorted(itemset - covered)
            if missing:
                bad(
                    "incomplete-preference",
                    f"agent {a!r} does not rank items {missing}",
                )

    for o in inst.items:
        order = inst.priorities.get(o)
        covered = (
            check_order("item", o, order, agentset, "agent") if order is not None else set()
        )
        if inst.complete:
            missing = sorted(agentset - covered)
            if missing:
                bad(
                    "incomplete-priority",
                    f"item {o!r} does not rank agents {missing}",
                )

    if inst.complete and len(inst.agents) != len(inst.items):
        bad(
            "size-mismatch",
            f"complete instance needs equal sides, got {len(inst.agents)} agents "
            f"and {len(inst.items)} items",
        )

    return ValidationReport(not out, out)


def _require_valid(inst):
    report = validate_instance(inst)
    if not report.ok:
        raise InputError(f"invalid instance: {report.summary()}")


def complete_instance(inst, p=None):
    """Embed an incomplete market into a complete one of equal sides.

    Every agent i gets a personal dummy item ranked directly below i's
    acceptable items; unacceptable items follow in one trailing tier.
    The dummy item puts i alone in its top tier.  |items| dummy agents,
    indifferent among everything, even out the two sides; existing
    priority lists gain one trailing tier with every agent they did not
    rank.  Stable outcomes of the original market correspond one-to-one
    to stable outcomes of the completed one.

    When a partial assignment matrix p is supplied (row and column sums
    at most one, support on mutually acceptable pairs), it is extended
    to a bistochastic matrix: each agent's leftover mass goes to their
    dummy item and the dummy agents soak up the remaining column
    deficits in item order.  Complete instances pass through unchanged,
    in which case p must already be bistochastic.
    """
    _require_valid(inst)
    if inst.complete:
        if p is not None:
            from .randmatch import validate_random_matching

            validate_random_matching(p, inst)
        return inst, p

    dummy_item = {a: f"__dummy_item__{a}" for a in inst.agents}
    dummy_agents = [f"__dummy_agent__{k}" for k in range(len(inst.items))]
    taken = set(inst.agents) | set(inst.items)
    for nm in list(dummy_item.values()) + dummy_agents:
        if nm in taken:
            raise InputError(f"name {nm!r} is reserved for completion but already in use")

    new_agents = tuple(inst.agents) + tuple(dummy_agents)
    new_items = tuple(inst.items) + tuple(dummy_item[a] for a in inst.agents)
    new_itemset = set(new_items)
    new_agentset = set(new_agents)

    prefs = {}
    for a in inst.agents:
        order = inst.preferences.get(a, _EMPTY_ORDER)
        tiers = list(order.tiers) + [(dummy_item[a],)]
        tail = sorted(new_itemset - set(order._rank) - {dummy_item[a]})
        if tail:
            tiers.append(tuple(tail))
        prefs[a] = WeakOrder(tiers)
    for da in dummy_agents:
        prefs[da] = WeakOrder((tuple(new_items),))

    prios = {}
    for o in inst.items:
        order = inst.priorities.get(o, _EMPTY_ORDER)
        tiers = list(order.tiers)
        tail = sorted(new_agentset - set(order._rank))
        if tail:
            tiers.append(tuple(tail))
        prios[o] = WeakOrder(tiers)
    for a in inst.agents:
        rest = sorted(new_agentset - {a})
        prios[dummy_item[a]] = WeakOrder(((a,), tuple(rest)))

    completed = Instance(new_agents, new_items, prefs, prios, True)
    if p is None:
        return completed, None

    from .randmatch import RandomMatching

    rowsum = {a: ZERO for a in inst.agents}
    colsum = {o: ZERO for o in inst.items}
    for (a, o), q in p.entries.items():
        if a not in rowsum or o not in colsum:
            raise InputError(f"matrix entry ({a!r}, {o!r}) is outside the instance")
        if not inst.mutually_acceptable(a, o):
            raise InputError(
                f"matrix entry ({a!r}, {o!r}) is not a mutually acceptable pair"
            )
        if q < 0:
            raise InputError(f"matrix entry ({a!r}, {o!r}) is negative")
        rowsum[a] += q
        colsum[o] += q
    for a, s in rowsum.items():
        if s > ONE:
            raise InputError(f"row sum for agent {a!r} exceeds one")
    for o, s in colsum.items():
        if s > ONE:
            raise InputError(f"column sum for item {o!r} exceeds one")

    entries = dict(p.entries)
    deficits = []
    for o in inst.items:
        deficits.append([o, ONE - colsum[o]])
    for a in inst.agents:
        leftover = ONE - rowsum[a]
        if leftover > 0:
            entries[(a, dummy_item[a])] = leftover
        deficits.append([dummy_item[a], ONE - leftover])

    # Dummy agent rows are filled northwest-corner style: total deficit
    # equals the number of dummy agents, so this always comes out even.
    di = 0
    for da in dummy_agents:
        cap = ONE
        while cap > 0:
            while di < len(deficits) and deficits[di][1] == 0:
                di += 1
            o, need = deficits[di]
            take = min(cap, need)
            entries[(da, o)] = take
            deficits[di][1] = need - take
            cap -= take

    return completed, RandomMatching(len(new_agents), entries)
