"""Robust ex-post stability: every decomposition is stable.

A bistochastic matrix is robustly ex-post stable when no way of
writing it as a lottery over support-consistent matchings can contain
an unstable matching.  Any perfect matching inside the support extends
to a full decomposition (peel it off with a small weight and decompose
the bistochastic remainder), so the property is equivalent to: every
perfect matching of the support graph is weakly stable.

That universal statement is checked one candidate blocking pair at a
time.  Pair (a, o) blocks some support matching iff the support graph
has a perfect matching in which a holds an item it likes strictly less
than o and o is held by an agent with strictly lower priority than a.
Those are plain restricted perfect matching problems, so the whole
check is n^2 matching computations and returns the first offending
matching as a witness.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bipartite import find_perfect_matching
from .core import complete_instance
from .matching import DeterministicMatching


@dataclass
class RobustResult:
    robust: bool
    witness: tuple | None  # (agent, item, DeterministicMatching)
    witnesses: list | None  # populated when every failing pair is wanted

    def __bool__(self):
        return self.robust


def is_robust_expost_stable(inst, p, all_witnesses=False) -> RobustResult:
    """Decide whether every decomposition of p is weakly stable.

    Incomplete instances are completed first.  On failure the witness
    is a support-consistent perfect matching together with the pair
    that blocks it; with all_witnesses=True one witness is collected
    for every pair that can block some decomposition.
    """
    inst, p = complete_instance(inst, p)
    n = inst.n
    aidx = {a: i for i, a in enumerate(inst.agents)}
    oidx = {o: i for i, o in enumerate(inst.items)}
    supp_rows = [[] for _ in range(n)]
    supp_cols = [[] for _ in range(n)]
    for (a, o) in p.entries:
        supp_rows[aidx[a]].append(oidx[o])
        supp_cols[oidx[o]].append(aidx[a])
    witnesses = []
    for a in sorted(inst.agents):
        i = aidx[a]
        prefs = inst.pref_rank[a]
        for o in sorted(inst.items):
            k = oidx[o]
            if o not in prefs or a not in inst.prio_rank[o]:
                continue
            r_o = prefs[o]
            prios = inst.prio_rank[o]
            r_a = prios[a]
            worse_items = [
                k2 for k2 in supp_rows[i]
                if prefs[inst.items[k2]] > r_o
            ]
            worse_agents = {
                i2 for i2 in supp_cols[k]
                if prios[inst.agents[i2]] > r_a
            }
            if not worse_items or not worse_agents:
                continue
            adj = []
            for i2 in range(n):
                if i2 == i:
                    adj.append(worse_items)
                elif i2 in worse_agents:
                    adj.append(supp_rows[i2])
                else:
                    adj.append([k2 for k2 in supp_rows[i2] if k2 != k])
            match = find_perfect_matching(adj, n)
            if match is None:
                continue
            m = DeterministicMatching(
                (inst.agents[i2], inst.items[match[i2]]) for i2 in range(n)
            )
            witnesses.append((a, o, m))
            if not all_witnesses:
                return RobustResult(False, (a, o, m), None)
    if witnesses:
        return RobustResult(False, witnesses[0], witnesses)
    return RobustResult(True, None, [] if all_witnesses else None)
