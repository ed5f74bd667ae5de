"""JSON file formats.

All loaders are strict: unknown top-level keys, wrong shapes, and
duplicate matrix entries are input errors rather than silently
tolerated.  Probabilities are written as rational strings ("1/3"),
never floats.

Instance files:
    {"agents": [...], "items": [...],
     "preferences": {agent: [[tie, ...], ...]},
     "priorities": {item: [[tie, ...], ...]},
     "complete": true}

Matrix files:
    {"n": 4, "entries": [{"agent": "a", "item": "o1", "p": "1/2"}, ...]}

Matching files:
    {"matching": {agent: item, ...}}

Exact-cover files:
    {"elements": [...], "sets": [[e1, e2, e3], ...]}
"""

from __future__ import annotations

import json

from .core import Instance
from .errors import InputError
from .matching import DeterministicMatching
from .oracle import X3CInstance
from .randmatch import RandomMatching
from .rationals import format_rational, parse_rational


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise InputError("%s is not valid JSON: %s" % (path, exc)) from exc


def _expect_keys(data, required, optional, what):
    if not isinstance(data, dict):
        raise InputError("%s must be a JSON object" % what)
    missing = [k for k in required if k not in data]
    if missing:
        raise InputError("%s is missing key %r" % (what, missing[0]))
    unknown = [k for k in data if k not in required and k not in optional]
    if unknown:
        raise InputError("%s has unknown key %r" % (what, unknown[0]))


def _name_list(value, what):
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise InputError("%s must be a list of strings" % what)
    return list(value)


def _tier_lists(value, what):
    if not isinstance(value, dict):
        raise InputError("%s must be an object" % what)
    out = {}
    for name, tiers in value.items():
        if not isinstance(name, str):
            raise InputError("%s keys must be strings" % what)
        if not isinstance(tiers, list):
            raise InputError("%s[%r] must be a list of tiers" % (what, name))
        clean = []
        for tier in tiers:
            if not isinstance(tier, list) or not all(
                isinstance(v, str) for v in tier
            ):
                raise InputError(
                    "%s[%r] tiers must be lists of strings" % (what, name)
                )
            clean.append(list(tier))
        out[name] = clean
    return out


def instance_to_dict(inst: Instance) -> dict:
    return {
        "agents": list(inst.agents),
        "items": list(inst.items),
        "preferences": {
            a: [list(t) for t in inst.preferences[a].tiers]
            for a in inst.agents if a in inst.preferences
        },
        "priorities": {
            o: [list(t) for t in inst.priorities[o].tiers]
            for o in inst.items if o in inst.priorities
        },
        "complete": inst.complete,
    }


def instance_from_dict(data, what="instance") -> Instance:
    _expect_keys(data, ("agents", "items", "preferences", "priorities"),
                 ("complete",), what)
    complete = data.get("complete", True)
    if not isinstance(complete, bool):
        raise InputError("%s key 'complete' must be a boolean" % what)
    return Instance.from_tiers(
        agents=_name_list(data["agents"], what + " agents"),
        items=_name_list(data["items"], what + " items"),
        preferences=_tier_lists(data["preferences"], what + " preferences"),
        priorities=_tier_lists(data["priorities"], what + " priorities"),
        complete=complete,
    )


def load_instance(path) -> Instance:
    return instance_from_dict(_load_json(path), what=str(path))


def dump_instance(inst: Instance, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2, sort_keys=True)
        fh.write("\n")


def matrix_to_dict(p: RandomMatching) -> dict:
    return {
        "n": p.n,
        "entries": [
            {"agent": a, "item": o, "p": format_rational(q)}
            for (a, o), q in sorted(p.entries.items())
        ],
    }


def matrix_from_dict(data, what="matrix") -> RandomMatching:
    _expect_keys(data, ("n", "entries"), (), what)
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError("%s key 'n' must be a positive integer" % what)
    if not isinstance(data["entries"], list):
        raise InputError("%s key 'entries' must be a list" % what)
    entries = {}
    for row in data["entries"]:
        _expect_keys(row, ("agent", "item", "p"), (), what + " entry")
        a, o = row["agent"], row["item"]
        if not isinstance(a, str) or not isinstance(o, str):
            raise InputError("%s entry names must be strings" % what)
        if (a, o) in entries:
            raise InputError("%s repeats entry (%s, %s)" % (what, a, o))
        try:
            entries[(a, o)] = parse_rational(row["p"])
        except ValueError as exc:
            raise InputError("%s entry (%s, %s): %s" % (what, a, o, exc)) from None
    return RandomMatching(n, entries)


def load_matrix(path) -> RandomMatching:
    return matrix_from_dict(_load_json(path), what=str(path))


def dump_matrix(p: RandomMatching, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_dict(p), fh, indent=2, sort_keys=True)
        fh.write("\n")


def matching_to_dict(m: DeterministicMatching) -> dict:
    return {"matching": {a: o for a, o in m.pairs}}


def matching_from_dict(data, what="matching") -> DeterministicMatching:
    _expect_keys(data, ("matching",), (), what)
    body = data["matching"]
    if not isinstance(body, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in body.items()
    ):
        raise InputError("%s body must map agent names to item names" % what)
    return DeterministicMatching(body.items())


def load_matching(path) -> DeterministicMatching:
    return matching_from_dict(_load_json(path), what=str(path))


def dump_matching(m: DeterministicMatching, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matching_to_dict(m), fh, indent=2, sort_keys=True)
        fh.write("\n")


def x3c_from_dict(data, what="exact-cover instance") -> X3CInstance:
    _expect_keys(data, ("elements", "sets"), (), what)
    elements = data["elements"]
    if not isinstance(elements, list):
        raise InputError("%s key 'elements' must be a list" % what)
    sets = data["sets"]
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise InputError("%s key 'sets' must be a list of lists" % what)
    for e in elements:
        if not isinstance(e, (str, int)) or isinstance(e, bool):
            raise InputError("%s elements must be strings or integers" % what)
    return X3CInstance(tuple(elements), tuple(tuple(s) for s in sets))


def load_x3c(path) -> X3CInstance:
    return x3c_from_dict(_load_json(path), what=str(path))


def decomposition_to_list(decomp) -> list:
    out = []
    for term in decomp.terms:
        row = {
            "weight": format_rational(term.weight),
            "matching": {a: o for a, o in term.matching.pairs},
        }
        if term.weakly_stable is not None:
            row["weakly_stable"] = term.weakly_stable
        if term.strongly_stable is not None:
            row["strongly_stable"] = term.strongly_stable
        out.append(row)
    return out
