"""JSON files for behaviors and certificates.

Behavior file::

    {"format": "losrcert-behavior/1",
     "mode": "rational" | "float",
     "parties": [{"name": "A", "n_inputs": 2, "n_outputs": 2}, ...],
     "scenario": {"sources": [...], "attachment": [[...], ...]},
     "table": [...]}

``table`` is the C-order flattening of the (inputs..., outputs...) array.
Rational entries are strings ``"num/den"``; entries in Q(sqrt 2) are
written ``"num/den+num/den*sqrt2"``.  Float entries are JSON numbers.

Certificate file::

    {"format": "losrcert-certificate/1",
     "parties": [...], "order": K, "inflations": [...], "cuts": [...],
     "n_rows": R, "n_vars": V, "digest": "<sha256 of the system>",
     "dual": {"<row>": "num/den", ...},            # nonzero multipliers only
     "witness": {"<flat P index>": "num/den", ...},
     "constant": "num/den",
     "value": "<exact w(P)>", "value_float": w}

Keys are written sorted so files diff cleanly.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .behaviors import Behavior
from .certify import Certificate
from .exact import format_exact, parse_exact
from .network import PartySpec, Scenario, canonical_scenario

BEHAVIOR_FORMAT = "losrcert-behavior/1"
CERTIFICATE_FORMAT = "losrcert-certificate/1"


class FileFormatError(ValueError):
    pass


def _parties_json(parties):
    return [{"name": p.name, "n_inputs": p.n_inputs, "n_outputs": p.n_outputs} for p in parties]


def behavior_to_json(b: Behavior, scenario: Optional[Scenario] = None) -> dict:
    if scenario is None:
        scenario = canonical_scenario(b.n, b.parties) if b.n >= 3 else None
    flat = b.flat()
    table = [format_exact(v) for v in flat] if b.exact else [float(v) for v in flat]
    out = {"format": BEHAVIOR_FORMAT, "mode": b.mode, "parties": _parties_json(b.parties), "table": table}
    if scenario is not None:
        out["scenario"] = {"sources": list(scenario.sources),
                           "attachment": [list(a) for a in scenario.attachment]}
    return out


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _load_json(text: str, what: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        line = text.splitlines()[e.lineno - 1] if text and e.lineno <= len(text.splitlines()) else ""
        raise FileFormatError(f"{what}: {e.msg} at line {e.lineno} col {e.colno}: {line.strip()!r}") from None


def behavior_from_json(data: dict) -> Tuple[Behavior, Optional[Scenario]]:
    try:
        if data.get("format") != BEHAVIOR_FORMAT:
            raise FileFormatError(f"unexpected format tag {data.get('format')!r}")
        parties = tuple(PartySpec(p["name"], int(p["n_inputs"]), int(p["n_outputs"]))
                        for p in data["parties"])
        mode = data["mode"]
        shape = tuple(p.n_inputs for p in parties) + tuple(p.n_outputs for p in parties)
        raw = data["table"]
        if len(raw) != int(np.prod(shape)):
            raise FileFormatError(f"table has {len(raw)} entries, expected {int(np.prod(shape))}")
        if mode == "rational":
            arr = np.empty(len(raw), dtype=object)
            for i, v in enumerate(raw):
                try:
                    arr[i] = parse_exact(v)
                except (ValueError, TypeError) as e:
                    raise FileFormatError(f"table entry {i}: {e}") from None
        elif mode == "float":
            arr = np.array([float(v) for v in raw])
        else:
            raise FileFormatError(f"unknown mode {mode!r}")
        scenario = None
        if "scenario" in data:
            sc = data["scenario"]
            scenario = Scenario(parties, tuple(sc["sources"]),
                                tuple(tuple(int(j) for j in a) for a in sc["attachment"]))
    except KeyError as e:
        raise FileFormatError(f"missing key {e}") from None
    return Behavior(parties, arr.reshape(shape), mode), scenario


def read_behavior(path: str) -> Tuple[Behavior, Optional[Scenario]]:
    with open(path) as fh:
        return behavior_from_json(_load_json(fh.read(), path))


def write_behavior(path: str, b: Behavior, scenario: Optional[Scenario] = None):
    with open(path, "w") as fh:
        fh.write(dumps(behavior_to_json(b, scenario)))


def certificate_to_json(c: Certificate) -> dict:
    return {
        "format": CERTIFICATE_FORMAT,
        "parties": [{"name": n, "n_inputs": i, "n_outputs": o} for n, i, o in c.parties],
        "order": c.order,
        "inflations": [[[list(r) for r in rows] for rows in w] for w in c.inflations],
        "cuts": [[list(p) for p in cut] for cut in c.cuts],
        "n_rows": c.n_rows,
        "n_vars": c.n_vars,
        "digest": c.digest,
        "dual": {str(r): format_exact(v) for r, v in enumerate(c.y) if v != 0},
        "witness": {str(k): format_exact(v) for k, v in c.witness.items()},
        "constant": format_exact(c.constant),
        "value": format_exact(c.value),
        "value_float": float(c.value),
    }


def certificate_from_json(data: dict) -> Certificate:
    try:
        if data.get("format") != CERTIFICATE_FORMAT:
            raise FileFormatError(f"unexpected format tag {data.get('format')!r}")
        n_rows = int(data["n_rows"])
        y = [Fraction(0)] * n_rows
        for r, v in data["dual"].items():
            r = int(r)
            if not 0 <= r < n_rows:
                raise FileFormatError(f"dual row {r} out of range")
            y[r] = Fraction(parse_exact(v))
        return Certificate(
            y=tuple(y),
            witness={int(k): Fraction(parse_exact(v)) for k, v in data["witness"].items()},
            constant=Fraction(parse_exact(data["constant"])),
            value=parse_exact(data["value"]),
            parties=tuple((p["name"], int(p["n_inputs"]), int(p["n_outputs"])) for p in data["parties"]),
            order=int(data["order"]),
            inflations=tuple(tuple(tuple(tuple(r) for r in rows) for rows in w) for w in data["inflations"]),
            cuts=tuple(tuple(tuple(p) for p in cut) for cut in data["cuts"]),
            n_rows=n_rows, n_vars=int(data["n_vars"]), digest=data["digest"])
    except KeyError as e:
        raise FileFormatError(f"missing key {e}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, FileFormatError):
            raise
        raise FileFormatError(str(e)) from None


def read_certificate(path: str) -> Certificate:
    with open(path) as fh:
        return certificate_from_json(_load_json(fh.read(), path))


def write_certificate(path: str, c: Certificate):
    with open(path, "w") as fh:
        fh.write(dumps(certificate_to_json(c)))
