"""VOAs given by explicit structure-constant tables, and the JSON description format.

Document fields (all rationals are strings ``"p/q"``)::

    central_charge   "1/2"
    cutoff           "6"
    generators       [{"name": ..., "weight": ...}, ...]   one entry per basis vector
    structure_constants
                     [{"left": name, "mode": n, "right": name,
                       "result": [{"basis": name, "coeff": "p/q"}, ...]}, ...]
    omega            basis name, or [{"basis": name, "coeff": "p/q"}, ...]

Products involving the vacuum that follow from the vacuum and creation
axioms (1_(n) u = delta_{n,-1} u, v_(-1) 1 = v, v_(n) 1 = 0 for n >= 0) may
be omitted; everything else absent from the table is zero.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, List, Tuple

from ..linalg import ONE, Rational, Vec, fmt_rational, parse_rational
from ..modes import VOA, check_module_axioms

FIELDS = {"central_charge", "cutoff", "generators", "structure_constants", "omega"}


class ParseError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location
        self.message = message


class AxiomViolation(ValueError):
    def __init__(self, descriptor: str, message: str = ""):
        super().__init__(f"axiom violation at {descriptor}" + (f": {message}" if message else ""))
        self.descriptor = descriptor


class TableVOA(VOA):
    """A truncated VOA whose every basis vector is a generator with tabulated modes."""

    def __init__(self, names: List[str], weights: Dict[str, Fraction], table: Dict[Tuple[str, int, str], Vec],
                 vacuum: str, omega: Vec, central_charge, cutoff, name: str = "table"):
        self.names = list(names)
        self._weights = dict(weights)
        self.table = table
        self.vacuum = vacuum
        self.omega = omega
        self.central_charge = Rational(central_charge)
        self.generators = {n: self._weights[n] for n in self.names if n != vacuum}
        self._levels: Dict[Fraction, List[str]] = {}
        for n in self.names:
            self._levels.setdefault(self._weights[n], []).append(n)
        super().__init__(self, cutoff, name)

    def min_weight(self):
        return Rational(0)

    def level_offsets(self):
        return sorted({w - (w.numerator // w.denominator) for w in self._weights.values()}) or [Rational(0)]

    def basis(self, weight):
        return list(self._levels.get(Rational(weight), []))

    def weight_of(self, key):
        return self._weights[key]

    def label(self, key) -> str:
        return key

    def gen_act(self, gen, n, key) -> Vec:
        if key == self.vacuum and n >= -1:
            return {gen: ONE} if n == -1 else {}
        return self.table.get((gen, n, key), {})

    def decompose(self, key):
        return key, -1, {self.vacuum: ONE}

    def gen_vector(self, gen) -> Vec:
        return {gen: ONE}


def _rational(value, loc: str) -> Fraction:
    try:
        return parse_rational(value)
    except (ValueError, TypeError) as exc:
        raise ParseError(loc, f"malformed rational {value!r}") from exc


def _terms(items, loc: str, names) -> Vec:
    if not isinstance(items, list):
        raise ParseError(loc, "expected a list of {basis, coeff} terms")
    out: Vec = {}
    for i, t in enumerate(items):
        tl = f"{loc}[{i}]"
        if not isinstance(t, dict) or set(t) != {"basis", "coeff"}:
            raise ParseError(tl, "term must have exactly the fields basis, coeff")
        if t["basis"] not in names:
            raise ParseError(f"{tl}.basis", f"unknown basis element {t['basis']!r}")
        c = _rational(t["coeff"], f"{tl}.coeff")
        if c:
            out[t["basis"]] = out.get(t["basis"], Rational(0)) + c
    return {k: c for k, c in out.items() if c}


def parse_voa(text: str) -> TableVOA:
    """Parse a description without verifying axioms."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    if not isinstance(doc, dict):
        raise ParseError("$", "top level must be an object")
    unknown = set(doc) - FIELDS
    if unknown:
        raise ParseError(f"$.{sorted(unknown)[0]}", "unknown field")
    missing = FIELDS - set(doc)
    if missing:
        raise ParseError(f"$.{sorted(missing)[0]}", "missing field")
    c = _rational(doc["central_charge"], "$.central_charge")
    cutoff = _rational(doc["cutoff"], "$.cutoff")
    gens = doc["generators"]
    if not isinstance(gens, list) or not gens:
        raise ParseError("$.generators", "expected a non-empty list")
    names: List[str] = []
    weights: Dict[str, Fraction] = {}
    for i, g in enumerate(gens):
        loc = f"$.generators[{i}]"
        if not isinstance(g, dict) or set(g) != {"name", "weight"}:
            raise ParseError(loc, "generator must have exactly the fields name, weight")
        if not isinstance(g["name"], str) or not g["name"]:
            raise ParseError(f"{loc}.name", "name must be a non-empty string")
        if g["name"] in weights:
            raise ParseError(f"{loc}.name", f"duplicate name {g['name']!r}")
        w = _rational(g["weight"], f"{loc}.weight")
        if w < 0:
            raise ParseError(f"{loc}.weight", "weights must be non-negative")
        names.append(g["name"])
        weights[g["name"]] = w
    table: Dict[Tuple[str, int, str], Vec] = {}
    sc = doc["structure_constants"]
    if not isinstance(sc, list):
        raise ParseError("$.structure_constants", "expected a list")
    for i, e in enumerate(sc):
        loc = f"$.structure_constants[{i}]"
        if not isinstance(e, dict) or set(e) != {"left", "mode", "right", "result"}:
            raise ParseError(loc, "entry must have exactly the fields left, mode, right, result")
        for side in ("left", "right"):
            if e[side] not in weights:
                raise ParseError(f"{loc}.{side}", f"unknown basis element {e[side]!r}")
        if not isinstance(e["mode"], int) or isinstance(e["mode"], bool):
            raise ParseError(f"{loc}.mode", "mode must be an integer")
        key = (e["left"], e["mode"], e["right"])
        if key in table:
            raise ParseError(loc, "duplicate structure constant")
        res = _terms(e["result"], f"{loc}.result", weights)
        target = weights[e["left"]] + weights[e["right"]] - e["mode"] - 1
        for b in res:
            if weights[b] != target:
                raise ParseError(f"{loc}.result", f"{b!r} has weight {fmt_rational(weights[b])}, "
                                                  f"expected {fmt_rational(target)}")
        if res:
            table[key] = res
    om = doc["omega"]
    if isinstance(om, str):
        if om not in weights:
            raise ParseError("$.omega", f"unknown basis element {om!r}")
        omega = {om: ONE}
    else:
        omega = _terms(om, "$.omega", weights)
    zero = [n for n in names if weights[n] == 0]
    if len(zero) != 1:
        raise AxiomViolation("cft-type", f"dim V_0 = {len(zero)}, expected 1")
    voa = TableVOA(names, weights, table, zero[0], omega, c, cutoff)
    for b in omega:
        if weights[b] != 2:
            raise AxiomViolation("omega", "conformal vector must have weight 2")
    return voa


def load_voa(text: str, budget=None, samples: int = 100, seed: int = 0) -> TableVOA:
    """Parse and verify: CFT type, L(0) grading, then the in-window axiom suite."""
    voa = parse_voa(text)
    for key in voa.basis_upto():
        l0 = voa.L(0, {key: ONE})
        want = {key: voa.weight_of(key)} if voa.weight_of(key) else {}
        if l0 != want:
            raise AxiomViolation(f"grading;u={key}", "omega_(1) does not act as the weight")
    report = check_module_axioms(voa, budget=voa.cutoff if budget is None else budget, samples=samples, seed=seed)
    if not report.passed:
        raise AxiomViolation(report.failures[0].descriptor)
    return voa


def structure_table(voa: VOA, cutoff=None) -> Dict[Tuple[str, int, str], Dict[str, str]]:
    """All nonzero in-window products ``left_(n) right`` keyed by labels, omitting implied vacuum ones."""
    top = voa.cutoff if cutoff is None else Rational(cutoff)
    keys = voa.basis_upto(top)
    out = {}
    for left in keys:
        if left == voa.vacuum:
            continue
        a = voa.weight_of(left)
        for right in keys:
            b = voa.weight_of(right)
            hi = a + b - 1
            n = int(-((-(a + b - 1 - top).numerator) // (a + b - 1 - top).denominator))
            while n <= hi:
                if not (right == voa.vacuum and n >= -1):
                    res = voa.act(left, n, right)
                    if res:
                        out[(voa.label(left), n, voa.label(right))] = {voa.label(k): fmt_rational(c)
                                                                        for k, c in res.items()}
                n += 1
    return out


def emit_voa(voa: VOA, cutoff=None) -> str:
    top = voa.cutoff if cutoff is None else Rational(cutoff)
    gens = [{"name": voa.label(k), "weight": fmt_rational(voa.weight_of(k))} for k in voa.basis_upto(top)]
    sc = [{"left": l, "mode": n, "right": r,
           "result": [{"basis": b, "coeff": c} for b, c in res.items()]}
          for (l, n, r), res in structure_table(voa, top).items()]
    doc = {
        "central_charge": fmt_rational(voa.central_charge),
        "cutoff": fmt_rational(top),
        "generators": gens,
        "structure_constants": sc,
        "omega": [{"basis": voa.label(k), "coeff": fmt_rational(c)} for k, c in voa.omega.items()],
    }
    return json.dumps(doc, indent=1, sort_keys=True)
