"""Shipped models and a small descriptor language for naming their modules.

Model selectors: ``heisenberg``, ``ising``, ``virasoro:<c>`` (universal,
e.g. ``virasoro:1/2``) and ``minimal:<p>,<q>``.

Module descriptors: ``V`` (the adjoint module), ``F(mu)`` / ``J(mu)`` for
Heisenberg Fock and Jordan-Fock modules, ``h=<weight>`` for Virasoro
highest-weight modules, and ``dual(<descriptor>)``.
"""

from __future__ import annotations

import re

from ..linalg import Rational, parse_rational
from ..modes import VOA, Module
from .heisenberg import FockModule, HeisenbergVOA, build_heisenberg, fock_module, jordan_fock_module
from .table import TableVOA, emit_voa, load_voa, parse_voa
from .virasoro import VirasoroModule, VirasoroVOA, build_ising, build_minimal_model, build_virasoro, virasoro_module

MODEL_NAMES = ("heisenberg", "ising", "virasoro:<c>", "minimal:<p>,<q>")


class UnknownModel(ValueError):
    pass


def build_model(selector: str, cutoff) -> VOA:
    sel = selector.strip().lower()
    if sel == "heisenberg":
        return build_heisenberg(cutoff)
    if sel == "ising":
        return build_ising(cutoff)
    if sel.startswith("virasoro:"):
        return build_virasoro(parse_rational(sel.split(":", 1)[1]), cutoff)
    if sel.startswith("minimal:"):
        try:
            p, q = (int(x) for x in sel.split(":", 1)[1].split(","))
        except ValueError as exc:
            raise UnknownModel(f"bad minimal model selector {selector!r}") from exc
        return build_minimal_model(p, q, cutoff)
    raise UnknownModel(f"unknown model {selector!r}; expected one of {', '.join(MODEL_NAMES)}")


_FOCK = re.compile(r"^([FJ])\((.+)\)$")
_DUAL = re.compile(r"^dual\((.+)\)$")


def module_from_descriptor(voa: VOA, desc: str, cutoff=None) -> Module:
    from ..dual import restricted_dual
    d = desc.strip()
    top = voa.cutoff if cutoff is None else Rational(cutoff)
    if d == "V":
        return voa
    m = _DUAL.match(d)
    if m:
        return restricted_dual(module_from_descriptor(voa, m.group(1), top))
    m = _FOCK.match(d)
    if m:
        if not isinstance(voa, HeisenbergVOA):
            raise UnknownModel(f"{d}: Fock modules need the Heisenberg model")
        mu = parse_rational(m.group(2))
        make = fock_module if m.group(1) == "F" else jordan_fock_module
        return make(voa, mu, top + mu * mu / 2)
    if d.startswith("h="):
        if not isinstance(voa, VirasoroVOA):
            raise UnknownModel(f"{d}: highest-weight modules need a Virasoro model")
        h = parse_rational(d[2:])
        return virasoro_module(voa, h, top + h)
    raise UnknownModel(f"unknown module descriptor {desc!r}")


__all__ = [
    "MODEL_NAMES", "UnknownModel", "build_model", "module_from_descriptor",
    "FockModule", "HeisenbergVOA", "build_heisenberg", "fock_module", "jordan_fock_module",
    "VirasoroModule", "VirasoroVOA", "build_ising", "build_minimal_model", "build_virasoro", "virasoro_module",
    "TableVOA", "emit_voa", "load_voa", "parse_voa",
]
