"""Restricted (contragredient) dual of a graded module.

Generator modes on M' are transposes:

    <g'_n f, x> = sum_k (-1)^wt(g) / k! <f, (L(1)^k g)_(2 wt(g) - k - n - 2) x>,

the coefficientwise form of Y'(g, z) = Y(e^{zL(1)} (-z^{-2})^{L(0)} g, z^{-1})^T.
The sum over k is finite because L(1) lowers weight.  All other modes follow
from the generic recursion in :class:`~voalab.modes.Module`.
"""

from __future__ import annotations

import math

from .linalg import ONE, Rational, Vec
from .modes import Module, sgn


class RestrictedDual(Module):
    def __init__(self, module: Module):
        voa = module.voa
        if not voa.omega:
            raise ValueError("restricted dual needs the L(1) action (VOA has no conformal vector)")
        self.base = module
        super().__init__(voa, module.cutoff, name=f"{module.name}'")
        self._expansions = {}

    def min_weight(self):
        return self.base.min_weight()

    def level_offsets(self):
        return self.base.level_offsets()

    def basis(self, weight):
        return [("*", k) for k in self.base.basis(weight)]

    def weight_of(self, key):
        return self.base.weight_of(key[1])

    def label(self, key) -> str:
        return self.base.label(key[1]) + "'"

    def _expansion(self, gen):
        """[(k, L(1)^k g / k!)] for k = 0 .. while nonzero."""
        hit = self._expansions.get(gen)
        if hit is None:
            voa = self.voa
            vec = voa.gen_vector(gen)
            hit, k = [], 0
            while vec:
                hit.append((k, {key: c / math.factorial(k) for key, c in vec.items()}))
                vec = voa.L(1, vec)
                k += 1
            self._expansions[gen] = hit
        return hit

    def gen_act(self, gen, n, key) -> Vec:
        voa = self.voa
        wt = voa.gen_weight(gen)
        if wt.denominator != 1:
            raise ValueError("generator weights must be integral")
        wt = int(wt)
        f = key[1]
        out_w = self.base.weight_of(f) + wt - n - 1
        if out_w < self.base.min_weight():
            return {}
        out: Vec = {}
        sign = sgn(wt)
        for x in self.base.basis(out_w):
            total = Rational(0)
            for k, vk in self._expansion(gen):
                img = self.base.act_vec(vk, 2 * wt - k - n - 2, {x: ONE})
                c = img.get(f)
                if c:
                    total += c
            if total:
                out[("*", x)] = sign * total
        return out


def restricted_dual(module: Module) -> RestrictedDual:
    return RestrictedDual(module)


def double_dual_dims_match(module: Module, cutoff=None) -> bool:
    dd = restricted_dual(restricted_dual(module))
    return dd.graded_space(cutoff).levels == module.graded_space(cutoff).levels


def pairing_residual(module: Module, v: Vec, n: int, f_key, x_key) -> Rational:
    """<Y'(v,z) f, x> minus the transposed-expansion formula, for one coefficient."""
    dual = restricted_dual(module) if not isinstance(module, RestrictedDual) else module
    base = dual.base
    lhs = dual.act_vec(v, n, {("*", f_key): ONE}).get(("*", x_key), Rational(0))
    voa = module.voa
    wt = int(voa.vec_weight(v))
    rhs = Rational(0)
    vec, k = dict(v), 0
    while vec:
        img = base.act_vec(vec, 2 * wt - k - n - 2, {x_key: ONE})
        rhs += img.get(f_key, Rational(0)) / math.factorial(k)
        vec = voa.L(1, vec)
        k += 1
    return lhs - sgn(wt) * rhs
