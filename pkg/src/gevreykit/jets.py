"""Exact truncated multivariate Taylor jets.

A Jet stores the Taylor coefficients c_alpha = d^alpha f(base)/alpha! of a
function through a fixed truncation order.  All ring operations close
within that order.  Composition is evaluated by Horner recursion on the
nonconstant part of the inner jet, deliberately avoiding the
decomposition-sum chain rule so the two derivative paths stay
independent of each other.

Coefficients are exact (int / Fraction) whenever base point and function
permit, floats or complex otherwise; mixed arithmetic follows Python's
numeric tower.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .multiindex import MultiIndex, mi_add, mi_factorial, mi_order

Number = int | Fraction | float | complex


def _is_exact(x: Number) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor expansion: coeffs[alpha] = d^alpha f(base)/alpha!."""

    dim: int
    order: int
    coeffs: Mapping[MultiIndex, Number]
    base_point: tuple[Number, ...] = field(default=())

    def coeff(self, alpha: MultiIndex) -> Number:
        return self.coeffs.get(alpha, 0)

    @property
    def value(self) -> Number:
        return self.coeff((0,) * self.dim)

    def with_base(self, base: tuple[Number, ...]) -> "Jet":
        return Jet(self.dim, self.order, dict(self.coeffs), base)


def jet_const(c: Number, dim: int, order: int, base: tuple[Number, ...] = ()) -> Jet:
    return Jet(dim, order, {(0,) * dim: c} if c != 0 else {}, base)


def jet_variable(i: int, dim: int, order: int, base: tuple[Number, ...]) -> Jet:
    """The coordinate function x_i as a jet at `base`."""
    e_i = tuple(1 if j == i else 0 for j in range(dim))
    coeffs: dict[MultiIndex, Number] = {(0,) * dim: base[i]}
    if order >= 1:
        coeffs[e_i] = 1
    return Jet(dim, order, coeffs, tuple(base))


def _check_compatible(a: Jet, b: Jet) -> None:
    if a.dim != b.dim or a.order != b.order:
        raise ValueError("jets must share dimension and truncation order")


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    out = dict(a.coeffs)
    for k, v in b.coeffs.items():
        out[k] = out.get(k, 0) + v
    return Jet(a.dim, a.order, out, a.base_point or b.base_point)


def jet_scale(c: Number, a: Jet) -> Jet:
    if c == 0:
        return jet_const(0, a.dim, a.order, a.base_point)
    return Jet(a.dim, a.order, {k: c * v for k, v in a.coeffs.items()}, a.base_point)


def jet_mul(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    out: dict[MultiIndex, Number] = {}
    for ka, va in a.coeffs.items():
        if va == 0:
            continue
        na = mi_order(ka)
        for kb, vb in b.coeffs.items():
            if vb == 0 or na + mi_order(kb) > a.order:
                continue
            k = mi_add(ka, kb)
            out[k] = out.get(k, 0) + va * vb
    return Jet(a.dim, a.order, out, a.base_point or b.base_point)


def jet_compose(f: Jet, g: Jet) -> Jet:
    """The jet of f o g at g's base point; f must be univariate at g's value.

    Horner evaluation of f's truncated series at the nonconstant part of
    g; exact whenever the inputs are exact.
    """
    if f.dim != 1:
        raise ValueError("outer jet must be univariate")
    if f.order != g.order:
        raise ValueError("jets must share truncation order")
    fb = f.base_point[0] if f.base_point else 0
    gv = g.value
    if _is_exact(fb) and _is_exact(gv):
        if fb != gv:
            raise ValueError(f"outer base {fb} != inner value {gv}")
    else:
        if abs(complex(float(fb.real) if isinstance(fb, (int, float, Fraction)) else fb)
               - complex(float(gv.real) if isinstance(gv, (int, float, Fraction)) else gv)) > 1e-10:
            raise ValueError(f"outer base {fb} != inner value {gv}")
    K = g.order
    ghat_coeffs = {k: v for k, v in g.coeffs.items() if mi_order(k) > 0}
    ghat = Jet(g.dim, K, ghat_coeffs, g.base_point)
    result = jet_const(f.coeff((K,)), g.dim, K, g.base_point)
    for j in range(K - 1, -1, -1):
        result = jet_mul(result, ghat)
        result = jet_add(result, jet_const(f.coeff((j,)), g.dim, K, g.base_point))
    return result


def jet_partial(j: Jet, alpha: MultiIndex) -> Number:
    """d^alpha f(base) = alpha! * coeff(alpha)."""
    if len(alpha) != j.dim:
        raise ValueError("multi-index dimension mismatch")
    if mi_order(alpha) > j.order:
        raise ValueError(f"|alpha| = {mi_order(alpha)} exceeds truncation order {j.order}")
    return mi_factorial(alpha) * j.coeff(alpha)


def jet_of(spec, base: tuple[Number, ...] | Number, K: int):
    """Jet of a FunctionSpec at `base` through order K.

    Thin dispatcher; the catalog of specs lives in gevreykit.funcspec.
    """
    if not isinstance(base, tuple):
        base = (base,)
    return spec.jet(base, K)
