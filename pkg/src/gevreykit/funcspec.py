"""Symbolic function catalog: polynomials, exp/sin/cos, reciprocal powers,
and their sums, products and compositions.

Every spec knows its dimension, evaluates at points or numpy arrays,
differentiates within the catalog (the catalog is closed under
derivative and product, which the symbol algebra relies on), and
produces its truncated Taylor jet at any admissible base point.

Grammar accepted by :func:`parse_spec` (d = 1 unless noted):

    poly:c0,c1,...          polynomial with the given coefficients
    exp | sin | cos | recip
    compose(A,B)  sum(A,B)  prod(A,B)
    mvpoly:e1,..,ed:c;...   d >= 2 monomial:coefficient pairs
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .jets import Jet, Number, jet_add, jet_compose, jet_mul
from .multiindex import MultiIndex, mi_order

__all__ = [
    "FunctionSpec",
    "PolySpec",
    "MVPolySpec",
    "ExpSpec",
    "SinSpec",
    "CosSpec",
    "RecipPowSpec",
    "ComposeSpec",
    "SumSpec",
    "ProdSpec",
    "parse_spec",
]


def _exp(x):
    if isinstance(x, np.ndarray):
        return np.exp(x)
    if isinstance(x, complex):
        return cmath.exp(x)
    return math.exp(x)


def _sin(x):
    if isinstance(x, np.ndarray):
        return np.sin(x)
    if isinstance(x, complex):
        return cmath.sin(x)
    return math.sin(x)


def _cos(x):
    if isinstance(x, np.ndarray):
        return np.cos(x)
    if isinstance(x, complex):
        return cmath.cos(x)
    return math.cos(x)


class FunctionSpec:
    """Base class; subclasses implement dim, eval, derivative and jet."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def eval(self, *xs):
        raise NotImplementedError

    def derivative(self, i: int = 0) -> "FunctionSpec":
        raise NotImplementedError

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        raise NotImplementedError

    def __call__(self, *xs):
        return self.eval(*xs)


@dataclass(frozen=True)
class PolySpec(FunctionSpec):
    """Univariate polynomial sum coeffs[i] * x^i."""

    coeffs: tuple[Number, ...]

    @property
    def dim(self) -> int:
        return 1

    def eval(self, x):
        out = 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def derivative(self, i: int = 0) -> "PolySpec":
        if i != 0:
            raise ValueError("univariate spec has only coordinate 0")
        d = tuple(k * c for k, c in enumerate(self.coeffs) if k >= 1)
        return PolySpec(d if d else (0,))

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        (b,) = base
        coeffs: dict[MultiIndex, Number] = {}
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            for j in range(min(i, K) + 1):
                coeffs[(j,)] = coeffs.get((j,), 0) + c * math.comb(i, j) * b ** (i - j)
        return Jet(1, K, coeffs, base)


@dataclass(frozen=True)
class MVPolySpec(FunctionSpec):
    """Multivariate polynomial: monomial exponent tuple -> coefficient."""

    dimension: int
    terms: tuple[tuple[MultiIndex, Number], ...]

    @classmethod
    def from_dict(cls, dimension: int, terms: dict[MultiIndex, Number]) -> "MVPolySpec":
        return cls(dimension, tuple(sorted((k, v) for k, v in terms.items() if v != 0)))

    @property
    def dim(self) -> int:
        return self.dimension

    def eval(self, *xs):
        if len(xs) != self.dimension:
            raise ValueError(f"expected {self.dimension} coordinates")
        out = 0
        for expo, c in self.terms:
            term = c
            for e, x in zip(expo, xs):
                for _ in range(e):
                    term = term * x
            out = out + term
        return out

    def derivative(self, i: int = 0) -> "MVPolySpec":
        new: dict[MultiIndex, Number] = {}
        for expo, c in self.terms:
            if expo[i] == 0:
                continue
            down = tuple(e - 1 if j == i else e for j, e in enumerate(expo))
            new[down] = new.get(down, 0) + c * expo[i]
        return MVPolySpec.from_dict(self.dimension, new or {(0,) * self.dimension: 0})

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        coeffs: dict[MultiIndex, Number] = {}

        def expand(expo: MultiIndex, c: Number) -> None:
            # shifted monomial prod (b_i + h_i)^{e_i}
            partial: dict[MultiIndex, Number] = {(0,) * self.dimension: c}
            for axis, e in enumerate(expo):
                if e == 0:
                    continue
                nxt: dict[MultiIndex, Number] = {}
                b = base[axis]
                for beta, v in partial.items():
                    for j in range(e + 1):
                        if mi_order(beta) + j > K:
                            break
                        up = tuple(
                            x + j if a == axis else x for a, x in enumerate(beta)
                        )
                        nxt[up] = nxt.get(up, 0) + v * math.comb(e, j) * b ** (e - j)
                partial = nxt
            for beta, v in partial.items():
                coeffs[beta] = coeffs.get(beta, 0) + v

        for expo, c in self.terms:
            expand(expo, c)
        return Jet(self.dimension, K, coeffs, base)


@dataclass(frozen=True)
class ExpSpec(FunctionSpec):
    @property
    def dim(self) -> int:
        return 1

    def eval(self, x):
        return _exp(x)

    def derivative(self, i: int = 0) -> "ExpSpec":
        return ExpSpec()

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        (b,) = base
        v: Number = 1 if b == 0 else _exp(float(b) if isinstance(b, Fraction) else b)
        coeffs = {}
        fact = 1
        for k in range(K + 1):
            if k > 0:
                fact *= k
            coeffs[(k,)] = (
                Fraction(1, fact) if (b == 0 and isinstance(v, int)) else v / fact
            )
        return Jet(1, K, coeffs, base)


# derivative cycle sin -> cos -> -sin -> -cos, exact at base 0
_SIN_CYCLE = (0, 1, 0, -1)


@dataclass(frozen=True)
class SinSpec(FunctionSpec):
    @property
    def dim(self) -> int:
        return 1

    def eval(self, x):
        return _sin(x)

    def derivative(self, i: int = 0) -> "FunctionSpec":
        return CosSpec()

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        (b,) = base
        coeffs: dict[MultiIndex, Number] = {}
        fact = 1
        for k in range(K + 1):
            if k > 0:
                fact *= k
            if b == 0:
                c = _SIN_CYCLE[k % 4]
                if c:
                    coeffs[(k,)] = Fraction(c, fact)
            else:
                x = float(b) if isinstance(b, Fraction) else b
                cycle = (_sin(x), _cos(x), -_sin(x), -_cos(x))
                coeffs[(k,)] = cycle[k % 4] / fact
        return Jet(1, K, coeffs, base)


@dataclass(frozen=True)
class CosSpec(FunctionSpec):
    @property
    def dim(self) -> int:
        return 1

    def eval(self, x):
        return _cos(x)

    def derivative(self, i: int = 0) -> "FunctionSpec":
        return ProdSpec(PolySpec((-1,)), SinSpec())

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        (b,) = base
        coeffs: dict[MultiIndex, Number] = {}
        fact = 1
        for k in range(K + 1):
            if k > 0:
                fact *= k
            if b == 0:
                c = _SIN_CYCLE[(k + 1) % 4]
                if c:
                    coeffs[(k,)] = Fraction(c, fact)
            else:
                x = float(b) if isinstance(b, Fraction) else b
                cycle = (_cos(x), -_sin(x), -_cos(x), _sin(x))
                coeffs[(k,)] = cycle[k % 4] / fact
        return Jet(1, K, coeffs, base)


@dataclass(frozen=True)
class RecipPowSpec(FunctionSpec):
    """x -> x^(-power); power >= 1.  Pole at 0."""

    power: int = 1

    def __post_init__(self) -> None:
        if self.power < 1:
            raise ValueError("power must be >= 1")

    @property
    def dim(self) -> int:
        return 1

    def eval(self, x):
        if isinstance(x, np.ndarray):
            return x ** (-float(self.power))
        if x == 0:
            raise ZeroDivisionError("reciprocal of zero")
        if isinstance(x, (int, Fraction)):
            return Fraction(1) / Fraction(x) ** self.power
        return 1.0 / x**self.power

    def derivative(self, i: int = 0) -> "FunctionSpec":
        return ProdSpec(PolySpec((-self.power,)), RecipPowSpec(self.power + 1))

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        (b,) = base
        if b == 0:
            raise ZeroDivisionError("jet of reciprocal at a pole")
        k0 = self.power
        coeffs: dict[MultiIndex, Number] = {}
        for j in range(K + 1):
            mag = math.comb(k0 + j - 1, j)
            if isinstance(b, (int, Fraction)):
                val = Fraction((-1) ** j * mag, 1) / Fraction(b) ** (k0 + j)
            else:
                val = (-1) ** j * mag / b ** (k0 + j)
            coeffs[(j,)] = val
        return Jet(1, K, coeffs, base)


@dataclass(frozen=True)
class ComposeSpec(FunctionSpec):
    """outer o inner, with univariate outer."""

    outer: FunctionSpec
    inner: FunctionSpec

    def __post_init__(self) -> None:
        if self.outer.dim != 1:
            raise ValueError("outer spec must be univariate")

    @property
    def dim(self) -> int:
        return self.inner.dim

    def eval(self, *xs):
        return self.outer.eval(self.inner.eval(*xs))

    def derivative(self, i: int = 0) -> "FunctionSpec":
        return ProdSpec(
            ComposeSpec(self.outer.derivative(0), self.inner),
            self.inner.derivative(i),
        )

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        g = self.inner.jet(base, K)
        f = self.outer.jet((g.value,), K)
        return jet_compose(f, g)


@dataclass(frozen=True)
class SumSpec(FunctionSpec):
    left: FunctionSpec
    right: FunctionSpec

    def __post_init__(self) -> None:
        if self.left.dim != self.right.dim:
            raise ValueError("summands must share dimension")

    @property
    def dim(self) -> int:
        return self.left.dim

    def eval(self, *xs):
        return self.left.eval(*xs) + self.right.eval(*xs)

    def derivative(self, i: int = 0) -> "FunctionSpec":
        return SumSpec(self.left.derivative(i), self.right.derivative(i))

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        return jet_add(self.left.jet(base, K), self.right.jet(base, K))


@dataclass(frozen=True)
class ProdSpec(FunctionSpec):
    left: FunctionSpec
    right: FunctionSpec

    def __post_init__(self) -> None:
        if self.left.dim != self.right.dim:
            raise ValueError("factors must share dimension")

    @property
    def dim(self) -> int:
        return self.left.dim

    def eval(self, *xs):
        return self.left.eval(*xs) * self.right.eval(*xs)

    def derivative(self, i: int = 0) -> "FunctionSpec":
        return SumSpec(
            ProdSpec(self.left.derivative(i), self.right),
            ProdSpec(self.left, self.right.derivative(i)),
        )

    def jet(self, base: tuple[Number, ...], K: int) -> Jet:
        return jet_mul(self.left.jet(base, K), self.right.jet(base, K))


def _parse_number(tok: str) -> Number:
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        pass
    if "/" in tok:
        return Fraction(tok)
    return float(tok)


def _split_two(body: str) -> tuple[str, str]:
    # poly:/mvpoly: literals contain commas, so try each top-level comma
    # until both sides parse
    depth = 0
    candidates = []
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            candidates.append(i)
    for i in candidates:
        left, right = body[:i], body[i + 1 :]
        try:
            parse_spec(left)
            parse_spec(right)
        except (ValueError, ZeroDivisionError):
            continue
        return left, right
    raise ValueError(f"cannot split {body!r} into two specs")


def parse_spec(text: str) -> FunctionSpec:
    """Parse the CLI spec grammar into a FunctionSpec."""
    s = text.strip()
    if s == "exp":
        return ExpSpec()
    if s == "sin":
        return SinSpec()
    if s == "cos":
        return CosSpec()
    if s == "recip":
        return RecipPowSpec(1)
    if s.startswith("poly:"):
        coeffs = tuple(_parse_number(t) for t in s[len("poly:"):].split(","))
        return PolySpec(coeffs)
    if s.startswith("mvpoly:"):
        terms: dict[MultiIndex, Number] = {}
        dim = None
        for pair in s[len("mvpoly:"):].split(";"):
            expo_s, _, coeff_s = pair.rpartition(":")
            expo = tuple(int(t) for t in expo_s.split(","))
            if dim is None:
                dim = len(expo)
            elif len(expo) != dim:
                raise ValueError("inconsistent monomial dimensions")
            terms[expo] = terms.get(expo, 0) + _parse_number(coeff_s)
        if dim is None:
            raise ValueError("mvpoly needs at least one monomial")
        return MVPolySpec.from_dict(dim, terms)
    for name, cls in (("compose", ComposeSpec), ("sum", SumSpec), ("prod", ProdSpec)):
        if s.startswith(name + "(") and s.endswith(")"):
            left, right = _split_two(s[len(name) + 1 : -1])
            return cls(parse_spec(left), parse_spec(right))
    raise ValueError(f"unrecognized function spec: {text!r}")
