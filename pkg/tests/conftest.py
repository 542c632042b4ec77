"""Shared fixtures and catalogs for the test suite."""

from fractions import Fraction

from gevreykit.funcspec import (
    ComposeSpec,
    CosSpec,
    ExpSpec,
    MVPolySpec,
    PolySpec,
    ProdSpec,
    RecipPowSpec,
    SinSpec,
    SumSpec,
)


def smooth_bump(scale: float = 1.0) -> ComposeSpec:
    """exp(-1/(1 - (x/scale)^2)), supported on (-scale, scale)."""
    return ComposeSpec(
        ExpSpec(),
        ProdSpec(
            PolySpec((-1,)),
            ComposeSpec(RecipPowSpec(1), PolySpec((1, 0, -1.0 / scale**2))),
        ),
    )


def mv(d, terms):
    return MVPolySpec.from_dict(d, terms)


def oracle_pairs():
    """(f, g, at, exact) catalog for chain-rule/jet equivalence, d <= 3."""
    F = Fraction
    pairs = [
        # exact rational cases
        (PolySpec((0, 0, 1)), PolySpec((0, 0, 0, 1)), (F(1),), True),
        (PolySpec((0, 0, 0, 1)), PolySpec((1, 0, 1)), (F(1, 2),), True),
        (PolySpec((1, 2, 3)), PolySpec((0, 1, 1)), (F(2, 3),), True),
        (RecipPowSpec(1), PolySpec((2, 0, 1)), (F(1, 2),), True),
        (PolySpec((0, 1, 1)), PolySpec((0, F(1, 3), 0, 1)), (F(1, 5),), True),
        (PolySpec((0, 0, 1)), mv(2, {(1, 1): 1}), (F(1), F(1)), True),
        (PolySpec((0, 0, 1)), mv(2, {(2, 0): 1, (0, 2): 1}), (F(1, 2), F(1, 3)), True),
        (PolySpec((0, 1, 0, 1)), mv(2, {(1, 1): 1, (0, 2): 1}), (F(1), F(1, 2)), True),
        (RecipPowSpec(1), mv(2, {(0, 0): 1, (2, 0): 1, (0, 2): 1}), (F(1, 2), F(1, 2)), True),
        (PolySpec((0, 0, 1)), mv(3, {(1, 1, 1): 1}), (F(1), F(1), F(1)), True),
        (PolySpec((1, 1, 1)), mv(3, {(1, 0, 0): 1, (0, 1, 0): 2, (0, 0, 1): 3}), (F(1, 2), F(1, 3), F(1, 5)), True),
        (PolySpec((0, 0, 0, 1)), mv(3, {(2, 0, 0): 1, (0, 1, 1): 1}), (F(1), F(1, 2), F(1)), True),
        # transcendental cases
        (ExpSpec(), PolySpec((0, 0, 1)), (0.0,), False),
        (ExpSpec(), SinSpec(), (0.3,), False),
        (SinSpec(), ExpSpec(), (0.2,), False),
        (CosSpec(), PolySpec((0, 0, 0, 1)), (0.7,), False),
        (PolySpec((0, 0, 1)), SinSpec(), (0.5,), False),
        (ComposeSpec(ExpSpec(), PolySpec((0, 0.5))), SumSpec(SinSpec(), PolySpec((1, 0, 1))), (0.4,), False),
        (RecipPowSpec(1), SumSpec(PolySpec((2,)), SinSpec()), (0.4,), False),
        (PolySpec((0, 1, 1)), CosSpec(), (1.0,), False),
        (ExpSpec(), mv(2, {(1, 1): 1}), (0.3, 0.4), False),
        (SinSpec(), mv(2, {(2, 0): 1, (0, 1): 1}), (0.2, 0.1), False),
        (ExpSpec(), mv(3, {(1, 0, 0): 1, (0, 1, 1): 1}), (0.1, 0.2, 0.3), False),
        (SinSpec(), mv(3, {(1, 1, 1): 1}), (0.5, 0.5, 0.5), False),
    ]
    return pairs


def measure_spec_sups(spec, xs, n_max):
    """sup over the points of |d^n spec| for n = 0..n_max (univariate)."""
    from gevreykit.jets import jet_of, jet_partial

    sups = [0.0] * (n_max + 1)
    for x in xs:
        j = jet_of(spec, (float(x),), n_max)
        for n in range(n_max + 1):
            sups[n] = max(sups[n], abs(complex(jet_partial(j, (n,)))))
    return sups
