import math

import numpy as np
import pytest

from conftest import measure_spec_sups, oracle_pairs

from gevreykit.faadibruno import (
    CompositionBoundInput,
    fdb_derivative,
    lemma23_constant_search,
    lemma23_ratio,
    reciprocal_bound_components,
    reciprocal_log_bound,
    superposition_bound_components,
    superposition_log_bound,
)
from gevreykit.funcspec import (
    ComposeSpec,
    CosSpec,
    ExpSpec,
    PolySpec,
    RecipPowSpec,
    SinSpec,
    SumSpec,
)
from gevreykit.jets import jet_compose, jet_of, jet_partial
from gevreykit.multiindex import enumerate_decompositions, mi_of_order, mi_order
from gevreykit.sequences import DefiningSequence


def test_fdb_examples():
    f, g = PolySpec((0, 0, 1)), PolySpec((0, 0, 0, 1))
    assert fdb_derivative(f, g, (2,), (1,)) == 30
    assert fdb_derivative(ExpSpec(), PolySpec((0, 0, 1)), (2,), (0.0,)) == 2
    from conftest import mv

    assert fdb_derivative(f, mv(2, {(1, 1): 1}), (1, 1), (1, 1)) == 4
    assert fdb_derivative(f, g, (0,), (2,)) == 64


def test_fdb_order_limits():
    f, g = PolySpec((0, 0, 1)), PolySpec((0, 0, 0, 1))
    with pytest.raises(ValueError):
        fdb_derivative(f, g, (9,), (1,))
    from conftest import mv

    with pytest.raises(ValueError):
        fdb_derivative(f, mv(3, {(1, 1, 1): 1}), (3, 3, 1), (1, 1, 1))


def test_oracle_equivalence_catalog():
    # central correctness property: decomposition sum vs jet composition
    pairs = oracle_pairs()
    assert len(pairs) >= 20
    for f, g, at, exact in pairs:
        d = g.dim
        n_cap = 6
        g_jet = jet_of(g, at, n_cap)
        f_jet = jet_of(f, (g_jet.value,), n_cap)
        comp = jet_compose(f_jet, g_jet)
        for n in range(0, n_cap + 1):
            for alpha in mi_of_order(d, n):
                got = fdb_derivative(f, g, alpha, at)
                want = jet_partial(comp, alpha)
                if exact:
                    assert got == want, (f, g, alpha)
                else:
                    gw = complex(got)
                    ww = complex(want)
                    tol = 1e-9 * max(abs(ww), 1.0)
                    assert abs(gw - ww) <= tol, (f, g, alpha, gw, ww)


def test_exponent_identity_of_proof():
    # m^sigma + sum m_k |p_k|^sigma <= 2 |alpha|^sigma per decomposition
    cases = [(1, 10), (2, 7), (3, 5)]
    for sigma in (1.5, 2.0, 3.0):
        for d, n_cap in cases:
            for n in range(1, n_cap + 1):
                for alpha in mi_of_order(d, n):
                    for dec in enumerate_decompositions(alpha):
                        m = dec.total_multiplicity
                        lhs = float(m) ** sigma + sum(
                            mult * float(mi_order(p)) ** sigma
                            for p, mult in zip(dec.parts, dec.multiplicities)
                        )
                        assert lhs <= 2.0 * float(n) ** sigma + 1e-9


def test_lemma23_ratio_examples():
    seq = DefiningSequence(1, 2)
    # j = k all-ones is exactly 1
    for k in (1, 3, 6):
        assert lemma23_ratio(seq, k, (1,) * k).log_value == pytest.approx(0.0, abs=1e-12)
    v = lemma23_ratio(seq, 2, (2, 2)).to_real()
    assert math.isclose(v, (8 * 8 * 8) * 24 / 4**16, rel_tol=1e-9)
    # j = 1, parts = (k): ratio M_1/1! = 1
    assert lemma23_ratio(seq, 1, (5,)).log_value == pytest.approx(0.0, abs=1e-12)


def test_lemma23_fit_grid_and_stability():
    for tau in (0.5, 1.0, 2.0):
        for sigma in (1.5, 2.0, 3.0):
            seq = DefiningSequence(tau, sigma)
            f10 = lemma23_constant_search(seq, 10)
            f12 = lemma23_constant_search(seq, 12)
            assert f12.C >= 1.0
            assert abs(f12.C - f10.C) <= 0.01 * f10.C
            # zero violations at the fitted constant
            logc = math.log(f12.C)
            for k in range(1, 13):
                for dec in enumerate_decompositions((k,)):
                    parts = []
                    for p, mult in zip(dec.parts, dec.multiplicities):
                        parts.extend([p[0]] * mult)
                    r = lemma23_ratio(seq, len(parts), parts).log_value
                    assert r <= float(k) ** sigma * logc + 1e-9


def test_lemma23_tau_ordering():
    # larger tau strengthens the right side: fitted C no larger
    c1 = lemma23_constant_search(DefiningSequence(1, 2), 12).C
    c2 = lemma23_constant_search(DefiningSequence(2, 2), 12).C
    assert c2 <= c1 + 1e-12


def test_superposition_bound_monotone():
    base = CompositionBoundInput(1.0, 2.0, 1.0, 1.0, 2.0)
    b0 = superposition_log_bound(base, (3,)).log_value
    for kw in ({"h": 2.0}, {"h_prime": 2.0}, {"A": 3.0}, {"tau": 2.0}):
        args = {"tau": 1.0, "sigma": 2.0, "h": 1.0, "h_prime": 1.0, "A": 2.0}
        args.update(kw)
        b1 = superposition_log_bound(CompositionBoundInput(**args), (3,)).log_value
        assert b1 > b0, kw


def test_superposition_alpha_one_structure():
    inp = CompositionBoundInput(1.0, 2.0, 1.0, 1.0, 2.0)
    parts = superposition_bound_components(inp, (1,))
    # |alpha| = 1: growth census collapses (ln 1 = 0, msum = 2^0)
    assert parts["growth"] == 0.0
    assert parts["msum"] == 0.0
    assert math.isclose(parts["amplitude"], 2 * math.log(2.0))


DOMINATION_PAIRS = [
    (ExpSpec(), SinSpec()),
    (SinSpec(), PolySpec((0, 0, 1))),
    (ExpSpec(), PolySpec((0, 0, 0.5))),
    (PolySpec((0, 0, 1)), SinSpec()),
    (CosSpec(), PolySpec((0.1, 1, 0.2))),
    (ExpSpec(), CosSpec()),
]


def certified_input(f, g, xs, n_max, tau=1.0, sigma=2.0):
    seq = DefiningSequence(tau, sigma)
    g_sups = measure_spec_sups(g, xs, n_max)
    image = sorted(float(g.eval(float(x))) for x in xs)
    f_sups = measure_spec_sups(f, image, n_max)
    logM = [seq.log_M(n) for n in range(n_max + 1)]
    A = 1.0
    for sups in (g_sups, f_sups):
        for n, s in enumerate(sups):
            if s > 0:
                A = max(A, s / math.exp(logM[n]))
    return CompositionBoundInput(tau, sigma, 1.0, 1.0, A)


def test_superposition_domination_on_catalog():
    xs = np.linspace(-1.0, 1.0, 41)
    n_max = 8
    assert len(DOMINATION_PAIRS) >= 5
    for f, g in DOMINATION_PAIRS:
        inp = certified_input(f, g, xs, n_max)
        comp = ComposeSpec(f, g)
        sups = measure_spec_sups(comp, xs, n_max)
        for n in range(1, n_max + 1):
            bound = superposition_log_bound(inp, (n,)).log_value
            measured = math.log(sups[n]) if sups[n] > 0 else float("-inf")
            assert measured <= bound + 1e-9, (f, g, n, measured, bound)


RECIP_CASES = [
    (SumSpec(PolySpec((2,)), SinSpec()), 1.0),
    (SumSpec(PolySpec((2,)), CosSpec()), 1.0),
    (PolySpec((2, 0, 1)), 2.0),
]


def test_reciprocal_domination():
    xs = np.linspace(-1.0, 1.0, 41)
    n_max = 8
    seq = DefiningSequence(1, 2)
    for phi, min_abs in RECIP_CASES:
        sups_phi = measure_spec_sups(phi, xs, n_max)
        A = 1.0
        for n, s in enumerate(sups_phi):
            if s > 0:
                A = max(A, s / math.exp(seq.log_M(n)))
        inp = CompositionBoundInput(1.0, 2.0, 1.0, 1.0, A)
        recip = ComposeSpec(RecipPowSpec(1), phi)
        sups = measure_spec_sups(recip, xs, n_max)
        for n in range(1, n_max + 1):
            bound = reciprocal_log_bound(inp, (n,), min_abs).log_value
            measured = math.log(sups[n]) if sups[n] > 0 else float("-inf")
            assert measured <= bound + 1e-9, (phi, n, measured, bound)


def test_reciprocal_alpha_zero_and_min_abs_effect():
    inp = CompositionBoundInput(1.0, 2.0, 1.0, 1.0, 1.0)
    assert reciprocal_log_bound(inp, (0,), 2.0).to_real() == pytest.approx(0.5)
    # doubling min_abs shrinks the amplitude term, which carries the
    # (|alpha|+1) multiplier, by at least (|alpha|+1) ln 2
    n = 4
    c1 = reciprocal_bound_components(inp, (n,), 0.5)
    c2 = reciprocal_bound_components(inp, (n,), 1.0)
    amp_drop = (n + 1) * (c1["reciprocal_amplitude"] - c2["reciprocal_amplitude"])
    assert amp_drop >= (n + 1) * math.log(2.0) - 1e-9


def test_sigma_one_gevrey_boundary():
    # sigma = 1 accepted when tau >= 1, rejected when tau < 1
    CompositionBoundInput(1.0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        CompositionBoundInput(0.5, 1.0, 1.0, 1.0, 1.0)
