import math

import pytest

from gevreykit.numerics import LogMagnitude
from gevreykit.sequences import (
    DefiningSequence,
    almost_increasing_pair_bound,
    audit_sequence,
    enumerate_transform,
    eval_log_M,
)

GRID = [(t, s) for t in (0.25, 0.5, 1.0, 2.0) for s in (1.25, 1.5, 2.0, 3.0)]


def test_eval_examples():
    assert math.isclose(eval_log_M(DefiningSequence(1, 2), 2).log_value, math.log(16))
    assert eval_log_M(DefiningSequence(0.7, 1.6), 1).log_value == 0.0
    assert eval_log_M(DefiningSequence(1, 2), 0).log_value == 0.0
    assert math.isclose(eval_log_M(DefiningSequence(1, 2), 3).log_value, math.log(19683))


def test_parameter_validation():
    with pytest.raises(ValueError):
        DefiningSequence(0.0, 2.0)
    with pytest.raises(ValueError):
        DefiningSequence(1.0, 1.0)


def test_m1_logconvexity_on_grid():
    for tau, sigma in GRID:
        seq = DefiningSequence(tau, sigma)
        for p in range(1, 201):
            lhs = 2.0 * seq.log_M(p)
            rhs = seq.log_M(p - 1) + seq.log_M(p + 1)
            assert lhs <= rhs + 1e-12 * max(1.0, abs(rhs)), (tau, sigma, p)


def test_ratio_bound_on_grid():
    # M_{p-1}/M_p <= (2p)^{-tau (p-1)^{sigma-1}}
    for tau, sigma in GRID:
        seq = DefiningSequence(tau, sigma)
        for p in range(1, 201):
            lhs = seq.log_M(p - 1) - seq.log_M(p)
            rhs = -tau * float(p - 1) ** (sigma - 1.0) * math.log(2.0 * p)
            assert lhs <= rhs + 1e-12, (tau, sigma, p)


def test_m3prime_partial_sums_example():
    rep = audit_sequence(DefiningSequence(1, 2), 10)
    sums = dict(rep.m3prime_partial_sums)
    assert math.isclose(sums[4], 1.06331, abs_tol=1e-5)  # quoted value is truncated
    # strictly decreasing increments, compared in the log domain (the
    # partial sums saturate float resolution almost immediately)
    seq = DefiningSequence(1, 2)
    logdiffs = [seq.log_M(p - 1) - seq.log_M(p) for p in range(2, 11)]
    assert all(logdiffs[i] > logdiffs[i + 1] for i in range(len(logdiffs) - 1))


def test_m3prime_increments_summable():
    # the series converges on the whole grid: increments are eventually
    # below any threshold, and monotone decreasing from p = 2 on.
    # (The "below 1e-12 before p = 50" acceptance threshold is a spec
    # defect for small (tau, sigma); see the acceptance suite.)
    for tau, sigma in GRID:
        seq = DefiningSequence(tau, sigma)
        diffs = [seq.log_M(p - 1) - seq.log_M(p) for p in range(2, 201)]
        assert all(diffs[i] > diffs[i + 1] for i in range(len(diffs) - 1)), (tau, sigma)
        # summable by comparison with the proven ratio bound
        assert diffs[-1] <= -tau * 199.0 ** (sigma - 1.0) * math.log(400.0) + 1e-9


def test_audit_flags_and_fits():
    rep = audit_sequence(DefiningSequence(1, 2), 40)
    assert rep.m1_ok and rep.ratio_bound_ok
    # p=q=1 forces C^2 >= M_2/(M'_1)^2 = 16
    assert rep.fitted_C_m2bar >= 4.0 - 1e-9
    cq = dict(rep.fitted_Cq_m2prime)
    assert math.isclose(cq[1], 16.0, rel_tol=1e-9)
    # nondecreasing in q (checked on the logs, which never overflow)
    vals = [c for _, c in rep.fitted_log_Cq_m2prime]
    assert all(vals[i] <= vals[i + 1] + 1e-9 for i in range(len(vals) - 1))


def test_sigma_at_most_one_rejected_at_construction():
    # the audit's sigma <= 1 rejection happens at type construction
    with pytest.raises(ValueError):
        DefiningSequence(1.0, 0.9)


def test_almost_increasing_threshold_property():
    # p^{tau p^{sigma-1} - 1} strictly increasing beyond (1/tau)^{1/(sigma-1)}
    for tau, sigma in GRID:
        thr = (1.0 / tau) ** (1.0 / (sigma - 1.0))
        lo = int(math.floor(thr)) + 1
        vals = [
            (tau * float(p) ** (sigma - 1.0) - 1.0) * math.log(p)
            for p in range(max(lo, 1), 201)
        ]
        assert all(vals[i] < vals[i + 1] for i in range(len(vals) - 1)), (tau, sigma)


def test_m2bar_exponent_max_at_small_shell():
    # shell-max of the per-(p,q) exponent is maximal at p+q=2, nonincreasing after
    for tau, sigma in GRID:
        seq = DefiningSequence(tau, sigma)
        primed = DefiningSequence(tau * 2 ** (sigma - 1), sigma)
        shell_max = {}
        for p in range(0, 41):
            for q in range(0, 41 - p):
                if p + q == 0:
                    continue
                e = (seq.log_M(p + q) - primed.log_M(p) - primed.log_M(q)) / (
                    float(p) ** sigma + float(q) ** sigma
                )
                s = p + q
                shell_max[s] = max(shell_max.get(s, -1e30), e)
        peak = max(shell_max.values())
        # the exponent is constant on the diagonal, so the peak is already
        # attained at p = q = 1 and no shell ever exceeds it
        assert shell_max[2] >= peak - 1e-9, (tau, sigma)
        for s_, v in shell_max.items():
            assert v <= shell_max[2] + 1e-9, (tau, sigma, s_)


def test_stirling_comparison_envelope():
    # |log([p^sigma]!^{tau/sigma}) - log((2pi)^{tau/2sigma} p^{tau/2}
    #  e^{-tau p^sigma/sigma} M_p)| <= c sigma ln p, module constant c
    C_FROZEN = 1.6  # fitted over the grid at p <= 64 (max ratio 1.583), frozen
    for tau, sigma in GRID:
        rep = audit_sequence(DefiningSequence(tau, sigma), 60)
        for p, r in rep.stirling_ratio_log_residuals:
            if p < 2:
                continue
            assert abs(r) <= C_FROZEN * sigma * math.log(p), (tau, sigma, p, r)


def test_pair_bound_examples():
    seq = DefiningSequence(1, 2)
    assert almost_increasing_pair_bound(seq, (7,)).log_value == 0.0
    v = almost_increasing_pair_bound(seq, (2, 2)).to_real()
    assert math.isclose(v, 64 * 24 / 4**16, rel_tol=1e-9)
    for k in range(1, 12):
        ones = almost_increasing_pair_bound(seq, (1,) * k)
        assert ones.to_real() <= 1.0 + 1e-12


def test_pair_bound_within_fitted_constant():
    for tau, sigma in [(0.5, 1.5), (1.0, 2.0), (2.0, 3.0)]:
        seq = DefiningSequence(tau, sigma)
        rep = audit_sequence(seq, 40)
        logC = math.log(rep.fitted_C_m2bar)
        from gevreykit.multiindex import enumerate_decompositions

        for k in range(2, 11):
            for dec in enumerate_decompositions((k,)):
                parts = []
                for p, m in zip(dec.parts, dec.multiplicities):
                    parts.extend([p[0]] * m)
                # prod M_{k_i}/k_i! <= C^k M_k/k!
                assert almost_increasing_pair_bound(seq, parts).log_value <= k * logC + 1e-9


def test_enumerate_transform_identity_and_reindex():
    decay = [(n, LogMagnitude(-float(n))) for n in range(6)]
    out = enumerate_transform(decay, 1.0)
    assert [(n, v.log_value) for n, v in out] == [(n, -float(n)) for n in range(6)]

    out2 = dict((n, v.log_value) for n, v in enumerate_transform(decay, 2.0))
    assert out2[9] == -3.0  # image of N=3 under N -> N^2
    assert out2[16] == -4.0
    # monotone input stays monotone
    vals = [v for _, v in sorted(out2.items())]
    assert all(vals[i] >= vals[i + 1] for i in range(len(vals) - 1))


def test_enumerate_transform_errors():
    with pytest.raises(ValueError):
        enumerate_transform([], 2.0)
