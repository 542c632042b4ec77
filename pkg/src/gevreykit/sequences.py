"""The defining sequences p^{tau p^sigma} and their property audits.

The sequence M_p = p^{tau p^sigma} (M_0 = 1) with tau > 0, sigma > 1 is
log-convex, decays summably in ratio, and satisfies two splitting
inequalities whose constants are not pinned down in closed form:

    M_{p+q} <= C^{p^sigma + q^sigma} M_p' M_q'   (primed index tau 2^{sigma-1})
    M_{p+q} <= C_q^{p^sigma} M_p                 (one constant per shift q)

``audit_sequence`` checks everything checkable and fits the minimal
constants over the scanned range, reporting arg-max witnesses so callers
can see whether the fit has stabilized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .numerics import LogMagnitude, log_factorial


@dataclass(frozen=True)
class DefiningSequence:
    """Parameters (tau, sigma) of M_p = p^{tau p^sigma}; M_0 = 1."""

    tau: float
    sigma: float

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.sigma <= 1:
            raise ValueError("sigma must exceed 1")

    def log_M(self, p: int) -> float:
        """ln M_p = tau * p^sigma * ln p (0 for p = 0, 1)."""
        if p < 0:
            raise ValueError("p must be a natural number")
        if p <= 1:
            return 0.0
        return self.tau * (float(p) ** self.sigma) * math.log(p)


def eval_log_M(seq: DefiningSequence, p: int) -> LogMagnitude:
    """M_p as a LogMagnitude."""
    return LogMagnitude(seq.log_M(p))


@dataclass
class SequenceAuditReport:
    """Everything audit_sequence measures over 1 <= p <= p_max."""

    tau: float
    sigma: float
    p_max: int
    m1_ok: bool
    ratio_bound_ok: bool
    m3prime_partial_sums: list[tuple[int, float]]
    almost_increasing_from: int
    fitted_C_m2bar: float
    fitted_C_m2bar_argmax: tuple[int, int]
    # C_q grows like exp(q^sigma log q): kept in the log domain
    fitted_log_Cq_m2prime: list[tuple[int, float]]
    fitted_Cq_m2prime_argmax: list[tuple[int, int]]
    stirling_ratio_log_residuals: list[tuple[int, float]] = field(default_factory=list)

    @property
    def fitted_Cq_m2prime(self) -> list[tuple[int, float]]:
        """(q, C_q) with overflow saturating to inf; see the log twin."""
        out = []
        for q, lc in self.fitted_log_Cq_m2prime:
            out.append((q, math.exp(lc) if lc < 700 else float("inf")))
        return out

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "sigma": self.sigma,
            "p_max": self.p_max,
            "m1_ok": self.m1_ok,
            "ratio_bound_ok": self.ratio_bound_ok,
            "m3prime_partial_sums": [[p, s] for p, s in self.m3prime_partial_sums],
            "almost_increasing_from": self.almost_increasing_from,
            "fitted_C_m2bar": self.fitted_C_m2bar,
            "fitted_C_m2bar_argmax": list(self.fitted_C_m2bar_argmax),
            "fitted_Cq_m2prime": [
                [q, math.exp(lc) if lc < 700 else None]
                for q, lc in self.fitted_log_Cq_m2prime
            ],
            "fitted_log_Cq_m2prime": [
                [q, lc] for q, lc in self.fitted_log_Cq_m2prime
            ],
            "fitted_Cq_m2prime_argmax": [list(t) for t in self.fitted_Cq_m2prime_argmax],
            "stirling_ratio_log_residuals": [
                [p, r] for p, r in self.stirling_ratio_log_residuals
            ],
        }


# ln[p^sigma]! for large p^sigma is the audit's only superlinear cost;
# capping the reported Stirling-comparison range keeps it desk-scale.
_STIRLING_P_CAP = 64


def audit_sequence(seq: DefiningSequence, p_max: int, q_max: int = 10) -> SequenceAuditReport:
    """Audit M_p over 1 <= p <= p_max and fit the unnamed constants.

    Checks log-convexity (M.1) and the ratio bound
    M_{p-1}/M_p <= (2p)^{-tau (p-1)^{sigma-1}}, accumulates the partial
    sums of sum M_{p-1}/M_p, locates the index from which
    (M_p/p!)^{1/p} is nondecreasing, fits the minimal constants of the
    two splitting inequalities, and compares [p^sigma]!^{tau/sigma}
    against its Stirling-predicted equivalent of M_p.
    """
    if p_max < 3:
        raise ValueError("audit_sequence requires p_max >= 3")
    tau, sigma = seq.tau, seq.sigma
    logM = [seq.log_M(p) for p in range(p_max + 2)]

    m1_ok = all(
        2.0 * logM[p] <= logM[p - 1] + logM[p + 1] + 1e-12 * max(1.0, abs(logM[p + 1]))
        for p in range(1, p_max + 1)
    )

    ratio_bound_ok = all(
        logM[p - 1] - logM[p]
        <= -tau * float(p - 1) ** (sigma - 1.0) * math.log(2.0 * p) + 1e-12
        for p in range(1, p_max + 1)
    )

    partial_sums: list[tuple[int, float]] = []
    acc = 0.0
    for p in range(1, p_max + 1):
        acc += math.exp(logM[p - 1] - logM[p])
        partial_sums.append((p, acc))

    # first index from which a_p = (ln M_p - ln p!)/p is nondecreasing
    a = [
        (logM[p] - log_factorial(p).log_value) / p for p in range(1, p_max + 1)
    ]
    almost_from = 1
    for i in range(len(a) - 1):
        if a[i + 1] < a[i] - 1e-15:
            almost_from = i + 2  # a index i corresponds to p = i+1
    ai_from = almost_from

    # (M.2)-bar: minimal C with M_{p+q} <= C^{p^s+q^s} M'_p M'_q, primed tau
    primed = DefiningSequence(tau * 2.0 ** (sigma - 1.0), sigma)
    best = float("-inf")
    best_pq = (1, 1)
    for p in range(0, p_max + 1):
        for q in range(p, p_max + 1 - p):
            if p == 0 and q == 0:
                continue
            expo = float(p) ** sigma + float(q) ** sigma
            val = (logM[p + q] - primed.log_M(p) - primed.log_M(q)) / expo
            if val > best:
                best = val
                best_pq = (p, q)
    fitted_C_m2bar = math.exp(max(best, 0.0))

    # (M.2)'-bar: per q, minimal C_q with M_{p+q} <= C_q^{p^sigma} M_p, p >= 1
    cq_list: list[tuple[int, float]] = []
    cq_arg: list[tuple[int, int]] = []
    for q in range(0, min(q_max, p_max - 1) + 1):
        best_q = float("-inf")
        arg_p = 1
        for p in range(1, p_max + 1 - q):
            val = (logM[p + q] - logM[p]) / float(p) ** sigma
            if val > best_q:
                best_q = val
                arg_p = p
        cq_list.append((q, max(best_q, 0.0)))
        cq_arg.append((q, arg_p))

    residuals: list[tuple[int, float]] = []
    for p in range(1, min(p_max, _STIRLING_P_CAP) + 1):
        n = math.floor(float(p) ** sigma)
        lhs = (tau / sigma) * log_factorial(n).log_value
        rhs = (
            (tau / (2.0 * sigma)) * math.log(2.0 * math.pi)
            + (tau / 2.0) * math.log(p)
            - tau * float(p) ** sigma / sigma
            + logM[p]
        )
        residuals.append((p, lhs - rhs))

    return SequenceAuditReport(
        tau=tau,
        sigma=sigma,
        p_max=p_max,
        m1_ok=m1_ok,
        ratio_bound_ok=ratio_bound_ok,
        m3prime_partial_sums=partial_sums,
        almost_increasing_from=ai_from,
        fitted_C_m2bar=fitted_C_m2bar,
        fitted_C_m2bar_argmax=best_pq,
        fitted_log_Cq_m2prime=cq_list,
        fitted_Cq_m2prime_argmax=cq_arg,
        stirling_ratio_log_residuals=residuals,
    )


def almost_increasing_pair_bound(
    seq: DefiningSequence, parts: list[int] | tuple[int, ...]
) -> LogMagnitude:
    """log of [prod_i M_{k_i}/k_i!] / [M_k/k!] with k = sum(parts).

    The ratio is at most C^k for the constant fitted by audit_sequence.
    """
    if len(parts) == 0:
        raise ValueError("parts must be nonempty")
    if any(k < 1 for k in parts):
        raise ValueError("parts must be positive")
    k = sum(parts)
    num = sum(seq.log_M(ki) - log_factorial(ki).log_value for ki in parts)
    den = seq.log_M(k) - log_factorial(k).log_value
    return LogMagnitude(num - den)


def enumerate_transform(
    decay: list[tuple[int, LogMagnitude]], sigma: float
) -> list[tuple[int, LogMagnitude]]:
    """Re-index a decay profile by N -> ceil(N^sigma).

    Image indices carry the input values; gaps are filled by linear
    interpolation in the log domain (conservative for convex profiles).
    sigma = 1 is accepted and acts as the identity.
    """
    if not decay:
        raise ValueError("enumerate_transform requires a nonempty profile")
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    pairs = sorted(decay)
    ns = [n for n, _ in pairs]
    if ns != list(range(ns[0], ns[0] + len(ns))):
        raise ValueError("profile indices must be contiguous")

    image: list[tuple[int, float]] = []
    for n, v in pairs:
        m = math.ceil(float(n) ** sigma - 1e-9) if n > 0 else 0
        image.append((m, v.log_value))

    out: list[tuple[int, LogMagnitude]] = []
    for (m0, v0), (m1, v1) in zip(image, image[1:]):
        out.append((m0, LogMagnitude(v0)))
        for m in range(m0 + 1, m1):
            if v0 == float("-inf") or v1 == float("-inf"):
                interp = float("-inf")
            else:
                t = (m - m0) / (m1 - m0)
                interp = v0 + t * (v1 - v0)
            out.append((m, LogMagnitude(interp)))
    out.append((image[-1][0], LogMagnitude(image[-1][1])))
    return out
