"""Seminorms on derivative-growth data and recovery of (tau, sigma, h).

Growth data is the map n -> log sup_{|alpha| = n, x in K} |d^alpha phi|.
Membership of phi in the (tau, sigma, h) class shows up as boundedness of

    log sup |d^alpha phi| - n^sigma ln h - tau n^sigma ln n

over n, and the inverse problem (find the parameters from data) is a
small constrained least-squares fit per candidate sigma.  sigma is fit
over a finite grid only: the basis {n^sigma, n^sigma ln n} is nearly
collinear across nearby sigma values, so a continuous fit is
ill-conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import LogMagnitude, log_factorial

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class DerivativeGrowthData:
    """entries[n] = log of sup over |alpha| = n of sup_K |d^alpha phi|.

    Orders form a contiguous range 0..n_max; identically vanishing
    derivative levels carry -inf.  source is one of
    'measured-on-grid' | 'synthetic' | 'closed-form'.
    """

    entries: tuple[float, ...]
    source: str = "synthetic"

    def __post_init__(self) -> None:
        if len(self.entries) == 0:
            raise ValueError("growth data needs at least order 0")
        if any(v == float("inf") or v != v for v in self.entries):
            raise ValueError("growth entries must be finite or -inf")

    @property
    def n_max(self) -> int:
        return len(self.entries) - 1

    def log_sup(self, n: int) -> float:
        return self.entries[n]


def synthetic_growth(
    tau: float, sigma: float, h: float = 1.0, A: float = 1.0, n_max: int = 24
) -> DerivativeGrowthData:
    """Data lying exactly on the (tau, sigma, h, A) envelope."""
    vals = []
    for n in range(n_max + 1):
        ns = float(n) ** sigma if n else 0.0
        vals.append(math.log(A) + ns * math.log(h) + (tau * ns * math.log(n) if n > 1 else 0.0))
    return DerivativeGrowthData(tuple(vals), source="synthetic")


def seminorm_log(
    data: DerivativeGrowthData, tau: float, sigma: float, h: float
) -> LogMagnitude:
    """log of the seminorm: max over n of log sup - n^sigma ln h - ln M_n."""
    if h <= 0:
        raise ValueError("h must be positive")
    best = _NEG_INF
    for n, v in enumerate(data.entries):
        if v == _NEG_INF:
            continue
        ns = float(n) ** sigma if n else 0.0
        growth = tau * ns * math.log(n) if n > 1 else 0.0
        best = max(best, v - ns * math.log(h) - growth)
    return LogMagnitude(best)


def _h_interval(s_values: list[float]) -> tuple[float, float] | None:
    """[h_min, inf) from the running normalized excess, or None when the
    excess is still climbing divergently at the data horizon.

    A sequence increasing toward a finite limit has increments decaying
    faster than 1/n (summable); the empty verdict requires the trailing
    increments to decay with log-log slope > -1.
    """
    finite = [(n + 1, s) for n, s in enumerate(s_values) if s != _NEG_INF]
    if not finite:
        return (0.0, float("inf"))
    ns = [n for n, _ in finite]
    ss = [s for _, s in finite]
    arg = max(range(len(ss)), key=lambda i: ss[i])
    climbing = False
    if arg >= len(ss) - 2 and len(ss) >= 7:
        dn = [(ns[i + 1], ss[i + 1] - ss[i]) for i in range(len(ss) - 6, len(ss) - 1)]
        if all(d > 0 for _, d in dn):
            xs = np.log([n for n, _ in dn])
            ys = np.log([d for _, d in dn])
            slope = float(np.polyfit(xs, ys, 1)[0])
            climbing = slope > -1.0
    if climbing:
        return None
    h_min = math.exp(ss[arg]) if ss[arg] != _NEG_INF else 0.0
    return (h_min, float("inf"))


def seminorm_equivalence_gap(
    data: DerivativeGrowthData, tau: float, sigma: float
) -> tuple[tuple[float, float] | None, tuple[float, float] | None]:
    """h-intervals certifying finiteness of the two seminorm forms.

    The first form measures against h^{n^sigma} M_n, the second against
    h^{n^sigma} [n^sigma]!^{tau/sigma}; the intervals agree up to the
    comparison constant between M_n and the floored factorial power.
    """
    s1, s2 = [], []
    for n, v in enumerate(data.entries):
        if n == 0:
            continue
        if v == _NEG_INF:
            s1.append(_NEG_INF)
            s2.append(_NEG_INF)
            continue
        ns = float(n) ** sigma
        growth = tau * ns * math.log(n) if n > 1 else 0.0
        s1.append((v - growth) / ns)
        fl = math.floor(ns)
        s2.append((v - (tau / sigma) * log_factorial(fl).log_value) / ns)
    return _h_interval(s1), _h_interval(s2)


@dataclass(frozen=True)
class RegularityFit:
    tau_hat: float
    sigma_hat: float
    h_hat: float
    A_hat: float
    residuals: tuple[float, ...]
    admissible: bool
    degenerate: bool = False

    def envelope(self, n: int) -> float:
        ns = float(n) ** self.sigma_hat if n else 0.0
        growth = self.tau_hat * ns * math.log(n) if n > 1 else 0.0
        return math.log(self.A_hat) + ns * math.log(self.h_hat) + growth


def fit_regularity(
    data: DerivativeGrowthData,
    sigma_grid: list[float] | tuple[float, ...],
    margin: float = 0.05,
) -> RegularityFit:
    """Least-squares fit of log sup against {1, n^sigma, n^sigma ln n}.

    The n^sigma ln n coefficient (tau) is constrained nonnegative; with a
    single bound constraint the clamp-and-refit step is the exact KKT
    solution.  Returns the grid sigma minimizing the residual norm.
    Admissible means the data never exceeds the fitted envelope by more
    than the margin (scaled by the data span).
    """
    if any(s <= 1 for s in sigma_grid):
        raise ValueError("sigma grid must lie in (1, inf)")
    finite = [(n, v) for n, v in enumerate(data.entries) if v != _NEG_INF]
    if len(finite) < 4:
        if all(n == 0 for n, _ in finite) or not finite:
            a = finite[0][1] if finite else _NEG_INF
            return RegularityFit(
                tau_hat=0.0,
                sigma_hat=float(sigma_grid[0]),
                h_hat=1.0,
                A_hat=math.exp(a) if a != _NEG_INF else 0.0,
                residuals=(),
                admissible=True,
                degenerate=True,
            )
        raise ValueError("degenerate data: fewer than 4 distinct orders")
    if data.n_max < 8:
        raise ValueError("fit requires n_max >= 8")

    ns = np.array([n for n, _ in finite], dtype=float)
    ys = np.array([v for _, v in finite], dtype=float)
    span = max(1.0, float(ys.max() - ys.min()))
    tol = margin * span

    best = None
    for sigma in sigma_grid:
        pow_ns = ns**sigma
        logn = np.where(ns > 1, np.log(np.maximum(ns, 1.0)), 0.0)
        X = np.column_stack([np.ones_like(ns), pow_ns, pow_ns * logn])
        coef, *_ = np.linalg.lstsq(X, ys, rcond=None)
        if coef[2] < 0.0:
            X2 = X[:, :2]
            c2, *_ = np.linalg.lstsq(X2, ys, rcond=None)
            coef = np.array([c2[0], c2[1], 0.0])
        resid = ys - X @ coef
        norm = float(np.sqrt(np.mean(resid**2)))
        if best is None or norm < best[0]:
            best = (norm, float(sigma), coef, resid)

    _, sigma_hat, coef, resid = best
    admissible = bool(np.max(resid) <= tol)
    return RegularityFit(
        tau_hat=float(coef[2]),
        sigma_hat=sigma_hat,
        h_hat=math.exp(float(coef[1])),
        A_hat=math.exp(float(coef[0])),
        residuals=tuple(float(r) for r in resid),
        admissible=admissible,
        degenerate=False,
    )


def measure_derivative_growth(
    values: np.ndarray,
    spacing: float | tuple[float, ...],
    n_max: int,
    norm: str = "sup",
) -> DerivativeGrowthData:
    """Growth data from grid samples by iterated centered differences.

    norm is 'sup' or 'l2' (the discrete L2 norm over the grid; the two
    seminorm forms are equivalent up to constants that are not tracked).
    Orders whose measured magnitude falls below 100x the estimated
    roundoff amplification are dropped (the finite-difference value is
    no longer reliable there).
    """
    if norm not in ("sup", "l2"):
        raise ValueError("norm must be 'sup' or 'l2'")
    arr = np.asarray(values, dtype=float)
    d = arr.ndim
    if isinstance(spacing, (int, float)):
        spacing = (float(spacing),) * d
    cellvol = float(np.prod(spacing))
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0

    def centered(a: np.ndarray, axis: int) -> np.ndarray:
        sl_hi = [slice(None)] * d
        sl_lo = [slice(None)] * d
        sl_hi[axis] = slice(2, None)
        sl_lo[axis] = slice(None, -2)
        return (a[tuple(sl_hi)] - a[tuple(sl_lo)]) / (2.0 * spacing[axis])

    entries: list[float] = []
    h_min = min(spacing)
    for n in range(n_max + 1):
        sup = 0.0
        from .multiindex import mi_of_order

        ok = True
        for alpha in mi_of_order(d, n):
            a = arr
            for axis, k in enumerate(alpha):
                for _ in range(k):
                    if a.shape[axis] < 3:
                        ok = False
                        break
                    a = centered(a, axis)
                if not ok:
                    break
            if not ok:
                break
            if a.size:
                if norm == "sup":
                    sup = max(sup, float(np.max(np.abs(a))))
                else:
                    sup = max(sup, float(np.sqrt(np.sum(np.abs(a) ** 2) * cellvol)))
        if not ok:
            break
        noise = scale * 2.2e-16 * (1.0 / h_min) ** n
        if n > 0 and sup < 100.0 * noise:
            break
        entries.append(math.log(sup) if sup > 0 else _NEG_INF)
    return DerivativeGrowthData(tuple(entries), source="measured-on-grid")
