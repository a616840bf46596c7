"""Gap lengths, the second-order coefficient correction, and residual reports.

The leading term of the n-th gap length is twice the modulus of the n-th
Fourier coefficient; the correction rho(n) sharpens it.  Everything here
is an exact finite sum over the potential's support, so the two summation
routes for rho (direct, and convolution of the divided coefficients) can
be compared at full precision.  Infinite-dimensional membership claims
are never asserted: they are rendered as exact finite-sum inequalities
plus plateau and slope reports.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .potential import Potential
from .sequence_spaces import TwoSidedSeq, Weight, convolve, weighted_norm
from .spectrum import BandEdges, _edge_tol


def gaps(edges: BandEdges) -> tuple[np.ndarray, np.ndarray]:
    """Gap lengths from band edges.

    Returns (gamma, clamped): lengths for n = 1..n_max and a flag marking
    entries that came out negative within the method tolerance and were
    clamped to zero.  A negative length beyond tolerance raises.
    """
    raw = edges.gaps()
    clamped = np.zeros(raw.size, dtype=bool)
    out = raw.copy()
    for i, g in enumerate(raw):
        if g < 0.0:
            hi = edges.pairs[i][1]
            if g < -_edge_tol(hi):
                raise InputError(f"gap {i + 1} negative beyond tolerance: {g!r}")
            out[i] = 0.0
            clamped[i] = True
    return out, clamped


def rho(q: Potential, n: int) -> complex:
    """Second-order gap correction at index n, as a direct exact sum.

    Sums c(n-j) c(n+j) / ((n-j)(n+j)) over the support with j = +-n
    excluded (those terms carry a vanishing denominator), scaled by
    1/pi^2.  Vanishes identically for n beyond the coefficient cutoff.
    """
    if n < 1:
        raise InputError("rho is defined for n >= 1")
    k = q.cutoff
    acc = 0j
    for j in range(n - k, k - n + 1):
        if j == n or j == -n:
            continue
        acc += q.coefficient(n - j) * q.coefficient(n + j) / ((n - j) * (n + j))
    return acc / (math.pi * math.pi)


def rho_via_convolution(q: Potential, n: int) -> complex:
    """The same correction through the convolution of divided coefficients.

    With a(k) = c(k)/k (and a(0) = 0) the correction equals (a*a)(2n) up
    to the 1/pi^2 factor; the excluded indices of the direct sum are the
    terms that a(0) = 0 kills.  Requires a mean-zero potential, matching
    the normalization that makes a(0) = 0 the honest value.
    """
    if n < 1:
        raise InputError("rho is defined for n >= 1")
    if q.mean != 0.0:
        raise InputError("rho_via_convolution requires a mean-zero potential")
    vals: dict[int, complex] = {}
    for k, v in q.coeffs:
        vals[k] = v / k
        vals[-k] = v.conjugate() / (-k)
    divided = TwoSidedSeq.from_dict(vals, support=q.cutoff)
    return convolve(divided, divided).value(2 * n) / (math.pi * math.pi)


@dataclass(frozen=True)
class GapReport:
    """Per-index gap data: lengths, leading terms, corrections, residuals.

    Residual columns are stored exactly as computed from the defining
    formulas, so they recompute bit-identically from (gamma, two_qhat,
    rho).  ``resid_unreduced`` logs the min over signs of
    |gamma +- 2 sqrt(cc(-n) cc(n))| with cc = coefficient + correction; for
    real potentials it should coincide with |resid_corrected| and is kept
    for comparison, never asserted.
    """

    n: np.ndarray
    gamma: np.ndarray
    two_qhat: np.ndarray
    rho: np.ndarray  # complex
    resid_plain: np.ndarray
    resid_corrected: np.ndarray
    resid_unreduced: np.ndarray
    clamped: np.ndarray
    method: str
    tails: dict = field(default_factory=dict)
    slopes: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return int(self.n[-1])


def residuals(q: Potential, edges: BandEdges) -> GapReport:
    """Populate the gap report for a potential and its computed edges."""
    gamma, clamped = gaps(edges)
    n_max = edges.n_max
    ns = np.arange(1, n_max + 1)
    qn = np.array([q.coefficient(int(n)) for n in ns])
    rhos = np.array([rho(q, int(n)) for n in ns])
    two_qhat = 2.0 * np.abs(qn)
    resid_plain = gamma - two_qhat
    resid_corrected = gamma - 2.0 * np.abs(qn + rhos)
    unreduced = np.empty(n_max)
    for i, n in enumerate(ns):
        cc_minus = q.coefficient(-int(n)) + rhos[i].conjugate()
        root = cmath.sqrt(cc_minus * (qn[i] + rhos[i]))
        unreduced[i] = min(abs(gamma[i] + 2.0 * root), abs(gamma[i] - 2.0 * root))
    return GapReport(
        n=ns,
        gamma=gamma,
        two_qhat=two_qhat,
        rho=rhos,
        resid_plain=resid_plain,
        resid_corrected=resid_corrected,
        resid_unreduced=unreduced,
        clamped=clamped,
        method=edges.method,
    )


# ----------------------------------------------------------------------
# Weighted tail tables and decay fits
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TailTable:
    """Cumulative weighted sums sum_{n<=m} w(n)^2 r(n)^2 with increments.

    ``increment_ratio`` holds consecutive increment quotients (nan where
    the previous increment vanishes) for plateau detection.
    """

    m: np.ndarray
    partial_sum: np.ndarray
    increment: np.ndarray
    increment_ratio: np.ndarray
    increments_decreasing_from: int  # first m after which increments never grow (or -1)


def weighted_tail_report(r: np.ndarray, w: Weight, n_range: tuple[int, int]) -> TailTable:
    """Partial sums of the weighted squares of a one-sided sequence.

    ``r`` is indexed from n = 1; the table rows cover m in ``n_range``
    (inclusive) while each partial sum accumulates from n = 1.
    """
    r = np.asarray(r, dtype=float)
    lo, hi = n_range
    if not 1 <= lo <= hi <= r.size:
        raise InputError(f"n_range {n_range} outside the sequence length {r.size}")
    ns = np.arange(1, r.size + 1)
    terms = np.asarray(w(ns)) ** 2 * r**2
    csum = np.cumsum(terms)
    ms = np.arange(lo, hi + 1)
    inc = terms[lo - 1 : hi]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.concatenate(([np.nan], inc[1:] / inc[:-1]))
    drop_from = -1
    for i in range(inc.size - 1):
        if np.all(np.diff(inc[i:]) <= 0.0):
            drop_from = int(ms[i])
            break
    return TailTable(
        m=ms,
        partial_sum=csum[lo - 1 : hi],
        increment=inc,
        increment_ratio=ratio,
        increments_decreasing_from=drop_from,
    )


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    rms_residual: float
    used_points: int
    zero_count: int
    n_lo: int
    n_hi: int


def decay_slope(r: np.ndarray, n_lo: int, n_hi: int) -> SlopeFit:
    """Least-squares slope of log |r(n)| against log n over [n_lo, n_hi].

    Exact zeros are excluded from the fit and counted (collapsed gaps of
    symmetric potentials produce exact zeros).  Fewer than five usable
    points is an error.
    """
    r = np.asarray(r, dtype=float)
    if n_hi <= n_lo + 4:
        raise InputError("decay fit needs n_hi > n_lo + 4")
    if not 1 <= n_lo <= n_hi <= r.size:
        raise InputError(f"fit range [{n_lo}, {n_hi}] outside the sequence length {r.size}")
    ns = np.arange(n_lo, n_hi + 1)
    vals = r[n_lo - 1 : n_hi]
    nz = vals != 0.0
    zero_count = int(np.sum(~nz))
    if int(np.sum(nz)) < 5:
        raise InputError(f"only {int(np.sum(nz))} nonzero points in [{n_lo}, {n_hi}]; need 5")
    x = np.log(ns[nz].astype(float))
    y = np.log(np.abs(vals[nz]))
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    rms = float(np.sqrt(np.mean((y - fit) ** 2)))
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        rms_residual=rms,
        used_points=int(np.sum(nz)),
        zero_count=zero_count,
        n_lo=n_lo,
        n_hi=n_hi,
    )


def default_fit_start(q: Potential) -> int:
    """Default start of the asymptotic range: max(4, 2 ceil ||q||_{h^0})."""
    from .potential import hormander_norm
    from .sequence_spaces import power_weight

    return max(4, 2 * math.ceil(hormander_norm(q, power_weight(0.0))))


# ----------------------------------------------------------------------
# Finite-scale verification reports
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipReport:
    """Finite-scale comparison of gap-sequence and coefficient-sequence norms.

    The triangle inequality |gamma_norm - two_qhat_norm| <= resid_norm is
    an exact statement about these finite sums and is asserted; the norm
    ratio is diagnostic only since membership itself is asymptotic.
    """

    n_lo: int
    n_hi: int
    gamma_norm: float
    two_qhat_norm: float
    resid_plain_norm: float
    ratio: float  # gamma_norm / two_qhat_norm (inf when the denominator is 0)
    triangle_ok: bool
    triangle_slack: float  # resid_norm - |gamma_norm - two_qhat_norm|
    cumulative_ratio: np.ndarray  # per m in range, ratio of partial norms


def _partial_norm(vals: np.ndarray, w: Weight, lo: int, hi: int) -> float:
    acc = 0.0
    for n in range(lo, hi + 1):
        wn = float(w(n))
        acc += (wn * vals[n - 1]) ** 2
    return math.sqrt(acc)


def verify_membership_consistency(
    q: Potential, w: Weight, report: GapReport, n_range: tuple[int, int]
) -> MembershipReport:
    """Compare weighted partial norms of gap lengths and coefficient moduli."""
    lo, hi = n_range
    if not 1 <= lo <= hi <= report.n_max:
        raise InputError(f"n_range {n_range} outside the report range 1..{report.n_max}")
    gamma_norm = _partial_norm(report.gamma, w, lo, hi)
    two_qhat_norm = _partial_norm(report.two_qhat, w, lo, hi)
    resid_norm = _partial_norm(report.resid_plain, w, lo, hi)
    diff = abs(gamma_norm - two_qhat_norm)
    ratios = []
    for m in range(lo, hi + 1):
        gn = _partial_norm(report.gamma, w, lo, m)
        qn = _partial_norm(report.two_qhat, w, lo, m)
        ratios.append(gn / qn if qn > 0 else math.inf)
    return MembershipReport(
        n_lo=lo,
        n_hi=hi,
        gamma_norm=gamma_norm,
        two_qhat_norm=two_qhat_norm,
        resid_plain_norm=resid_norm,
        ratio=(gamma_norm / two_qhat_norm if two_qhat_norm > 0 else math.inf),
        triangle_ok=bool(diff <= resid_norm),
        triangle_slack=resid_norm - diff,
        cumulative_ratio=np.array(ratios),
    )


@dataclass(frozen=True)
class SummabilityReport:
    """Square-summability of gap lengths against the coefficient norm, integer order.

    Emits the partial sums of (1+2n)^{2s} gamma(n)^2 next to the partial
    sums of the squared coefficient norm of matching order; both finite,
    plateau behaviour left to the reader.
    """

    s: int
    m: np.ndarray
    gap_partial: np.ndarray
    coeff_partial: np.ndarray
    gap_increment: np.ndarray


def verify_marchenko_ostrovskii(
    q: Potential, s: int, report: GapReport, n_range: tuple[int, int]
) -> SummabilityReport:
    if s < 0 or int(s) != s:
        raise InputError("summability order s must be a nonnegative integer")
    s = int(s)
    lo, hi = n_range
    if not 1 <= lo <= hi <= report.n_max:
        raise InputError(f"n_range {n_range} outside the report range 1..{report.n_max}")
    ns = np.arange(1, report.n_max + 1)
    gap_terms = (1.0 + 2.0 * ns) ** (2 * s) * report.gamma**2
    gap_csum = np.cumsum(gap_terms)
    coeff = []
    acc = q.mean**2  # k = 0 term, weight 1
    for m in range(1, report.n_max + 1):
        v = q.coefficient(m)
        acc += 2.0 * (1.0 + 2.0 * m) ** (2 * s) * (v.real**2 + v.imag**2)
        coeff.append(acc)
    coeff_csum = np.array(coeff)
    ms = np.arange(lo, hi + 1)
    return SummabilityReport(
        s=s,
        m=ms,
        gap_partial=gap_csum[lo - 1 : hi],
        coeff_partial=coeff_csum[lo - 1 : hi],
        gap_increment=gap_terms[lo - 1 : hi],
    )
