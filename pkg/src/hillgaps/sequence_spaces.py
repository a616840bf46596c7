"""Weights on the integers and finitely supported two-sided sequences.

A weight is a positive function on the integers with value 1 at the
origin and symmetric in the sign of the index; every constructor applies
that extension automatically.  Sequences are finitely supported maps from
the integers to the complex numbers, and all operations on them (weighted
norms, convolution) are exact finite sums.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

WEIGHT_KINDS = ("power", "log_power", "example_2_4", "table")

# Slope threshold used by the sandwich trend test: log-log slopes beyond
# this magnitude count as a monotone divergence of the ratio.
SANDWICH_SLOPE_TOL = 0.1


def _iterated_log_floor(exponents: tuple[float, ...]) -> int:
    """Smallest k >= 1 where every iterated-log factor of (1+k) is positive."""
    if not exponents:
        return 1
    for k in range(1, 10**6):
        v = 1.0 + k
        ok = True
        for _ in exponents:
            v = math.log(v)
            if v <= 0.0:
                ok = False
                break
        if ok:
            return k
    raise InputError("log_power weight needs an impractically large positive range")


@dataclass(frozen=True)
class Weight:
    """Positive symmetric weight on the integers with value 1 at 0.

    Construct through :func:`make_weight` or one of the named helpers so
    parameter validation runs.  Instances evaluate at integers via call
    syntax and at real arguments via :meth:`at_real` (formula kinds use
    their closed form, sampled kinds interpolate linearly).
    """

    kind: str
    s: float = 0.0
    exponents: tuple[float, ...] = ()
    table: tuple[float, ...] = ()
    clamp_from: int = 1

    def __call__(self, k):
        arr = np.asarray(k)
        kabs = np.abs(arr).astype(np.int64)
        out = self._eval_abs(kabs.astype(float))
        if arr.ndim == 0:
            return float(out)
        return out

    def at_real(self, t):
        """Evaluate the symmetric real-argument extension at |t|."""
        arr = np.asarray(t, dtype=float)
        tabs = np.abs(arr)
        if self.kind in ("power", "log_power"):
            out = self._eval_abs(tabs)
        else:
            out = self._interp(tabs)
        if arr.ndim == 0:
            return float(out)
        return out

    @property
    def max_index(self) -> float:
        """Largest |k| this weight can evaluate (inf for formula kinds)."""
        if self.kind == "table":
            return float(len(self.table))
        return math.inf

    def describe(self) -> str:
        if self.kind == "power":
            return f"power(s={self.s:g})"
        if self.kind == "log_power":
            return f"log_power(s={self.s:g}, r={list(self.exponents)})"
        if self.kind == "example_2_4":
            return f"example_2_4(s={self.s:g})"
        return f"table(len={len(self.table)})"

    # internal evaluation on |k| (float array in, float array out)
    def _eval_abs(self, kabs: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            out = (1.0 + 2.0 * kabs) ** self.s
        elif self.kind == "log_power":
            kk = np.maximum(kabs, float(self.clamp_from))
            out = (1.0 + 2.0 * kk) ** self.s
            v = 1.0 + kk
            for r in self.exponents:
                v = np.log(v)
                out = out * v**r
        elif self.kind == "example_2_4":
            kk = np.maximum(kabs, 1.0)
            out = kk**self.s
            even = (np.mod(kabs, 2.0) == 0.0) & (kabs > 0)
            out = np.where(even, out * np.log1p(kabs), out)
        else:
            tab = np.asarray(self.table)
            if np.any(kabs > len(tab)):
                bad = float(np.max(kabs))
                raise InputError(
                    f"table weight of length {len(tab)} evaluated at |k|={bad:g}"
                )
            idx = np.maximum(kabs.astype(np.int64), 1) - 1
            out = tab[idx]
        return np.where(kabs == 0.0, 1.0, out)

    def _interp(self, tabs: np.ndarray) -> np.ndarray:
        # piecewise-linear through the integer samples, with node 1.0 at t=0
        if self.kind == "table" and np.any(tabs > len(self.table)):
            raise InputError(
                f"table weight of length {len(self.table)} evaluated at t={np.max(tabs):g}"
            )
        lo = np.floor(tabs)
        frac = tabs - lo
        vlo = self._eval_abs(lo)
        vhi = self._eval_abs(np.minimum(lo + 1.0, self.max_index))
        return vlo + frac * (vhi - vlo)


def make_weight(spec) -> Weight:
    """Build a weight from a descriptor.

    Accepts either a ``Weight`` (returned unchanged) or a mapping like
    ``{"kind": "power", "s": 1.5}``; see the JSON forms in the README.
    Table values may also be given as a mapping ``{k: value}`` with
    ``k >= 1``; a ``0`` key is ignored with a warning since the value at
    the origin is always 1.
    """
    if isinstance(spec, Weight):
        return spec
    if not isinstance(spec, dict):
        raise InputError(f"weight descriptor must be a mapping, got {type(spec).__name__}")
    kind = spec.get("kind")
    if kind not in WEIGHT_KINDS:
        raise InputError(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}")

    if kind == "table":
        values = spec.get("values")
        if isinstance(values, dict):
            if 0 in values:
                warnings.warn("table weight value at k=0 ignored; the origin value is 1")
            items = sorted((int(k), float(v)) for k, v in values.items() if int(k) != 0)
            if not items or [k for k, _ in items] != list(range(1, len(items) + 1)):
                raise InputError("table weight mapping must cover k = 1..K without holes")
            values = [v for _, v in items]
        if values is None or len(values) == 0:
            raise InputError("table weight needs a nonempty 'values' list")
        vals = [float(v) for v in values]
        for i, v in enumerate(vals, start=1):
            if not math.isfinite(v) or v <= 0.0:
                raise InputError(f"table weight value at k={i} must be positive, got {v!r}")
        return Weight(kind="table", table=tuple(vals))

    s = float(spec.get("s", 0.0))
    if not math.isfinite(s):
        raise InputError("weight parameter s must be finite")
    if kind != "power" and s < 0:
        raise InputError(f"s < 0 is only accepted for power weights, got s={s:g} for {kind}")

    if kind == "power":
        return Weight(kind="power", s=s)
    if kind == "example_2_4":
        return Weight(kind="example_2_4", s=s)

    raw = spec.get("r", ())
    exps = tuple(float(r) for r in (raw if isinstance(raw, (list, tuple)) else [raw]))
    if any(not math.isfinite(r) for r in exps):
        raise InputError("log_power exponents must be finite")
    return Weight(kind="log_power", s=s, exponents=exps, clamp_from=_iterated_log_floor(exps))


def power_weight(s: float) -> Weight:
    return make_weight({"kind": "power", "s": s})


def log_power_weight(s: float, exponents) -> Weight:
    return make_weight({"kind": "log_power", "s": s, "r": list(exponents)})


def example_2_4_weight(s: float) -> Weight:
    return make_weight({"kind": "example_2_4", "s": s})


def table_weight(values) -> Weight:
    return make_weight({"kind": "table", "values": values})


# ----------------------------------------------------------------------
# Two-sided sequences
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TwoSidedSeq:
    """Finitely supported complex sequence on the integers.

    ``entries`` holds the nonzero values as (index, value) pairs sorted by
    index; ``support`` bounds the support (entries vanish for |k| beyond
    it).  The ``real_symmetric`` flag certifies entries(-k) == conj(entries(k)),
    which the constructor validates.
    """

    entries: tuple[tuple[int, complex], ...]
    support: int
    real_symmetric: bool = False
    _lookup: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_lookup", {k: v for k, v in self.entries})
        for k, v in self.entries:
            if abs(k) > self.support:
                raise InputError(f"entry at k={k} exceeds declared support {self.support}")
        if self.real_symmetric:
            for k, v in self.entries:
                if self._lookup.get(-k, 0j) != v.conjugate():
                    raise InputError(f"real_symmetric flag violated at k={k}")

    @staticmethod
    def from_dict(values: dict, support: int | None = None, real_symmetric: bool = False) -> "TwoSidedSeq":
        items = tuple(sorted((int(k), complex(v)) for k, v in values.items() if complex(v) != 0))
        bound = max((abs(k) for k, _ in items), default=0)
        if support is None:
            support = bound
        return TwoSidedSeq(entries=items, support=int(support), real_symmetric=real_symmetric)

    @staticmethod
    def delta(k: int = 0, value: complex = 1.0 + 0j) -> "TwoSidedSeq":
        return TwoSidedSeq.from_dict({k: value})

    @staticmethod
    def indicator(n: int) -> "TwoSidedSeq":
        """The sequence equal to 1 on [-n, n] and 0 elsewhere."""
        return TwoSidedSeq.from_dict({k: 1.0 + 0j for k in range(-n, n + 1)})

    def value(self, k: int) -> complex:
        return self._lookup.get(k, 0j)

    def __call__(self, k: int) -> complex:
        return self.value(k)

    def is_zero(self) -> bool:
        return not self.entries

    def scaled(self, factor: complex) -> "TwoSidedSeq":
        return TwoSidedSeq.from_dict(
            {k: factor * v for k, v in self.entries}, support=self.support
        )

    def plus(self, other: "TwoSidedSeq") -> "TwoSidedSeq":
        out = dict(self.entries)
        for k, v in other.entries:
            out[k] = out.get(k, 0j) + v
        return TwoSidedSeq.from_dict(out, support=max(self.support, other.support))

    def to_dense(self, bound: int | None = None) -> np.ndarray:
        """Dense complex array over [-bound, bound]."""
        if bound is None:
            bound = self.support
        out = np.zeros(2 * bound + 1, dtype=complex)
        for k, v in self.entries:
            if abs(k) > bound:
                raise InputError(f"entry at k={k} outside dense bound {bound}")
            out[k + bound] = v
        return out


def weighted_norm(a: TwoSidedSeq, w: Weight) -> float:
    """Hilbert norm (sum over k of w(k)^2 |a(k)|^2)^(1/2), an exact finite sum.

    Terms accumulate in ascending index order so repeated evaluations are
    bit-identical.
    """
    acc = 0.0
    for k, v in a.entries:
        wk = float(w(k))
        acc += (wk * wk) * (v.real * v.real + v.imag * v.imag)
    return math.sqrt(acc)


def _canonical_key(a: TwoSidedSeq):
    return (a.support, tuple((k, v.real, v.imag) for k, v in a.entries))


def convolve(a: TwoSidedSeq, b: TwoSidedSeq) -> TwoSidedSeq:
    """Convolution (a*b)(k) = sum_j a(k-j) b(j) by direct summation.

    The operand pair is put into a canonical order first, so convolve(a, b)
    and convolve(b, a) run the identical summation and agree bit-exactly.
    """
    x, y = (a, b) if _canonical_key(a) <= _canonical_key(b) else (b, a)
    out: dict[int, complex] = {}
    kmax = x.support + y.support
    for k in range(-kmax, kmax + 1):
        jlo = max(-y.support, k - x.support)
        jhi = min(y.support, k + x.support)
        acc = 0j
        for j in range(jlo, jhi + 1):
            acc += x.value(k - j) * y.value(j)
        if acc != 0j:
            out[k] = acc
    flag = False
    if a.real_symmetric and b.real_symmetric:
        flag = all(out.get(-k, 0j) == v.conjugate() for k, v in out.items())
    return TwoSidedSeq.from_dict(out, support=kmax, real_symmetric=flag)


def convolution_ratio(a: TwoSidedSeq, b: TwoSidedSeq, s: float, r: float, t: float) -> float:
    """Ratio ||a*b||_{h^t} / (||a||_{h^s} ||b||_{h^r}) for one pair."""
    ws, wr, wt = power_weight(s), power_weight(r), power_weight(t)
    den = weighted_norm(a, ws) * weighted_norm(b, wr)
    if den == 0.0:
        raise InputError("convolution ratio undefined for a zero factor")
    return weighted_norm(convolve(a, b), wt) / den


# ----------------------------------------------------------------------
# Convolution boundedness report
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ConvTrials:
    """Trial families for the convolution boundedness report."""

    sizes: tuple[int, ...] = (8, 16, 32)
    pairs_per_size: int = 50
    seed: int = 0
    family: str = "auto"  # auto | random | indicator


@dataclass(frozen=True)
class ConvSizeSample:
    size: int
    max_ratio: float
    mean_ratio: float


@dataclass(frozen=True)
class ConvLemmaReport:
    s: float
    r: float
    t: float
    margin: float  # s + r - t
    regime: str  # "bounded" | "fails to hold"
    family: str
    samples: tuple[ConvSizeSample, ...]
    trend_ok: bool
    growth_factor: float  # max ratio at largest size / max ratio at smallest


def _random_pair(rng, n: int) -> tuple[TwoSidedSeq, TwoSidedSeq]:
    def one():
        vals = rng.standard_normal(2 * n + 1) + 1j * rng.standard_normal(2 * n + 1)
        return TwoSidedSeq.from_dict({k - n: vals[k] for k in range(2 * n + 1)})

    return one(), one()


def conv_lemma_report(s: float, r: float, t: float, trials: ConvTrials = ConvTrials()) -> ConvLemmaReport:
    """Sample convolution norm ratios over trial families and classify (s, r, t).

    The margin s + r - t > 1/2 marks the bounded regime; anything at or
    below it is reported as "fails to hold".  In the bounded regime the
    per-size maximum ratios should be non-increasing beyond the smallest
    size, up to 5 percent; in the failure regime the symmetric indicator
    family produces strictly increasing ratios.
    """
    if s < 0 or r < 0:
        raise InputError(f"convolution report requires s, r >= 0, got ({s:g}, {r:g})")
    if t > min(s, r):
        raise InputError(f"t={t:g} exceeds min(s, r)={min(s, r):g}: target order out of range")
    margin = s + r - t
    bounded = margin > 0.5
    regime = "bounded" if bounded else "fails to hold"

    family = trials.family
    if family == "auto":
        family = "random" if bounded else "indicator"

    rng = np.random.default_rng(trials.seed)
    samples = []
    for n in trials.sizes:
        ratios = []
        if family == "indicator":
            a = TwoSidedSeq.indicator(n)
            ratios.append(convolution_ratio(a, a, s, r, t))
        else:
            for _ in range(trials.pairs_per_size):
                a, b = _random_pair(rng, n)
                ratios.append(convolution_ratio(a, b, s, r, t))
        samples.append(ConvSizeSample(size=n, max_ratio=max(ratios), mean_ratio=float(np.mean(ratios))))

    trend_ok = all(
        samples[i + 1].max_ratio <= samples[i].max_ratio * 1.05
        for i in range(1, len(samples) - 1)
    )
    if len(samples) >= 2:
        growth = samples[-1].max_ratio / samples[0].max_ratio
    else:
        growth = 1.0
    return ConvLemmaReport(
        s=s, r=r, t=t, margin=margin, regime=regime, family=family,
        samples=tuple(samples), trend_ok=trend_ok, growth_factor=growth,
    )


# ----------------------------------------------------------------------
# Weight class checks
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class OrGrid:
    t_step: float = 1.0
    lambda_count: int = 33


@dataclass(frozen=True)
class OrClassReport:
    passed: bool
    worst_ratio: float  # the sampled ratio farthest from [1/c, c], as max(ratio, 1/ratio)
    worst_t: float
    worst_lambda: float
    a: float
    c: float
    t_max: float
    skipped: int  # grid pairs not evaluable (table range)


def check_or_class(w: Weight, a: float, c: float, t_max: float, grid: OrGrid = OrGrid()) -> OrClassReport:
    """Check the scaling-ratio condition w(lam*t)/w(t) in [1/c, c] on a grid.

    Samples t in [1, t_max] and lam in [1, a]; reports the extremal ratio
    and where it occurred.  Grid pairs where a table weight cannot be
    evaluated are skipped and counted.
    """
    if a <= 1 or c <= 1:
        raise InputError("scaling check requires a > 1 and c > 1")
    ts = np.arange(1.0, float(t_max) + 1e-9, grid.t_step)
    if ts.size == 0:
        raise InputError("empty t grid")
    lams = np.linspace(1.0, a, grid.lambda_count)
    base = w.at_real(ts)
    worst = 1.0
    worst_t = 1.0
    worst_lam = 1.0
    skipped = 0
    bound = w.max_index
    for lam in lams:
        tt = lam * ts
        valid = tt <= bound
        skipped += int(np.sum(~valid))
        if not np.any(valid):
            continue
        ratio = w.at_real(tt[valid]) / base[valid]
        dev = np.maximum(ratio, 1.0 / ratio)
        i = int(np.argmax(dev))
        if dev[i] > worst:
            worst = float(dev[i])
            worst_t = float(ts[valid][i])
            worst_lam = float(lam)
    return OrClassReport(
        passed=bool(worst <= c), worst_ratio=worst, worst_t=worst_t,
        worst_lambda=worst_lam, a=a, c=c, t_max=float(t_max), skipped=skipped,
    )


@dataclass(frozen=True)
class SandwichReport:
    s: float
    k_max: int
    c_low: float  # min over k of w(k) / k^s
    c_high: float  # max over k of w(k) / k^(1+s)
    lower_slope: float  # log-log trend of w(k) / k^s over the upper half range
    upper_slope: float  # log-log trend of w(k) / k^(1+s)
    lower_vanishing: bool
    upper_diverging: bool
    passed: bool


def check_sandwich(w: Weight, s: float, k_max: int) -> SandwichReport:
    """Report whether w(k) sits between k^s and k^(1+s) at finite scale.

    The two-sided comparison is asymptotic, so this emits constants plus a
    log-log trend slope over the upper half of the range rather than a
    hard assertion: a lower ratio trending to zero or an upper ratio
    trending up marks a divergence.
    """
    if k_max < 2:
        raise InputError("sandwich check needs k_max >= 2")
    if s < 0:
        raise InputError("sandwich check needs s >= 0")
    ks = np.arange(1, k_max + 1, dtype=float)
    wk = np.asarray(w(np.arange(1, k_max + 1)))
    low = wk / ks**s
    high = wk / ks ** (1.0 + s)
    half = max(2, k_max // 2)
    logs = np.log(ks[half - 1 :])
    lower_slope = float(np.polyfit(logs, np.log(low[half - 1 :]), 1)[0])
    upper_slope = float(np.polyfit(logs, np.log(high[half - 1 :]), 1)[0])
    lower_vanishing = lower_slope < -SANDWICH_SLOPE_TOL
    upper_diverging = upper_slope > SANDWICH_SLOPE_TOL
    c_low = float(np.min(low))
    c_high = float(np.max(high))
    return SandwichReport(
        s=s, k_max=k_max, c_low=c_low, c_high=c_high,
        lower_slope=lower_slope, upper_slope=upper_slope,
        lower_vanishing=lower_vanishing, upper_diverging=upper_diverging,
        passed=bool(c_low > 0 and not lower_vanishing and not upper_diverging),
    )


@dataclass(frozen=True)
class CompareWeightsReport:
    sup_ratio: float  # sup over 1 <= k <= k_max of w2(k) / w1(k)
    at_k: int
    embedding_constant: float  # max(1, sup_ratio); valid for sequences touching k=0


def compare_weights(w1: Weight, w2: Weight, k_max: int) -> CompareWeightsReport:
    """Finite-range embedding constant of the w1-space into the w2-space.

    For sequences supported in [-k_max, k_max] the norm inequality
    ||a||_{w2} <= C ||a||_{w1} holds with C = max(1, sup ratio); the 1
    accounts for the shared value at the origin.
    """
    if k_max < 1:
        raise InputError("compare_weights needs k_max >= 1")
    ks = np.arange(1, k_max + 1)
    ratio = np.asarray(w2(ks)) / np.asarray(w1(ks))
    i = int(np.argmax(ratio))
    sup = float(ratio[i])
    return CompareWeightsReport(sup_ratio=sup, at_k=int(ks[i]), embedding_constant=max(1.0, sup))
