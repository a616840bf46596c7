"""1-periodic real-valued potentials stored by Fourier coefficient.

Only the mean and the coefficients at positive frequencies are stored;
reads at negative frequencies return the conjugate, so reality of the
potential is structural rather than validated data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .sequence_spaces import TwoSidedSeq, Weight, weighted_norm


@dataclass(frozen=True)
class Potential:
    """Fourier data of a 1-periodic real potential: mean plus c_k for k >= 1."""

    mean: float
    coeffs: tuple[tuple[int, complex], ...]  # ascending k >= 1, zeros dropped

    @property
    def cutoff(self) -> int:
        """Largest frequency with a nonzero coefficient."""
        return self.coeffs[-1][0] if self.coeffs else 0

    def coefficient(self, k: int) -> complex:
        """Two-sided read: c(0) is the mean, c(-k) = conj(c(k))."""
        if k == 0:
            return complex(self.mean)
        if k < 0:
            return self._positive(-k).conjugate()
        return self._positive(k)

    def _positive(self, k: int) -> complex:
        for kk, v in self.coeffs:
            if kk == k:
                return v
            if kk > k:
                break
        return 0j

    def evaluate(self, x) -> float | np.ndarray:
        """Value of the potential at x (reduced mod 1); exact 1-periodicity."""
        arr = np.asarray(x, dtype=float)
        xr = arr - np.floor(arr)
        out = np.full(xr.shape, self.mean, dtype=float)
        for k, v in self.coeffs:
            out = out + 2.0 * (np.exp(2j * np.pi * k * xr) * v).real
        if arr.ndim == 0:
            return float(out)
        return out

    def two_sided(self, include_mean: bool = True) -> TwoSidedSeq:
        """Full coefficient sequence on the integers with conjugate symmetry."""
        vals: dict[int, complex] = {}
        if include_mean and self.mean != 0.0:
            vals[0] = complex(self.mean)
        for k, v in self.coeffs:
            vals[k] = v
            vals[-k] = v.conjugate()
        return TwoSidedSeq.from_dict(vals, support=self.cutoff, real_symmetric=True)

    def without_mean(self) -> "Potential":
        return Potential(mean=0.0, coeffs=self.coeffs)

    def l1_bound(self) -> float:
        """Upper bound for max |q(x)| - useful for spectral brackets."""
        return abs(self.mean) + 2.0 * sum(abs(v) for _, v in self.coeffs)


def from_fourier(mean: float, coeffs) -> Potential:
    """Build a potential from its mean and coefficients at k >= 1.

    Rejects non-finite values, indices k <= 0, and duplicate indices.
    """
    mean = float(mean)
    if not math.isfinite(mean):
        raise InputError("potential mean must be finite")
    seen: dict[int, complex] = {}
    for k, v in coeffs:
        k = int(k)
        v = complex(v)
        if k <= 0:
            raise InputError(f"coefficient index k={k} must be >= 1")
        if k in seen:
            raise InputError(f"duplicate coefficient index k={k}")
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise InputError(f"coefficient at k={k} must be finite")
        seen[k] = v
    items = tuple((k, v) for k, v in sorted(seen.items()) if v != 0j)
    return Potential(mean=mean, coeffs=items)


def hormander_norm(q: Potential, w: Weight) -> float:
    """Weighted norm of the full coefficient sequence (circle case).

    Computed as the weighted sequence norm of the two-sided coefficients,
    mean included with weight 1 at the origin, so it agrees with
    :func:`hillgaps.sequence_spaces.weighted_norm` by the same summation.
    """
    return weighted_norm(q.two_sided(include_mean=True), w)


# ----------------------------------------------------------------------
# Named test potentials
# ----------------------------------------------------------------------


def mathieu(c: float) -> Potential:
    """q(x) = 2 c cos(2 pi x): the single-harmonic potential."""
    return from_fourier(0.0, [(1, c)])


def two_harmonic(c1: float, c2: float) -> Potential:
    return from_fourier(0.0, [(1, c1), (2, c2)])


def power_decay(p: float, cutoff: int) -> Potential:
    """Coefficients (1 + 2k)^(-p) for k = 1..cutoff; needs p > 1/2."""
    if p <= 0.5:
        raise InputError(f"power_decay needs p > 1/2, got p={p:g}")
    if cutoff < 1:
        raise InputError("power_decay needs cutoff >= 1")
    return from_fourier(0.0, [(k, (1.0 + 2.0 * k) ** (-p)) for k in range(1, cutoff + 1)])


def random_hs(s: float, cutoff: int, seed: int) -> Potential:
    """Random-phase coefficients with magnitude (1 + 2k)^(-(s+1)); reproducible by seed."""
    if cutoff < 1:
        raise InputError("random_hs needs cutoff >= 1")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=cutoff)
    coeffs = [
        (k, np.exp(1j * theta[k - 1]) * (1.0 + 2.0 * k) ** (-(s + 1.0)))
        for k in range(1, cutoff + 1)
    ]
    return from_fourier(0.0, coeffs)


def sample_test_potential(kind: str, **params) -> Potential:
    """Dispatch to the named test potentials by kind string."""
    makers = {
        "mathieu": mathieu,
        "two_harmonic": two_harmonic,
        "power_decay": power_decay,
        "random_hs": random_hs,
    }
    if kind not in makers:
        raise InputError(f"unknown test potential kind {kind!r}")
    return makers[kind](**params)


# ----------------------------------------------------------------------
# JSON form
# ----------------------------------------------------------------------


def potential_from_dict(doc: dict) -> Potential:
    if not isinstance(doc, dict):
        raise InputError("potential document must be a JSON object")
    try:
        mean = float(doc.get("mean", 0.0))
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad potential mean: {exc}") from exc
    raw = doc.get("coeffs", [])
    if not isinstance(raw, list):
        raise InputError("potential 'coeffs' must be a list")
    coeffs = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "k" not in item:
            raise InputError(f"coefficient entry {i} must be an object with 'k'")
        coeffs.append((int(item["k"]), complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))))
    return from_fourier(mean, coeffs)


def potential_to_dict(q: Potential) -> dict:
    return {
        "mean": q.mean,
        "coeffs": [{"k": k, "re": v.real, "im": v.imag} for k, v in q.coeffs],
    }


def load_potential(path: str) -> Potential:
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        raise InputError(f"cannot read potential file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return potential_from_dict(doc)


def save_potential(q: Potential, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(potential_to_dict(q), f, indent=2)
        f.write("\n")
