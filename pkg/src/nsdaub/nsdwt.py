"""Periodic non-stationary orthonormal wavelet transform.

A signal of length ``N`` is read as samples at spacing ``2^{-(m+J)}``. Stage
``s = 0..J-1`` uses the filter pair of level ``m+J-1-s`` (finest first):

    low_i  = 2^{-1/2} sum_j mu_{-j} x_{(2i+j) mod L}
    high_i = 2^{-1/2} sum_j nu_j    x_{(2i+j) mod L}

With ``sum_j mu_j mu_{j+2l} = 2 delta_l`` and ``nu_j = (-1)^{j+1} mu_{j-1}`` the
rows of each stage are orthonormal, so synthesis is the transpose.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError
from .factory import FilterFamily, FilterPair

SQRT_HALF = 2.0 ** -0.5


@dataclass
class CoeffPyramid:
    """Coarsest approximation plus detail bands ordered by level ``m..m+J-1``."""

    approx: np.ndarray
    details: list
    m: int
    J: int
    N: int
    meta: dict = field(default_factory=dict)

    def energy(self) -> float:
        return float(np.sum(self.approx ** 2) + sum(np.sum(d ** 2) for d in self.details))

    def as_dict(self) -> dict:
        out = {
            "approx": [float(v) for v in self.approx],
            "details": [[float(v) for v in d] for d in self.details],
            "m": int(self.m),
            "J": int(self.J),
        }
        out.update(self.meta)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "CoeffPyramid":
        approx = np.asarray(doc["approx"], dtype=float)
        details = [np.asarray(d, dtype=float) for d in doc["details"]]
        J = int(doc["J"])
        if len(details) != J:
            raise GridMismatchError(f"pyramid declares J={J} but holds {len(details)} detail bands")
        N = len(approx) + sum(len(d) for d in details)
        meta = {k: v for k, v in doc.items() if k not in ("approx", "details", "m", "J")}
        return cls(approx, details, int(doc["m"]), J, N, meta)


def transform_filters(family: FilterFamily, m: int, J: int) -> list:
    """Filter pairs for levels ``m+J-1, ..., m`` in the order stages consume them."""
    return [family.filter(m + J - 1 - s) for s in range(J)]


def _stencil(f: FilterPair):
    """Offsets and weights of the low and high rows relative to ``2i``."""
    low_off = -(f.mu_lo + np.arange(len(f.mu)))  # mu_{-j} sits at offset j
    high_off = f.nu_lo + np.arange(len(f.nu))
    return low_off, f.mu, high_off, f.nu


def analysis_stage(x: np.ndarray, f: FilterPair) -> tuple:
    L = len(x)
    if L % 2:
        raise ValueError(f"stage input length {L} is odd")
    low_off, low_w, high_off, high_w = _stencil(f)
    base = 2 * np.arange(L // 2)[:, None]
    low = SQRT_HALF * (x[(base + low_off[None, :]) % L] @ low_w)
    high = SQRT_HALF * (x[(base + high_off[None, :]) % L] @ high_w)
    return low, high


def synthesis_stage(low: np.ndarray, high: np.ndarray, f: FilterPair) -> np.ndarray:
    if len(low) != len(high):
        raise GridMismatchError("approximation and detail bands differ in length")
    L = 2 * len(low)
    low_off, low_w, high_off, high_w = _stencil(f)
    base = 2 * np.arange(L // 2)[:, None]
    out = np.zeros(L)
    np.add.at(out, (base + low_off[None, :]) % L, SQRT_HALF * np.outer(low, low_w))
    np.add.at(out, (base + high_off[None, :]) % L, SQRT_HALF * np.outer(high, high_w))
    return out


def stage_matrix(f: FilterPair, L: int) -> np.ndarray:
    """Explicit ``L x L`` matrix of one analysis stage (low rows, then high rows)."""
    eye = np.eye(L)
    cols = [np.concatenate(analysis_stage(eye[:, c], f)) for c in range(L)]
    return np.column_stack(cols)


def _check_levels(filters, J: int, m: int | None):
    if len(filters) != J:
        raise GridMismatchError(f"expected {J} filter levels, got {len(filters)}")
    levels = [f.level for f in filters]
    if any(b != a - 1 for a, b in zip(levels, levels[1:])):
        raise GridMismatchError(f"filter levels must descend by one, got {levels}")
    if m is not None and levels[-1] != m:
        raise GridMismatchError(f"coarsest filter level {levels[-1]} does not match m={m}")
    return levels[-1]


def analyze(signal, filters, J: int) -> CoeffPyramid:
    """Forward transform; ``filters`` are ordered finest (level ``m+J-1``) to coarsest (``m``)."""
    x = np.asarray(signal, dtype=float)
    N = len(x)
    if J < 0:
        raise ValueError("J must be nonnegative")
    if N == 0 or N % (2 ** J):
        raise ValueError(f"signal length {N} is not divisible by 2^{J}")
    filters = list(filters)
    m = _check_levels(filters, J, None) if J else 0
    details: list = []
    for f in filters:
        x, d = analysis_stage(x, f)
        details.append(d)
    meta = {}
    if filters:
        meta = {"lambdas": [float(v) for v in filters[0].lambdas], "root_side": filters[0].root_side,
                "n": int(filters[0].n)}
    return CoeffPyramid(x, details[::-1], m, J, N, meta)


def synthesize(pyramid: CoeffPyramid, filters) -> np.ndarray:
    """Inverse transform (transpose of each stage, coarsest first)."""
    filters = list(filters)
    if pyramid.J:
        _check_levels(filters, pyramid.J, pyramid.m)
    x = np.asarray(pyramid.approx, dtype=float)
    for level_idx, f in enumerate(reversed(filters)):
        d = np.asarray(pyramid.details[level_idx], dtype=float)
        x = synthesis_stage(x, d, f)
    return x
