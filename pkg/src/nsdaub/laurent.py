"""Laurent polynomials with real coefficients.

A Laurent polynomial ``p(z) = sum_{j=lo}^{hi} c_j z^j`` is stored as a dense
coefficient array together with its lowest degree. All symbols in the package
(subdivision masks, their factors, low-pass filters) are instances of
:class:`LaurentPoly`.

Root finding goes through the companion matrix of ``z^{-lo} p(z)`` followed by
cluster detection for multiple roots and Newton polishing of simple ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import (
    ConjugateClosureError,
    DomainError,
    PairingError,
    RootFindingError,
)

CLEANUP_RTOL = 1e-13
MULTIPLICITY_RADIUS = 1e-7
ROOT_RESIDUAL_RTOL = 1e-10
IMAG_RTOL = 1e-12


def _as_coeff_array(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError("Laurent polynomial coefficients must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Finitely supported real coefficient sequence over integer degrees.

    ``coeffs[i]`` is the coefficient of ``z**(lo + i)``. Leading and trailing
    exact zeros are stripped on construction, so ``coeffs[0]`` and
    ``coeffs[-1]`` are nonzero unless the polynomial is identically zero (in
    which case ``coeffs`` is empty and ``lo == 0``).
    """

    coeffs: np.ndarray
    lo: int = 0

    def __post_init__(self):
        arr = _as_coeff_array(self.coeffs)
        nz = np.flatnonzero(arr)
        lo = int(self.lo)
        if nz.size == 0:
            arr, lo = arr[:0], 0
        else:
            lo += int(nz[0])
            arr = arr[nz[0]: nz[-1] + 1]
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "lo", lo)

    @classmethod
    def from_dict(cls, mapping) -> "LaurentPoly":
        """Build from a ``{degree: coefficient}`` mapping."""
        if not mapping:
            return cls(np.zeros(0), 0)
        lo = min(mapping)
        hi = max(mapping)
        arr = np.zeros(hi - lo + 1)
        for deg, c in mapping.items():
            arr[deg - lo] += c
        return cls(arr, lo)

    @classmethod
    def monomial(cls, degree: int, c: float = 1.0) -> "LaurentPoly":
        return cls(np.array([c]), degree)

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls.monomial(0, 1.0)

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + len(self.coeffs))

    def norm(self) -> float:
        """Max-abs coefficient norm."""
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def coeff(self, degree: int) -> float:
        i = degree - self.lo
        if 0 <= i < len(self.coeffs):
            return float(self.coeffs[i])
        return 0.0

    def as_dict(self) -> dict:
        return {int(d): float(c) for d, c in zip(self.degrees, self.coeffs) if c != 0.0}

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients on the degree window ``lo..hi`` (zero padded)."""
        out = np.zeros(hi - lo + 1)
        for d, c in zip(self.degrees, self.coeffs):
            if lo <= d <= hi:
                out[d - lo] = c
            elif c != 0.0:
                raise ValueError(f"degree {d} outside window [{lo}, {hi}]")
        return out

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.lo == other.lo and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.lo, self.coeffs.tobytes()))

    def __repr__(self):
        terms = ", ".join(f"{d}: {c:.17g}" for d, c in zip(self.degrees, self.coeffs))
        return f"LaurentPoly({{{terms}}})"


def cleanup(p: LaurentPoly, rtol: float = CLEANUP_RTOL) -> LaurentPoly:
    """Zero out coefficients below ``rtol * ||p||`` and re-trim."""
    if p.is_zero:
        return p
    c = np.array(p.coeffs)
    c[np.abs(c) <= rtol * p.norm()] = 0.0
    return LaurentPoly(c, p.lo)


def evaluate(p: LaurentPoly, z):
    """Evaluate ``p`` at scalar or array ``z`` by Horner's rule on ``z^{-lo} p``."""
    z_arr = np.asarray(z, dtype=complex)
    if p.is_zero:
        out = np.zeros_like(z_arr)
    else:
        if p.lo < 0 and np.any(z_arr == 0):
            raise DomainError("cannot evaluate a Laurent polynomial with negative degrees at z = 0")
        acc = np.zeros_like(z_arr)
        for c in p.coeffs[::-1]:
            acc = acc * z_arr + c
        out = acc * z_arr ** p.lo if p.lo else acc
    if np.ndim(z) == 0:
        return complex(out)
    return out


eval_ = evaluate


def derivative(p: LaurentPoly, order: int = 1) -> LaurentPoly:
    """Termwise ``order``-th derivative with respect to ``z``."""
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    c = np.array(p.coeffs, dtype=float)
    lo = p.lo
    for _ in range(order):
        if len(c) == 0:
            break
        c = c * np.arange(lo, lo + len(c))
        lo -= 1
    return LaurentPoly(c, lo)


def mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    if p.is_zero or q.is_zero:
        return LaurentPoly(np.zeros(0))
    return cleanup(LaurentPoly(np.convolve(p.coeffs, q.coeffs), p.lo + q.lo))


def add(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    if p.is_zero:
        return q
    if q.is_zero:
        return p
    lo = min(p.lo, q.lo)
    hi = max(p.hi, q.hi)
    return LaurentPoly(p.dense(lo, hi) + q.dense(lo, hi), lo)


def scale(p: LaurentPoly, c: float) -> LaurentPoly:
    return LaurentPoly(np.asarray(p.coeffs) * float(c), p.lo)


def reflect(p: LaurentPoly) -> LaurentPoly:
    """Return ``p(1/z)``: the coefficient at degree ``j`` moves to ``-j``."""
    if p.is_zero:
        return p
    return LaurentPoly(p.coeffs[::-1], -p.hi)


def power(p: LaurentPoly, e: int) -> LaurentPoly:
    out = LaurentPoly.one()
    for _ in range(e):
        out = mul(out, p)
    return out


# ---------------------------------------------------------------- roots


@dataclass(frozen=True)
class RootSet:
    """Roots with multiplicities plus the scale needed to rebuild the polynomial.

    The represented polynomial is
    ``leading * z**lo * prod_i (z - roots[i]) ** multiplicities[i]``.
    """

    roots: tuple
    multiplicities: tuple
    leading: float
    lo: int = 0

    def __post_init__(self):
        if len(self.roots) != len(self.multiplicities):
            raise ValueError("roots and multiplicities differ in length")

    @classmethod
    def from_list(cls, roots, leading=1.0, lo=0) -> "RootSet":
        """Group a flat list of roots (repeats allowed) into a RootSet."""
        flat = [complex(r) for r in roots]
        grouped: list[complex] = []
        mults: list[int] = []
        for r in flat:
            for i, g in enumerate(grouped):
                if abs(g - r) <= MULTIPLICITY_RADIUS * max(1.0, abs(g)):
                    mults[i] += 1
                    break
            else:
                grouped.append(r)
                mults.append(1)
        return cls(tuple(grouped), tuple(mults), float(leading), lo)

    def expanded(self) -> list:
        out = []
        for r, m in zip(self.roots, self.multiplicities):
            out.extend([r] * m)
        return out

    @property
    def degree(self) -> int:
        return int(sum(self.multiplicities))


def _companion_eigenvalues(desc: np.ndarray) -> np.ndarray:
    """Eigenvalues of the companion matrix of a polynomial (descending coeffs)."""
    d = len(desc) - 1
    comp = np.zeros((d, d))
    comp[0, :] = -desc[1:] / desc[0]
    if d > 1:
        comp[np.arange(1, d), np.arange(d - 1)] = 1.0
    return np.linalg.eigvals(comp)


def _taylor_coeffs(asc: np.ndarray, c: complex, upto: int) -> np.ndarray:
    """First ``upto`` Taylor coefficients of the polynomial at ``c`` (repeated synthetic division)."""
    work = np.array(asc[::-1], dtype=complex)
    out = np.zeros(upto, dtype=complex)
    for s in range(upto):
        acc = 0j
        quot = np.empty(len(work) - 1, dtype=complex)
        for i, a in enumerate(work):
            acc = acc * c + a
            if i < len(work) - 1:
                quot[i] = acc
        out[s] = acc
        work = quot
        if len(work) == 0:
            break
    return out


def _taylor_bounds(asc: np.ndarray, c: complex, upto: int) -> np.ndarray:
    absc = abs(c)
    deg = len(asc) - 1
    return np.array([
        sum(abs(asc[i]) * comb(i, s) * absc ** (i - s) for i in range(s, deg + 1))
        for s in range(upto)
    ])


def _is_multiple_root(asc, c, m, rtol=ROOT_RESIDUAL_RTOL) -> bool:
    t = _taylor_coeffs(asc, c, m)
    b = _taylor_bounds(asc, c, m)
    return bool(np.all(np.abs(t) <= rtol * b))


def _newton_polish(asc, r, maxiter=30):
    dasc = asc[1:] * np.arange(1, len(asc))
    for _ in range(maxiter):
        pv = np.polyval(asc[::-1], r)
        dv = np.polyval(dasc[::-1], r)
        if dv == 0:
            break
        step = pv / dv
        r_new = r - step
        if abs(step) <= 4e-16 * max(1.0, abs(r_new)):
            return r_new
        if abs(np.polyval(asc[::-1], r_new)) > abs(pv):
            break
        r = r_new
    return r


def _single_linkage(points: np.ndarray, radius: float) -> list:
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) <= radius * max(1.0, abs(points[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


CLUSTER_RADII = (1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 0.1, 0.3)


def roots(p: LaurentPoly) -> RootSet:
    """All complex roots of ``z^{-lo} p(z)`` with multiplicities.

    Raw companion eigenvalues of an m-fold root scatter by about
    ``eps**(1/m)``; clusters are therefore detected at growing radii and
    accepted as a multiple root when the Taylor coefficients of ``p`` at the
    cluster centroid vanish to rounding level. Remaining simple roots are
    Newton-polished. Every returned root satisfies
    ``|p(r)| <= 1e-10 * sum_i |p_i| |r|^i``.
    """
    if p.is_zero:
        raise ValueError("the zero polynomial has no root set")
    asc = np.asarray(p.coeffs, dtype=float)
    leading = float(asc[-1])
    if len(asc) == 1:
        return RootSet((), (), leading, p.lo)
    try:
        eig = _companion_eigenvalues(asc[::-1])
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(f"companion eigenvalue stage failed: {exc}") from exc

    found: list[tuple[complex, int]] = []
    remaining: list[int] = []

    def split(members: list[int], level: int) -> None:
        # Largest radius first, so a cluster is only accepted when maximal.
        if len(members) < 2 or level < 0:
            remaining.extend(members)
            return
        for grp in _single_linkage(eig[members], CLUSTER_RADII[level]):
            sub = [members[g] for g in grp]
            if len(sub) >= 2:
                centroid = complex(np.mean(eig[sub]))
                if abs(centroid.imag) <= 1e-12 * max(1.0, abs(centroid)):
                    centroid = complex(centroid.real, 0.0)
                if _is_multiple_root(asc, centroid, len(sub)):
                    found.append((centroid, len(sub)))
                    continue
            split(sub, level - 1)

    split(list(range(len(eig))), len(CLUSTER_RADII) - 1)

    for idx in remaining:
        r = _newton_polish(asc, complex(eig[idx]))
        if abs(r.imag) <= 1e-14 * max(1.0, abs(r)) and abs(eig[idx].imag) <= 1e-8 * max(1.0, abs(r)):
            r = complex(r.real, 0.0)
        found.append((r, 1))

    bad = []
    for r, _ in found:
        scale_ = float(np.sum(np.abs(asc) * np.abs(r) ** np.arange(len(asc))))
        if abs(np.polyval(asc[::-1], r)) > ROOT_RESIDUAL_RTOL * scale_:
            bad.append(r)
    if bad:
        raise RootFindingError(
            f"{len(bad)} root(s) failed the residual check after polishing",
            partial=[r for r, _ in found],
        )

    merged = RootSet.from_list([r for r, m in found for _ in range(m)], leading, p.lo)
    order = sorted(range(len(merged.roots)), key=lambda i: (abs(merged.roots[i]), merged.roots[i].real, merged.roots[i].imag))
    return RootSet(
        tuple(merged.roots[i] for i in order),
        tuple(merged.multiplicities[i] for i in order),
        leading,
        p.lo,
    )


def from_roots(rs: RootSet) -> LaurentPoly:
    """Expand ``leading * z**lo * prod (z - r)`` in the monomial basis.

    The root list must be closed under conjugation: the imaginary residue of
    the expanded coefficients may not exceed ``1e-12 * ||coeffs||``.
    """
    flat = rs.expanded()
    desc = np.array([1.0 + 0j])
    for r in flat:
        desc = np.convolve(desc, np.array([1.0, -complex(r)]))
    desc = desc * rs.leading
    mag = float(np.max(np.abs(desc)))
    if float(np.max(np.abs(desc.imag))) > IMAG_RTOL * max(mag, 1e-300):
        raise ConjugateClosureError("roots are not closed under conjugation; coefficients would be complex")
    return cleanup(LaurentPoly(desc.real[::-1], rs.lo))


# ------------------------------------------------------------- pairing


@dataclass
class InversePairing:
    """Result of grouping roots under ``z -> 1/z``.

    ``pairs`` holds real inverse pairs ``(z, 1/z)``; ``quadruples`` holds
    groups ``(z, conj z, 1/z, 1/conj z)``; ``exceptional`` holds roots on the
    unit circle (self-inverse up to conjugation, e.g. -1); ``unpaired`` holds
    the rest.
    """

    pairs: list = field(default_factory=list)
    quadruples: list = field(default_factory=list)
    exceptional: list = field(default_factory=list)
    unpaired: list = field(default_factory=list)


def inverse_pairs(rs: RootSet, tol: float = 1e-8) -> InversePairing:
    """Greedy pairing of roots by ``|z w - 1| < tol``.

    Raises :class:`PairingError` when a leftover root has a near-miss partner
    (``|z w - 1| < 1e3 * tol``), which means ``tol`` was too tight.
    """
    out = InversePairing()
    pool = []
    for r in rs.expanded():
        if abs(abs(r) - 1.0) < tol:
            out.exceptional.append(r)
        else:
            pool.append(r)

    matched: list[tuple[complex, complex]] = []
    used = [False] * len(pool)
    for i, z in enumerate(pool):
        if used[i]:
            continue
        best, best_err = None, np.inf
        for j in range(len(pool)):
            if j == i or used[j]:
                continue
            err = abs(z * pool[j] - 1.0)
            if err < best_err:
                best, best_err = j, err
        if best is not None and best_err < tol:
            used[i] = used[best] = True
            a, b = (z, pool[best]) if abs(z) < abs(pool[best]) else (pool[best], z)
            matched.append((a, b))
    leftovers = [pool[i] for i in range(len(pool)) if not used[i]]

    real_tol = 1e-10
    taken = [False] * len(matched)
    for i, (a, b) in enumerate(matched):
        if taken[i]:
            continue
        if abs(a.imag) <= real_tol * max(1.0, abs(a)):
            taken[i] = True
            out.pairs.append((complex(a.real, 0.0), complex(b.real, 0.0)))
            continue
        partner = None
        for j in range(i + 1, len(matched)):
            if not taken[j] and abs(matched[j][0] - a.conjugate()) < 1e3 * tol * max(1.0, abs(a)):
                partner = j
                break
        if partner is None:
            leftovers.extend([a, b])
            taken[i] = True
            continue
        taken[i] = taken[partner] = True
        if a.imag < 0:
            a, b = a.conjugate(), b.conjugate()
        out.quadruples.append((a, a.conjugate(), b.conjugate(), b))

    for i, z in enumerate(leftovers):
        for j, w in enumerate(leftovers):
            if i != j and abs(z * w - 1.0) < 1e3 * tol:
                raise PairingError(
                    f"roots {z} and {w} nearly pair (|zw-1|={abs(z * w - 1.0):.3g}); tolerance {tol:g} too small"
                )
    out.unpaired = leftovers
    return out
