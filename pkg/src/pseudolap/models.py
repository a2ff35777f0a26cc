"""Model manifolds: flat 2- and 3-tori and the round 3-sphere.

Spectral data (distinct Laplace eigenvalues with multiplicities), heat traces
in both the eigenvalue and the Poisson-dual representation, and closed-form
resolvent kernels below the spectrum.

Torus conventions: the rows of the basis matrix are the periods, so the
lattice is ``{n @ A}``.  Eigenvalues are ``4 pi^2 |k|^2`` over the dual
lattice, whose Gram matrix is ``inv(A A^T)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .numerics import bessel_k0

__all__ = [
    "Kind",
    "LatticeBasis",
    "ManifoldModel",
    "EigenLevel",
    "SpectrumTable",
    "CutoffTooLargeError",
    "enumerate_levels",
    "heat_trace",
    "heat_trace_direct",
    "heat_trace_dual",
    "heat_trace_main",
    "heat_trace_images",
    "resolvent_kernel",
    "weyl_count",
]

TWO_PI = 2.0 * math.pi
FOUR_PI_SQ = 4.0 * math.pi ** 2

# exp(-HEAT_EXPONENT) bounds every dropped heat-trace term
HEAT_EXPONENT = 50.0
# heat-trace regime switch (eigenvalue sum for t >= T_STAR)
T_STAR = 1.0
# hard ceiling on lattice boxes scanned in one enumeration
MAX_BOX_POINTS = 400_000_000


class CutoffTooLargeError(ValueError):
    """The requested enumeration exceeds the memory budget."""


class Kind(str, Enum):
    FLAT_TORUS2 = "torus2"
    FLAT_TORUS3 = "torus3"
    SPHERE3 = "sphere3"


@dataclass(frozen=True)
class LatticeBasis:
    vectors: tuple

    def __post_init__(self):
        rows = tuple(tuple(float(x) for x in row) for row in self.vectors)
        d = len(rows)
        if d not in (2, 3) or any(len(r) != d for r in rows):
            raise ValueError("basis must be a 2x2 or 3x3 matrix")
        if not all(math.isfinite(x) for r in rows for x in r):
            raise ValueError("basis entries must be finite")
        if abs(np.linalg.det(np.array(rows))) <= 1e-12 * max(
                1.0, max(abs(x) for r in rows for x in r)) ** d:
            raise ValueError("basis vectors are linearly dependent")
        object.__setattr__(self, "vectors", rows)

    @classmethod
    def parse(cls, text: str) -> "LatticeBasis":
        """Parse ``"1,0,0;0,1,0;0,0,1"`` (rows separated by semicolons)."""
        rows = [[float(x) for x in row.split(",")] for row in text.strip().split(";") if row.strip()]
        return cls(tuple(tuple(r) for r in rows))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.vectors, dtype=float)

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    @property
    def volume(self) -> float:
        return float(abs(np.linalg.det(self.matrix)))

    @property
    def gram(self) -> np.ndarray:
        a = self.matrix
        return a @ a.T

    @property
    def dual_gram(self) -> np.ndarray:
        return np.linalg.inv(self.gram)


@dataclass(frozen=True)
class ManifoldModel:
    kind: Kind
    basis: LatticeBasis | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Kind.SPHERE3:
            if self.basis is not None:
                raise ValueError("sphere3 takes no lattice basis")
        else:
            if self.basis is None:
                raise ValueError(f"{kind.value} requires a lattice basis")
            want = 2 if kind is Kind.FLAT_TORUS2 else 3
            if self.basis.dimension != want:
                raise ValueError(f"{kind.value} requires a {want}x{want} basis")

    @classmethod
    def flat_torus(cls, vectors: Sequence[Sequence[float]]) -> "ManifoldModel":
        basis = LatticeBasis(tuple(tuple(v) for v in vectors))
        kind = Kind.FLAT_TORUS2 if basis.dimension == 2 else Kind.FLAT_TORUS3
        return cls(kind, basis)

    @classmethod
    def unit_torus(cls, dimension: int) -> "ManifoldModel":
        return cls.flat_torus(np.eye(dimension).tolist())

    @classmethod
    def sphere3(cls) -> "ManifoldModel":
        return cls(Kind.SPHERE3)

    @property
    def is_torus(self) -> bool:
        return self.kind is not Kind.SPHERE3

    @property
    def dimension(self) -> int:
        return 2 if self.kind is Kind.FLAT_TORUS2 else 3

    @property
    def volume(self) -> float:
        if self.kind is Kind.SPHERE3:
            return 2.0 * math.pi ** 2
        return self.basis.volume

    @property
    def weyl_shift(self) -> float:
        # S^3 heat kernel is exp(t) times a flat-type kernel
        return 1.0 if self.kind is Kind.SPHERE3 else 0.0

    @property
    def shortest_period(self) -> float:
        """Length of the shortest closed geodesic through a point."""
        if self.kind is Kind.SPHERE3:
            return TWO_PI
        return _shortest_vector(self.basis)

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "dimension": self.dimension, "volume": self.volume}
        if self.basis is not None:
            out["basis"] = [list(r) for r in self.basis.vectors]
        return out


@dataclass(frozen=True)
class EigenLevel:
    value: float
    multiplicity: int


@dataclass(eq=False)
class SpectrumTable:
    """Distinct eigenvalues ``values`` (increasing) with ``multiplicities``."""

    model: ManifoldModel
    values: np.ndarray
    multiplicities: np.ndarray
    cutoff: float
    complete: bool = True
    _levels: tuple | None = field(default=None, repr=False)

    @property
    def levels(self) -> tuple:
        if self._levels is None:
            self._levels = tuple(EigenLevel(float(v), int(m))
                                 for v, m in zip(self.values, self.multiplicities))
        return self._levels

    def __len__(self):
        return len(self.values)

    def count(self) -> int:
        """Eigenvalue count N(cutoff) with multiplicity."""
        return int(self.multiplicities.sum())

    def truncate(self, cutoff: float) -> "SpectrumTable":
        if cutoff > self.cutoff:
            raise ValueError("cannot extend a table by truncation")
        n = int(np.searchsorted(self.values, cutoff, side="right"))
        return SpectrumTable(self.model, self.values[:n], self.multiplicities[:n], cutoff)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mu", "multiplicity"])
        for v, m in zip(self.values, self.multiplicities):
            w.writerow([format(float(v), ".17g"), int(m)])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "model": self.model.kind.value,
            "cutoff": self.cutoff,
            "levels": [[float(v), int(m)] for v, m in zip(self.values, self.multiplicities)],
        }
        return json.dumps(payload)


# ---------------------------------------------------------------------------
# Lattice enumeration


def _rational_form(gram: np.ndarray, max_den: int = 10 ** 6):
    """Integer matrix ``G_int`` and denominator with ``gram == G_int/den``, or None."""
    fracs = []
    for x in gram.ravel():
        f = Fraction(float(x)).limit_denominator(max_den)
        if abs(float(f) - x) > 1e-13 * max(1.0, abs(x)):
            return None
        fracs.append(f)
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    if den > max_den:
        return None
    ints = np.array([int(f * den) for f in fracs], dtype=np.int64).reshape(gram.shape)
    return ints, den


def _box_bounds(gram: np.ndarray, r2max: float) -> np.ndarray:
    inv = np.linalg.inv(gram)
    return np.floor(np.sqrt(np.maximum(r2max * np.diag(inv), 0.0)) + 1e-9).astype(np.int64)


def _box_slabs(bounds: np.ndarray) -> Iterator[np.ndarray]:
    """Integer points of the box, one slab (fixed first coordinate) at a time."""
    total = int(np.prod(2 * bounds + 1))
    if total > MAX_BOX_POINTS:
        raise CutoffTooLargeError(
            f"enumeration would scan {total} lattice points (budget {MAX_BOX_POINTS})")
    rest = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds[1:]]
    grid = np.stack([g.ravel() for g in np.meshgrid(*rest, indexing="ij")], axis=1)
    for n0 in range(-int(bounds[0]), int(bounds[0]) + 1):
        first = np.full((grid.shape[0], 1), n0, dtype=np.int64)
        yield np.hstack([first, grid])


def _quadratic_shells(gram: np.ndarray, r2max: float):
    """Distinct values of ``n^T gram n <= r2max`` over ``n in Z^d`` with counts.

    Exact integer grouping when the Gram matrix is rational, otherwise values
    closer than 1e-9 (relative) are merged.
    """
    bounds = _box_bounds(gram, r2max)
    rational = _rational_form(gram)
    chunks = []
    if rational is not None:
        gint, den = rational
        qmax = int(math.floor(r2max * den * (1 + 1e-12)))
        for pts in _box_slabs(bounds):
            q = np.einsum("ij,jk,ik->i", pts, gint, pts)
            chunks.append(q[q <= qmax])
        q = np.concatenate(chunks)
        vals, counts = np.unique(q, return_counts=True)
        return vals.astype(float) / den, counts.astype(np.int64)
    for pts in _box_slabs(bounds):
        p = pts.astype(float)
        q = np.einsum("ij,jk,ik->i", p, gram, p)
        q[np.abs(q) < 1e-14 * max(1.0, r2max)] = 0.0
        chunks.append(q[q <= r2max * (1 + 1e-12)])
    q = np.sort(np.concatenate(chunks))
    if q.size == 0:
        return q, np.zeros(0, dtype=np.int64)
    breaks = np.nonzero(np.diff(q) > 1e-9 * np.maximum(q[1:], 1e-300))[0] + 1
    starts = np.concatenate([[0], breaks])
    counts = np.diff(np.concatenate([starts, [q.size]]))
    return q[starts], counts.astype(np.int64)


def _lattice_points(basis: LatticeBasis, center: np.ndarray, rmax: float) -> np.ndarray:
    """Vectors ``center + n @ A`` with norm <= rmax."""
    a = basis.matrix
    reach = rmax + float(np.linalg.norm(center))
    bounds = _box_bounds(basis.gram, reach ** 2)
    out = []
    for pts in _box_slabs(bounds):
        v = center + pts.astype(float) @ a
        r = np.sqrt(np.einsum("ij,ij->i", v, v))
        out.append(r[r <= rmax])
    return np.concatenate(out)


@lru_cache(maxsize=64)
def _shortest_vector(basis: LatticeBasis) -> float:
    r2 = float(np.max(np.diag(basis.gram)))
    vals, _ = _quadratic_shells(basis.gram, r2)
    return float(math.sqrt(vals[vals > 0][0]))


@lru_cache(maxsize=64)
def _image_shells(basis: LatticeBasis, r2max: float):
    vals, counts = _quadratic_shells(basis.gram, r2max)
    keep = vals > 0
    return vals[keep], counts[keep]


def image_shells(model: ManifoldModel, rmax: float):
    """Squared lengths and counts of nonzero periods with length <= rmax."""
    # cache on a coarse grid of radii so nearby requests share work
    r2 = _bucket(rmax * rmax)
    vals, counts = _image_shells(model.basis, r2)
    n = int(np.searchsorted(vals, rmax * rmax * (1 + 1e-12), side="right"))
    return vals[:n], counts[:n]


def _bucket(x: float) -> float:
    return float(2.0 ** math.ceil(math.log2(max(x, 1e-3))))


# ---------------------------------------------------------------------------
# Spectra


@lru_cache(maxsize=32)
def _torus_levels(basis: LatticeBasis, cutoff: float):
    vals, counts = _quadratic_shells(basis.dual_gram, cutoff / FOUR_PI_SQ)
    return FOUR_PI_SQ * vals, counts


def _sphere_levels(cutoff: float):
    kmax = int(math.floor(math.sqrt(cutoff + 1.0))) - 1
    while (kmax + 1) * (kmax + 3) <= cutoff:
        kmax += 1
    while kmax >= 0 and kmax * (kmax + 2) > cutoff:
        kmax -= 1
    k = np.arange(kmax + 1, dtype=np.int64)
    return (k * (k + 2)).astype(float), (k + 1) ** 2


def enumerate_levels(model: ManifoldModel, cutoff: float) -> SpectrumTable:
    """All distinct Laplace eigenvalues ``<= cutoff`` with exact multiplicities."""
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    if model.kind is Kind.SPHERE3:
        vals, mult = _sphere_levels(cutoff)
        return SpectrumTable(model, vals, mult.astype(np.int64), float(cutoff))
    vals, mult = _torus_levels(model.basis, _bucket(cutoff))
    n = int(np.searchsorted(vals, cutoff * (1 + 1e-12), side="right"))
    return SpectrumTable(model, vals[:n], mult[:n], float(cutoff))


def weyl_count(model: ManifoldModel, cutoff: float) -> float:
    """Leading Weyl term  Vol * L^(d/2) / ((4 pi)^(d/2) Gamma(d/2 + 1))."""
    d = model.dimension
    return model.volume * cutoff ** (d / 2) / ((4 * math.pi) ** (d / 2) * math.gamma(d / 2 + 1))


# ---------------------------------------------------------------------------
# Heat traces


def heat_trace_main(model: ManifoldModel, t: float) -> float:
    """Leading small-time term  Vol (4 pi t)^(-d/2) exp(shift t)."""
    d = model.dimension
    return model.volume * (4 * math.pi * t) ** (-d / 2) * math.exp(model.weyl_shift * t)


def heat_trace_images(model: ManifoldModel, t: float) -> float:
    """Heat trace minus its leading term, from the dual (image) representation.

    Exponentially small as ``t -> 0``; computed without cancellation.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if model.kind is Kind.SPHERE3:
        # sum_{n in Z} n^2 e^{-n^2 t} = sqrt(pi) sum_m (t^-3/2/2 - pi^2 m^2 t^-5/2) e^{-pi^2 m^2/t}
        mmax = int(math.sqrt(HEAT_EXPONENT * t) / math.pi) + 2
        m = np.arange(1, mmax + 1, dtype=float)
        a = (math.pi * m) ** 2
        terms = (0.5 * t ** -1.5 - a * t ** -2.5) * np.exp(-a / t)
        return math.exp(t) * math.sqrt(math.pi) * float(terms.sum())
    d = model.dimension
    rmax = math.sqrt(4.0 * t * HEAT_EXPONENT)
    vals, counts = image_shells(model, rmax)
    s = float(np.dot(counts, np.exp(-vals / (4.0 * t))))
    return model.volume * (4 * math.pi * t) ** (-d / 2) * s


def heat_trace_dual(model: ManifoldModel, t: float) -> float:
    return heat_trace_main(model, t) + heat_trace_images(model, t)


def heat_trace_direct(model: ManifoldModel, t: float) -> float:
    """Eigenvalue sum  sum_k m_k exp(-mu_k t), truncated at exp(-50)."""
    if not t > 0:
        raise ValueError("t must be positive")
    if model.kind is Kind.SPHERE3:
        nmax = int(math.sqrt(HEAT_EXPONENT / t + 1.0)) + 2
        n = np.arange(1, nmax + 1, dtype=float)
        return float(np.dot(n * n, np.exp(-(n * n - 1.0) * t)))
    table = enumerate_levels(model, HEAT_EXPONENT / t + 1.0)
    return float(np.dot(table.multiplicities, np.exp(-table.values * t)))


def heat_trace(model: ManifoldModel, t: float) -> float:
    """Heat trace ``sum_k m_k exp(-mu_k t)`` in its stable regime."""
    if not t > 0:
        raise ValueError("t must be positive")
    return heat_trace_direct(model, t) if t >= T_STAR else heat_trace_dual(model, t)


# ---------------------------------------------------------------------------
# Resolvent kernels


def _displacement(model: ManifoldModel, dist) -> np.ndarray:
    v = np.atleast_1d(np.asarray(dist, dtype=float))
    if v.size == 1:
        a0 = model.basis.matrix[0]
        v = float(v[0]) * a0 / np.linalg.norm(a0)
    if v.shape != (model.dimension,):
        raise ValueError("displacement must be a scalar or a vector of the torus dimension")
    return v


def resolvent_kernel(model: ManifoldModel, dist, lam: float) -> float:
    """Kernel of ``(Delta - lam)^{-1}`` between two points, ``lam < 0``.

    ``dist`` is the geodesic angle on S^3.  On tori it is a displacement
    vector, or a scalar taken along the first period direction.
    """
    if not lam < 0:
        raise ValueError("resolvent_kernel requires lam < 0 (below the spectrum)")
    if model.kind is Kind.SPHERE3:
        theta = float(dist)
        if not 0 < theta < math.pi:
            raise ValueError("geodesic distance on S^3 must lie in (0, pi)")
        return _sphere_resolvent(theta, lam)
    v = _displacement(model, dist)
    if not np.linalg.norm(v) > 0:
        raise ValueError("points must be distinct")
    k = math.sqrt(-lam)
    rmax = 40.0 / k + model.shortest_period
    r = _lattice_points(model.basis, v, rmax)
    r = r[r > 0]
    if model.dimension == 3:
        terms = np.exp(-k * r) / (4 * math.pi * r)
    else:
        terms = bessel_k0(k * r) / TWO_PI
    return math.fsum(np.sort(terms)[::-1])


def _sphere_resolvent(theta: float, lam: float) -> float:
    shifted = lam + 1.0
    pre = 1.0 / (4 * math.pi * math.sin(theta))
    if shifted < 0:
        k = math.sqrt(-shifted)
        # sinh((pi - theta) k) / sinh(pi k) in overflow-free form
        num = math.exp(-theta * k) * -math.expm1(-2.0 * (math.pi - theta) * k)
        return pre * num / -math.expm1(-2.0 * math.pi * k)
    if shifted == 0:
        return pre * (math.pi - theta) / math.pi
    s = math.sqrt(shifted)
    return pre * math.sin((math.pi - theta) * s) / math.sin(math.pi * s)
