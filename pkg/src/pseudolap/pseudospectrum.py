"""Spectrum of the pseudo-Laplacian and the rank-one trace identity.

New eigenvalues solve ``cot(alpha) = F(lam)``: one in every gap between
consecutive distinct eigenvalues of the Laplacian and one below zero.  Each
level ``mu_j`` keeps multiplicity ``m_j - 1``.

Paired sums ``sum [phi(nu) - phi(mu)]`` pair each new root with the distinct
level directly *above* it (the negative root with ``mu_0 = 0``), so every
term has a fixed sign.  Beyond the cutoff the sum is continued with the mean
spectral shift ``xi(E) = 1 - arg(c - F(E + i0))/pi``, where ``F`` is its
smooth Weyl part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .models import Kind, ManifoldModel, SpectrumTable, enumerate_levels, resolvent_kernel
from .numerics import EULER_GAMMA, ConvergenceError, Tolerance, bracketed_root, quad
from .scattering import (
    FAY_A,
    ExtensionParam,
    PoleError,
    krein_coefficient,
    raw_value,
    shift_derivative,
)

__all__ = [
    "SecularRoot",
    "PseudoSpectrum",
    "TraceReport",
    "PairedSum",
    "secular_roots",
    "paired_sum",
    "trace_difference",
    "verify_trace_identity",
    "krein_resolvent",
    "InterlacingError",
]

ROOT_TOL = 1e-10
_SOLVER_TOL = Tolerance(abs_tol=1e-300, rel_tol=1e-13, max_iter=300)


class InterlacingError(RuntimeError):
    """The computed roots violate nu_0 < 0 < nu_1 < mu_1 < ..."""


@dataclass(frozen=True)
class SecularRoot:
    value: float
    source_level: int  # index of the distinct level just below; -1 for the negative root
    residual: float


@dataclass
class PseudoSpectrum:
    """Roots of the secular equation for all gaps whose lower end is ``<= cutoff``."""

    ext: ExtensionParam
    roots: list
    retained: list
    cutoff: float
    model: ManifoldModel
    levels: SpectrumTable = field(repr=False)

    @property
    def negative_root(self) -> SecularRoot:
        return self.roots[0]

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.roots])

    def upper_levels(self) -> np.ndarray:
        """Distinct level paired with each root (the one directly above)."""
        return self.levels.values[[r.source_level + 1 for r in self.roots]]

    def eigenvalues(self, upto: float | None = None) -> list:
        """(value, multiplicity) pairs of the pseudo-Laplacian, sorted."""
        upto = self.cutoff if upto is None else upto
        out = [(r.value, 1) for r in self.roots if r.value <= upto]
        out += [(mu, m) for mu, m in self.retained if mu <= upto]
        return sorted(out)

    def check_interlacing(self) -> None:
        mu = self.levels.values
        prev = -math.inf
        for r in self.roots:
            lo = -math.inf if r.source_level < 0 else mu[r.source_level]
            hi = mu[r.source_level + 1]
            if not (lo < r.value < hi and r.value > prev):
                raise InterlacingError(f"root {r.value!r} outside ({lo!r}, {hi!r})")
            prev = r.value
        if not self.roots[0].value < 0:
            raise InterlacingError("negative root is not negative")


def _levels_beyond(model: ManifoldModel, cutoff: float) -> SpectrumTable:
    """Level table that also contains the first distinct level above ``cutoff``."""
    top = cutoff * 1.25 + 50.0
    while True:
        table = enumerate_levels(model, top)
        if table.values[-1] > cutoff:
            return table
        top *= 2


def _negative_root_guess(model: ManifoldModel, c: float) -> float:
    if model.dimension == 3:
        return -max(1.0, 4.0 * (4 * math.pi * c) ** 2) if c > 0 else -1.0
    kappa = 4 * math.pi * c - 2 * EULER_GAMMA + math.log(4.0)
    return -max(1.0, 4.0 * math.exp(min(kappa, 700.0)))


def _negative_limit(model: ManifoldModel, c: float) -> float:
    if model.dimension == 3:
        return 1e6 * max(1.0, (4 * math.pi * c) ** 2)
    kappa = 4 * math.pi * c - 2 * EULER_GAMMA + math.log(4.0)
    return 1e6 * max(1.0, math.exp(min(kappa, 700.0)))


def _solve_negative(model: ManifoldModel, c: float) -> float:
    def h(x):
        return raw_value(model, x) - c

    eps = 1e-2
    while h(-eps) >= 0:
        eps *= 0.1
        if eps < 1e-300:
            raise ConvergenceError("no sign change near 0 for the negative root")
    lo = min(_negative_root_guess(model, c), -2 * eps)
    limit = _negative_limit(model, c)
    while h(lo) <= 0:
        lo *= 4.0
        if -lo > limit:
            raise ConvergenceError("negative-root bracket exceeded its expansion limit")
    return bracketed_root(h, lo, -eps, _SOLVER_TOL)


def _solve_gap(model: ManifoldModel, c: float, lo_mu: float, hi_mu: float) -> float:
    def h(x):
        return raw_value(model, x) - c

    delta_lo = 1e-9 * max(1.0, lo_mu)
    delta_hi = 1e-9 * max(1.0, hi_mu)
    for _ in range(4):
        a, b = lo_mu + delta_lo, hi_mu - delta_hi
        if h(a) > 0 > h(b):
            return bracketed_root(h, a, b, _SOLVER_TOL)
        delta_lo *= 0.1
        delta_hi *= 0.1
    raise ConvergenceError(f"no sign change in the gap ({lo_mu!r}, {hi_mu!r})")


def secular_roots(model: ManifoldModel, ext: ExtensionParam, cutoff: float) -> PseudoSpectrum:
    """Solve ``cot(alpha) = F(lam)`` below the distinct levels up to ``cutoff``.

    Returns the negative root and one root in every gap ``(mu_j, mu_{j+1})``
    with ``mu_j <= cutoff``, each refined to ``1e-10*max(1, |nu|)``.
    """
    if ext.friedrichs:
        raise ValueError("the Friedrichs extension has no secular equation")
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    c = ext.cot_alpha
    table = _levels_beyond(model, cutoff)
    mu = table.values
    n_gaps = int(np.searchsorted(mu, cutoff, side="right"))
    roots = []
    nu0 = _solve_negative(model, c)
    roots.append(SecularRoot(nu0, -1, abs(raw_value(model, nu0) - c)))
    for j in range(n_gaps):
        nu = _solve_gap(model, c, float(mu[j]), float(mu[j + 1]))
        res = abs(raw_value(model, nu) - c)
        roots.append(SecularRoot(nu, j, res))
    retained = [(float(v), int(m) - 1) for v, m in zip(mu[:n_gaps], table.multiplicities[:n_gaps]) if m >= 2]
    spec = PseudoSpectrum(ext, roots, retained, float(cutoff), model, table)
    spec.check_interlacing()
    return spec


# ---------------------------------------------------------------------------
# paired sums and the mean spectral shift


def _mean_shift_upper(model: ManifoldModel, c: float, energy: float) -> float:
    """Gap-averaged fraction of (nu, mu_up) at energy ``E``."""
    if model.kind is Kind.SPHERE3:
        z = complex(c, math.sqrt(energy + 1.0) / (4 * math.pi))
    elif model.dimension == 3:
        z = complex(c, math.sqrt(energy) / (4 * math.pi))
    else:
        z = complex(c - FAY_A - math.log(energy) / (4 * math.pi), 0.25)
    return 1.0 - math.atan2(z.imag, z.real) / math.pi


@dataclass(frozen=True)
class PairedSum:
    value: float
    partial: float
    tail: float
    error_bound: float


def paired_sum(spec: PseudoSpectrum, phi: Callable, dphi: Callable) -> PairedSum:
    """``sum over pairs [phi(nu) - phi(mu_up)]`` plus the mean-shift tail.

    ``dphi`` must be integrable at infinity.  The error bound is empirical:
    half the last gap times ``|phi'|`` there, plus root-refinement error.
    """
    nu = spec.values()
    mu_up = spec.upper_levels()
    terms = np.array([phi(a) - phi(b) for a, b in zip(nu, mu_up)])
    partial = math.fsum(terms)
    e0 = float(mu_up[-1])
    c = spec.ext.cot_alpha
    model = spec.model

    def integrand(e):
        return _mean_shift_upper(model, c, e) * dphi(e)

    tail_q = quad(integrand, e0, math.inf, Tolerance(1e-15, 1e-12, 500))
    tail = -tail_q.value
    gap = float(mu_up[-1] - spec.levels.values[spec.roots[-1].source_level])
    boundary = 0.5 * gap * abs(dphi(e0))
    roots_err = math.fsum(ROOT_TOL * max(1.0, abs(v)) * abs(dphi(v)) for v in nu)
    err = boundary + roots_err + tail_q.error_estimate + 1e-15 * math.fsum(np.abs(terms))
    return PairedSum(partial + tail, partial, tail, err)


@dataclass(frozen=True)
class TraceReport:
    lam: float
    lhs: float  # paired eigenvalue sum
    lhs_error: float
    rhs: float  # F'/(cot(alpha) - F)
    rhs_error: float
    tol: float
    passed: bool

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)


def trace_difference(model: ManifoldModel, ext: ExtensionParam, lam: float,
                     cutoff: float = 0.0, spec: PseudoSpectrum | None = None) -> tuple[float, float]:
    """Tr[(Delta_alpha - lam)^-1 - (Delta - lam)^-1] as (value, error_bound).

    Computed from the paired eigenvalue sum; pass ``spec`` to reuse roots.
    """
    if ext.friedrichs:
        return 0.0, 0.0
    if spec is None:
        spec = secular_roots(model, ext, cutoff)
    if not lam < spec.negative_root.value:
        if any(abs(lam - v) < 1e-12 * max(1.0, abs(v)) for v in spec.values()):
            raise PoleError(f"lam={lam!r} is an eigenvalue of the extension")

    res = paired_sum(spec, lambda e: 1.0 / (e - lam), lambda e: -1.0 / (e - lam) ** 2)
    return res.value, res.error_bound


def verify_trace_identity(model: ManifoldModel, ext: ExtensionParam, lam: float,
                          cutoff: float = 0.0, tol: float = 1e-6,
                          spec: PseudoSpectrum | None = None) -> TraceReport:
    """Compare the paired eigenvalue sum with ``F'/(cot(alpha) - F)``."""
    if ext.friedrichs:
        return TraceReport(lam, 0.0, 0.0, 0.0, 0.0, tol, True)
    lhs, lhs_err = trace_difference(model, ext, lam, cutoff, spec)
    rhs = shift_derivative(model, lam, ext)
    rhs_err = 1e-13 * max(1.0, abs(rhs))
    return TraceReport(lam, lhs, lhs_err, rhs, rhs_err, tol, abs(lhs - rhs) <= tol)


def krein_resolvent(model: ManifoldModel, ext: ExtensionParam, d_xy, d_xp, d_py, lam: float) -> float:
    """Kernel of (Delta_alpha - lam)^-1: ``R(x,y) + k(lam) R(x,P) R(P,y)``."""
    r_xy = resolvent_kernel(model, d_xy, lam)
    k = krein_coefficient(model, lam, ext)
    if k == 0.0:
        return r_xy
    return r_xy + k * resolvent_kernel(model, d_xp, lam) * resolvent_kernel(model, d_py, lam)
