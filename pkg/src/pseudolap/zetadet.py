"""Zeta-regularized determinants of the Laplacian and the pseudo-Laplacian.

``log det(Delta - lam)`` is ``-zeta'(0)`` with zeta obtained from the heat
trace by a Mellin transform split at ``t_split``:

* ``t < t_split``: the leading term ``Vol (4 pi t)^(-d/2) e^{sigma t}`` is
  continued analytically in closed form; the lattice (image) remainder is
  exponentially small and integrated numerically;
* ``t > t_split``: eigenvalue sum of exponential integrals ``E1``.

For the pseudo-Laplacian the determinant follows from the rank-one
comparison ``det(Delta_alpha - lam) = -4 pi [e^gamma] (cot(alpha) - F) det(Delta - lam)``
(the ``e^gamma`` factor only in two dimensions).  An independent route
integrates the spectral shift derivative ``g`` along the real axis with the
large-``|lam|`` subtractions that define the relative zeta derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .models import (
    ManifoldModel,
    enumerate_levels,
    heat_trace_direct,
    heat_trace_images,
    heat_trace_main,
    T_STAR,
)
from .numerics import EULER_GAMMA, Tolerance, quad
from .pseudospectrum import PseudoSpectrum, paired_sum
from .scattering import (
    FAY_A,
    ExtensionParam,
    f_remainder,
    raw_derivative,
    raw_value,
    scattering_value,
    _a_int,
)

__all__ = [
    "SignedLogDet",
    "RelativeZetaParams",
    "RatioReport",
    "logdet_unperturbed",
    "logdet_star",
    "logdet_pseudo_theorem",
    "relative_zeta_prime_numeric",
    "logdet_pseudo_at_zero",
    "theorem_ratio",
    "CTooSmallError",
]

_E1_CUT = 60.0
_QTOL = Tolerance(abs_tol=1e-15, rel_tol=1e-13, max_iter=400)


class CTooSmallError(ValueError):
    """The cut ``-C`` is not below the negative eigenvalue of the extension."""


@dataclass(frozen=True)
class SignedLogDet:
    sign: int
    log_abs: float

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if not math.isfinite(self.log_abs):
            raise ValueError("log_abs must be finite")

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_abs)


@dataclass(frozen=True)
class RelativeZetaParams:
    C: float | None = None  # None picks a safe cut automatically
    tol: Tolerance = _QTOL

    def __post_init__(self):
        if self.C is not None and not self.C >= 10:
            raise ValueError("C must be >= 10")


# ---------------------------------------------------------------------------
# Mellin pieces


def _main_mellin(dim: int, b: float, t: float) -> float:
    """d/ds|_0 of (1/Gamma(s)) int_0^t u^(s-1-d/2) e^(b u) du, continued in s."""
    if dim == 3:
        x = b * t
        # int_0^t u^(-5/2) (e^{bu} - 1 - bu) du, integrated by parts
        j = -(2.0 / 3.0) * t ** -1.5 * (math.expm1(x) - x) + (2.0 / 3.0) * b * _a_int(3, b, t)
        return j - (2.0 / 3.0) * t ** -1.5 - 2.0 * b * t ** -0.5
    return -math.exp(b * t) / t + b + b * (EULER_GAMMA + math.log(t) + _a_int(2, b, t))


def _theta_remainder(model: ManifoldModel, t: float) -> float:
    """Heat trace minus its leading term."""
    if t <= T_STAR:
        return heat_trace_images(model, t)
    return heat_trace_direct(model, t) - heat_trace_main(model, t)


def _remainder_integral(model: ManifoldModel, lam: float, t_split: float, skip_zero: bool) -> float:
    def f(t):
        return _theta_remainder(model, t) * math.exp(lam * t) / t

    pts = [T_STAR] if t_split > T_STAR else None
    return quad(f, 0.0, t_split, _QTOL, points=pts).value


def _spectral_e1(model: ManifoldModel, lam: float, t_split: float, cutoff: float | None,
                 skip_zero: bool) -> float:
    need = lam + _E1_CUT / t_split
    if cutoff is None:
        cutoff = max(need, 1.0)
    elif cutoff < need:
        raise ValueError(f"cutoff {cutoff:.6g} below the required {need:.6g}")
    table = enumerate_levels(model, cutoff)
    mu, m = table.values, table.multiplicities
    if skip_zero:
        mu, m = mu[1:], m[1:]
    return math.fsum(m * special.exp1((mu - lam) * t_split))


def _zeta_prime(model: ManifoldModel, lam: float, t_split: float, cutoff, skip_zero: bool) -> float:
    dim = model.dimension
    pref = model.volume * (4 * math.pi) ** (-dim / 2)
    main = pref * _main_mellin(dim, lam + model.weyl_shift, t_split)
    rem = _remainder_integral(model, lam, t_split, skip_zero)
    spec = _spectral_e1(model, lam, t_split, cutoff, skip_zero)
    total = main + rem + spec
    if skip_zero:
        # the zero mode removed from t < t_split
        total -= EULER_GAMMA + math.log(t_split)
    return total


def logdet_unperturbed(model: ManifoldModel, lam_tilde: float, t_split: float = T_STAR,
                       cutoff: float | None = None) -> SignedLogDet:
    """log det(Delta - lam_tilde) for ``lam_tilde < 0``."""
    lam = float(lam_tilde)
    if not lam < 0:
        raise ValueError("lam_tilde must be negative")
    if not t_split > 0:
        raise ValueError("t_split must be positive")
    return SignedLogDet(1, -_zeta_prime(model, lam, t_split, cutoff, False))


def logdet_star(model: ManifoldModel, t_split: float = T_STAR, cutoff: float | None = None) -> SignedLogDet:
    """log det* Delta: the zero eigenvalue removed."""
    if not t_split > 0:
        raise ValueError("t_split must be positive")
    return SignedLogDet(1, -_zeta_prime(model, 0.0, t_split, cutoff, True))


def _comparison_constant(model: ManifoldModel) -> float:
    """log of 4 pi, times e^gamma in two dimensions."""
    c = math.log(4 * math.pi)
    return c + EULER_GAMMA if model.dimension == 2 else c


def logdet_pseudo_theorem(model: ManifoldModel, ext: ExtensionParam, lam_tilde: float,
                          t_split: float = T_STAR) -> SignedLogDet:
    """log det(Delta_alpha - lam_tilde) via the rank-one comparison formula."""
    base = logdet_unperturbed(model, lam_tilde, t_split)
    if ext.friedrichs:
        return base
    diff = scattering_value(model, lam_tilde) - ext.cot_alpha
    if diff == 0.0:
        raise ValueError("lam_tilde is an eigenvalue of the extension")
    sign = 1 if diff > 0 else -1
    return SignedLogDet(sign, _comparison_constant(model) + math.log(abs(diff)) + base.log_abs)


def logdet_pseudo_at_zero(model: ManifoldModel, ext: ExtensionParam,
                          t_split: float = T_STAR) -> SignedLogDet:
    """log det Delta_alpha from det* Delta; independent of alpha."""
    if ext.friedrichs:
        raise ValueError("the Friedrichs extension has a zero mode")
    star = logdet_star(model, t_split)
    return SignedLogDet(-1, _comparison_constant(model) - math.log(model.volume) + star.log_abs)


# ---------------------------------------------------------------------------
# relative zeta derivative by real-axis integration


def _kappa(c: float) -> float:
    return 4 * math.pi * (c - FAY_A)


def _g(model: ManifoldModel, c: float, lam: float) -> float:
    return raw_derivative(model, lam) / (c - raw_value(model, lam))


def _tail_integrand(model: ManifoldModel, c: float, x: float) -> float:
    """Subtracted integrand at lam = -x, in the stable remainder form."""
    r, dr = f_remainder(model, -x)
    if model.dimension == 3:
        f = math.sqrt(x) / (4 * math.pi) + r
        return (c - r - 2 * x * dr) / (-2 * x * (c - f))
    ell = math.log(x) - _kappa(c)
    return -4 * math.pi * (x * dr * ell + r) / (x * ell * (ell + 4 * math.pi * r))


def _auto_cut(model: ManifoldModel, c: float, lam: float) -> float:
    from .pseudospectrum import _solve_negative

    nu0 = _solve_negative(model, c)
    cut = max(50.0, 2.0 * abs(nu0), 2.0 * abs(lam))
    if model.dimension == 2:
        cut = max(cut, 2.0 * math.exp(min(_kappa(c), 700.0)))
    return cut


def relative_zeta_prime_numeric(model: ManifoldModel, ext: ExtensionParam, lam_tilde: float,
                                params: RelativeZetaParams = RelativeZetaParams()) -> float:
    """zeta'(0, Delta_alpha - lam) - zeta'(0, Delta - lam) by real-axis quadrature.

    d=3:  D = int_{-C}^{lam} g + int_{-inf}^{-C} (g + 1/(2 lam)) - log(C)/2
    d=2:  D = int_{-C}^{lam} g + int_{-inf}^{-C} (g - 1/(|lam| (log|lam| - kappa)))
              - gamma - log(log C - kappa)

    with ``g = F'/(cot(alpha) - F)``.  Requires ``lam_tilde`` below the
    negative eigenvalue of the extension so every logarithm is real.
    """
    if ext.friedrichs:
        return 0.0
    lam = float(lam_tilde)
    c = ext.cot_alpha
    if not lam < 0 or raw_value(model, lam) <= c:
        raise ValueError("lam_tilde must lie below the negative eigenvalue of the extension")
    cut = params.C if params.C is not None else _auto_cut(model, c, lam)
    if raw_value(model, -cut) <= c:
        raise CTooSmallError(f"C too small: -C={-cut!r} is not below the negative eigenvalue")
    if model.dimension == 2 and math.log(cut) <= _kappa(c):
        raise CTooSmallError("C too small: log C must exceed kappa")
    tol = params.tol

    # middle piece in log|lam| so wide ranges integrate evenly
    u0, u1 = math.log(cut), math.log(-lam)
    mid = quad(lambda u: _g(model, c, -math.exp(u)) * math.exp(u), u1, u0, tol).value
    tail = quad(lambda u: _tail_integrand(model, c, math.exp(u)) * math.exp(u),
                u0, u0 + 120.0, Tolerance(tol.abs_tol, tol.rel_tol, 1000)).value
    if model.dimension == 3:
        return mid + tail - 0.5 * math.log(cut)
    return mid + tail - EULER_GAMMA - math.log(math.log(cut) - _kappa(c))


# ---------------------------------------------------------------------------
# theorem ratio from the paired eigenvalue sum


@dataclass(frozen=True)
class RatioReport:
    lam_tilde: float
    lam_ref: float
    q_spectral: float
    q_error: float
    q_theorem: float

    @property
    def difference(self) -> float:
        return abs(self.q_spectral - self.q_theorem)


def theorem_ratio(spec: PseudoSpectrum, lam_tilde: float, lam_ref: float) -> RatioReport:
    """Q(lam) = det-ratio at ``lam_tilde`` over ``lam_ref`` from paired eigenvalues.

    Compared with ``(cot(alpha) - F(lam_tilde)) / (cot(alpha) - F(lam_ref))``.
    """
    a, b = float(lam_tilde), float(lam_ref)

    def phi(e):
        return math.log((e - a) / (e - b))

    def dphi(e):
        return 1.0 / (e - a) - 1.0 / (e - b)

    res = paired_sum(spec, phi, dphi)
    q = math.exp(res.value)
    c = spec.ext.cot_alpha
    model = spec.model
    q_thm = (c - scattering_value(model, a)) / (c - scattering_value(model, b))
    return RatioReport(a, b, q, q * res.error_bound, q_thm)
