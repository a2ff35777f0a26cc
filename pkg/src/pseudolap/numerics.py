"""Special functions, quadrature, root bracketing and summation helpers.

Everything here is pure and reentrant.  Quadrature and bracketing are thin
wrappers over :mod:`scipy` that enforce the package tolerance contract and
report evaluation counts; the modified Bessel function K0 is evaluated
in-house with a two-regime scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, optimize

EULER_GAMMA = 0.57721566490153286061

__all__ = [
    "EULER_GAMMA",
    "ConvergenceError",
    "Tolerance",
    "QuadResult",
    "bessel_k0",
    "quad",
    "heat_integral_identity_check",
    "bracketed_root",
    "deterministic_sum",
]


class ConvergenceError(RuntimeError):
    """An iterative method did not meet its tolerance within budget."""


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one of abs_tol, rel_tol must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")

    def accepts(self, error: float, value: float) -> bool:
        return error <= max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# Modified Bessel function K0

_K0_SERIES_TERMS = 30
_K0_UNDERFLOW = 745.0


def _k0_series(x: np.ndarray) -> np.ndarray:
    # K0(x) = -(log(x/2) + gamma) I0(x) + sum_{k>=1} (x^2/4)^k / (k!)^2 * H_k
    y = 0.25 * x * x
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    acc = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, _K0_SERIES_TERMS):
        term = term * y / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        acc = acc + term * harmonic
    return -(np.log(0.5 * x) + EULER_GAMMA) * i0 + acc


def _k0_continued_fraction(x: np.ndarray) -> np.ndarray:
    # Steed's evaluation of Temme's CF2 for order zero, valid for x >= 2.
    eps = 1e-17
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 400):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < eps * np.abs(s)):
            break
    else:  # pragma: no cover - the fraction converges in < 100 steps for x >= 2
        raise ConvergenceError("K0 continued fraction did not converge")
    return np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s


def bessel_k0(x):
    """Modified Bessel function of the second kind of order zero.

    Power series for ``x <= 2``, Temme/Steed continued fraction above; both
    regimes agree to ~1e-15 at the crossover.  Accepts scalars or arrays and
    returns 0 past the double-precision underflow point ``x > 745``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("bessel_k0 requires x > 0")
    flat = arr.ravel()
    out = np.zeros_like(flat)
    small = flat <= 2.0
    mid = (~small) & (flat <= _K0_UNDERFLOW)
    if small.any():
        out[small] = _k0_series(flat[small])
    if mid.any():
        out[mid] = _k0_continued_fraction(flat[mid])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature


def quad(f: Callable[[float], float], a: float, b: float,
         tol: Tolerance = DEFAULT_TOL, points=None) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature with the package tolerance contract.

    Infinite endpoints are allowed.  Raises :class:`ConvergenceError` when the
    reported error exceeds ``max(abs_tol, rel_tol*|value|)`` by more than a
    factor of ten (QUADPACK estimates are conservative).
    """
    limit = max(50, int(tol.max_iter))
    kwargs = dict(epsabs=tol.abs_tol, epsrel=tol.rel_tol, limit=limit, full_output=1)
    if points is not None and np.isfinite(a) and np.isfinite(b):
        kwargs["points"] = points
    value, err, info = integrate.quad(f, a, b, **kwargs)[:3]
    neval = int(info["neval"])
    if not np.isfinite(value) or not np.isfinite(err):
        raise ConvergenceError("quadrature produced a non-finite result")
    if err > 10.0 * max(tol.abs_tol, tol.rel_tol * abs(value)):
        raise ConvergenceError(
            f"quadrature error {err:.3e} exceeds tolerance for value {value:.6e}")
    return QuadResult(float(value), float(err), neval)


def heat_integral_identity_check(d: float, lam: float,
                                 tol: Tolerance = Tolerance(0.0, 1e-13, 400)) -> QuadResult:
    """Quadrature of  int_0^inf exp(lam t) t^(-3/2) exp(-d^2/(4t)) dt.

    The closed form is ``2 sqrt(pi)/|d| * exp(-|d| sqrt(-lam))``; this routine
    only evaluates the left side so callers can compare.  Uses ``t = exp(u)``,
    which maps both endpoints to exponentially decaying tails.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    if not lam < 0:
        raise ValueError("lam must be negative")
    b = 0.25 * d * d
    k = math.sqrt(-lam)
    # peak of the integrand in u; the integrand is log-concave in u
    u0 = math.log(b / k) if b > 0 else 0.0

    def integrand(u):
        t = math.exp(u)
        expo = lam * t - b / t - 0.5 * u
        return math.exp(expo) if expo > -745 else 0.0

    peak = integrand(u0)
    # shift so the magnitude is O(1); quadrature is then purely relative
    scale = peak if peak > 0 else 1.0
    width = 60.0
    res = quad(lambda u: integrand(u) / scale, u0 - width, u0 + width, tol, points=[u0])
    return QuadResult(res.value * scale, res.error_estimate * scale, res.evaluations)


# ---------------------------------------------------------------------------
# Root bracketing


def bracketed_root(f: Callable[[float], float], lo: float, hi: float,
                   tol: Tolerance = DEFAULT_TOL) -> float:
    """Brent's method on a sign-changing bracket; deterministic."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if not (np.sign(flo) * np.sign(fhi) < 0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]")
    rtol = max(tol.rel_tol, 4.0 * np.finfo(float).eps)
    xtol = tol.abs_tol if tol.abs_tol > 0 else 1e-300
    try:
        root, info = optimize.brentq(f, lo, hi, xtol=xtol, rtol=rtol,
                                     maxiter=int(tol.max_iter), full_output=True,
                                     disp=False)
    except RuntimeError as exc:  # pragma: no cover - disp=False avoids this path
        raise ConvergenceError(str(exc)) from exc
    if not info.converged:
        raise ConvergenceError(f"brentq: {info.flag}")
    return float(root)


# ---------------------------------------------------------------------------
# Summation


def deterministic_sum(terms: Iterable[float]) -> float:
    """Exactly rounded sum (Shewchuk/``math.fsum``), independent of chunking."""
    return math.fsum(terms)
