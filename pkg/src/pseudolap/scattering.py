"""Scattering coefficient F(lam), its derivative, and the Krein coefficient.

F is the constant term of ``-R(x, P; lam)`` after removing the Green
singularity ``log(r)/(2 pi)`` (d=2) or ``-1/(4 pi r)`` (d=3).  The model
manifolds are homogeneous, so no point argument is carried.

Evaluation routes:

* ``closed_form``: coth/cot formula on S^3; image sums over the period
  lattice on tori (below the spectrum, when the sum is short).
* ``ewald``: Gaussian-split of the heat-kernel Laplace transform on tori;
  valid for every real ``lam`` off the spectrum.
* ``spectral_sum``: eigenvalue sum with the heat-trace Weyl tail, used as an
  independent route to ``F(lam) - F(lam0)``.
* ``asymptotic``: large ``-lam`` expansions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy import special

from .models import Kind, ManifoldModel, enumerate_levels, image_shells
from .numerics import EULER_GAMMA, bessel_k0

__all__ = [
    "ExtensionParam",
    "ScatterEval",
    "PoleError",
    "f_closed",
    "f_prime",
    "f_diff_spectral",
    "f_asymptotic",
    "krein_coefficient",
    "shift_derivative",
    "scattering_value",
    "scattering_derivative",
    "raw_value",
    "raw_derivative",
    "f_remainder",
    "fay_constant",
]

FOUR_PI = 4.0 * math.pi
# (gamma - log 2)/(2 pi): constant term of F on flat 2-tori
FAY_A = (EULER_GAMMA - math.log(2.0)) / (2.0 * math.pi)
POLE_GUARD = 1e-8
# lattice-point budget for the image-sum route
_IMAGE_BUDGET = 300_000
_EXP_CUT = 50.0
_EWALD_MAX_GROWTH = 5.0

Method = Literal["closed_form", "ewald", "spectral_sum", "asymptotic"]


class PoleError(ValueError):
    """``lam`` coincides with an eigenvalue (pole of F or of the Krein term)."""


@dataclass(frozen=True)
class ExtensionParam:
    """Extension angle ``alpha`` in [0, pi); alpha = 0 is the Friedrichs case."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 <= a < math.pi):
            raise ValueError("alpha must lie in [0, pi)")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def from_degrees(cls, degrees: float) -> "ExtensionParam":
        return cls(math.radians(degrees))

    @property
    def friedrichs(self) -> bool:
        return self.alpha == 0.0

    @property
    def cot_alpha(self) -> float | None:
        if self.friedrichs:
            return None
        return math.cos(self.alpha) / math.sin(self.alpha)


@dataclass(frozen=True)
class ScatterEval:
    value: float
    error_bound: float
    method: Method

    def __float__(self):
        return self.value


def fay_constant() -> float:
    return FAY_A


# ---------------------------------------------------------------------------
# pole guards


def _check_pole(model: ManifoldModel, lam: float) -> None:
    if not math.isfinite(lam):
        raise ValueError("lam must be finite")
    if model.kind is Kind.SPHERE3:
        if lam < -POLE_GUARD:
            return
        n = max(1, round(math.sqrt(max(lam + 1.0, 0.0))))
        for k in (n - 1, n, n + 1):
            if k >= 1:
                mu = k * k - 1.0
                if abs(lam - mu) < POLE_GUARD * max(1.0, mu):
                    raise PoleError(f"lam={lam!r} is the eigenvalue {mu!r} of Delta")
        return
    if lam < -POLE_GUARD:
        return
    table = enumerate_levels(model, lam + 1.0 + 2 * POLE_GUARD * max(1.0, lam))
    vals = table.values
    i = int(np.searchsorted(vals, lam))
    for j in (i - 1, i):
        if 0 <= j < len(vals):
            mu = float(vals[j])
            if abs(lam - mu) < POLE_GUARD * max(1.0, mu):
                raise PoleError(f"lam={lam!r} is the eigenvalue {mu!r} of Delta")


# ---------------------------------------------------------------------------
# S^3: F(lam) = sqrt(-lam-1) coth(pi sqrt(-lam-1)) / (4 pi), continued past -1


def _sphere_h(w: float):
    """h(w) = sqrt(w) coth(sqrt(w)) (continued to w<0) and h'(w)."""
    if abs(w) < 1e-2:
        h = 1 + w / 3 - w * w / 45 + 2 * w ** 3 / 945 - w ** 4 / 4725
        dh = 1 / 3 - 2 * w / 45 + 6 * w * w / 945 - 4 * w ** 3 / 4725
        return h, dh
    if w > 0:
        r = math.sqrt(w)
        th = math.tanh(r)
        coth = 1.0 / th
        # 1/sinh^2 = coth^2 - 1, computed without overflow
        csch2 = 4.0 * math.exp(-2 * r) / (-math.expm1(-2 * r)) ** 2
        h = r * coth
        dh = (coth - r * csch2) / (2 * r)
    else:
        r = math.sqrt(-w)
        cot = math.cos(r) / math.sin(r)
        h = r * cot
        dh = -(cot - r / math.sin(r) ** 2) / (2 * r)
    return h, dh


def _sphere_f(lam: float) -> tuple[float, float]:
    w = -math.pi ** 2 * (lam + 1.0)
    h, dh = _sphere_h(w)
    return h / (4 * math.pi ** 2), -dh / 4.0


# ---------------------------------------------------------------------------
# tori: image sums


def _image_route_ok(model: ManifoldModel, lam: float) -> bool:
    if lam >= 0:
        return False
    k = math.sqrt(-lam)
    rmax = _EXP_CUT / k
    d = model.dimension
    ball = math.pi * rmax ** 2 if d == 2 else 4.0 / 3.0 * math.pi * rmax ** 3
    return ball / model.volume < _IMAGE_BUDGET


def _torus_images(model: ManifoldModel, lam: float):
    """Remainders (r, r') of F and F' beyond the leading free-space terms."""
    k = math.sqrt(-lam)
    rmax = _EXP_CUT / k
    r2, counts = image_shells(model, rmax)
    r = np.sqrt(r2)
    x = k * r
    if model.dimension == 3:
        e = counts * np.exp(-x)
        rem = -math.fsum(e / r) / FOUR_PI
        drem = -math.fsum(e) / (8 * math.pi * k)
        # tail of the image sum beyond rmax; exp(-50) relative to the first shell
        err = 1e-15 * (abs(rem) + 1.0 / FOUR_PI) + math.exp(-_EXP_CUT) * 4 * math.pi / model.volume * (
            rmax / k + 1 / k ** 2)
    else:
        rem = -math.fsum(counts * bessel_k0(x)) / (2 * math.pi)
        drem = -math.fsum(counts * special.k1(x) * r) / (4 * math.pi * k)
        err = 1e-15 * (abs(rem) + 1.0) + math.exp(-_EXP_CUT) * 2 * math.pi / model.volume * rmax / k
    return rem, drem, err


def _torus_leading(model: ManifoldModel, lam: float) -> tuple[float, float]:
    x = -lam
    if model.dimension == 3:
        k = math.sqrt(x)
        return k / FOUR_PI, -1.0 / (8 * math.pi * k)
    return math.log(x) / FOUR_PI + FAY_A, 1.0 / (FOUR_PI * lam)


# ---------------------------------------------------------------------------
# tori: Ewald split  int_0^tau (real space) + int_tau^inf (eigenvalues)

_LAG_X, _LAG_W = np.polynomial.laguerre.laggauss(48)


def _a_int(dim: int, b: float, tau: float) -> float:
    """int_0^tau t^(-d/2) (exp(b t) - 1) dt."""
    x = b * tau
    if dim == 3:
        if abs(x) < 0.5:
            n = np.arange(1, 30)
            terms = np.cumprod(np.full(29, x) / n) / (n - 0.5)
            return math.sqrt(tau) * float(terms[::-1].sum()) / tau
        base = -2.0 * math.expm1(x) / math.sqrt(tau)
        if b < 0:
            return base - 2 * math.sqrt(-math.pi * b) * math.erf(math.sqrt(-x))
        return base + 2 * math.sqrt(math.pi * b) * float(special.erfi(math.sqrt(x)))
    if abs(x) < 2.0:
        n = np.arange(1, 40)
        terms = np.cumprod(np.full(39, x) / n) / n
        return float(terms[::-1].sum())
    return float(special.expi(x)) - EULER_GAMMA - math.log(abs(x))


def _a_int_prime(dim: int, b: float, tau: float) -> float:
    """d/db of :func:`_a_int`:  int_0^tau t^(1-d/2) exp(b t) dt."""
    x = b * tau
    if dim == 3:
        if abs(x) < 0.5:
            n = np.arange(0, 30)
            fact = np.concatenate([[1.0], np.cumprod(np.full(29, x) / np.arange(1, 30))])
            return math.sqrt(tau) * float((fact / (n + 0.5))[::-1].sum())
        if b < 0:
            return math.sqrt(-math.pi / b) * math.erf(math.sqrt(-x))
        return math.sqrt(math.pi / b) * float(special.erfi(math.sqrt(x)))
    if x == 0:
        return tau
    return math.expm1(x) / b


def _real_space(dim: int, lam: float, tau: float, r2: np.ndarray, counts: np.ndarray):
    """Sum over shells of int_0^tau (4 pi t)^(-d/2) exp(lam t - r^2/(4t)) dt, and d/dlam."""
    if r2.size == 0:
        return 0.0, 0.0
    b = 0.25 * r2[:, None]
    u = 1.0 / tau + _LAG_X[None, :] / b
    base = u ** (dim / 2 - 2) * np.exp(lam / u)
    pref = counts * np.exp(-0.25 * r2 / tau) / (0.25 * r2) / (4 * math.pi) ** (dim / 2)
    val = pref * (base @ _LAG_W)
    dval = pref * ((base / u) @ _LAG_W)
    return math.fsum(val), math.fsum(dval)


@lru_cache(maxsize=16)
def _ewald_tau(model: ManifoldModel) -> float:
    ell = model.shortest_period
    return ell * ell / (4 * math.pi)


def _ewald(model: ManifoldModel, lam: float, derivative: bool = False):
    dim = model.dimension
    tau = _ewald_tau(model)
    if lam > 0:
        tau = min(tau, _EWALD_MAX_GROWTH / lam)
    grow = max(lam, 0.0) * tau
    table = enumerate_levels(model, max(lam, 0.0) + _EXP_CUT / tau)
    mu = table.values
    m = table.multiplicities
    gap = mu - lam
    ex = np.exp(-gap * tau)
    r2max = 4 * tau * (_EXP_CUT + grow)
    r2, counts = image_shells(model, math.sqrt(r2max))
    real, dreal = _real_space(dim, lam, tau, r2, counts)
    pref = (4 * math.pi) ** (-dim / 2)
    vol = model.volume
    if dim == 3:
        const = 1.0 / (4 * math.pi ** 1.5 * math.sqrt(tau))
    else:
        const = EULER_GAMMA / FOUR_PI - math.log(4 * tau) / FOUR_PI
    spec = math.fsum(m * ex / gap) / vol
    val = const - pref * _a_int(dim, lam, tau) - real - spec
    scale = abs(const) + pref * abs(_a_int(dim, lam, tau)) + abs(real) + math.fsum(np.abs(m * ex / gap)) / vol
    err = 1e-14 * scale + math.exp(-_EXP_CUT) * (1 + abs(val))
    if not derivative:
        return float(val), float(err)
    dspec = math.fsum(m * ex * (tau / gap + 1.0 / gap ** 2)) / vol
    dval = -pref * _a_int_prime(dim, lam, tau) - dreal - dspec
    derr = 1e-14 * (abs(dspec) + abs(dreal) + pref * abs(_a_int_prime(dim, lam, tau))) + err
    return float(dval), float(derr)


# ---------------------------------------------------------------------------
# public evaluators


def _evaluate(model: ManifoldModel, lam: float, derivative: bool):
    """(value, error_bound, method) without the eigenvalue guard."""
    if model.kind is Kind.SPHERE3:
        val, dval = _sphere_f(lam)
        v = dval if derivative else val
        return v, 1e-15 * max(1.0, abs(v)), "closed_form"
    if _image_route_ok(model, lam):
        lead, dlead = _torus_leading(model, lam)
        rem, drem, err = _torus_images(model, lam)
        if derivative:
            return dlead + drem, err + 4e-16 * abs(dlead), "closed_form"
        return lead + rem, err + 4e-16 * abs(lead), "closed_form"
    v, err = _ewald(model, lam, derivative)
    return v, err, "ewald"


def raw_value(model: ManifoldModel, lam: float) -> float:
    """F(lam) with no pole guard; for solvers that approach eigenvalues."""
    return _evaluate(model, lam, False)[0]


def raw_derivative(model: ManifoldModel, lam: float) -> float:
    return _evaluate(model, lam, True)[0]


def scattering_value(model: ManifoldModel, lam: float) -> float:
    """F(lam) as a float."""
    return f_closed(model, lam).value


def scattering_derivative(model: ManifoldModel, lam: float) -> float:
    return f_prime(model, lam).value


def f_closed(model: ManifoldModel, lam: float) -> ScatterEval:
    """F(lam) by its closed form (S^3) or lattice route (tori)."""
    lam = float(lam)
    _check_pole(model, lam)
    return ScatterEval(*_evaluate(model, lam, False))


def f_prime(model: ManifoldModel, lam: float) -> ScatterEval:
    """dF/dlam; strictly negative off the spectrum."""
    lam = float(lam)
    _check_pole(model, lam)
    return ScatterEval(*_evaluate(model, lam, True))


def f_remainder(model: ManifoldModel, lam: float) -> tuple[float, float]:
    """Remainders of F and F' beyond the leading large-|lam| terms.

    Leading terms: ``sqrt(-lam)/(4 pi)`` (d=3) and ``log(-lam)/(4 pi) + a``
    (d=2).  Returned without cancellation for ``lam`` below ``-1`` (S^3) or
    in the image-sum regime (tori).
    """
    if model.kind is Kind.SPHERE3:
        if not lam < -1.0:
            raise ValueError("remainder form requires lam < -1 on S^3")
        x = -lam
        q = math.sqrt(x - 1.0)
        sx = math.sqrt(x)
        e = math.exp(-2 * math.pi * q)
        coth_m1 = 2 * e / (1 - e)
        rem = (-1.0 / (q + sx) + q * coth_m1) / FOUR_PI
        csch2 = 4 * e / (1 - e) ** 2
        drem = (-1.0 / (q * sx * (q + sx)) - coth_m1 / q + math.pi * csch2) / (8 * math.pi)
        return rem, drem
    if not _image_route_ok(model, lam):
        val, _ = _ewald(model, lam)
        dval, _ = _ewald(model, lam, derivative=True)
        lead, dlead = _torus_leading(model, lam)
        return val - lead, dval - dlead
    rem, drem, _ = _torus_images(model, lam)
    return rem, drem


def f_diff_spectral(model: ManifoldModel, lam: float, lam0: float, table=None) -> ScatterEval:
    """F(lam) - F(lam0) from the eigenvalue table.

    Laplace split of ``-(1/Vol) int_0^inf Theta(t)(e^{lam t} - e^{lam0 t}) dt``
    at a small time ``tau``: eigenvalues carry ``t > tau`` exactly, while
    ``t < tau`` uses only the Weyl density of states.  Lattice (image)
    corrections below ``tau`` are not evaluated; they are bounded and added
    to ``error_bound``.
    """
    lam, lam0 = float(lam), float(lam0)
    _check_pole(model, lam)
    _check_pole(model, lam0)
    if lam == lam0:
        return ScatterEval(0.0, 0.0, "spectral_sum")
    dim = model.dimension
    ell = model.shortest_period
    top = max(lam, lam0, 0.0)
    tau = ell * ell / (4 * 40.0)
    if top > 0:
        tau = min(tau, _EWALD_MAX_GROWTH / top)
    need = top + _EXP_CUT / tau
    if table is None:
        table = enumerate_levels(model, need)
    elif table.cutoff < need:
        raise ValueError(f"cutoff too small: table reaches {table.cutoff:.6g}, need {need:.6g}")
    mu = table.values
    m = table.multiplicities
    vol = model.volume
    g1 = mu - lam
    g0 = mu - lam0
    terms = m * (np.exp(-g1 * tau) / g1 - np.exp(-g0 * tau) / g0)
    spec = math.fsum(terms) / vol
    sigma = model.weyl_shift
    weyl = (4 * math.pi) ** (-dim / 2) * (_a_int(dim, lam + sigma, tau) - _a_int(dim, lam0 + sigma, tau))
    value = -spec - weyl
    # dropped image terms: every image shell decays at least like exp(-ell^2/(4 tau))
    growth = math.exp((top + sigma) * tau)
    if model.kind is Kind.SPHERE3:
        img = 2 * math.sqrt(math.pi) * (math.pi ** 2 * tau ** -2.5) * math.exp(-math.pi ** 2 / tau)
        img *= tau * growth / vol * abs(lam - lam0) * tau
    else:
        r2, counts = image_shells(model, 3 * ell)
        shells = float(np.dot(counts, np.exp(-r2 / (4 * tau))))
        img = tau * (4 * math.pi * tau) ** (-dim / 2) * shells * growth * 2
    trunc = float(m[-1]) * math.exp(-_EXP_CUT) * tau * 10
    err = img + trunc + 1e-14 * (math.fsum(np.abs(terms)) / vol + abs(weyl))
    return ScatterEval(float(value), float(err), "spectral_sum")


def f_asymptotic(model: ManifoldModel, lam: float) -> ScatterEval:
    """Large ``-lam`` expansion of F.

    d=2 flat: ``log(|lam|+1)/(4 pi) + (gamma - log 2)/(2 pi) - 1/(4 pi (|lam|+1))``,
    remainder O(lam^-2).  d=3: ``sqrt(-lam)/(4 pi)`` on tori and
    ``sqrt(|lam|-1)/(4 pi)`` on S^3, remainders O(|lam|^-inf).
    """
    lam = float(lam)
    if not lam <= -10.0:
        raise ValueError("asymptotic form requires lam <= -10")
    x = -lam
    if model.kind is Kind.SPHERE3:
        q = math.sqrt(x - 1.0)
        return ScatterEval(q / FOUR_PI, q * math.exp(-2 * math.pi * q), "asymptotic")
    if model.dimension == 3:
        ell = model.shortest_period
        return ScatterEval(math.sqrt(x) / FOUR_PI, math.exp(-math.sqrt(x) * ell) / ell, "asymptotic")
    # flat metric: the curvature bracket equals 1
    val = math.log(x + 1.0) / FOUR_PI + FAY_A - 1.0 / (FOUR_PI * (x + 1.0))
    return ScatterEval(val, 1.0 / (x * x), "asymptotic")


def krein_coefficient(model: ManifoldModel, lam: float, ext: ExtensionParam) -> float:
    """k(lam) = sin(alpha) / (F sin(alpha) - cos(alpha))."""
    if ext.friedrichs:
        return 0.0
    f = scattering_value(model, lam)
    den = f - ext.cot_alpha
    if abs(den) <= POLE_GUARD * max(1.0, abs(f)):
        raise PoleError(f"lam={lam!r} is an eigenvalue of the extension")
    return 1.0 / den


def shift_derivative(model: ManifoldModel, lam: float, ext: ExtensionParam) -> float:
    """g(lam) = F'(lam) / (cot(alpha) - F(lam)): the resolvent trace difference.

    Identically zero for the Friedrichs extension.
    """
    if ext.friedrichs:
        return 0.0
    f = scattering_value(model, lam)
    den = ext.cot_alpha - f
    if abs(den) <= POLE_GUARD * max(1.0, abs(f)):
        raise PoleError(f"lam={lam!r} is an eigenvalue of the extension")
    return scattering_derivative(model, lam) / den
