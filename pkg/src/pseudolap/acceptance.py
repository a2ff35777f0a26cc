"""Acceptance suite: ten quantitative checks run by ``pseudolap verify`` and pytest.

Each criterion returns a :class:`CriterionResult` holding every individual
check as ``(label, observed, tolerance, passed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .models import ManifoldModel, T_STAR, heat_trace_direct, heat_trace_dual
from .numerics import heat_integral_identity_check
from .pseudospectrum import secular_roots, verify_trace_identity
from .scattering import ExtensionParam, f_asymptotic, f_closed, f_diff_spectral
from .zetadet import (
    RelativeZetaParams,
    logdet_pseudo_at_zero,
    logdet_pseudo_theorem,
    logdet_star,
    logdet_unperturbed,
    relative_zeta_prime_numeric,
    theorem_ratio,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all", "default_models"]

PI = math.pi
CUBE_CUTOFF = 4 * PI ** 2 * 400
SPHERE_CUTOFF = 1e4
CUBE_TRACE_LAMBDA = -5.0
CORNER_LAMBDA = -1e-3


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool = True
    checks: list = field(default_factory=list)

    def record(self, label: str, observed: float, tol: float) -> None:
        ok = bool(observed <= tol)
        self.checks.append((label, observed, tol, ok))
        self.passed = self.passed and ok

    def require(self, label: str, ok: bool) -> None:
        self.checks.append((label, float(not ok), 0.0, bool(ok)))
        self.passed = self.passed and bool(ok)

    @property
    def applicable(self) -> bool:
        return bool(self.checks)

    @property
    def worst(self):
        """Check with the largest observed/tolerance ratio."""
        if not self.checks:
            return None

        def ratio(c):
            return c[1] / c[2] if c[2] > 0 else (math.inf if not c[3] else 0.0)
        return max(self.checks, key=ratio)

    def line(self) -> str:
        if not self.applicable:
            return f"[SKIP] {self.number:2d}. {self.title}: not applicable to the selected models"
        label, obs, tol, _ = self.worst
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d}. {self.title}: worst {label} = {obs:.3e} (tol {tol:.0e})"


def default_models() -> dict:
    return {
        "sphere3": ManifoldModel.sphere3(),
        "torus3": ManifoldModel.unit_torus(3),
        "torus2": ManifoldModel.unit_torus(2),
    }


def criterion_1(models) -> CriterionResult:
    res = CriterionResult(1, "S^3 scattering closed form")
    if "sphere3" not in models:
        return res
    s3 = models["sphere3"]
    exact = 1.0 / (math.tanh(PI) * 4 * PI)
    res.record("|F(-2) - coth(pi)/4pi|", abs(f_closed(s3, -2.0).value - exact), 1e-9)
    lam = -1e-3
    res.record("rel. dev. from 1/(2 pi^2 lam) at -1e-3",
               abs(f_closed(s3, lam).value * 2 * PI ** 2 * lam - 1.0), 1e-3)
    return res


def criterion_2(models) -> CriterionResult:
    res = CriterionResult(2, "dual-method agreement for F")
    lam0 = -1.0
    for name, m in models.items():
        f0 = f_closed(m, lam0).value
        for lam in (-2.0, -5.0, -20.0, -100.0):
            diff = f_diff_spectral(m, lam, lam0).value
            res.record(f"{name} lam={lam:g}", abs(f_closed(m, lam).value - (f0 + diff)), 1e-8)
    return res


def criterion_3(models) -> CriterionResult:
    res = CriterionResult(3, "2D asymptotics on the unit square")
    if "torus2" not in models:
        return res
    t2 = models["torus2"]
    e100 = abs(f_closed(t2, -100.0).value - f_asymptotic(t2, -100.0).value)
    e400 = abs(f_closed(t2, -400.0).value - f_asymptotic(t2, -400.0).value)
    res.record("|F - asym| at -100", e100, 2e-5)
    res.record("error ratio -100/-400 (inverted, need >= 10)", 10.0 * e400 / e100, 1.0)
    return res


def criterion_4(models) -> CriterionResult:
    res = CriterionResult(4, "3D asymptotics")
    if "sphere3" in models:
        s3 = models["sphere3"]
        res.record("S^3 |F - sqrt(99)/4pi| at -100",
                   abs(f_closed(s3, -100.0).value - math.sqrt(99.0) / (4 * PI)), 1e-12)
    if "torus3" in models:
        t3 = models["torus3"]
        res.record("torus3 |F - sqrt(400)/4pi| at -400",
                   abs(f_closed(t3, -400.0).value - 20.0 / (4 * PI)), 1e-9)
    return res


def criterion_5(models) -> CriterionResult:
    res = CriterionResult(5, "secular solver and interlacing")
    if "sphere3" in models:
        spec = secular_roots(models["sphere3"], ExtensionParam(PI / 2), 20.0)
        vals = spec.values()
        res.require("S^3 root count 5", len(vals) == 5)
        dev = max(abs(v - ((n + 0.5) ** 2 - 1)) for n, v in enumerate(vals[:5]))
        res.record("S^3 |nu_n - ((n+1/2)^2-1)|", dev, 1e-10)
    for name, m in models.items():
        for alpha in (PI / 6, PI / 4, PI / 2, 3 * PI / 4, 0.999 * PI):
            spec = secular_roots(m, ExtensionParam(alpha), 200.0)  # interlacing asserted inside
            negatives = sum(1 for v, _ in spec.eigenvalues() if v < 0)
            res.require(f"{name} alpha={alpha:.4f} one negative root", negatives == 1)
    return res


def criterion_6(models) -> CriterionResult:
    res = CriterionResult(6, "rank-one trace identity")
    if "sphere3" in models:
        oracle = (PI / 2) * math.tanh(PI) - (PI / math.tanh(PI) - 1) / 2
        rep = verify_trace_identity(models["sphere3"], ExtensionParam(PI / 2), -2.0, SPHERE_CUTOFF)
        res.record("S^3 |paired sum - oracle|", abs(rep.lhs - oracle), 1e-4)
        res.record("S^3 |g - oracle|", abs(rep.rhs - oracle), 1e-4)
    if "torus3" in models:
        rep = verify_trace_identity(models["torus3"], ExtensionParam(PI / 4), CUBE_TRACE_LAMBDA, CUBE_CUTOFF)
        res.record("torus3 |paired sum - g|", rep.difference, 1e-6)
    return res


def criterion_7(models) -> CriterionResult:
    res = CriterionResult(7, "theorem ratio constancy")
    cases = []
    if "sphere3" in models:
        cases += [("sphere3", models["sphere3"], a, SPHERE_CUTOFF) for a in (PI / 2, 3 * PI / 4)]
    if "torus3" in models:
        cases.append(("torus3", models["torus3"], 3 * PI / 4, CUBE_CUTOFF))
    grid = (-2.0, -5.0, -10.0)
    for name, m, alpha, cutoff in cases:
        spec = secular_roots(m, ExtensionParam(alpha), cutoff)
        res.require(f"{name} alpha={alpha:.4f} grid below nu_0", max(grid) < spec.negative_root.value)
        for a in grid:
            for b in grid:
                if a != b:
                    rep = theorem_ratio(spec, a, b)
                    res.record(f"{name} alpha={alpha:.4f} Q({a:g},{b:g})", rep.difference, 1e-4)
    return res


def criterion_8(models) -> CriterionResult:
    res = CriterionResult(8, "relative zeta constant recovery")
    alpha = ExtensionParam(PI / 4)
    for name, m in models.items():
        spec = secular_roots(m, alpha, 10.0)
        lam = 1.5 * spec.negative_root.value
        d_auto = relative_zeta_prime_numeric(m, alpha, lam)
        gap = f_closed(m, lam).value - alpha.cot_alpha
        base = math.log(4 * PI * gap)
        const = -d_auto - base
        if m.dimension == 3:
            res.record(f"{name} |-D - log(4 pi (F-c))|", abs(const), 1e-5)
            res.record(f"{name} fitted constant vs 0", abs(const), 1e-3)
        else:
            res.record(f"{name} |-D - log(4 pi e^g (F-c))|", abs(const - 0.5772156649015329), 1e-4)
            res.record(f"{name} fitted constant vs gamma", abs(const - 0.5772156649015329), 1e-3)
        cut = max(100.0, 4.0 * abs(lam))
        d1 = relative_zeta_prime_numeric(m, alpha, lam, RelativeZetaParams(C=cut))
        d4 = relative_zeta_prime_numeric(m, alpha, lam, RelativeZetaParams(C=4 * cut))
        res.record(f"{name} |D(C) - D(4C)|", abs(d1 - d4), 1e-6)
    return res


def criterion_9(models) -> CriterionResult:
    res = CriterionResult(9, "corollaries at lam -> 0")
    for name, m in models.items():
        values = []
        for alpha in (PI / 6, PI / 2):
            ext = ExtensionParam(alpha)
            at_zero = logdet_pseudo_at_zero(m, ext)
            path = logdet_pseudo_theorem(m, ext, CORNER_LAMBDA)
            res.require(f"{name} alpha={alpha:.4f} sign", path.sign == at_zero.sign)
            res.record(f"{name} alpha={alpha:.4f} |limit path at -1e-3 - corollary|",
                       abs(path.log_abs - at_zero.log_abs), 1e-4)
            values.append(at_zero.log_abs)
        res.record(f"{name} alpha independence", abs(values[0] - values[1]), 1e-10)
    return res


def criterion_10(models) -> CriterionResult:
    res = CriterionResult(10, "determinant machinery self-consistency")
    for name, m in models.items():
        base = logdet_unperturbed(m, -1.0).log_abs
        moved = logdet_unperturbed(m, -1.0, t_split=0.5, cutoff=2 * (1.0 + 60.0 / 0.5)).log_abs
        res.record(f"{name} logdet under Lambda doubling and t* move", abs(base - moved), 1e-8)
        s_small = logdet_star(m, 0.2).log_abs
        s_large = logdet_star(m, 3.0).log_abs
        res.record(f"{name} det* dual methods", abs(s_small - s_large), 1e-8)
        res.record(f"{name} heat trace direct vs dual at t*",
                   abs(heat_trace_direct(m, T_STAR) - heat_trace_dual(m, T_STAR)), 1e-10)
    for d in (0.5, 1.0, 2.0):
        for lam in (-1.0, -10.0, -100.0):
            exact = 2 * math.sqrt(PI) / d * math.exp(-d * math.sqrt(-lam))
            got = heat_integral_identity_check(d, lam).value
            res.record(f"heat integral identity d={d:g} lam={lam:g} (rel)", abs(got / exact - 1.0), 1e-9)
    return res


CRITERIA: dict[int, Callable] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_criterion(number: int, models: dict | None = None) -> CriterionResult:
    models = default_models() if models is None else models
    return CRITERIA[number](models)


def run_all(models: dict | None = None, echo: Callable[[str], None] | None = None) -> list:
    models = default_models() if models is None else models
    out = []
    for n in sorted(CRITERIA):
        r = CRITERIA[n](models)
        if echo is not None:
            echo(r.line())
        out.append(r)
    return out
