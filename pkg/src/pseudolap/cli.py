"""Command-line front end: ``pseudolap <subcommand> [options]``.

Exit status: 0 success or check passed, 1 check failed (or a numerical
method did not converge), 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from . import acceptance
from .models import (
    CutoffTooLargeError,
    Kind,
    LatticeBasis,
    ManifoldModel,
    T_STAR,
    enumerate_levels,
    heat_trace_direct,
    heat_trace_dual,
)
from .numerics import ConvergenceError
from .pseudospectrum import secular_roots, verify_trace_identity
from .scattering import ExtensionParam, PoleError, f_asymptotic, f_closed, f_prime
from .zetadet import (
    CTooSmallError,
    RelativeZetaParams,
    logdet_pseudo_at_zero,
    logdet_pseudo_theorem,
    logdet_star,
    logdet_unperturbed,
    relative_zeta_prime_numeric,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str | None = None
    basis: str | None = None
    alpha: float | None = None
    alpha_deg: float | None = None
    lambda_: float | None = None
    lambda_tilde: float | None = None
    lambda_max: float | None = None
    tol: float = 1e-6
    C: float | None = None
    t: float = T_STAR
    format: str = "json"
    out: str | None = None

    def build_model(self) -> ManifoldModel:
        if self.model is None:
            raise UsageError("--model is required")
        try:
            kind = Kind(self.model)
        except ValueError:
            raise UsageError(f"unknown model {self.model!r}") from None
        if kind is Kind.SPHERE3:
            if self.basis is not None:
                raise UsageError("--basis applies to tori only")
            return ManifoldModel.sphere3()
        if self.basis is None:
            raise UsageError(f"--basis is required for {kind.value}")
        return ManifoldModel(kind, LatticeBasis.parse(self.basis))

    def extension(self) -> ExtensionParam:
        if self.alpha is not None and self.alpha_deg is not None:
            raise UsageError("give --alpha or --alpha-deg, not both")
        if self.alpha_deg is not None:
            return ExtensionParam.from_degrees(self.alpha_deg)
        return ExtensionParam(0.0 if self.alpha is None else self.alpha)


# ---------------------------------------------------------------------------
# output


def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def _json_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    if hasattr(v, "item"):  # numpy scalar
        return _json_value(v.item())
    return json.dumps(str(v))


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return _fmt_float(v)
    if hasattr(v, "item"):
        return _csv_cell(v.item())
    return str(v)


@contextmanager
def _sink(out: str | None):
    if out is None or out == "-":
        yield sys.stdout
        return
    try:
        fh = open(out, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    with fh:
        yield fh


def emit(records, fmt: str, out: str | None = None, columns: Sequence[str] | None = None) -> None:
    """Write a dict (JSON object) or list of dicts (JSON array / CSV rows)."""
    if fmt == "json":
        text = _json_value(records) + "\n"
    elif fmt == "csv":
        rows = [records] if isinstance(records, dict) else list(records)
        if columns is None:
            if not rows:
                raise ValueError("CSV output of no records needs explicit columns")
            columns = list(rows[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_csv_cell(r.get(c)) for c in columns])
        text = buf.getvalue()
    else:
        raise UsageError(f"unknown format {fmt!r}")
    with _sink(out) as fh:
        fh.write(text)


def _check_block(lhs: float, rhs: float, tol: float, **extra) -> dict:
    diff = abs(lhs - rhs)
    block = {"lhs": lhs, "rhs": rhs, "abs_diff": diff, "tol": tol, "pass": bool(diff <= tol)}
    block.update(extra)
    return block


# ---------------------------------------------------------------------------
# subcommands


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def cmd_levels(cfg: RunConfig) -> int:
    model = cfg.build_model()
    table = enumerate_levels(model, _require(cfg.lambda_max, "--lambda-max"))
    rows = [{"mu": float(v), "multiplicity": int(m)} for v, m in zip(table.values, table.multiplicities)]
    if cfg.format == "csv":
        emit(rows, "csv", cfg.out, ["mu", "multiplicity"])
    else:
        emit({"model": model.kind.value, "cutoff": table.cutoff, "levels": rows}, "json", cfg.out)
    return EXIT_OK


def cmd_heat_trace(cfg: RunConfig) -> int:
    model = cfg.build_model()
    t = cfg.t
    if not t > 0:
        raise UsageError("--t must be positive")
    direct, dual = heat_trace_direct(model, t), heat_trace_dual(model, t)
    rec = {"model": model.kind.value, "t": t, "direct": direct, "dual": dual,
           "check": _check_block(direct, dual, cfg.tol)}
    if cfg.format == "csv":
        emit({"t": t, "direct": direct, "dual": dual}, "csv", cfg.out)
    else:
        emit(rec, "json", cfg.out)
    return EXIT_OK if rec["check"]["pass"] else EXIT_FAIL


def cmd_scatter(cfg: RunConfig, lams: list) -> int:
    model = cfg.build_model()
    rows = []
    for lam in lams:
        val, der = f_closed(model, lam), f_prime(model, lam)
        rows.append({"model": model.kind.value, "lambda": lam, "F": val.value, "F_prime": der.value,
                     "error_bound": val.error_bound, "method": val.method})
    if cfg.format == "csv":
        emit(rows, "csv", cfg.out, ["lambda", "F", "error_bound"])
    else:
        emit(rows[0] if len(rows) == 1 else rows, "json", cfg.out)
    return EXIT_OK


def cmd_roots(cfg: RunConfig) -> int:
    model = cfg.build_model()
    ext = cfg.extension()
    if ext.friedrichs:
        raise UsageError("alpha = 0 is the Friedrichs extension; there is no secular equation")
    spec = secular_roots(model, ext, _require(cfg.lambda_max, "--lambda-max"))
    mu = spec.levels.values
    rows = [{"nu": r.value, "source_mu": None if r.source_level < 0 else float(mu[r.source_level]),
             "residual": r.residual} for r in spec.roots]
    if cfg.format == "csv":
        emit(rows, "csv", cfg.out, ["nu", "source_mu", "residual"])
    else:
        emit({"model": model.kind.value, "alpha": ext.alpha, "cot_alpha": ext.cot_alpha,
              "friedrichs": ext.friedrichs, "cutoff": spec.cutoff,
              "roots": [{"value": r.value, "source_level": r.source_level, "residual": r.residual}
                        for r in spec.roots],
              "retained": [[v, m] for v, m in spec.retained]}, "json", cfg.out)
    return EXIT_OK


def _auto_trace_cutoff(model: ManifoldModel) -> float:
    return acceptance.SPHERE_CUTOFF if model.kind is Kind.SPHERE3 else acceptance.CUBE_CUTOFF / model.volume ** (2 / model.dimension)


def cmd_trace_check(cfg: RunConfig) -> int:
    model = cfg.build_model()
    ext = cfg.extension()
    lam = _require(cfg.lambda_, "--lambda")
    cutoff = cfg.lambda_max if cfg.lambda_max is not None else _auto_trace_cutoff(model)
    if ext.friedrichs:
        rep = verify_trace_identity(model, ext, lam, cutoff, cfg.tol)
    else:
        spec = secular_roots(model, ext, cutoff)
        rep = verify_trace_identity(model, ext, lam, cutoff, cfg.tol, spec=spec)
    rec = {"model": model.kind.value, "alpha": ext.alpha, "lambda": lam, "lambda_max": cutoff,
           "check": _check_block(rep.lhs, rep.rhs, cfg.tol, lhs_error=rep.lhs_error)}
    emit(rec, cfg.format, cfg.out)
    return EXIT_OK if rec["check"]["pass"] else EXIT_FAIL


def _det_record(model, ext, lam, det, check) -> dict:
    return {"model": model.kind.value, "alpha": ext.alpha, "lambda_tilde": lam,
            "sign": det.sign, "log_abs": det.log_abs, "check": check}


def cmd_det(cfg: RunConfig) -> int:
    model = cfg.build_model()
    ext = cfg.extension()
    lam = _require(cfg.lambda_tilde, "--lambda-tilde")
    if not lam < 0:
        raise UsageError("--lambda-tilde must be negative")
    det = logdet_pseudo_theorem(model, ext, lam, t_split=cfg.t)
    # stability of the unperturbed part under a moved split point
    a = logdet_unperturbed(model, lam, t_split=cfg.t).log_abs
    b = logdet_unperturbed(model, lam, t_split=cfg.t / 2).log_abs
    rec = _det_record(model, ext, lam, det, _check_block(a, b, cfg.tol))
    emit(rec, cfg.format, cfg.out)
    return EXIT_OK if rec["check"]["pass"] else EXIT_FAIL


def cmd_det_star(cfg: RunConfig) -> int:
    model = cfg.build_model()
    small, large = logdet_star(model, 0.2), logdet_star(model, 3.0)
    det = logdet_star(model, cfg.t)
    rec = {"model": model.kind.value, "alpha": None, "lambda_tilde": 0.0,
           "sign": det.sign, "log_abs": det.log_abs,
           "check": _check_block(small.log_abs, large.log_abs, cfg.tol)}
    emit(rec, cfg.format, cfg.out)
    return EXIT_OK if rec["check"]["pass"] else EXIT_FAIL


def cmd_theorem_check(cfg: RunConfig) -> int:
    model = cfg.build_model()
    ext = cfg.extension()
    if ext.friedrichs:
        raise UsageError("theorem-check needs alpha in (0, pi)")
    lam = cfg.lambda_tilde
    if lam is None:
        lam = 1.5 * secular_roots(model, ext, 1.0).negative_root.value
    try:
        params = RelativeZetaParams(C=cfg.C)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lhs = -relative_zeta_prime_numeric(model, ext, lam, params)
    det = logdet_pseudo_theorem(model, ext, lam)
    base = logdet_unperturbed(model, lam).log_abs
    rhs = det.log_abs - base
    rec = _det_record(model, ext, lam, det, _check_block(lhs, rhs, cfg.tol))
    emit(rec, cfg.format, cfg.out)
    return EXIT_OK if rec["check"]["pass"] else EXIT_FAIL


def cmd_corollary_check(cfg: RunConfig) -> int:
    model = cfg.build_model()
    ext = cfg.extension()
    if ext.friedrichs:
        raise UsageError("corollary-check needs alpha in (0, pi)")
    lam = cfg.lambda_tilde if cfg.lambda_tilde is not None else acceptance.CORNER_LAMBDA
    if not lam < 0:
        raise UsageError("--lambda-tilde must be negative")
    det = logdet_pseudo_at_zero(model, ext)
    path = logdet_pseudo_theorem(model, ext, lam)
    path2 = logdet_pseudo_theorem(model, ext, 2 * lam)
    check = _check_block(det.log_abs, path.log_abs, cfg.tol,
                         extrapolated=2 * path.log_abs - path2.log_abs)
    rec = _det_record(model, ext, 0.0, det, check)
    emit(rec, cfg.format, cfg.out)
    return EXIT_OK if check["pass"] else EXIT_FAIL


def cmd_asymptotics_check(cfg: RunConfig) -> int:
    model = cfg.build_model()
    lam = cfg.lambda_ if cfg.lambda_ is not None else -100.0
    exact = f_closed(model, lam).value
    asym = f_asymptotic(model, lam)
    rec = {"model": model.kind.value, "lambda": lam, "F": exact, "asymptotic": asym.value,
           "check": _check_block(exact, asym.value, cfg.tol, order_bound=asym.error_bound)}
    emit(rec, cfg.format, cfg.out)
    return EXIT_OK if rec["check"]["pass"] else EXIT_FAIL


def cmd_verify(cfg: RunConfig) -> int:
    models = acceptance.default_models()
    if cfg.model is not None:
        model = cfg.build_model()
        models = {model.kind.value: model}
    results = acceptance.run_all(models, echo=lambda line: print(line, file=sys.stderr))
    if cfg.format == "json":
        emit([{"criterion": r.number, "title": r.title, "pass": r.passed, "applicable": r.applicable,
               "checks": [{"label": c[0], "observed": c[1], "tol": c[2], "pass": c[3]} for c in r.checks]}
              for r in results], "json", cfg.out)
    else:
        rows = []
        for r in results:
            worst = r.worst or ("", None, None, True)
            rows.append({"criterion": r.number, "title": r.title,
                         "status": "skip" if not r.applicable else ("pass" if r.passed else "fail"),
                         "worst_check": worst[0], "observed": worst[1], "tol": worst[2]})
        emit(rows, "csv", cfg.out, ["criterion", "title", "status", "worst_check", "observed", "tol"])
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing

_CONFIG_KEYS = {f.name for f in fields(RunConfig)} | {"lambda"}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with run settings; flags override it")
    p.add_argument("--model", choices=[k.value for k in Kind])
    p.add_argument("--basis", help='lattice basis rows, e.g. "1,0,0;0,1,0;0,0,1"')
    p.add_argument("--alpha", type=float, help="extension angle in radians, [0, pi)")
    p.add_argument("--alpha-deg", type=float, help="extension angle in degrees")
    p.add_argument("--lambda-tilde", type=float)
    p.add_argument("--lambda-max", type=float, help="spectral cutoff")
    p.add_argument("--tol", type=float)
    p.add_argument("--C", type=float, help="cut parameter of the relative zeta integral")
    p.add_argument("--t", type=float, help="heat time / Mellin split point")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudolap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "levels": "distinct eigenvalues with multiplicities",
        "heat-trace": "heat trace by eigenvalues and by images",
        "scatter": "scattering coefficient F and F'",
        "roots": "roots of the secular equation",
        "trace-check": "rank-one resolvent trace identity",
        "det": "log det of the (pseudo-)Laplacian shifted by lambda-tilde",
        "det-star": "log det* of the Laplacian",
        "theorem-check": "relative zeta derivative vs the comparison formula",
        "corollary-check": "determinant at zero vs the lambda-tilde -> 0 path",
        "asymptotics-check": "F against its large-|lambda| expansion",
        "verify": "run the acceptance suite",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "scatter":
            p.add_argument("--lambda", dest="lambda_", type=float, nargs="+")
        else:
            p.add_argument("--lambda", dest="lambda_", type=float)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "lambda" in data:
        data["lambda_"] = data.pop("lambda")
    return data


def make_config(ns: argparse.Namespace) -> RunConfig:
    values = _load_config(ns.config) if ns.config else {}
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    if cfg.format not in ("json", "csv"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if not cfg.tol > 0:
        raise UsageError("--tol must be positive")
    return cfg


_COMMANDS = {
    "levels": cmd_levels,
    "heat-trace": cmd_heat_trace,
    "roots": cmd_roots,
    "trace-check": cmd_trace_check,
    "det": cmd_det,
    "det-star": cmd_det_star,
    "theorem-check": cmd_theorem_check,
    "corollary-check": cmd_corollary_check,
    "asymptotics-check": cmd_asymptotics_check,
    "verify": cmd_verify,
}


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(None if argv is None else list(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = make_config(ns)
        if ns.command == "scatter":
            lams = cfg.lambda_
            if lams is None:
                raise UsageError("--lambda is required")
            return cmd_scatter(cfg, lams if isinstance(lams, list) else [lams])
        if isinstance(cfg.lambda_, list):
            raise UsageError("--lambda takes a single value here")
        return _COMMANDS[ns.command](cfg)
    except (UsageError, PoleError, CTooSmallError, CutoffTooLargeError, ValueError) as exc:
        print(f"pseudolap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"pseudolap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
