"""Command-line interface.

Subcommands cover the library's main entry points: ``bounds``/``sweep``
estimate frame bounds over one or several lattice spacings, ``extremal``
runs the witness construction near critical density, ``dual`` inspects
the canonical dual window, ``sigma-check`` probes the growth envelope of
the truncated lattice product, and ``selftest`` runs a battery of
internal consistency suites.

Results are emitted as CSV (default) or JSON with a fixed column schema
per subcommand.  Rows are computed per ``a`` value, optionally on a
worker pool, and always written in input order; a row whose computation
fails is still flushed, with the failure text in its ``error`` column.
Exit codes: 0 success, 1 self-test failure, 2 numeric failure, 3 bad
configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import csv
import io
import json
import math
import os
import sys
import time
from multiprocessing import get_context
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import ConfigError, GabfockError
from .phase_space import (GAUSSIAN, PI, LineQuadrature, SquareLattice,
                          amalgam_norm, gabor_coefficient,
                          gaussian_l2_norm_sq, line_quadrature_for, tf_shift)
from .bargmann import (DEFAULT_C0, MonomialExpansion, PlanarQuadrature,
                       bargmann_transform, integrate_plane, monomial,
                       sampling_sum)
from .frame_bounds import (b_lower_probe, build_gram, canonical_dual,
                           estimate_frame_bounds, lambda_extremes,
                           walnut_upper_bound)
from .sigma import SigmaEvaluator, default_rho_sigma, growth_check
from .extremal import (build_extremal, norms_and_ratio, partition_annulus,
                       extremal_report, select_radius,
                       truncated_sigma_identity, u_R_eval)

__all__ = ["RunConfig", "main"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NUMERIC = 2
EXIT_CONFIG = 3

_SUBCOMMANDS = ("bounds", "sweep", "extremal", "dual", "sigma-check",
                "selftest")

_COLUMNS: Dict[str, Tuple[str, ...]] = {
    "bounds": ("a", "N", "rho", "A_est", "B_est", "ratio_A", "walnut_upper",
               "b_lower_probe", "dual_lower", "conv_A_halfN",
               "conv_A_smallrho", "unstable", "error"),
    "extremal": ("a", "R", "n_R", "q_R", "p_R", "fock_norm_sq",
                 "lattice_norm_sq", "ratio", "ratio_over_gap", "defect_sup",
                 "tail_integral", "error"),
    "dual": ("a", "N", "kappa_fit", "kappa_over_gap", "w_norm", "dual_lower",
             "recon_error", "cg_iterations", "cg_residual", "error"),
    "sigma-check": ("a", "rho_sigma", "eps", "test_radius", "sup_dev",
                    "inf_dev", "spread", "sup_drift_doubled",
                    "inf_drift_doubled", "error"),
}
_COLUMNS["sweep"] = _COLUMNS["bounds"]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings for one invocation.

    Precedence while resolving: command-line flags, then the key=value
    config file (if any), then built-in defaults.  ``a_values`` is the
    expanded list of lattice spacings, whether it came from an explicit
    comma list or from a min/max/steps range.
    """

    subcommand: str
    a_values: Tuple[float, ...]
    n_basis: int
    rho: Optional[float]
    c0: float
    eps: Optional[float]
    grid: Optional[float]
    margin: float
    test_radius: float
    out: Optional[str]
    format: str
    workers: int
    seed: int
    quick: bool
    plot: bool
    config_path: Optional[str]

    def echo(self) -> Dict:
        data = dataclasses.asdict(self)
        data["a_values"] = [float(a) for a in self.a_values]
        return data


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the config code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parse_a_list(text: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad a value in {text!r}: {exc}")
    if not values:
        raise argparse.ArgumentTypeError("empty a list")
    return values


def _add_flags(p: argparse.ArgumentParser) -> None:
    # Defaults stay None so the config-file merge can tell which flags
    # the user actually set.
    p.add_argument("--a", type=_parse_a_list, metavar="A[,A...]",
                   help="lattice spacing(s), comma separated")
    p.add_argument("--a-min", type=float, dest="a_min",
                   help="start of a spacing range (with --a-max/--steps)")
    p.add_argument("--a-max", type=float, dest="a_max",
                   help="end of a spacing range (inclusive)")
    p.add_argument("--steps", type=int, help="number of points in the range")
    p.add_argument("--n", type=int, dest="n",
                   help="basis truncation size (default 300)")
    p.add_argument("--rho", type=float,
                   help="lattice truncation radius override")
    p.add_argument("--c0", type=float,
                   help="sampling identity constant (default 2^-1/2)")
    p.add_argument("--eps", type=float,
                   help="lattice-distance cutoff for defect scans")
    p.add_argument("--grid", type=float,
                   help="grid step for planar quadrature / defect scans")
    p.add_argument("--margin", type=float,
                   help="outer integration margin beyond the witness radius")
    p.add_argument("--test-radius", type=float, dest="test_radius",
                   help="radius of the sigma growth probe (default 4)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"),
                   help="output format (default csv)")
    p.add_argument("--workers", type=int,
                   help="worker processes (default: available cores)")
    p.add_argument("--seed", type=int,
                   help="seed for randomized checks (default 0)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--quick", action="store_const", const=True,
                   help="reduced self-test sizes")
    p.add_argument("--plot", action="store_const", const=True,
                   help="also render PNG figures next to the output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gabfock",
                     description="Gaussian Gabor frame bounds on square "
                                 "lattices: estimates, certified bound "
                                 "chains, and near-critical witnesses.")
    parser.add_argument("--version", action="version",
                        version=f"gabfock {__version__}")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    sub.required = True
    helps = {
        "bounds": "frame-bound estimates for given spacing(s)",
        "sweep": "frame-bound estimates over a spacing range",
        "extremal": "witness construction near critical density",
        "dual": "canonical dual window diagnostics",
        "sigma-check": "growth envelope of the truncated lattice product",
        "selftest": "internal consistency suites",
    }
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _add_flags(p)
    return parser


_DEFAULTS = {
    "a": None, "a_min": None, "a_max": None, "steps": None,
    "n": 300, "rho": None, "c0": DEFAULT_C0, "eps": None, "grid": None,
    "margin": 6.0, "test_radius": 4.0, "out": None, "format": "csv",
    "workers": None, "seed": 0, "quick": False, "plot": False,
}

_CONFIG_PARSERS = {
    "a": _parse_a_list, "a_min": float, "a_max": float, "steps": int,
    "n": int, "rho": float, "c0": float, "eps": float, "grid": float,
    "margin": float, "test_radius": float, "out": str, "format": str,
    "workers": int, "seed": int, "quick": None, "plot": None,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config_file(path: str) -> Dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    values: Dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _CONFIG_PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        parser = _CONFIG_PARSERS[key]
        try:
            if parser is None:
                values[key] = _parse_bool(value)
            else:
                values[key] = parser(value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


def _resolve_a_values(sub: str, pick) -> Tuple[float, ...]:
    a_list = pick("a")
    a_min, a_max, steps = pick("a_min"), pick("a_max"), pick("steps")
    if a_list is not None and (a_min is not None or a_max is not None):
        raise ConfigError("give either --a or an --a-min/--a-max range, "
                          "not both")
    if a_list is not None:
        return tuple(float(v) for v in a_list)
    if a_min is not None or a_max is not None:
        if a_min is None or a_max is None:
            raise ConfigError("--a-min and --a-max must be given together")
        if steps is None:
            raise ConfigError("--steps is required with an a range")
        if steps < 1:
            raise ConfigError("steps must be >= 1")
        if steps == 1 and a_min != a_max:
            raise ConfigError("steps=1 needs matching --a-min and --a-max")
        return tuple(float(v) for v in np.linspace(a_min, a_max, steps))
    if sub == "sigma-check":
        return (1.0,)
    if sub == "selftest":
        return ()
    raise ConfigError("no lattice spacing given: use --a or "
                      "--a-min/--a-max/--steps")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file, and defaults into a RunConfig."""
    file_values = load_config_file(args.config) if args.config else {}

    def pick(key):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in file_values:
            return file_values[key]
        return _DEFAULTS[key]

    sub = args.subcommand
    a_values = _resolve_a_values(sub, pick)

    fmt = pick("format")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    n_basis = pick("n")
    if n_basis < 1:
        raise ConfigError("--n must be a positive integer")
    workers = pick("workers")
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    c0 = pick("c0")
    if not c0 > 0:
        raise ConfigError("--c0 must be positive")
    for key, label in (("rho", "--rho"), ("eps", "--eps"),
                       ("grid", "--grid")):
        value = pick(key)
        if value is not None and not value > 0:
            raise ConfigError(f"{label} must be positive")
    margin = pick("margin")
    if not margin > 0:
        raise ConfigError("--margin must be positive")
    test_radius = pick("test_radius")
    if not test_radius > 0:
        raise ConfigError("--test-radius must be positive")

    # Spacing regime: the frame-estimation commands are specified on the
    # open band 0.5 < a < 1; the sigma probe only needs a > 0.
    if sub in ("bounds", "sweep", "dual", "extremal"):
        for a in a_values:
            if not (0.5 < a < 1.0):
                raise ConfigError(
                    f"a={a:g} outside the supported band 0.5 < a < 1")
    elif sub == "sigma-check":
        for a in a_values:
            if not a > 0:
                raise ConfigError(f"a={a:g} must be positive")

    return RunConfig(
        subcommand=sub, a_values=a_values, n_basis=n_basis, rho=pick("rho"),
        c0=c0, eps=pick("eps"), grid=pick("grid"), margin=margin,
        test_radius=test_radius, out=pick("out"), format=fmt,
        workers=int(workers), seed=int(pick("seed")), quick=bool(pick("quick")),
        plot=bool(pick("plot")), config_path=args.config)


# ---------------------------------------------------------------------------
# Row computation
# ---------------------------------------------------------------------------

def _task_kwargs(cfg: RunConfig) -> Dict:
    if cfg.subcommand in ("bounds", "sweep", "dual"):
        return {"n": cfg.n_basis, "rho": cfg.rho, "c0": cfg.c0}
    if cfg.subcommand == "extremal":
        return {"dr": cfg.grid if cfg.grid is not None else 0.04,
                "margin": cfg.margin,
                "eps": cfg.eps if cfg.eps is not None else 0.2}
    if cfg.subcommand == "sigma-check":
        return {"rho": cfg.rho,
                "eps": cfg.eps if cfg.eps is not None else 0.1,
                "test_radius": cfg.test_radius,
                "grid": cfg.grid}
    raise ValueError(cfg.subcommand)


def _bounds_row(a: float, kw: Dict) -> Dict:
    rep = estimate_frame_bounds(a, n_basis=kw["n"], rho=kw["rho"],
                                c0=kw["c0"])
    return {"a": rep.a, "N": rep.n_basis, "rho": rep.rho, "A_est": rep.a_est,
            "B_est": rep.b_est, "ratio_A": rep.ratio_a,
            "walnut_upper": rep.walnut_upper,
            "b_lower_probe": rep.b_lower_probe,
            "dual_lower": rep.dual_lower, "conv_A_halfN": rep.conv_a_half_n,
            "conv_A_smallrho": rep.conv_a_small_rho,
            "unstable": rep.unstable, "error": ""}


def _extremal_row(a: float, kw: Dict) -> Dict:
    rep = extremal_report(a, dr=kw["dr"], margin=kw["margin"],
                          defect_eps=kw["eps"])
    row = rep.as_row()
    row["error"] = ""
    return row


def _dual_row(a: float, kw: Dict) -> Dict:
    dual = canonical_dual(a, n_basis=kw["n"], rho=kw["rho"], c0=kw["c0"])
    return {"a": dual.a, "N": kw["n"], "kappa_fit": dual.kappa_fit,
            "kappa_over_gap": dual.kappa_fit / (1.0 - a * a),
            "w_norm": dual.w_norm, "dual_lower": dual.dual_lower,
            "recon_error": dual.recon_error,
            "cg_iterations": dual.cg_iterations,
            "cg_residual": dual.cg_residual, "error": ""}


def _sigma_row(a: float, kw: Dict) -> Dict:
    rho = kw["rho"] if kw["rho"] is not None \
        else default_rho_sigma(kw["test_radius"])
    ev = SigmaEvaluator(a, rho)
    sup1, inf1 = growth_check(ev, eps=kw["eps"],
                              test_radius=kw["test_radius"],
                              grid_step=kw["grid"])
    sup2, inf2 = growth_check(ev.doubled(), eps=kw["eps"],
                              test_radius=kw["test_radius"],
                              grid_step=kw["grid"])
    return {"a": a, "rho_sigma": rho, "eps": kw["eps"],
            "test_radius": kw["test_radius"], "sup_dev": sup1,
            "inf_dev": inf1, "spread": sup1 - inf1,
            "sup_drift_doubled": abs(sup2 - sup1),
            "inf_drift_doubled": abs(inf2 - inf1), "error": ""}


_ROW_BUILDERS = {"bounds": _bounds_row, "sweep": _bounds_row,
                 "extremal": _extremal_row, "dual": _dual_row,
                 "sigma-check": _sigma_row}


def _compute_row(task: Tuple[str, float, Dict]) -> Tuple[Dict, int, str]:
    """One (a -> row) computation; must stay picklable for the pool."""
    sub, a, kw = task
    try:
        return _ROW_BUILDERS[sub](a, kw), EXIT_OK, ""
    except ConfigError as exc:
        return {"a": a, "error": str(exc)}, EXIT_CONFIG, f"a={a:g}: {exc}"
    except GabfockError as exc:
        return {"a": a, "error": str(exc)}, EXIT_NUMERIC, f"a={a:g}: {exc}"
    except Exception as exc:  # surface, don't kill sibling rows
        message = f"{type(exc).__name__}: {exc}"
        return {"a": a, "error": message}, EXIT_NUMERIC, f"a={a:g}: {message}"


def run_rows(cfg: RunConfig) -> Tuple[List[Dict], int, List[str]]:
    """Compute all rows, serially or on a fork pool, in input order."""
    kw = _task_kwargs(cfg)
    tasks = [(cfg.subcommand, float(a), kw) for a in cfg.a_values]
    if cfg.workers > 1 and len(tasks) > 1:
        ctx = get_context("fork")
        with ctx.Pool(processes=min(cfg.workers, len(tasks))) as pool:
            results = pool.map(_compute_row, tasks, chunksize=1)
    else:
        results = [_compute_row(task) for task in tasks]
    rows: List[Dict] = []
    severity = EXIT_OK
    messages: List[str] = []
    for row, sev, message in results:
        rows.append(row)
        severity = max(severity, sev)
        if message:
            messages.append(message)
    return rows, severity, messages


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def csv_text(rows: Sequence[Dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(col)) for col in columns])
    return buf.getvalue()


def _json_cell(value):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(value)


def json_text(cfg: RunConfig, rows: Sequence[Dict],
              columns: Sequence[str], wall_time: float) -> str:
    payload = {
        "metadata": {
            "version": __version__,
            "config": cfg.echo(),
            "wall_time_s": wall_time,
        },
        "columns": list(columns),
        "rows": [{col: _json_cell(row.get(col)) for col in columns}
                 for row in rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def _emit(cfg: RunConfig, rows: List[Dict], wall_time: float) -> None:
    columns = _COLUMNS[cfg.subcommand]
    if cfg.format == "csv":
        text = csv_text(rows, columns)
    else:
        text = json_text(cfg, rows, columns, wall_time)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_plots(cfg: RunConfig, rows: List[Dict]) -> None:
    from .figures import render  # matplotlib only loads when plotting
    if cfg.out:
        base = os.path.splitext(cfg.out)[0]
    else:
        base = cfg.subcommand.replace("-", "_")
    for path in render(cfg.subcommand, rows, base):
        print(f"wrote {path}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Self-test suites
# ---------------------------------------------------------------------------

def _close(what: str, got: float, want: float, tol: float) -> None:
    if not abs(got - want) <= tol:
        raise AssertionError(
            f"{what}: got {got!r}, want {want!r} (tol {tol:g})")


def _suite_window_identities(cfg: RunConfig, rng) -> None:
    quad = LineQuadrature()
    t = quad.nodes()
    norm_sq = float(quad.integrate(GAUSSIAN(t) ** 2).real)
    _close("window norm^2", norm_sq, gaussian_l2_norm_sq(), 1e-12)
    shifted = tf_shift(GAUSSIAN, (0.3, -0.7), t)
    moved = float(quad.integrate(np.abs(shifted) ** 2).real)
    _close("shifted window norm^2", moved, gaussian_l2_norm_sq(), 1e-10)
    coeff = gabor_coefficient(GAUSSIAN, GAUSSIAN, (0.8, 0.0))
    want = gaussian_l2_norm_sq() * math.exp(-PI * 0.8 * 0.8 / 2.0)
    _close("self coefficient magnitude", abs(coeff), want, 1e-10)
    _close("amalgam norm", amalgam_norm(GAUSSIAN), 2.086434811213308, 1e-6)


def _suite_transform_images(cfg: RunConfig, rng) -> None:
    pts = np.array([0.3 + 0.1j, -0.5 + 0.4j, 1.0 - 0.2j])
    orders = (0, 1, 3) if cfg.quick else (0, 1, 3, 6, 12)
    for n in orders:
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        got = bargmann_transform(coeffs, pts)
        want = monomial(n).eval(pts)
        dev = float(np.max(np.abs(got - want)))
        if dev > 1e-8:
            raise AssertionError(
                f"order-{n} image deviates from the monomial by {dev:.3e}")
    const = bargmann_transform(GAUSSIAN, pts)
    dev = float(np.max(np.abs(const - 2.0 ** -0.25)))
    if dev > 1e-10:
        raise AssertionError(
            f"window image is not the constant 2^-1/4 (dev {dev:.3e})")
    if not cfg.quick:
        coeffs = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        coeffs /= np.linalg.norm(coeffs)
        quad = PlanarQuadrature(dr=0.05, r_out=5.0)

        def density(z):
            vals = bargmann_transform(coeffs, z)
            return np.abs(vals) ** 2 * np.exp(-PI * np.abs(z) ** 2)

        total = integrate_plane(density, quad).total
        _close("transform norm preservation", total, 1.0, 1e-5)


def _suite_coefficient_equivalence(cfg: RunConfig, rng) -> None:
    a = 0.8
    lat = SquareLattice(a)
    rho = 5.0 if cfg.quick else 6.0
    quad = line_quadrature_for(rho)
    pts = lat.points(rho)
    draws = 2 if cfg.quick else 3
    for k in range(draws):
        coeffs = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        direct = math.fsum(
            abs(gabor_coefficient(coeffs, GAUSSIAN,
                                  (float(z.real), float(z.imag)),
                                  quad=quad)) ** 2
            for z in pts)
        sampled = sampling_sum(MonomialExpansion(coeffs), lat, rho, c0=cfg.c0)
        rel = abs(direct - sampled) / sampled
        if rel > 1e-8:
            raise AssertionError(
                f"draw {k}: coefficient sum {direct!r} vs weighted sample "
                f"sum {sampled!r} with c0={cfg.c0!r} (rel dev {rel:.3e})")


def _suite_gram_spectrum(cfg: RunConfig, rng) -> None:
    n = 32 if cfg.quick else 64
    gram = build_gram(0.8, n, c0=cfg.c0)
    mags = np.abs(gram.matrix)
    idx = np.arange(n)
    off_class = mags[((idx[:, None] - idx[None, :]) % 4) != 0]
    peak = float(mags.max())
    worst = float(off_class.max()) if off_class.size else 0.0
    if worst > 1e-12 * peak:
        raise AssertionError(
            f"entries off the mod-4 classes reach {worst:.3e} "
            f"against peak {peak:.3e}")
    ext = lambda_extremes(gram)
    if not 0.0 < ext.lambda_min <= ext.lambda_max:
        raise AssertionError(
            f"spectrum not positive/ordered: [{ext.lambda_min!r}, "
            f"{ext.lambda_max!r}]")
    upper = walnut_upper_bound(GAUSSIAN, 0.8)
    if ext.lambda_max > upper * (1.0 + 1e-9):
        raise AssertionError(
            f"largest eigenvalue {ext.lambda_max!r} above the certified "
            f"upper bound {upper!r}")
    probe = b_lower_probe(0.8, c0=cfg.c0)
    if probe > ext.lambda_max * (1.0 + 1e-6):
        raise AssertionError(
            f"probe {probe!r} above the largest eigenvalue "
            f"{ext.lambda_max!r}")
    for k in range(2):
        basis = rng.standard_normal((8, 8))
        dense = basis @ basis.T + 8.0 * np.eye(8)
        ext8 = lambda_extremes(dense)
        spectrum = np.linalg.eigvalsh(dense)
        dev = max(abs(ext8.lambda_min - spectrum[0]),
                  abs(ext8.lambda_max - spectrum[-1]))
        if dev > 1e-8:
            raise AssertionError(
                f"draw {k}: dense 8x8 oracle mismatch by {dev:.3e}")


def _suite_dual_chain(cfg: RunConfig, rng) -> None:
    n = 96 if cfg.quick else 120
    dual = canonical_dual(0.8, n_basis=n, c0=cfg.c0)
    if not dual.recon_error < 1e-3:
        raise AssertionError(
            f"reconstruction residual {dual.recon_error!r} too large")
    rep = estimate_frame_bounds(0.8, n_basis=n, c0=cfg.c0,
                                include_dual=False)
    if dual.dual_lower > rep.a_est * (1.0 + 1e-6):
        raise AssertionError(
            f"dual-route bound {dual.dual_lower!r} exceeds the spectral "
            f"lower bound {rep.a_est!r}")
    per_gap = dual.kappa_fit / (1.0 - 0.8 * 0.8)
    if not 0.05 <= per_gap <= 20.0:
        raise AssertionError(
            f"fitted decay rate per density gap {per_gap:.4f} out of range")


def _suite_sigma_growth(cfg: RunConfig, rng) -> None:
    if cfg.quick:
        test_radius, rho, tol = 3.0, 60.0, 5e-3
    else:
        test_radius, rho, tol = 4.0, 100.0, 1e-4
    ev = SigmaEvaluator(1.0, rho)
    sup1, inf1 = growth_check(ev, test_radius=test_radius)
    if not (math.isfinite(sup1) and math.isfinite(inf1) and sup1 > inf1):
        raise AssertionError(
            f"degenerate deviation envelope [{inf1!r}, {sup1!r}]")
    if sup1 - inf1 > 6.0:
        raise AssertionError(
            f"deviation spread {sup1 - inf1:.3f} wider than expected")
    sup2, inf2 = growth_check(ev.doubled(), test_radius=test_radius)
    drift = max(abs(sup2 - sup1), abs(inf2 - inf1))
    if drift > tol:
        raise AssertionError(
            f"doubling the truncation moved the envelope by {drift:.3e}")


def _suite_sector_partition(cfg: RunConfig, rng) -> None:
    sel = select_radius(0.99)
    if (sel.n_R, sel.q_R, sel.p_R) != (85, 21, 64):
        raise AssertionError(
            f"zero budget ({sel.n_R}, {sel.q_R}, {sel.p_R}) does not match "
            "the frozen (85, 21, 64)")
    _close("selected radius", sel.R, 5.420755662991144, 1e-8)
    want = 4.0 * PI * math.log(1.5) + 2.0 * PI
    _close("disk potential closed form", u_R_eval(2.0, 3.0), want, 1e-9)
    part = partition_annulus(sel)
    target = 1.0 / sel.b2
    dev = float(np.max(np.abs(part.areas - target)))
    if dev > 1e-6 * target:
        raise AssertionError(f"sector areas deviate by {dev:.3e}")
    for z in (2.3 + 0.7j, -1.1 + 3.0j):
        plain, factored = truncated_sigma_identity(sel, z)
        if abs(plain - factored) > 1e-9:
            raise AssertionError(
                f"product forms disagree at {z}: {plain!r} vs {factored!r}")
    if not cfg.quick:
        fa = build_extremal(sel, part)
        grid = PlanarQuadrature(dr=0.08, r_out=sel.R + 6.0)
        rep = norms_and_ratio(fa, sel, grid=grid)
        if rep.fock_norm_sq < 0.05 * sel.R ** 1.5:
            raise AssertionError(
                f"witness norm^2 {rep.fock_norm_sq!r} below the growth "
                "floor")
        if not math.isfinite(rep.defect_sup):
            raise AssertionError("growth defect is not finite")


_SELFTEST_SUITES = (
    ("window-identities", _suite_window_identities),
    ("transform-images", _suite_transform_images),
    ("coefficient-equivalence", _suite_coefficient_equivalence),
    ("gram-spectrum", _suite_gram_spectrum),
    ("dual-chain", _suite_dual_chain),
    ("sigma-growth", _suite_sigma_growth),
    ("sector-partition", _suite_sector_partition),
)


def run_selftest(cfg: RunConfig) -> int:
    failed = 0
    for name, suite in _SELFTEST_SUITES:
        rng = np.random.default_rng(cfg.seed)
        try:
            suite(cfg, rng)
        except Exception as exc:  # every failure becomes a report line
            failed += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")
    total = len(_SELFTEST_SUITES)
    print(f"{total - failed} of {total} suites passed")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if cfg.subcommand == "selftest":
        return run_selftest(cfg)

    start = time.monotonic()
    rows, severity, messages = run_rows(cfg)
    wall_time = time.monotonic() - start
    _emit(cfg, rows, wall_time)
    if cfg.plot:
        _emit_plots(cfg, rows)
    for message in messages:
        print(f"{cfg.subcommand}: {message}", file=sys.stderr)
    return severity


if __name__ == "__main__":
    sys.exit(main())
