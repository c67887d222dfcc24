"""Command-line front end: verification suites and benchmark reports.

Every subcommand writes one table as CSV (fixed header row, floats printed
with 17 significant digits) or JSON (a list of records with the same keys),
to ``--output`` or standard output.  The exit status is 0 when every
asserted tolerance holds and 1 otherwise; argument errors exit with 2.

Source and target files for ``fastsum-bench`` are CSV with one point per
row; a source row carries its weight in the last column.  Lines starting
with ``#`` and a non-numeric header row are skipped.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import caloric, fastsum, heat_kernel, laplace, projection
from .hermite import graded_indices

__all__ = ["RunConfig", "Report", "build_parser", "main", "run"]

COMMANDS = (
    "taylor-error",
    "mehler-check",
    "caloric-verify",
    "laplace-error",
    "fastsum-bench",
    "convolution-check",
    "kernel-eval",
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    tol: float
    K: Optional[int]
    seed: int = 42
    output: Optional[str] = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")


@dataclass
class Report:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    passed: bool = True

    def add(self, **row):
        self.rows.append(row)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _jsonable(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        records = [{c: _jsonable(r[c]) for c in report.columns} for r in report.rows]
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for r in report.rows:
        w.writerow([_fmt(r[c]) for c in report.columns])
    return buf.getvalue()


# --- subcommands -------------------------------------------------------------


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def cmd_taylor_error(cfg: RunConfig) -> Report:
    """Relative error of the degree-K partial sum against the closed-form
    kernel, for t/s = 0.1, ..., 0.9 at one seeded point pair.

    Single terms change sign, so the error at a given K can briefly rise;
    ``envelope`` is the largest error at any degree >= K and is
    non-increasing.  Each column runs until the error first drops below
    tol, and the check is that it does so within K (default 1000).
    """
    rep = Report(["n", "t_over_s", "K", "rel_error", "envelope"])
    rng = np.random.default_rng(cfg.seed)
    x, y = rng.uniform(-1, 1, cfg.n), rng.uniform(-1, 1, cfg.n)
    s = 1.0
    K_max = cfg.K if cfg.K is not None else 1000
    for i in range(1, 10):
        r = i / 10
        t = r * s
        exact = heat_kernel.gaussian_backward((x, t), (y, s))
        partial = np.cumsum(heat_kernel.taylor_terms(x, t, y, s, K_max))
        errs = np.abs(partial - exact) / abs(exact)
        hit = np.nonzero(errs <= cfg.tol)[0]
        stop = int(hit[0]) if hit.size else K_max
        env = np.maximum.accumulate(errs[: stop + 1][::-1])[::-1]
        for K in range(stop + 1):
            rep.add(n=cfg.n, t_over_s=r, K=K, rel_error=float(errs[K]), envelope=float(env[K]))
        rep.passed &= bool(hit.size)
    return rep


def cmd_mehler_check(cfg: RunConfig) -> Report:
    rep = Report(["n", "xi", "K", "value", "closed_form", "rel_error"])
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.extra["count"]):
        xi = rng.uniform(-0.9, 0.9)
        q = projection.MehlerQuery(rng.uniform(-2, 2, cfg.n), rng.uniform(-2, 2, cfg.n), xi)
        res = projection.mehler_adaptive(q, tol=min(1e-13, cfg.tol * 1e-3), K_max=cfg.K or 4000)
        exact = projection.mehler_closed(q)
        err = _rel(res.value, exact)
        rep.add(n=cfg.n, xi=xi, K=res.degrees_used, value=res.value, closed_form=exact, rel_error=err)
        rep.passed &= err <= cfg.tol
    return rep


def cmd_caloric_verify(cfg: RunConfig) -> Report:
    rep = Report(["alpha", "degree", "heat_operator_zero", "homogeneous", "polynomial"])
    for alpha in graded_indices(cfg.n, cfg.extra["max_degree"]):
        Q = caloric.q_alpha(alpha)
        zero = caloric.heat_operator_apply(Q).is_zero
        homog = Q.homogeneity_holds()
        rep.add(
            alpha=" ".join(map(str, alpha)),
            degree=alpha.degree,
            heat_operator_zero=zero,
            homogeneous=homog,
            polynomial=str(Q),
        )
        rep.passed &= zero and homog
    return rep


def _unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def cmd_laplace_error(cfg: RunConfig) -> Report:
    """Error of the zonal expansion against the closed-form kernel for
    |x|/|y| = 0.1, ..., 0.5, with |y| = 3 so that log|x-y| stays away from 0."""
    if cfg.n < 2:
        raise ValueError("laplace-error needs n >= 2")
    rep = Report(["n", "ratio", "K", "rel_error"])
    rng = np.random.default_rng(cfg.seed)
    K_max = cfg.K if cfg.K is not None else 48
    for i in range(1, 6):
        r = i / 10
        y = 3.0 * _unit(rng, cfg.n)
        x = 3.0 * r * _unit(rng, cfg.n)
        exact = laplace.gamma_laplace(x, y)
        partial = np.cumsum(laplace.laplace_series_terms(x, y, K_max))
        for K, p in enumerate(partial):
            rep.add(n=cfg.n, ratio=r, K=K, rel_error=_rel(float(p), exact))
        rep.passed &= _rel(laplace.laplace_series_partial(x, y, K_max), exact) <= cfg.tol
    return rep


def read_points(path: str) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError:
                if rows:
                    raise
                continue  # header
    if not rows:
        raise ValueError(f"no points in {path}")
    return np.array(rows, dtype=float)


def cmd_fastsum_bench(cfg: RunConfig) -> Report:
    ex = cfg.extra
    rng = np.random.default_rng(cfg.seed)
    if ex["sources"]:
        data = read_points(ex["sources"])
        sources, weights = data[:, :-1], data[:, -1]
    else:
        sources = rng.uniform(-2, 2, (ex["N"], cfg.n))
        weights = rng.uniform(-1, 1, ex["N"])
    targets = read_points(ex["targets"]) if ex["targets"] else rng.uniform(-2, 2, (ex["M"], cfg.n))
    n = sources.shape[1]
    t, s = ex["t"], ex["s"]
    if cfg.K is not None:
        K = cfg.K
    else:
        radius = max(np.linalg.norm(sources, axis=1).max(), np.linalg.norm(targets, axis=1).max())
        K = fastsum.choose_degree(cfg.tol, abs(t) / s, float(radius), n=n, s=s, t_sign=1 if t >= 0 else -1)
    t0 = time.perf_counter()
    direct = fastsum.direct_sum(sources, weights, targets, t, s)
    t1 = time.perf_counter()
    table = fastsum.compute_moments(sources, weights, s, K, n=n)
    fast = fastsum.evaluate_targets(table, targets, t, workers=ex["workers"])
    t2 = time.perf_counter()
    err = float(np.max(np.abs(fast - direct)))
    rep = Report(["N", "M", "K", "max_error", "time_direct", "time_fast"])
    rep.add(N=len(sources), M=len(targets), K=K, max_error=err, time_direct=t1 - t0, time_fast=t2 - t1)
    rep.passed = err <= 10 * cfg.tol
    return rep


def cmd_convolution_check(cfg: RunConfig) -> Report:
    """Quadrature residuals of both representation identities on bump
    test functions at seeded points inside their supports."""
    rep = Report(["identity", "n", "point", "residual"])
    rng = np.random.default_rng(cfg.seed)
    for n in (2, 3):
        phi = laplace.radial_bump(n, radius=1.0)
        for _ in range(3):
            x = 0.8 * rng.uniform(-1, 1, n) / math.sqrt(n)
            res = laplace.laplace_representation_residual(phi, x)
            rep.add(identity="laplace", n=n, point=" ".join("%.17g" % v for v in x), residual=res)
            rep.passed &= res <= cfg.tol
    f = heat_kernel.spacetime_bump(poly=(1.0, 0.5, -0.25))
    for _ in range(3):
        x, t = rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)
        res = heat_kernel.heat_representation_residual(f, x, t)
        rep.add(identity="heat", n=1, point="%.17g %.17g" % (x, t), residual=res)
        rep.passed &= res <= cfg.tol
    return rep


def _vector(text: str, n: int) -> np.ndarray:
    v = np.array([float(c) for c in text.split(",")])
    if v.size == 1 and n > 1:
        v = np.full(n, v[0])
    if v.size != n:
        raise ValueError(f"expected {n} coordinates, got {text!r}")
    return v


def cmd_kernel_eval(cfg: RunConfig) -> Report:
    ex = cfg.extra
    x, y = _vector(ex["x"], cfg.n), _vector(ex["y"], cfg.n)
    fn = heat_kernel.gaussian_backward if ex["kind"] == "backward" else heat_kernel.gaussian_forward
    value = fn((x, ex["t"]), (y, ex["s"]))
    rep = Report(["kernel", "n", "t", "s", "value"])
    rep.add(kernel=ex["kind"], n=cfg.n, t=ex["t"], s=ex["s"], value=value)
    rep.passed = math.isfinite(value)
    return rep


HANDLERS = {
    "taylor-error": cmd_taylor_error,
    "mehler-check": cmd_mehler_check,
    "caloric-verify": cmd_caloric_verify,
    "laplace-error": cmd_laplace_error,
    "fastsum-bench": cmd_fastsum_bench,
    "convolution-check": cmd_convolution_check,
    "kernel-eval": cmd_kernel_eval,
}

DEFAULT_TOL = {
    "taylor-error": 1e-10,
    "mehler-check": 1e-9,
    "caloric-verify": 0.0,
    "laplace-error": 1e-10,
    "fastsum-bench": 1e-7,
    "convolution-check": 1e-3,
    "kernel-eval": 0.0,
}


# --- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="space dimension")
    common.add_argument("--tol", type=float, default=None, help="tolerance (command specific)")
    common.add_argument("--K", type=int, default=None, help="truncation degree")
    common.add_argument("--seed", type=int, default=42, help="seed for random suites (default 42)")
    common.add_argument("--output", default=None, help="report file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="heatseries", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("taylor-error", parents=[common], help="error vs K over t/s in 0.1..0.9")
    m = sub.add_parser("mehler-check", parents=[common], help="Mehler series vs closed form")
    m.add_argument("--count", type=int, default=100, help="random (x, y, xi) draws")
    c = sub.add_parser("caloric-verify", parents=[common], help="list Q_alpha, check caloricity")
    c.add_argument("--max-degree", type=int, default=6)
    sub.add_parser("laplace-error", parents=[common], help="error vs K for ratios |x|/|y|")
    f = sub.add_parser("fastsum-bench", parents=[common], help="fast vs direct Gauss sum")
    f.add_argument("--N", type=int, default=4096, help="random sources")
    f.add_argument("--M", type=int, default=4096, help="random targets")
    f.add_argument("--t", type=float, default=0.5)
    f.add_argument("--s", type=float, default=1.0)
    f.add_argument("--sources", default=None, help="CSV of sources, weight in last column")
    f.add_argument("--targets", default=None, help="CSV of targets")
    f.add_argument("--workers", type=int, default=1)
    sub.add_parser("convolution-check", parents=[common], help="representation identity residuals")
    k = sub.add_parser("kernel-eval", parents=[common], help="closed-form Gaussian kernel")
    k.add_argument("--x", required=True, help="comma-separated coordinates")
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--y", required=True, help="comma-separated coordinates")
    k.add_argument("--s", type=float, required=True)
    k.add_argument("--kind", choices=("backward", "forward"), default="backward")
    return p


_COMMON = {"command", "n", "tol", "K", "seed", "output", "format"}


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    extra = {k: v for k, v in vars(args).items() if k not in _COMMON}
    if args.n is None:
        n = 3 if args.command == "laplace-error" else 1
    else:
        n = args.n
    tol = DEFAULT_TOL[args.command] if args.tol is None else args.tol
    return RunConfig(args.command, n, tol, args.K, args.seed, args.output, args.format, extra)


def run(cfg: RunConfig) -> int:
    report = HANDLERS[cfg.command](cfg)
    text = render(report, cfg.format)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_config(argv)
    try:
        return run(cfg)
    except ValueError as exc:
        print(f"heatseries {cfg.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
