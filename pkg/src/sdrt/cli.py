"""Command-line harness: ``sdrt verify | stability | converge | longtime | appendix``.

Exit codes: 0 every check passed, 1 a check failed, 2 usage error,
3 numerical failure (blow-up, eigensolver).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .mesh import MeshGeometry, Velocity, project_lagrange
from .reconstruction import assemble_stencil
from .scheme import hardcoded_operator
from .solver import NumericalBlowUp, TimeIntegrator, integrate
from .stability import EigenSolverError, stability_scan

log = logging.getLogger("sdrt")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

ORDER_TOLERANCE = 0.3
LONGTIME_RATIO_BAND = (3.2, 4.8)
STABILITY_MIN_RE = -1e-10
STABILITY_MAX_COND = 32 * 1.02

PROFILES = {
    "sine": lambda x, y: np.sin(2 * np.pi * (x + y)),
    "constant": lambda x, y: np.ones_like(np.asarray(x, dtype=float)) * 0.75,
}

PLOT_TEMPLATE = '''"""Plot template for {kind} output; edit freely."""
import csv
import sys

import matplotlib.pyplot as plt

{body}
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "{kind}.png", dpi=150)
'''

PLOT_CONVERGENCE = '''rows = list(csv.DictReader(open("{table}")))
h = [float(r["h"]) for r in rows]
for col in ("err_max", "err_l2"):
    plt.loglog(h, [float(r[col]) for r in rows], "o-", label=col)
plt.xlabel("h")
plt.ylabel("error at t_max")
plt.legend()'''

PLOT_LONGTIME = '''for path in {traces!r}:
    rows = list(csv.DictReader(open(path)))
    plt.semilogy([float(r["t"]) for r in rows], [float(r["err_l2"]) for r in rows], label=path)
plt.xlabel("t")
plt.ylabel("L2 error")
plt.legend()'''


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    omega: tuple = (1.0, 0.0)
    phi: float | None = None
    h: list = field(default_factory=list)
    t_max: float = 0.0
    cfl: float = 0.1
    rk: int = 3
    degree: int = 1
    profile: str = "sine"
    out: str = "results"
    fmt: str = "csv"
    seed: int = 0
    jobs: int = 1


@dataclass
class ConvergenceRecord:
    h: float
    n_blocks: int
    err_max: float
    err_l2: float
    order_max: float | None = None
    order_l2: float | None = None


def parse_angle(text: str) -> float:
    """Accept plain floats and forms like ``pi/8``, ``3*pi/8``, ``3pi/8``."""
    s = text.strip().replace(" ", "")
    m = re.fullmatch(r"([0-9.]*)\*?pi(?:/([0-9.]+))?", s)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


def parse_h_list(text: str) -> list[float]:
    hs = [float(v) for v in text.split(",") if v.strip()]
    for h in hs:
        try:
            MeshGeometry.from_step(h)
        except ValueError as err:
            raise UsageError(str(err)) from None
    for a, b in zip(hs, hs[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise UsageError("h list must be descending successive halvings")
    return hs


def fmt_float(x) -> str:
    return "" if x is None else repr(float(x))


def observed_orders(errors: list[float]) -> list[float | None]:
    out = []
    for coarse, fine in zip(errors, errors[1:]):
        out.append(math.log(coarse / fine) / math.log(2.0) if coarse > 0 and fine > 0 else None)
    return out


def _velocity(cfg: ExperimentConfig) -> Velocity:
    return Velocity(*cfg.omega)


def _operator(cfg: ExperimentConfig):
    w = _velocity(cfg)
    if cfg.degree == 0:
        return assemble_stencil(w, degree=0, exact=False)
    return hardcoded_operator(w, exact=False)


def _run_case(args):
    cfg, h, sample_every = args
    geometry = MeshGeometry.from_step(h, cfg.degree)
    integrator = TimeIntegrator(_operator(cfg), geometry, "rk3" if cfg.rk == 3 else "rk4", cfg.cfl)
    v0 = PROFILES[cfg.profile]
    _, trace = integrate(integrator, project_lagrange(v0, geometry), cfg.t_max, sample_every, v0)
    return trace


def _run_all(cfg: ExperimentConfig, sample_every=None):
    jobs = [(cfg, h, sample_every) for h in cfg.h]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_run_case, jobs))
    return [_run_case(j) for j in jobs]


def _write_table(path: Path, header: list[str], rows: list[list], fmt: str) -> Path:
    if fmt == "json":
        path = path.with_suffix(".json")
        path.write_text(json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n")
    else:
        path = path.with_suffix(".csv")
        lines = [",".join(header)] + [",".join(v if isinstance(v, str) else fmt_float(v) for v in r) for r in rows]
        path.write_text("\n".join(lines) + "\n")
    return path


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_dict = asdict(cfg)
    (out / f"{cfg.subcommand}_config.json").write_text(json.dumps(cfg_dict, indent=2, default=str) + "\n")
    return out


def expected_order(cfg: ExperimentConfig) -> int:
    if cfg.degree == 0:
        return 1
    return analysis.order_criterion(cfg.omega)


# -- subcommands ---------------------------------------------------------------


def cmd_verify(cfg: ExperimentConfig, tamper=None) -> int:
    checks = analysis.verification_report(seed=cfg.seed, tamper=tamper)
    print(analysis.render_text(checks))
    if cfg.fmt == "json":
        out = _prepare_out(cfg)
        (out / "verify_report.json").write_text(analysis.render_json(checks) + "\n")
    failed = [c for c in checks if not c.passed]
    print(f"\n{len(checks) - len(failed)}/{len(checks)} identities verified")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_appendix(cfg: ExperimentConfig) -> int:
    forms = analysis.appendix_forms()
    for name, form in forms.items():
        print(f"{name} = ({', '.join(analysis.format_affine(r) for r in form)})")
    coeffs = analysis.solve_projection_coeffs()
    print(f"b = {coeffs.b}, c = {coeffs.c}, d = {coeffs.d}")
    two_exact = analysis.two_exactness_check(coeffs)
    print(f"2-exact under the modified projection: {two_exact}")
    return EXIT_OK if two_exact else EXIT_FAIL


def cmd_stability(cfg: ExperimentConfig, xi_step: float, phi_step: float, samples: bool = True) -> int:
    out = _prepare_out(cfg)
    report = stability_scan(xi_step, phi_step, workers=cfg.jobs)
    summary = report.summary()
    summary["passed_min_re"] = summary["global_min_re_lambda"] >= STABILITY_MIN_RE
    summary["passed_cond"] = summary["global_max_cond"] <= STABILITY_MAX_COND
    (out / "stability_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if samples:
        report.write_csv(out / "stability_samples.csv")
    print(f"samples               {summary['sample_count']}")
    print(f"min Re(lambda)        {summary['global_min_re_lambda']:.3e}  {'PASS' if summary['passed_min_re'] else 'FAIL'}")
    print(f"max cond(V)           {summary['global_max_cond']:.4f}  {'PASS' if summary['passed_cond'] else 'FAIL'} (limit {STABILITY_MAX_COND:.2f})")
    w = summary["worst_sample"]
    print(f"worst sample          xi={w['xi']:.6f} phi=({w['phi_x']:.6f}, {w['phi_y']:.6f}) "
          f"sup_nu ||exp(-nu L)|| = {w['semigroup_norm']:.4f}")
    return EXIT_OK if summary["passed_min_re"] and summary["passed_cond"] else EXIT_FAIL


def cmd_converge(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    traces = _run_all(cfg)
    records = [
        ConvergenceRecord(h, round(1 / h), tr.err_max[-1], tr.err_l2[-1]) for h, tr in zip(cfg.h, traces)
    ]
    for rec, om, ol in zip(records[1:], observed_orders([r.err_max for r in records]),
                           observed_orders([r.err_l2 for r in records])):
        rec.order_max, rec.order_l2 = om, ol
    header = ["h", "n_blocks", "err_max", "err_l2", "order_max", "order_l2"]
    rows = [[r.h, str(r.n_blocks), r.err_max, r.err_l2, r.order_max, r.order_l2] for r in records]
    table = _write_table(out / "convergence", header, rows, cfg.fmt)
    if cfg.fmt == "csv":
        body = PLOT_CONVERGENCE.format(table=table.name)
        (out / "plot_convergence.py").write_text(PLOT_TEMPLATE.format(kind="convergence", body=body))

    print(f"{'h':>10} {'err_max':>12} {'err_l2':>12} {'order_max':>10} {'order_l2':>10}")
    for r in records:
        om = "" if r.order_max is None else f"{r.order_max:.3f}"
        ol = "" if r.order_l2 is None else f"{r.order_l2:.3f}"
        print(f"{r.h:>10g} {r.err_max:>12.4e} {r.err_l2:>12.4e} {om:>10} {ol:>10}")

    if cfg.profile == "constant":
        ok = all(r.err_max <= 1e-12 for r in records)
        print(f"constant profile reproduced: {ok}")
        return EXIT_OK if ok else EXIT_FAIL
    target = expected_order(cfg)
    orders = [r.order_max for r in records[1:]]
    ok = bool(orders) and all(o is not None and abs(o - target) <= ORDER_TOLERANCE for o in orders)
    print(f"expected order {target} +/- {ORDER_TOLERANCE}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_longtime(cfg: ExperimentConfig, sample_every: float = 0.5) -> int:
    if cfg.t_max < 20:
        raise UsageError("longtime needs --tmax >= 20")
    if cfg.t_max < 1 / min(cfg.h):
        log.warning("t_max=%g is below 1/h=%g: the asymptotic long-time regime is not reached",
                    cfg.t_max, 1 / min(cfg.h))
    out = _prepare_out(cfg)
    traces = _run_all(cfg, sample_every)
    paths = []
    for h, tr in zip(cfg.h, traces):
        rows = [[t, a, b] for t, a, b in zip(tr.times, tr.err_max, tr.err_l2)]
        paths.append(_write_table(out / f"trace_n{round(1 / h)}", ["t", "err_max", "err_l2"], rows, cfg.fmt))
    if cfg.fmt == "csv":
        body = PLOT_LONGTIME.format(traces=[p.name for p in paths])
        (out / "plot_longtime.py").write_text(PLOT_TEMPLATE.format(kind="longtime", body=body))

    times = traces[0].times
    header = ["t"] + [f"ratio_l2_{round(1 / a)}_{round(1 / b)}" for a, b in zip(cfg.h, cfg.h[1:])]
    header += [f"ratio_max_{round(1 / a)}_{round(1 / b)}" for a, b in zip(cfg.h, cfg.h[1:])]
    rows = []
    for k, t in enumerate(times[1:], start=1):
        r2 = [c.err_l2[k] / f.err_l2[k] for c, f in zip(traces, traces[1:])]
        rm = [c.err_max[k] / f.err_max[k] for c, f in zip(traces, traces[1:])]
        rows.append([t] + r2 + rm)
    _write_table(out / "longtime_ratios", header, rows, cfg.fmt)

    final = rows[-1]
    n_pairs = len(cfg.h) - 1
    lo, hi = LONGTIME_RATIO_BAND
    ok = n_pairs > 0
    for i in range(n_pairs):
        r2, rm = final[1 + i], final[1 + n_pairs + i]
        inside = lo <= r2 <= hi
        ok = ok and inside
        print(f"t={cfg.t_max:g} h={cfg.h[i]:g}/{cfg.h[i + 1]:g}: L2 ratio {r2:.3f} "
              f"({'PASS' if inside else 'FAIL'}, band [{lo}, {hi}]), max ratio {rm:.3f}")
    return EXIT_OK if ok else EXIT_FAIL


# -- argument handling -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--phi", help="velocity angle in radians (accepts pi/8 etc.)")
    common.add_argument("--omega", help="explicit velocity 'wx,wy' (first quadrant)")
    common.add_argument("--h", help="comma-separated mesh steps 1/N, descending halvings")
    common.add_argument("--tmax", type=float)
    common.add_argument("--cfl", type=float, default=0.1)
    common.add_argument("--rk", type=int, choices=(3, 4), default=3)
    common.add_argument("--degree", type=int, choices=(0, 1), default=1, help="1: SD-RT(1); 0: finite-volume sanity mode")
    common.add_argument("--profile", choices=sorted(PROFILES), default="sine")
    common.add_argument("--out", default="results")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sdrt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    verify = sub.add_parser("verify", parents=[common], help="exact algebraic identities")
    verify.add_argument("--tamper", help=argparse.SUPPRESS)
    stab = sub.add_parser("stability", parents=[common], help="eigenvalue scan of L(phi)")
    stab.add_argument("--xi-step", default="pi/100")
    stab.add_argument("--phi-step", default="pi/100")
    stab.add_argument("--no-samples", action="store_true", help="skip the per-sample CSV")
    sub.add_parser("converge", parents=[common], help="short-time grid convergence study")
    longtime = sub.add_parser("longtime", parents=[common], help="long-time error traces")
    longtime.add_argument("--sample-every", type=float, default=0.5)
    sub.add_parser("appendix", parents=[common], help="modified projection coefficients")
    return parser


DEFAULTS = {
    "converge": {"phi": "pi/8", "h": "0.1,0.05,0.025,0.0125", "tmax": 0.1},
    "longtime": {"phi": "0", "h": "0.1,0.05", "tmax": 30.0},
}


def config_from_args(args) -> ExperimentConfig:
    defaults = DEFAULTS.get(args.subcommand, {})
    phi = None
    if args.omega:
        try:
            wx, wy = (float(v) for v in args.omega.split(","))
        except ValueError:
            raise UsageError(f"cannot parse --omega {args.omega!r}") from None
    else:
        phi = parse_angle(args.phi or defaults.get("phi", "0"))
        if not 0 <= phi <= math.pi / 2 + 1e-12:
            raise UsageError("--phi must lie in [0, pi/2]")
        w = Velocity.from_angle(phi)
        wx, wy = w.omega_x, w.omega_y
    try:
        Velocity(wx, wy)
    except ValueError as err:
        raise UsageError(str(err)) from None
    if not 0 < args.cfl < 1:
        raise UsageError("--cfl must lie in (0, 1)")
    h_text = args.h or defaults.get("h")
    return ExperimentConfig(
        subcommand=args.subcommand,
        omega=(wx, wy),
        phi=phi,
        h=parse_h_list(h_text) if h_text else [],
        t_max=args.tmax if args.tmax is not None else defaults.get("tmax", 0.0),
        cfl=args.cfl,
        rk=args.rk,
        degree=args.degree,
        profile=args.profile,
        out=args.out,
        fmt=args.fmt,
        seed=args.seed,
        jobs=args.jobs,
    )


def parse_tamper(text: str):
    """``dir:zx,zy:i,j:value`` with 1-based matrix indices."""
    try:
        d, zeta, ij, value = text.split(":")
        zx, zy = (int(v) for v in zeta.split(","))
        i, j = (int(v) - 1 for v in ij.split(","))
        return d, (zx, zy), i, j, int(value)
    except ValueError:
        raise UsageError(f"bad --tamper value {text!r}") from None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if cfg.subcommand == "verify":
            return cmd_verify(cfg, parse_tamper(args.tamper) if args.tamper else None)
        if cfg.subcommand == "appendix":
            return cmd_appendix(cfg)
        if cfg.subcommand == "stability":
            return cmd_stability(cfg, parse_angle(args.xi_step), parse_angle(args.phi_step), not args.no_samples)
        if cfg.subcommand == "converge":
            if len(cfg.h) < 2 or cfg.t_max <= 0:
                raise UsageError("converge needs at least two h values and --tmax > 0")
            return cmd_converge(cfg)
        return cmd_longtime(cfg, args.sample_every)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalBlowUp, EigenSolverError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
