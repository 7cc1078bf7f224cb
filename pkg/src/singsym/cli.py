"""Command line entry point.

    singsym solve          --config CFG [--out DIR]
    singsym verify         --config CFG [--out DIR] [--fields DIR] [--threads N]
    singsym refine-study   --config CFG [--out DIR] [--levels N]
    singsym lemma-check    [--gammas G ...] [--samples N] [--seed N] [--out DIR]
    singsym delta-estimate --config CFG [--out DIR] [--fields DIR]

Failures print a JSON error object on stderr and exit with status 2;
``verify`` and ``lemma-check`` exit 1 when a check fails.
"""

import argparse
import json
import logging
from pathlib import Path
import sys

import numpy as np

from .config import load_config
from .elliptic import decompose, h1_seminorm, interior_residual, solve_full, solve_u0
from .errors import MissingField, SingsymError
from .fields import read_binary, write_atomic, write_binary, write_csv
from .geometry import build_grid
from .lemma import check_g_nonpositive
from .moving_plane import run_sweep
from .nonlinearity import check_hp
from .poincare import estimate_delta

log = logging.getLogger("singsym")

FIELD_NAMES = ("u0", "u", "w")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _out_dir(cfg, out):
    path = Path(out if out is not None else cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _hp(cfg, s_max=10.0):
    spec = cfg.nonlinearity
    report = check_hp(spec, s_max, 1000)
    return report


def _banner(cfg):
    spec = cfg.nonlinearity
    rep = _hp(cfg)
    if rep.verdict:
        return ""
    if spec.f.is_zero:
        return "f = 0: (H_p) positivity fails; checks on w are degenerate"
    return "hypothesis (H_p) violated: " + "; ".join(rep.reasons)


def _solve(cfg):
    grid = build_grid(cfg.domain, cfg.h)
    tol = cfg.tolerances
    u0, t0 = solve_u0(grid, cfg.nonlinearity.gamma, cfg.schedule, tol.stage_tol, newton_tol=tol.newton_tol)
    if cfg.nonlinearity.f.is_zero:
        u, tu = u0, t0
    else:
        u, tu = solve_full(grid, cfg.nonlinearity, cfg.schedule, tol.stage_tol, newton_tol=tol.newton_tol)
    return grid, u0, u, decompose(u, u0), t0, tu


def cmd_solve(cfg, out=None):
    """Solve for u0 and u, write u0/u/w fields and the solve trace."""
    out = _out_dir(cfg, out)
    grid, u0, u, w, t0, tu = _solve(cfg)
    paths = {}
    for name, f in zip(FIELD_NAMES, (u0, u, w)):
        write_csv(f, out / f"{name}.csv")
        write_binary(f, out, name)
        paths[name] = str(out / f"{name}.csv")
    trace = {
        "schema": "v1",
        "config": cfg.to_dict(),
        "nodes": grid.size,
        "banner": _banner(cfg),
        "min_u_minus_u0": float(np.min(w.values)),
        "u0": t0.to_dict(),
        "u": tu.to_dict(),
    }
    write_atomic(out / "trace.json", _dump(trace))
    paths["trace"] = str(out / "trace.json")
    return paths


def _load_fields(cfg, directory):
    grid = build_grid(cfg.domain, cfg.h)
    return {name: read_binary(directory, name, grid) for name in FIELD_NAMES}


def cmd_verify(cfg, out=None, fields_dir=None, threads=1, seed=None):
    """Sweep every check over solved fields; returns (report, exit status)."""
    out = _out_dir(cfg, out)
    fields = _load_fields(cfg, Path(fields_dir) if fields_dir else out)
    u0, u, w = fields["u0"], fields["u"], fields["w"]
    spec = cfg.nonlinearity
    delta = estimate_delta(u, spec)
    banner = _banner(cfg)
    report = run_sweep(
        {"u0": u0, "w": w, "u": u},
        cfg.sweep,
        delta=delta,
        seed=cfg.seed if seed is None else seed,
        threads=threads,
        banner=banner,
    )
    write_atomic(out / "report.json", _dump(report.to_dict()))
    for name in ("u0", "w", "u"):
        write_atomic(out / f"sweep_{name}.csv", report.csv_text(name))
    counted = not banner or spec.f.is_zero
    status = 1 if (report.failures() and counted) else 0
    return report, status


def cmd_refine_study(cfg, levels=None, out=None):
    """u0 at h, h/2, h/4, ...: one CSV row (h, H1 seminorm, centre value, residual) per level."""
    levels = cfg.refine_levels if levels is None else levels
    if levels < 3:
        raise ValueError("refine-study needs at least 3 levels")
    out = _out_dir(cfg, out)
    tol = cfg.tolerances
    rows = []
    for k in range(levels):
        h = cfg.h / 2**k
        grid = build_grid(cfg.domain, h)
        u0, _ = solve_u0(grid, cfg.nonlinearity.gamma, cfg.schedule, tol.stage_tol, newton_tol=tol.newton_tol)
        centre = int(np.argmin(np.linalg.norm(grid.coords - grid.midpoint, axis=1)))
        res = interior_residual(u0, cfg.nonlinearity.without_f()).values
        keep = grid.trimmed(cfg.sweep.boundary_collar)
        rows.append((h, h1_seminorm(u0), float(u0.values[centre]), float(np.max(np.abs(res[keep])))))
    text = "h,h1_seminorm,center_value,residual\n" + "".join(
        f"{a!r},{b!r},{c!r},{d!r}\n" for a, b, c, d in rows
    )
    write_atomic(out / "refine_study.csv", text)
    return rows


def cmd_lemma_check(gammas, samples, seed, out=None):
    verdicts = [v.to_dict() for v in check_g_nonpositive(gammas, samples, seed)]
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_atomic(Path(out) / "lemma_check.json", _dump(verdicts))
    return verdicts, 0 if all(v["pass"] for v in verdicts) else 1


def cmd_delta_estimate(cfg, out=None, fields_dir=None, rule="faber_krahn_closed_form"):
    out = _out_dir(cfg, out)
    try:
        u = _load_fields(cfg, Path(fields_dir) if fields_dir else out)["u"]
    except MissingField:
        _, _, u, _, _, _ = _solve(cfg)
    est = estimate_delta(u, cfg.nonlinearity, rule=rule).to_dict()
    write_atomic(out / "delta.json", _dump(est))
    return est


def build_parser():
    p = argparse.ArgumentParser(prog="singsym", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("solve", help="solve for u0, u and w"))
    sp = sub.add_parser("verify", help="run the moving-plane checks on solved fields")
    common(sp)
    sp.add_argument("--fields", type=Path, default=None, help="directory holding u0/u/w (default: --out)")
    sp = sub.add_parser("refine-study", help="grid refinement study of u0")
    common(sp)
    sp.add_argument("--levels", type=int, default=None)
    sp = sub.add_parser("lemma-check", help="randomized check of g_gamma <= 0")
    common(sp, config=False)
    sp.add_argument("--gammas", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0, 5.0])
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp = sub.add_parser("delta-estimate", help="small-domain threshold delta(u, f)")
    common(sp)
    sp.add_argument("--fields", type=Path, default=None)
    sp.add_argument("--rule", choices=["faber_krahn_closed_form", "direct_eigen"], default="faber_krahn_closed_form")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "lemma-check":
            seed = 0 if args.seed is None else args.seed
            verdicts, status = cmd_lemma_check(args.gammas, args.samples, seed, args.out)
            sys.stdout.write(_dump(verdicts))
            return status
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.command == "solve":
            sys.stdout.write(_dump(cmd_solve(cfg, args.out)))
            return 0
        if args.command == "verify":
            report, status = cmd_verify(cfg, args.out, args.fields, args.threads)
            summary = {"schema": "v1", "passed": report.passed, "failures": report.failures(), "banner": report.banner}
            sys.stdout.write(_dump(summary))
            return status
        if args.command == "refine-study":
            rows = cmd_refine_study(cfg, args.levels, args.out)
            sys.stdout.write(_dump([dict(zip(("h", "h1_seminorm", "center_value", "residual"), r)) for r in rows]))
            return 0
        if args.command == "delta-estimate":
            sys.stdout.write(_dump(cmd_delta_estimate(cfg, args.out, args.fields, args.rule)))
            return 0
    except (SingsymError, ValueError, OSError) as exc:
        code = exc.code if isinstance(exc, SingsymError) else type(exc).__name__
        sys.stderr.write(_dump({"schema": "v1", "error": code, "message": str(exc)}))
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
