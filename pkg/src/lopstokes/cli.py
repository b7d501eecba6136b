"""Command-line front end: scans, certification suites, grid solves.

Subcommands
    scan-lopatinski   determinant lower-bound scan + asymptotic constants
    scan-height       lambda0 cutoff and |lambda+K| lower-bound scan
    verify            fuzz + multipliers + height + energy, bitmask exit
    verify-multipliers  the symbol-class table alone
    solve             boundary data files -> field outputs + residual sidecar
    kernel-decay      inverse-FFT decay envelope of the height kernel

Exit codes: 0 success; 2 usage (argparse); 65 config or data validation;
`verify` failures form a bitmask (1 fuzz, 2 multipliers, 4 height,
8 energy); verify-multipliers alone exits with its bitmask value 2; the
scan and decay commands exit 1 when their certification fails.

Reports land in --out (env LOPSTOKES_OUT wins over the flag, which wins
over the config), named <kind>_<hash>.<ext> by the 12-hex content hash of
the effective configuration, so identical runs produce byte-identical
artifacts at identical paths and nothing carries a timestamp.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import __version__
from .coefficients import find_lambda0, height_ratio_curve, height_scan
from .config import RunConfig, Tolerances, default_config, load_config
from .errors import (
    ConfigError,
    GridTooCoarse,
    HeightNotInvertible,
    LopStokesError,
    NoCutoffFound,
    NonPositiveOmega,
    ZeroModeData,
)
from .kernels import set_threads
from .lopatinski import scan_lower_bound
from .multiplier import certify_table, class_cutoff
from .params import SpectralPoint
from .reports import (
    config_hash,
    ensure_out_dir,
    read_field,
    scan_rows,
    write_class_csv,
    write_decay_csv,
    write_field,
    write_height_csv,
    write_json,
    write_residual_csv,
    write_scan_csv,
)
from .resolvent import (
    BoundaryData,
    assemble_profiles,
    energy_quadrature_check,
    fuzz_residuals,
)
from .transform import kernel_decay_check, solve_physical

_DEFAULT_SAMPLES = RunConfig().samples


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="report directory "
                        "(default from config; env LOPSTOKES_OUT overrides)")
    common.add_argument("--seed", type=int, metavar="U64", help="fuzz RNG seed")
    common.add_argument("--threads", type=int, metavar="N",
                        help="kernel thread count (0 = library default)")
    common.add_argument("--samples", type=int, metavar="N", help="fuzz sample count")
    common.add_argument("--tolerance-scale", type=float, default=1.0, metavar="FLOAT",
                        help="multiply every pass/fail tolerance by this factor")

    p = argparse.ArgumentParser(
        prog="lopstokes",
        description="Numerical certification of a two-phase half-space "
                    "Stokes interface model: symbol scans, explicit resolvent "
                    "solves, multiplier-class tables.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("scan-lopatinski", parents=[common],
                   help="lower-bound scan of the boundary determinant")
    sub.add_parser("scan-height", parents=[common],
                   help="invertibility scan of lambda + K")
    sub.add_parser("verify", parents=[common],
                   help="full certification suite (bitmask exit code)")
    sub.add_parser("verify-multipliers", parents=[common],
                   help="symbol-class table only")
    ps = sub.add_parser("solve", parents=[common],
                        help="solve grid boundary data from field files")
    ps.add_argument("data", nargs="*", metavar="FIELD",
                    help="base paths of input fields (.csv/.json pairs): "
                         "tangential jumps h_1 [h_2], then H or d per the "
                         "configured mode; defaults to config solve.data")
    sub.add_parser("kernel-decay", parents=[common],
                   help="decay envelope of the inverse height kernel")
    return p


def _effective(args) -> tuple[RunConfig, Tolerances, str, str]:
    try:
        cfg = load_config(args.config) if args.config else default_config()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    over = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError(f"--seed must fit in an unsigned 64-bit value, got {args.seed}")
        over["seed"] = args.seed
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError(f"--samples must be >= 1, got {args.samples}")
        over["samples"] = args.samples
    if args.threads is not None:
        over["threads"] = args.threads
    if over:
        cfg = dataclasses.replace(cfg, **over)
    tol = cfg.tolerances.scale(args.tolerance_scale)
    out = os.environ.get("LOPSTOKES_OUT") or args.out or cfg.out_dir
    tag = config_hash(cfg, extra={"tolerance_scale": args.tolerance_scale})
    if cfg.threads > 0:
        set_threads(cfg.threads)
    return cfg, tol, ensure_out_dir(out), tag


def cmd_scan_lopatinski(cfg: RunConfig, tol: Tolerances, out: str, tag: str) -> int:
    rep = scan_lower_bound(cfg.fluid, cfg.sector, cfg.grid, refine=True, tol=tol)
    write_json(os.path.join(out, f"scan_{tag}.json"), rep.to_dict())
    write_scan_csv(os.path.join(out, f"scan_{tag}.csv"),
                   scan_rows(cfg.fluid, cfg.sector, cfg.grid))
    dev = max(rep.delta1, rep.delta2)
    ok = rep.omega > 0.0 and dev <= tol.asym_dev_at_100
    print(f"scan-lopatinski: omega = {rep.omega:.6e} over {rep.n_points} points, "
          f"refine drift {rep.refine_drift:.2%}, asymptotic deviation {dev:.2%} "
          f"-> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_scan_height(cfg: RunConfig, tol: Tolerances, out: str, tag: str) -> int:
    lam0 = find_lambda0(cfg.fluid, cfg.sector, cfg.grid, floor=tol.height_floor)
    rep = height_scan(cfg.fluid, cfg.sector, cfg.grid, lambda0=lam0)
    mags, curve = height_ratio_curve(cfg.fluid, cfg.sector, cfg.grid)
    write_json(os.path.join(out, f"height_{tag}.json"), rep.to_dict())
    write_height_csv(os.path.join(out, f"height_{tag}.csv"), mags, curve)
    ok = rep.omega4 > 0.0
    print(f"scan-height: lambda0 = {rep.lambda0:.6e}, omega4 = {rep.omega4:.6e}, "
          f"K/A slope = {rep.slope:.6f} (formula limit {rep.slope_limit:.6f}) "
          f"-> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


_ENERGY_PROBES = (
    (complex(2.0, 1.5), (0.8,), "kinematic"),
    (complex(-40.0, 90.0), (1.0, 2.0), "explicit-H"),
    (complex(1e-3, 5e-4), (30.0,), "explicit-H"),
    (complex(3e4, -2e4), (0.05, 0.02), "kinematic"),
    (complex(0.5, -0.2), (1e3,), "kinematic"),
)


def _energy_suite(cfg: RunConfig, tol: Tolerances, fuzz_rep) -> dict:
    worst_closed = fuzz_rep.worst.get("energy", {}).get("value", 0.0)
    worst_quad = 0.0
    for lam, xi, mode in _ENERGY_PROBES:
        sp = SpectralPoint(lam=lam, xi=xi)
        h = tuple(0.4 + 0.3j for _ in range(sp.dim - 1))
        data = (BoundaryData.kinematic(h, d_hat=0.6 - 0.2j) if mode == "kinematic"
                else BoundaryData.explicit(h, H_hat=0.1 + 0.7j))
        sol = assemble_profiles(cfg.fluid, sp, data, sector=cfg.sector, tol=tol)
        worst_quad = max(worst_quad,
                         energy_quadrature_check(cfg.fluid, sp, sol,
                                                 quad_rel=tol.volevich_quad_rel))
    return {
        "closed_form_worst": worst_closed,
        "quadrature_cross_worst": worst_quad,
        "passed": bool(worst_closed <= tol.energy_defect
                       and worst_quad <= tol.quadrature_cross),
    }


def cmd_verify(cfg: RunConfig, tol: Tolerances, out: str, tag: str) -> int:
    suites: dict[str, dict] = {}

    fuzz = fuzz_residuals(fluid=cfg.fluid, sector=cfg.sector,
                          n_samples=cfg.samples, seed=cfg.seed,
                          energy=True, tol=tol)
    suites["fuzz"] = {**fuzz.to_dict(), "passed": fuzz.passed(tol)}

    try:
        lam0 = find_lambda0(cfg.fluid, cfg.sector, cfg.grid, floor=tol.height_floor)
        hrep = height_scan(cfg.fluid, cfg.sector, cfg.grid, lambda0=lam0)
        suites["height"] = {**hrep.to_dict(), "passed": hrep.omega4 > 0.0}
    except (NoCutoffFound, HeightNotInvertible) as exc:
        suites["height"] = {"passed": False, "error": str(exc)}

    try:
        lam0c = class_cutoff(cfg.fluid, cfg.sector, cfg.grid)
        table = certify_table(cfg.fluid, cfg.sector, cfg.class_grid,
                              lambda0=lam0c, tol=tol)
        suites["multipliers"] = {
            "passed": all(r.verdict == "pass" for r in table),
            "failed": sorted(r.name for r in table if r.verdict != "pass"),
            "n_claims": len(table),
            "quotient_cutoff": lam0c,
            "max_drift": max(r.max_drift() for r in table),
        }
        write_class_csv(os.path.join(out, f"class_{tag}.csv"), table)
    except (NoCutoffFound, GridTooCoarse) as exc:
        suites["multipliers"] = {"passed": False, "error": str(exc)}

    suites["energy"] = _energy_suite(cfg, tol, fuzz)

    code = 0
    for bit, name in ((1, "fuzz"), (2, "multipliers"), (4, "height"), (8, "energy")):
        if not suites[name]["passed"]:
            code |= bit
    summary = {
        "seed": cfg.seed,
        "samples": cfg.samples,
        "reduced_coverage": cfg.samples < _DEFAULT_SAMPLES,
        "suites": suites,
        "exit_code": code,
    }
    write_json(os.path.join(out, f"verify_{tag}.json"), summary)
    for name in ("fuzz", "multipliers", "height", "energy"):
        print(f"verify: {name:12s} {'PASS' if suites[name]['passed'] else 'FAIL'}")
    if summary["reduced_coverage"]:
        print(f"verify: reduced coverage ({cfg.samples} fuzz samples, "
              f"default {_DEFAULT_SAMPLES})")
    return code


def cmd_verify_multipliers(cfg: RunConfig, tol: Tolerances, out: str, tag: str) -> int:
    lam0 = class_cutoff(cfg.fluid, cfg.sector, cfg.grid)
    table = certify_table(cfg.fluid, cfg.sector, cfg.class_grid,
                          lambda0=lam0, tol=tol)
    write_class_csv(os.path.join(out, f"class_{tag}.csv"), table)
    write_json(os.path.join(out, f"multipliers_{tag}.json"), {
        "quotient_cutoff": lam0,
        "claims": [
            {"name": r.name, "s": r.s, "type": r.mtype,
             "lam_floor": r.lam_floor, "verdict": r.verdict,
             "max_drift": r.max_drift(), "discarded": r.discarded,
             "unresolved": list(r.unresolved)}
            for r in table
        ],
    })
    bad = [r.name for r in table if r.verdict != "pass"]
    print(f"verify-multipliers: {len(table) - len(bad)}/{len(table)} claims pass"
          + (f"; failing: {', '.join(bad)}" if bad else ""))
    return 0 if not bad else 2


def cmd_solve(cfg: RunConfig, tol: Tolerances, out: str, tag: str, data_args) -> int:
    sv = cfg.solve
    missing = [k for k in ("lambda_re", "mode", "x_levels", "box", "shape") if k not in sv]
    if missing:
        raise ConfigError(f"config.solve: missing key(s) {missing}")
    lam = complex(float(sv["lambda_re"]), float(sv.get("lambda_im", 0.0)))
    mode = sv["mode"]
    if mode not in ("explicit-H", "kinematic"):
        raise ConfigError(f"config.solve.mode: expected 'explicit-H' or "
                          f"'kinematic', got {mode!r}")
    box = tuple(float(b) for b in sv["box"])
    shape = tuple(int(n) for n in sv["shape"])
    dim = len(shape) + 1
    paths = list(data_args) if data_args else list(sv.get("data", []))
    if len(paths) != dim:
        raise ConfigError(
            f"solve needs {dim} field files ({dim - 1} tangential jumps plus "
            f"{'H' if mode == 'explicit-H' else 'd'}), got {len(paths)}")

    fields = []
    for path in paths:
        header, fld = read_field(path)
        if fld.grid_shape != shape or fld.box_lengths != box:
            raise ConfigError(
                f"{path}: field grid {fld.grid_shape} box {fld.box_lengths} "
                f"does not match config solve grid {shape} box {box}")
        fields.append(fld.samples[0])

    if mode == "kinematic":
        lam0 = find_lambda0(cfg.fluid, cfg.sector, cfg.grid, floor=tol.height_floor)
        if abs(lam) < lam0:
            print(f"advisory: |lambda| = {abs(lam):.3e} is below the certified "
                  f"height cutoff lambda0 = {lam0:.3e}; the kinematic inversion "
                  "is not covered by the scanned bound there", file=sys.stderr)

    kw = {"H_field": fields[-1]} if mode == "explicit-H" else {"d_field": fields[-1]}
    sol = solve_physical(cfg.fluid, lam, fields[:-1], box,
                         x_levels=tuple(float(x) for x in sv["x_levels"]),
                         sector=cfg.sector, tol=tol, residuals=True, **kw)

    for J, fld in enumerate(sol.u_plus, start=1):
        write_field(os.path.join(out, f"solve_{tag}_u_plus_{J}"), fld, lam,
                    cfg.fluid, f"u_plus_{J}")
    for J, fld in enumerate(sol.u_minus, start=1):
        write_field(os.path.join(out, f"solve_{tag}_u_minus_{J}"), fld, lam,
                    cfg.fluid, f"u_minus_{J}")
    write_field(os.path.join(out, f"solve_{tag}_pressure"), sol.pressure, lam,
                cfg.fluid, "pressure")
    write_field(os.path.join(out, f"solve_{tag}_height"), sol.height, lam,
                cfg.fluid, "height")
    write_residual_csv(os.path.join(out, f"solve_{tag}_residuals.csv"),
                       shape, sol.mode_residuals)
    ode, iface = sol.worst_residuals()
    print(f"solve: {len(sol.mode_residuals)} modes, worst ODE residual "
          f"{ode:.3e}, worst interface residual {iface:.3e}")
    return 0


def cmd_kernel_decay(cfg: RunConfig, tol: Tolerances, out: str, tag: str) -> int:
    reps = {dim: kernel_decay_check(dim=dim) for dim in (2, 3)}
    write_json(os.path.join(out, f"decay_{tag}.json"), {
        str(dim): {
            "constant": r.constant, "n": r.n, "box": r.box,
            "x_levels": list(r.x_levels), "drift_refine": r.drift_refine,
            "drift_box": r.drift_box,
            "monotone_levels": list(r.monotone_levels),
            "passed": r.passed(tol.envelope_drift),
        }
        for dim, r in reps.items()
    })
    ok = True
    for dim, r in reps.items():
        write_decay_csv(os.path.join(out, f"decay{dim}_{tag}.csv"), r)
        good = r.passed(tol.envelope_drift)
        ok = ok and good
        print(f"kernel-decay dim {dim}: constant {r.constant:.4f}, refine drift "
              f"x{r.drift_refine:.3f}, box drift x{r.drift_box:.3f} "
              f"-> {'PASS' if good else 'FAIL'}")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, tol, out, tag = _effective(args)
        if args.command == "scan-lopatinski":
            return cmd_scan_lopatinski(cfg, tol, out, tag)
        if args.command == "scan-height":
            return cmd_scan_height(cfg, tol, out, tag)
        if args.command == "verify":
            return cmd_verify(cfg, tol, out, tag)
        if args.command == "verify-multipliers":
            return cmd_verify_multipliers(cfg, tol, out, tag)
        if args.command == "solve":
            return cmd_solve(cfg, tol, out, tag, args.data)
        return cmd_kernel_decay(cfg, tol, out, tag)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 65
    except ZeroModeData as exc:
        print(f"error: {exc}\nhint: half-space symbols are undefined at the "
              "zero tangential mode; subtract the per-level mean from the "
              "data before solving", file=sys.stderr)
        return 65
    except HeightNotInvertible as exc:
        print(f"error: {exc}\nhint: lambda + K degenerates at this mode; "
              "move |lambda| above the scan-height cutoff or supply H "
              "directly in explicit-H mode", file=sys.stderr)
        return 65
    except (NonPositiveOmega, NoCutoffFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LopStokesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 65
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 66


if __name__ == "__main__":
    sys.exit(main())
