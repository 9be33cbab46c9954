"""Command-line front end.

Exit codes: 0 when every asserted check passes, 1 on a check failure, 2 on
a configuration or IO error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .corpus import CORPUS_NAMES, make_corpus
from .halfspace import HalfSpaceGrid, WeinsteinParams, lp_norm, write_grid_function_csv
from .harness import ConfigError, RunConfig, run_verify
from .maximal import (
    RadiusSchedule,
    edge_mask,
    lp_operator_ratio,
    maximal_ball_average_field,
    maximal_uncentered_field,
    weak_type_constant,
)
from .special_fn import DomainError
from .transform import forward_transform
from .translation import TranslationQuadrature, normalization_residual, translate_grid

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("weinstein")


def _point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _common(p: argparse.ArgumentParser, grid_default: int) -> None:
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--grid", type=int, default=grid_default, help="cells per axis")
    p.add_argument("--half-width", type=float, default=4.0, help="box half-width and depth")
    p.add_argument("--function", choices=CORPUS_NAMES, default="gaussian")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weinstein", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the verification suite and write JSON/CSV reports")
    p.add_argument("--config", type=Path)
    p.add_argument("--alpha", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--grid", type=int, help="finest grid; the study also uses grid/2 and grid/4")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=str)

    p = sub.add_parser("transform", help="Weinstein transform of a corpus function on a grid")
    _common(p, 128)
    p.add_argument("--spectral-half-width", type=float, default=8.0)
    p.add_argument("--spectral-grid", type=int, default=64)
    p.add_argument("--out", type=Path, default=Path("transform.csv"))

    p = sub.add_parser("translate", help="generalized translation of a corpus function")
    _common(p, 128)
    p.add_argument("--point", type=_point, help="translation point x, comma separated")
    p.add_argument("--theta-nodes", type=int, default=32)
    p.add_argument("--out", type=Path, default=Path("translate.csv"))
    p.add_argument("--check-normalization", action="store_true",
                   help="print the kernel normalization residual on random (x_d, y_d) pairs")

    p = sub.add_parser("maximal", help="maximal function fields and weak-type / L^p summaries")
    _common(p, 128)
    p.add_argument("--radii", type=int, default=8)
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--z-samples", type=int, default=64)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--out", type=Path, default=Path("maximal_out"))
    return parser


def _member(args, params: WeinsteinParams):
    return make_corpus(params, args.seed, [args.function])[0]


def _grid(args) -> HalfSpaceGrid:
    return HalfSpaceGrid.uniform(args.dim, args.half_width, args.half_width, args.grid)


def cmd_verify(args) -> int:
    cfg = RunConfig.from_yaml(args.config).to_dict() if args.config else {}
    flat = {}
    if cfg:
        flat = {"alpha": cfg["alpha"], "d": cfg["d"], "seed": cfg["seed"], "out": cfg["out"],
                "grid": dict(cfg["grid"]), "spectral": dict(cfg["spectral"]), "schedule": dict(cfg["schedule"]),
                "corpus": cfg["corpus"], "tolerances": cfg["tolerances"]}
    for key, val in (("alpha", args.alpha), ("d", args.dim), ("seed", args.seed), ("out", args.out)):
        if val is not None:
            flat[key] = val
    if args.grid is not None:
        flat.setdefault("grid", {})["n"] = args.grid
        flat.setdefault("spectral", {})["n"] = args.grid
    if args.dim is not None and args.grid is None and cfg:
        # grid sizes from a file were chosen for its dimension
        flat["grid"].pop("n", None)
        flat["spectral"].pop("n", None)
    config = RunConfig.from_mapping(flat)
    report = run_verify(config)
    for e in report.entries:
        log.info("%-8s %s", e.status, e.check)
    s = report.summary()
    print(f"{s['PASS']} passed, {s['FAIL']} failed, {s['SKIPPED']} skipped, {s['INFO']} logged; "
          f"report in {config.out}")
    return report.exit_code


def cmd_transform(args) -> int:
    params = WeinsteinParams(args.alpha, args.dim)
    grid = _grid(args)
    f = _member(args, params).on_grid(params, grid)
    spec = HalfSpaceGrid.uniform(args.dim, args.spectral_half_width, args.spectral_half_width, args.spectral_grid)
    write_grid_function_csv(forward_transform(params, grid, f, spec), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_translate(args) -> int:
    params = WeinsteinParams(args.alpha, args.dim)
    quad = TranslationQuadrature(theta_nodes=args.theta_nodes)
    if args.check_normalization:
        rng = np.random.default_rng(args.seed)
        pairs = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), (100, 2)))
        res = {
            "theta": max(abs(normalization_residual(params, x, y, "theta", quad)) for x, y in pairs),
            "rho": max(abs(normalization_residual(params, x, y, "rho")) for x, y in pairs),
            "pairs": len(pairs),
        }
        print(json.dumps(res))
        if args.point is None:
            return EXIT_OK
    if args.point is None:
        raise ConfigError("--point is required unless --check-normalization is given")
    if args.point.size != args.dim:
        raise ConfigError(f"--point needs {args.dim} coordinates")
    grid = _grid(args)
    f = _member(args, params).on_grid(params, grid)
    tf = translate_grid(params, grid, f, args.point, quad)
    write_grid_function_csv(tf, args.out, {"f": f.values})
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_maximal(args) -> int:
    params = WeinsteinParams(args.alpha, args.dim)
    grid = _grid(args)
    member = _member(args, params)
    f = member.on_grid(params, grid)
    r_min = args.r_min or 2.0 * max(grid.spacings)
    r_max = args.r_max or 0.5 * args.half_width
    sched = RadiusSchedule.log_spaced(r_min, r_max, args.radii, args.z_samples)
    M = maximal_uncentered_field(params, grid, f, sched)
    T = maximal_ball_average_field(params, grid, f, sched)
    mask = edge_mask(grid, sched)
    args.out.mkdir(parents=True, exist_ok=True)
    write_grid_function_csv(f, args.out / "maximal.csv", {"M_f": M.values, "Mtilde_f": T.values})
    summary = {
        "function": member.name, "alpha": params.alpha, "d": params.d, "grid": grid.to_dict(),
        "radii": list(sched.radii), "z_samples_per_ball": sched.z_samples_per_ball,
        "exclusion_zone": sched.radii[0], "norm_1": lp_norm(params, grid, f, 1),
        "lp_ratios": {f"{p:g}": lp_operator_ratio(params, grid, f, p, sched, mf=M, mask=mask)
                      for p in (1.5, 2.0, 4.0)},
        "sup_M": float(M.values.max()), "sup_f": float(np.abs(f.values).max()),
    }
    if member.nonnegative:
        levels = float(np.abs(f.values).max()) * np.geomspace(1e-2, 1.0, args.levels + 1)[:-1]
        summary["weak_type_constant"] = weak_type_constant(params, grid, f, levels, sched, mf=M, mask=mask)
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "transform": cmd_transform, "translate": cmd_translate, "maximal": cmd_maximal}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
