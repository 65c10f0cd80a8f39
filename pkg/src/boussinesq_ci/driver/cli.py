"""Command line entry point: blocks, geometry, iterate, sweep, check."""

import argparse
import json
import sys
from pathlib import Path

from ..exceptions import BoussinesqCIError, ConfigError
from .config import RunConfig, default_ng, load_config, validate
from .iteration import run_chain
from .outputs import emit_outputs
from .state import check_invariants


def _config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {}
    if getattr(args, "out", None):
        over["out_dir"] = args.out
    if getattr(args, "steps", None):
        over["steps"] = args.steps
    if getattr(args, "lambdas", None):
        over["lambdas"] = tuple(args.lambdas)
    if over:
        cfg = cfg.with_(**over)
        validate(cfg)
    if cfg.Ng is None:
        cfg = cfg.with_(Ng=default_ng(cfg.lambda1), ng_defaulted=True)
    return cfg


def _print(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=float))


def cmd_blocks(args):
    from .labs import blocks_lab

    _print(blocks_lab(args.Ng))
    return 0


def cmd_geometry(args):
    from .labs import geometry_lab

    _print(geometry_lab(args.samples))
    return 0


def cmd_iterate(args):
    cfg = _config(args)
    states, reports = run_chain(cfg)
    failed = []
    for i, (state, rep) in enumerate(zip(states[1:], reports), start=1):
        outdir = Path(cfg.out_dir) / f"step{i}"
        rep.header["ng_defaulted"] = cfg.ng_defaulted
        emit_outputs(rep, state, outdir, cfg.snapshots)
        failed += [f"step{i}:{name}" for name in rep.failed()]
        print(f"step {i}: lambda={rep.header['lambda']} R1_L1_sup={rep.scalars['R1_L1_sup']:.4e} "
              f"residual_rel_max={rep.scalars['residual_rel_max']:.3e} -> {outdir}")
    if states[-1].stored and not check_invariants(states[-1])["ok"]:
        failed.append("state_invariants")
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 3
    return 0


def cmd_sweep(args):
    from .sweep import sweep_csv, sweep_lambda

    cfg = _config(args)
    lambdas = args.lambdas or list(cfg.lambdas) or [cfg.lambda1]
    ngs = args.ngs if args.ngs else None
    rows, slopes, _ = sweep_lambda(cfg, lambdas, ngs)
    text = sweep_csv(rows, slopes)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_check(args):
    from .labs import manufactured_check

    rel = manufactured_check(args.Ng)
    print(f"manufactured residual (relative) = {rel:.3e}")
    return 0 if rel <= 1e-10 else 3


def build_parser():
    ap = argparse.ArgumentParser(prog="boussinesq-ci")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("blocks", help="building-block labs")
    p.add_argument("--Ng", type=int, default=256)
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("geometry", help="c0, eps0 and gamma tables")
    p.add_argument("--samples", type=int, default=10000)
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("iterate", help="one or more chained iteration steps")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--steps", type=int)
    p.add_argument("--lambdas", type=int, nargs="+")
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("sweep", help="one step per lambda, with fitted slopes")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--lambdas", type=int, nargs="+")
    p.add_argument("--ngs", type=int, nargs="+", help="grid size per lambda")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="manufactured-solution residual self-test")
    p.add_argument("--Ng", type=int, default=64)
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BoussinesqCIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
