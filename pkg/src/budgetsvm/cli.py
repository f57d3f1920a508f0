"""Command line entry point: ``budgetsvm <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench as bench_mod
from .lookup import build_grid, load_grid, save_grid
from .merge import PRECISE_EPS, STANDARD_EPS
from .sparse import ParseError, load_dataset, save_dataset
from .trainer import SOLVER_KINDS, Hyperparams, evaluate, load_model, predict, save_model, train

log = logging.getLogger("budgetsvm")


def _hyper_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train", required=True, help="training data (LIBSVM format)")
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--c", type=float, default=1.0, dest="C")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--gss-eps", type=float, default=STANDARD_EPS)
    p.add_argument("--precise-eps", type=float, default=PRECISE_EPS)
    p.add_argument("--grid-size", type=int, default=400)
    p.add_argument("--grid-file", help="load the lookup grid from this file instead of building it")
    p.add_argument("--bias", action="store_true", help="learn an unregularized bias term")
    p.add_argument("--seed", type=int, default=0)


def _hyperparams(args, solver: str) -> Hyperparams:
    return Hyperparams(C=args.C, gamma=args.gamma, budget=args.budget, epochs=args.epochs, solver=solver,
                       gss_eps=args.gss_eps, precise_eps=args.precise_eps, grid_size=args.grid_size,
                       use_bias=args.bias, seed=args.seed)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _write_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _grid(args):
    return load_grid(args.grid_file) if getattr(args, "grid_file", None) else None


def cmd_train(args) -> int:
    hp = _hyperparams(args, args.solver)
    data = load_dataset(args.train)
    model, stats = train(data, hp, grid=_grid(args))
    doc = {"config": _config(args), "stats": stats.to_dict(timings=not args.omit_timings)}
    if args.test:
        doc["accuracy"] = evaluate(model, load_dataset(args.test))
    if args.model_out:
        save_model(model, args.model_out)
    _write_json(doc, args.stats_out)
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    data = load_dataset(args.data)
    values = predict(model, data)
    lines = [f"{1 if v >= 0 else -1} {v!r}\n" for v in values.tolist()]
    if args.out:
        Path(args.out).write_text("".join(lines))
    else:
        sys.stdout.writelines(lines)
    if len(data):
        print(f"accuracy {evaluate(model, data):.6f}", file=sys.stderr)
    return 0


def cmd_grid_build(args) -> int:
    save_grid(build_grid(args.size, args.eps), args.out)
    return 0


def cmd_grid_dump(args) -> int:
    grid = load_grid(args.grid_file) if args.grid_file else build_grid(args.size, args.eps)
    ticks = grid.nodes().tolist()
    H, W = grid.h_values.tolist(), grid.wd_values.tolist()
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("m,kappa,h,wd\n")
        for i, m in enumerate(ticks):
            for j, k in enumerate(ticks):
                out.write(f"{m!r},{k!r},{H[i][j]!r},{W[i][j]!r}\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_compare(args) -> int:
    hp = _hyperparams(args, args.solver_a)
    data = load_dataset(args.train)
    report, _ = bench_mod.compare_solvers(data, hp, args.solver_a, args.solver_b, grid=_grid(args),
                                          keep_events=args.events)
    doc = {"config": _config(args), **report.to_dict()}
    if not args.events:
        doc.pop("events")
    _write_json(doc, args.out)
    return 0


def cmd_bench(args) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solvers:
        if s not in SOLVER_KINDS:
            raise ValueError(f"unknown solver {s!r}")
    hp = _hyperparams(args, solvers[0])
    data = load_dataset(args.train)
    doc = bench_mod.bench(data, hp, solvers, repeats=args.repeats, micro_n=args.micro_n, grid=_grid(args))
    doc["config"] = _config(args)
    _write_json(doc, args.out)
    return 0


def cmd_synth(args) -> int:
    data = bench_mod.generate_synthetic(args.n, args.dim, args.separation, args.noise, args.seed)
    save_dataset(data, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="budgetsvm", description="Budgeted SGD kernel SVM with lookup-based merging")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a budgeted SVM")
    _hyper_args(p)
    p.add_argument("--solver", choices=SOLVER_KINDS, default="lookup-wd")
    p.add_argument("--model-out")
    p.add_argument("--stats-out")
    p.add_argument("--test", help="evaluate accuracy on this data after training")
    p.add_argument("--omit-timings", action="store_true",
                   help="leave wall-clock fields out of the stats document (makes it reproducible byte for byte)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", help="build or dump the merge lookup grid")
    gsub = p.add_subparsers(dest="grid_command", required=True)
    for name, func in (("build", cmd_grid_build), ("dump", cmd_grid_dump)):
        g = gsub.add_parser(name)
        g.add_argument("--size", type=int, default=400)
        g.add_argument("--eps", type=float, default=PRECISE_EPS)
        g.add_argument("--out", required=(name == "build"))
        if name == "dump":
            g.add_argument("--grid-file", help="dump an existing grid file instead of building one")
        g.set_defaults(func=func)

    p = sub.add_parser("compare", help="shadow-compare merge decisions of two solvers")
    _hyper_args(p)
    p.add_argument("--solver-a", choices=SOLVER_KINDS, default="gss")
    p.add_argument("--solver-b", choices=SOLVER_KINDS, default="lookup-wd")
    p.add_argument("--events", action="store_true", help="include per-event records")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="time training and per-solve cost per solver")
    _hyper_args(p)
    p.add_argument("--solvers", default="gss,lookup-h,lookup-wd")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--micro-n", type=int, default=1_000_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a two-Gaussian synthetic dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, ParseError, ValueError) as exc:
        log.error("error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
