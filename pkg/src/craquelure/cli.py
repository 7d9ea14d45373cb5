"""Command-line surface: run, analytic, sweep, check."""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from pathlib import Path

from . import analytic1d
from .config import _RENAME, _SCHEMA, EvolutionConfig, parse_config, serialize_config
from .errors import ConfigError, ConvergenceError, ParameterError
from .evolution import run_evolution
from .selfcheck import run_self_checks

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_CONVERGENCE = 2


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="craquelure")
    sub = p.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run the evolution described by a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--quiet", action="store_true", help="suppress progress lines")

    an = sub.add_parser("analytic", help="print the 1D closed-form toolkit")
    an.add_argument("--L", type=float, required=True)
    an.add_argument("--beta", type=float, default=0.15)
    an.add_argument("--mu", type=float, default=1.0)
    an.add_argument("--Gc", type=float, default=1.0)
    an.add_argument("--m-max", type=int, default=10, dest="m_max")
    an.add_argument("--K", type=int, default=4, help="halving cascade depth")
    an.add_argument("--xstar", type=float, default=None)
    an.add_argument("--Lstar", type=float, default=None)

    sw = sub.add_parser("sweep", help="run independent evolutions over a parameter list")
    sw.add_argument("config", type=Path)
    sw.add_argument("--vary", required=True, metavar="SECTION.KEY=A,B,C")
    sw.add_argument("--jobs", type=int, default=None)

    sub.add_parser("check", help="run the built-in invariant suite")
    return p


def _cmd_run(args) -> int:
    cfg = parse_config(args.config.read_text())
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    trace = run_evolution(cfg, log=log)
    last = trace.steps[-1]
    print(f"steps: {len(trace.steps) - 1}")
    print(f"final energy: {last.energy.total:.17g}")
    print(f"final crack count: {last.crack_count}")
    for ev in trace.events:
        centers = " ".join(f"{c:.4f}" for c in ev.centers)
        print(f"event t={ev.t:g} count={ev.count} centers={centers}")
    if cfg.out_dir:
        print(f"outputs in {cfg.out_dir}/")
    return EXIT_OK if trace.all_converged else EXIT_NO_CONVERGENCE


def _cmd_analytic(args) -> int:
    params = analytic1d.Bar1DParams(
        half_length_L=args.L, mu=args.mu, beta=args.beta, Gc=args.Gc
    )
    kappa = analytic1d.decay_rate(params)
    print(f"kappa = {kappa:.7g}")
    print(f"F_hat({args.L:g}) = {analytic1d.f_hat(args.L, params):.7g}")
    print(f"Delta_2({args.L:g}) = {analytic1d.delta2(args.L, params):.7g}")
    print("m t_m")
    for m in range(1, args.m_max + 1):
        print(f"{m} {analytic1d.critical_time(args.L, m, params):.7g}")
    times = analytic1d.halving_times(args.L, args.K, params)
    print("halving times: " + " ".join(f"{t:.7g}" for t in times))
    if args.xstar is not None and args.Lstar is not None:
        q = analytic1d.Layer1DQuery(x_star=args.xstar, L_star=args.Lstar)
        x = analytic1d.layer_point(q, args.L, params)
        b = analytic1d.layer_width(q, params)
        print(f"layer point x = {x:.7g} (L - x = {args.L - x:.7g})")
        print(f"layer width b = {b:.7g}")
    elif (args.xstar is None) != (args.Lstar is None):
        raise ParameterError("--xstar and --Lstar must be given together")
    return EXIT_OK


def _sweep_worker(cfg_text: str) -> tuple[bool, int]:
    cfg = parse_config(cfg_text)
    trace = run_evolution(cfg)
    return trace.all_converged, trace.steps[-1].crack_count


def _cmd_sweep(args) -> int:
    base = parse_config(args.config.read_text())
    if "=" not in args.vary:
        raise ConfigError("--vary expects SECTION.KEY=A,B,C")
    target, _, raw_values = args.vary.partition("=")
    if "." not in target:
        raise ConfigError(f"--vary key {target!r} must be SECTION.KEY")
    section, key = target.split(".", 1)
    if section not in _SCHEMA or key not in _SCHEMA[section]:
        raise ConfigError(f"unknown sweep key [{section}] {key}")
    from .config import _convert

    field_name = _RENAME.get((section, key), key)
    values = [
        _convert(tok, _SCHEMA[section][key], section, key, 0)
        for tok in raw_values.split(",")
    ]

    out_root = Path(base.out_dir or "out")
    jobs = []
    for val in values:
        sub_dir = out_root / f"{key}={val}"
        cfg = EvolutionConfig(
            **{
                **{f: getattr(base, f) for f in base.__dataclass_fields__},
                field_name: val,
                "out_dir": str(sub_dir),
            }
        )
        jobs.append((val, serialize_config(cfg)))

    workers = args.jobs or min(len(jobs), os.cpu_count() or 1)
    code = EXIT_OK
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_sweep_worker, text): val for val, text in jobs}
        results = {}
        for fut in concurrent.futures.as_completed(futures):
            results[futures[fut]] = fut.result()
    for val, _ in jobs:
        converged, count = results[val]
        status = "ok" if converged else "not-converged"
        print(f"{key}={val}: cracks={count} [{status}]")
        if not converged:
            code = EXIT_NO_CONVERGENCE
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; remap to the validation-error code
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "analytic":
            return _cmd_analytic(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "check":
            return EXIT_OK if run_self_checks() else EXIT_INVALID
    except (ConfigError, ParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
