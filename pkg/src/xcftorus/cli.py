"""Command line entry point: run, verify, converge, make-metric.

Exit codes: 0 clean, 2 a monitored inequality failed, 1 the tool itself
failed (bad config, I/O error, step limit, lost positivity).
"""
import argparse
import sys

from . import __version__
from .acceptance import CONVERGE_GRIDS, ORDER_RANGE, convergence_study, run_all
from .errors import XCFError
from .flow import evolve
from .geometry import curvatures
from .io import (
    RunWriter,
    load_config,
    resolve_output_dir,
    run_outcome,
    snapshot_name,
    snapshot_rows,
    write_csv,
    write_manifest,
    SNAPSHOT_COLUMNS,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def cmd_run(args):
    try:
        cfg = load_config(args.config)
        state = cfg.initial_state()
        out = resolve_output_dir(cfg)
        writer = RunWriter(out, cfg)
    except (XCFError, OSError) as exc:
        _err(exc)
        return EXIT_ERROR
    try:
        evolve(state, cfg.flow, writer)
    except (XCFError, OSError) as exc:
        writer.close("error", EXIT_ERROR, f"{type(exc).__name__}: {exc}")
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_ERROR
    code, status = run_outcome(writer.records)
    writer.close(status, code)
    last = writer.records[-1]
    print(f"t = {last.t:g}: J = {last.J:.6e}, status {status}; output in {out}")
    return code


def cmd_make_metric(args):
    try:
        cfg = load_config(args.config)
        m = cfg.build_metric()
        c = curvatures(m)
        out = resolve_output_dir(cfg)
        out.mkdir(parents=True, exist_ok=True)
        name = snapshot_name(0.0)
        rows = write_csv(out / name, SNAPSHOT_COLUMNS, snapshot_rows(m, c))
        write_manifest(out, cfg, [{"file": name, "rows": rows}], "ok", EXIT_OK)
    except (XCFError, OSError) as exc:
        _err(exc)
        return EXIT_ERROR
    lo, hi = c.extrema()
    print(f"{cfg.kind} metric, n = {cfg.n}: curvature magnitudes in [{lo:.6g}, {hi:.6g}]; wrote {out / name}")
    return EXIT_OK


def cmd_verify(args):
    results = run_all()
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_VIOLATION


def cmd_converge(args):
    ns, errs, order = convergence_study(CONVERGE_GRIDS)
    print(f"{'n':>5}  {'max rel field error':>20}")
    for n, e in zip(ns, errs):
        print(f"{n:>5}  {e:>20.6e}")
    ok = ORDER_RANGE[0] <= order <= ORDER_RANGE[1]
    print(f"fitted order {order:.4f} ({'within' if ok else 'outside'} [{ORDER_RANGE[0]}, {ORDER_RANGE[1]}])")
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser():
    p = argparse.ArgumentParser(prog="xcf-torus", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="evolve a configured metric and write CSV output")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    mm = sub.add_parser("make-metric", help="write the t = 0 snapshot of a configured metric")
    mm.add_argument("config")
    mm.set_defaults(func=cmd_make_metric)
    v = sub.add_parser("verify", help="run the fixed acceptance scenarios")
    v.set_defaults(func=cmd_verify)
    c = sub.add_parser("converge", help="grid refinement study on the geodesic tube")
    c.set_defaults(func=cmd_converge)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        _err("interrupted")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
