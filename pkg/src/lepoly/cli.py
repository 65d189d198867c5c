"""Command-line entry point ``lepoly``.

Exit codes: 0 ok, 1 parse or configuration error, 2 hypothesis failure,
3 geometry selection failure, 4 tracking failure, 5 internal consistency
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, LepolyError
from .pipeline import RunConfig, run_pipeline
from .polyhedron import export_graph

log = logging.getLogger("lepoly")


def _t_arg(text: str) -> float | None:
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lepoly", description="Compute the Lê polyhedron of the germ f*conj(g).")
    ap.add_argument("--f", required=True, help="polynomial f in x, y (e.g. 'x^2+y^3')")
    ap.add_argument("--g", default="1", help="polynomial g in y only (default 1, the holomorphic case)")
    ap.add_argument("--t", type=_t_arg, default=None, help="magnitude of t, or 'auto' (default)")
    ap.add_argument("--arg-t", type=float, default=0.0, help="argument of t in radians")
    ap.add_argument("--seed", type=int, default=0, help="seed for the base point placement")
    ap.add_argument("--trunc", type=int, default=20, help="Puiseux truncation order")
    ap.add_argument("--tol", type=float, default=1e-10, help="root-finding tolerance")
    ap.add_argument("--report", type=Path, help="write the JSON report here (default: stdout)")
    ap.add_argument("--dot", type=Path, help="write the polyhedron as Graphviz DOT")
    ap.add_argument("--csv", type=Path, help="dump tracked trajectory samples as CSV")
    ap.add_argument("--oracle", action="store_true", help="run the independent oracles as well")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"lepoly {__version__}")
    return ap


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else ConfigError.exit_code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig(f=args.f, g=args.g, t=args.t, arg_t=args.arg_t, seed=args.seed,
                    trunc=args.trunc, tol_root=args.tol, oracle=args.oracle)
    try:
        report = run_pipeline(cfg)
    except LepolyError as exc:
        print(f"lepoly: error: {exc}", file=sys.stderr)
        failed = {"status": "failed", "exit_code": exc.exit_code, "error": str(exc),
                  "diagnostics": exc.diagnostics}
        if args.report is not None:
            _write(args.report, json.dumps(failed, indent=2, ensure_ascii=False, default=str) + "\n")
        return exc.exit_code
    _write(args.report, report.to_json())
    if args.dot is not None:
        args.dot.write_bytes(export_graph(report.polyhedron, "dot"))
    if args.csv is not None:
        args.csv.write_text(report.trajectories_csv(), encoding="utf-8")
    if args.report is not None:
        p = report.data["polyhedron"]
        print(f"n={report.data['n']} k={report.data['special_points']['k']} "
              f"chi={p['chi']} b0={p['b0']} b1={p['b1']} status={report.data['status']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
