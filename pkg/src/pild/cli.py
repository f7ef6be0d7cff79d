"""Batch command line front-end.

Exit codes: 0 success, 2 validation, 3 resource, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config, resolve_config
from .exceptions import BudgetError, NumericalError, ValidationError
from .runner import export_transfer_tensors, run

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_NUMERICAL = 0, 2, 3, 4


def _load(path):
    path = Path(path)
    return resolve_config(load_config(path), base_dir=path.parent)


def _cmd_run(args) -> int:
    cfg = _load(args.config)
    if args.validate_only:
        print(f"{args.config}: valid ({cfg.method}, d={cfg.hamiltonian.dim}, "
              f"n_steps={cfg.n_steps}, k_max={cfg.k_max})")
        return EXIT_OK
    csv_path, manifest, result = run(cfg, args.output, workers=args.threads)
    print(f"wrote {csv_path} and {manifest} in {result.diagnostics['wall_time_s']:.2f} s")
    return EXIT_OK


def _cmd_export(args) -> int:
    cfg = _load(args.config)
    path = export_transfer_tensors(cfg, args.output, workers=args.threads)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pild", description="Path-integral Lindblad dynamics runs.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="propagate a configuration and write CSV + manifest")
    r.add_argument("config")
    r.add_argument("--output", default=".", help="output directory (default: current)")
    r.add_argument("--threads", type=int, default=1, help="worker threads for propagator setup")
    r.add_argument("--validate-only", action="store_true", help="check the config and exit")
    r.set_defaults(func=_cmd_run)

    e = sub.add_parser("export-tt", help="archive bath-only transfer tensors")
    e.add_argument("config")
    e.add_argument("--output", default="transfer_tensors.npz")
    e.add_argument("--threads", type=int, default=1)
    e.set_defaults(func=_cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
