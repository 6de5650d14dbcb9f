"""Command-line entry point: ``ngca run|props|gen-instance|ingest``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigInvalid, NgcaError, ParseError

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 2, 3


def _cmd_run(args) -> int:
    from .experiment import run_experiment

    rep = run_experiment(args.config, args.out)
    for name, m in rep.body["methods"].items():
        print(f"{name}: dim={m['dim']} distance={m['distance']:.4f}")
    if rep.exit_code:
        bad = [i["name"] for i in rep.body["invariants"] if not i["ok"]]
        print("invariant violations: " + ", ".join(bad), file=sys.stderr)
    return rep.exit_code


def _cmd_props(args) -> int:
    from .properties import run_property_suite

    results = run_property_suite(args.suite, seed=args.seed)
    for r in results:
        print(r.line(), json.dumps({k: float(v) for k, v in r.stats.items()}, sort_keys=True))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def _cmd_gen(args) -> int:
    from .experiment import generate_instance

    info = generate_instance(args.spec, args.out)
    print(f"wrote instance n={info['n']} p={info['p']} D={info['D']} to {args.out}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    from .instance_model import isotropize
    from .io import ingest_csv, write_binary

    s = ingest_csv(args.csv, has_header=args.header)
    if args.whiten:
        s, _ = isotropize(s)
    out = Path(args.out or Path(args.csv).with_suffix(".bin"))
    write_binary(s, out)
    print(f"read N={s.N} n={s.ambient_dim}; wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ngca", description="Non-Gaussian component analysis experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides outputs.directory)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("props", help="run property suites")
    p.add_argument("suite", nargs="?", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_props)

    p = sub.add_parser("gen-instance", help="synthesize an instance and its samples")
    p.add_argument("spec")
    p.add_argument("--out", default="instance")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("ingest", help="convert a numeric CSV to the binary sample format")
    p.add_argument("csv")
    p.add_argument("--whiten", action="store_true")
    p.add_argument("--header", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ingest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigInvalid, KeyError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NgcaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
