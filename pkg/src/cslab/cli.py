"""Command-line entry point ``cslab``.

Subcommands: ``run``, ``corpus``, ``schema``, ``crossed`` and ``fock``.  The
exit code is 0 exactly when every check in the produced report passes.
"""
import argparse
import json
import sys
from pathlib import Path

from .experiments import corpus_regression, jsonable, run, update_corpus
from .formats import SCHEMAS, dump_json
from .tolerances import CSLabError

_CROSSED_KINDS = {"build": "crossed", "galois": "galois", "freeness": "freeness", "simplicity": "simplicity"}
_FOCK_CHECKS = {"build": ["identity"], "moment": ["moment"], "central": ["central"], "span": ["span"]}


def _emit(report, out, csv_path=None):
    data = jsonable(report.to_json())
    if out:
        dump_json(data, out)
    else:
        json.dump(data, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    if csv_path:
        report.write_csv(csv_path)
    return 0 if report.ok else 1


def _adhoc_config(kind, inp, seed, params, key):
    inp = Path(inp).resolve()
    cfg = {"kind": kind, "inputs": {key: inp.name}, "seed": seed, "params": params}
    return cfg, inp.parent


def main(argv=None):
    parser = argparse.ArgumentParser(prog="cslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment configuration")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out")
    p_run.add_argument("--csv", help="also write the residual table as CSV")

    p_corpus = sub.add_parser("corpus", help="regression-test a directory of configs and golden reports")
    p_corpus.add_argument("--dir", required=True)
    p_corpus.add_argument("--update", action="store_true", help="rewrite the golden reports")

    p_schema = sub.add_parser("schema", help="print a JSON schema")
    p_schema.add_argument("--kind", required=True, choices=sorted(SCHEMAS))

    p_cr = sub.add_parser("crossed", help="crossed-product experiments on an action file")
    p_cr.add_argument("op", choices=sorted(_CROSSED_KINDS))
    p_cr.add_argument("--in", dest="inp", required=True)
    p_cr.add_argument("--seed", type=int, default=0)
    p_cr.add_argument("--out")

    p_fock = sub.add_parser("fock", help="truncated Fock-space experiments on a covariance file")
    p_fock.add_argument("op", choices=sorted(_FOCK_CHECKS))
    p_fock.add_argument("--in", dest="inp", required=True)
    p_fock.add_argument("--depth", type=int, default=2)
    p_fock.add_argument("--word", action="append", default=[])
    p_fock.add_argument("--vacuum-exact", action="store_true")
    p_fock.add_argument("--seed", type=int, default=0)
    p_fock.add_argument("--out")

    args = parser.parse_args(argv)
    try:
        if args.command == "schema":
            json.dump(SCHEMAS[args.kind], sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
            return 0
        if args.command == "corpus":
            if args.update:
                for name in update_corpus(args.dir):
                    print(f"wrote {name}")
                return 0
            summary = corpus_regression(args.dir)
            json.dump(summary, sys.stdout, indent=2, sort_keys=True, default=str)
            sys.stdout.write("\n")
            return 0 if not summary["drifts"] and not summary["failed_checks"] else 1
        if args.command == "run":
            return _emit(run(args.config), args.out, args.csv)
        if args.command == "crossed":
            cfg, base = _adhoc_config(_CROSSED_KINDS[args.op], args.inp, args.seed, {}, "action")
            return _emit(run(cfg, base), args.out)
        params = {"depth": args.depth, "words": args.word, "vacuum_exact": args.vacuum_exact,
                  "checks": _FOCK_CHECKS[args.op]}
        cfg, base = _adhoc_config("fock", args.inp, args.seed, params, "covariance")
        return _emit(run(cfg, base), args.out)
    except CSLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
