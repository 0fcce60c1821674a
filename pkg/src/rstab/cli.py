"""Command line entry point: ``rstab run | families | cache``.

Exit codes: 0 all checks pass, 1 a numerical assertion failed, 2 usage or
validation error.
"""

import argparse
import json
import logging
import sys

from .errors import ManifestError, RStabError
from .harness import cache_grid, list_families, load_manifest, run

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parser():
    p = _Parser(prog="rstab", description="Discrete r-stability experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    pr = sub.add_parser("run", help="execute an experiment manifest")
    pr.add_argument("manifest")
    pr.add_argument("--out", metavar="DIR", help="output directory (overrides the manifest)")
    pr.add_argument("--seed", type=int, metavar="N", help="seed for randomized sweeps")
    pr.add_argument("--jobs", type=int, default=1, metavar="K", help="resolutions run concurrently")
    sub.add_parser("families", help="print the family catalog as JSON")
    pc = sub.add_parser("cache", help="build or verify a cached grid")
    pc.add_argument("gridspec", help='e.g. "sphere:64x128", "torus:32" or a JSON object')
    pc.add_argument("--out", metavar="DIR", default=".rstab-cache", help="cache directory")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "families":
            print(json.dumps(list_families(), indent=2, sort_keys=True))
            return EXIT_PASS
        if args.command == "cache":
            path, grid = cache_grid(args.gridspec, args.out)
            print(json.dumps({"path": path, "spec": grid.spec(), "nodes": grid.size}))
            return EXIT_PASS
        if args.jobs < 1:
            raise ManifestError("--jobs must be at least 1")
        manifest = load_manifest(args.manifest)
        report = run(manifest, out_dir=args.out, seed=args.seed, jobs=args.jobs)
    except ManifestError as exc:
        print(f"rstab: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RStabError as exc:
        print(f"rstab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for rec in report.records:
        line = f"{rec['status']:5s} {rec['task']}"
        if rec["status"] != "pass":
            detail = rec.get("message") or json.dumps(rec.get("result"), sort_keys=True, default=str)
            line += f"  {detail}"
        print(line)
    print(f"report: {report.out_dir}/report.json")
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
