"""Figure rendering driver: plots <kind> --in PATH [--beta X] --out PATH."""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, render_crooks, render_sweep, render_workdist


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from qwork output files")
    sub = parser.add_subparsers(dest="kind", required=True)

    p_work = sub.add_parser("workdist", help="atoms or density plot")
    p_work.add_argument("--in", dest="in_path", required=True)
    p_work.add_argument("--out", dest="out_path", required=True)

    p_crooks = sub.add_parser("crooks", help="detailed-balance plot")
    p_crooks.add_argument("--in", dest="in_path", required=True)
    p_crooks.add_argument("--out", dest="out_path", required=True)
    p_crooks.add_argument("--beta", type=float, default=None,
                          help="override the beta recorded in the file")

    p_sweep = sub.add_parser("sweep", help="sweep columns plot")
    p_sweep.add_argument("--in", dest="in_path", required=True)
    p_sweep.add_argument("--out", dest="out_path", required=True)
    p_sweep.add_argument("--columns", default=None,
                         help="comma-separated subset of sweep columns")
    p_sweep.add_argument("--fdr-reference-omega", type=float, default=None,
                         help="overlay tanh(x)/x for this mode frequency")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "workdist":
            written = render_workdist(args.in_path, args.out_path)
        elif args.kind == "crooks":
            result = render_crooks(args.in_path, args.out_path, beta=args.beta)
            written = result.paths
        else:
            columns = (args.columns.split(",") if args.columns else None)
            written = render_sweep(args.in_path, args.out_path,
                                   columns=columns,
                                   fdr_reference_omega=args.fdr_reference_omega)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
