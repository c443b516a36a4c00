"""Command line entry point ``defzeros``.

Subcommands::

    defzeros goe-det --m 1 --trials 100000 --seed 7
    defzeros expect kac-rice --n 3 --d 16 --volume 6.2832
    defzeros pathology build --targets 8,20,40 --stages 5 --out DIR
    defzeros pathology verify DIR
    defzeros experiment run CONFIG_FILE [--out DIR]
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .errors import DefZerosError, ResolutionFailure


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_goe_det(args):
    from .randmat import abs_det_moment

    est = abs_det_moment(args.m, args.trials, args.seed)
    print(f"mean {est.mean!r}")
    print(f"std_error {est.std_error!r}")
    if est.analytic is not None:
        print(f"analytic {est.analytic!r}")
    return 0


def cmd_expect(args):
    from . import predict

    if args.what == "kac-rice":
        pred = predict.kac_rice_crit_expectation(args.n, args.d, args.volume, args.absdet)
    elif args.what == "ig":
        degrees = _ints(args.degrees) if args.degrees else [args.d] * args.k
        pred = predict.integral_geometry_expectation(args.n, args.k, args.volume, degrees,
                                                     args.ensemble)
    elif args.what == "bezout":
        value = predict.bezout_bound(args.deg_gamma, args.d)
        print(f"value {value}")
        print("order exact")
        return 0
    elif args.what == "tail":
        value = predict.markov_tail_bound(args.t, args.d, args.n, args.c_gamma)
        print(f"value {value!r}")
        print("order upper bound")
        return 0
    else:
        pred = predict.betti_mean_bound(args.n, args.k, args.d, args.volume, args.c_kn, args.absdet)
    print(f"value {pred.value!r}")
    print(f"order {pred.order_of_error}")
    return 0


def cmd_pathology_build(args):
    from .pathology import build_pathology, write_artifact

    art = build_pathology(_ints(args.targets), args.stages, first_roots=args.first_roots,
                          embed_scale=args.embed_scale, perturb_seed=args.seed)
    out = write_artifact(art, args.out)
    _print_certificates(art)
    print(f"stage {art.K}: degree {art.degree(art.K)}, unverifiable by construction")
    print(f"written to {out}")
    return 0 if all(c.passed for c in art.certificates.values()) else 1


def _print_certificates(art):
    print("stage degree required verified min_margin pass")
    for k in sorted(art.certificates):
        c = art.certificates[k]
        print(f"{c.stage} {c.degree} {c.required} {c.verified} {c.min_margin:.6e} "
              f"{'true' if c.passed else 'false'}{'  (perturbed)' if c.perturbed else ''}")


def cmd_pathology_verify(args):
    from .pathology import verify_directory

    art, mismatches = verify_directory(args.dir)
    _print_certificates(art)
    print(f"stage {art.K}: degree {art.degree(art.K)}, unverifiable by construction")
    for name in mismatches:
        print(f"mismatch: {name} differs from the rebuilt artifact")
    ok = not mismatches and all(c.passed for c in art.certificates.values())
    return 0 if ok else 1


def cmd_experiment_run(args):
    from .experiments import run_config_file

    try:
        print(run_config_file(args.config, args.out))
    except ResolutionFailure as exc:
        print(f"resolution failure: {exc}", file=sys.stderr)
        return 3
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="defzeros", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("goe-det", help="Monte Carlo E|det Q_m| for the GOE")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_goe_det)

    p = sub.add_parser("expect", help="leading-order predictions and bounds")
    p.add_argument("what", choices=("kac-rice", "ig", "bezout", "tail", "betti"))
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--volume", type=float, help="FS volume of the curve or surface")
    p.add_argument("--absdet", type=float, help="E|det Q_{n-2}| when no closed form exists")
    p.add_argument("--degrees", help="comma-separated degrees (ig)")
    p.add_argument("--ensemble", choices=("kostlan", "bound"), default="kostlan")
    p.add_argument("--deg-gamma", type=int, default=2, dest="deg_gamma")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--c-gamma", type=float, default=1.0, dest="c_gamma")
    p.add_argument("--c-kn", type=float, dest="c_kn")
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("pathology", help="build or verify a pathological curve")
    psub = p.add_subparsers(dest="action", required=True)
    b = psub.add_parser("build")
    b.add_argument("--targets", required=True, help="zero counts for stages 2..K-1, e.g. 8,20,40")
    b.add_argument("--stages", type=int, required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--first-roots", type=int, default=1, dest="first_roots")
    b.add_argument("--embed-scale", type=float, default=1.0, dest="embed_scale")
    b.add_argument("--seed", type=int, default=0, help="seed for verification perturbations")
    b.set_defaults(func=cmd_pathology_build)
    v = psub.add_parser("verify")
    v.add_argument("dir")
    v.set_defaults(func=cmd_pathology_verify)

    p = sub.add_parser("experiment", help="Monte Carlo campaigns")
    esub = p.add_subparsers(dest="action", required=True)
    r = esub.add_parser("run")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: next to the config file)")
    r.set_defaults(func=cmd_experiment_run)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    if args.command == "expect" and args.what in ("kac-rice", "ig", "betti") and args.volume is None:
        parser.error("--volume is required")
    try:
        return args.func(args)
    except DefZerosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
