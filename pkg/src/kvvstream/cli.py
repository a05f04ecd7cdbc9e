"""Command-line entry point.

Commands: params, gen, verify, run, sweep, analytic, fvec, export.
Exit codes: 0 pass, 1 check or run failure, 2 usage error.  Every run is
reproducible from (config, seed), both echoed in the output.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import fixtures, fvec, harness, instance as inst_mod, verify
from . import predecessor as pr
from .params import ParamError, derive_params, params_from_config, validate


def _load_instance(args):
    if getattr(args, "instance", None):
        return inst_mod.load(args.instance)
    if getattr(args, "fixture", None):
        return fixtures.make_fixture(args.fixture, seed=args.seed)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            params, layout = params_from_config(fh.read())
        return inst_mod.sample_instance(params, layout, seed=args.seed)
    raise SystemExit2("one of --instance / --fixture / --config is required")


class SystemExit2(SystemExit):
    def __init__(self, msg):
        print(f"error: {msg}", file=sys.stderr)
        super().__init__(2)


def cmd_params(args):
    if args.config:
        with open(args.config) as fh:
            params, layout = params_from_config(fh.read())
        report = validate(params, layout)
    else:
        m, W = derive_params(args.K)
        print(f"K={args.K} m={m} W={W}")
        return 0
    print(json.dumps({"K": params.K, "L": params.L, "n": params.n,
                      "m": params.m, "W": params.W, "mode": params.mode,
                      "phases": params.phases,
                      "warnings": report.warnings}, indent=2))
    return 0


def cmd_gen(args):
    inst = _load_instance(args)
    inst.save(args.out)
    print(f"wrote {args.out}: K={inst.params.K} L={inst.params.L} "
          f"n={inst.params.n} seed={inst.seed} J={list(inst.J)}")
    return 0


def cmd_verify(args):
    inst = _load_instance(args)
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    failed = 0
    for suite in suites:
        for chk in verify.run_suite(inst, suite, deep=args.deep):
            status = "PASS" if chk.ok else "FAIL"
            print(f"[{status}] {chk.suite}: {chk.name}  ({chk.detail})")
            failed += not chk.ok
    print(f"verify: {'all checks passed' if not failed else f'{failed} failed'}")
    return 1 if failed else 0


def cmd_run(args):
    inst = _load_instance(args)
    rows = []
    for t in range(args.trials):
        rec = harness.run(inst, args.alg, args.budget, seed=args.seed + t,
                          opt=args.opt)
        rows.append(rec)
    if args.format == "json":
        print(json.dumps([rec.to_dict() for rec in rows], default=str,
                         indent=2))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(harness.CSV_HEADER)
        for rec in rows:
            writer.writerow(rec.row())
    return 0 if all(r.valid for r in rows) else 1


def cmd_sweep(args):
    inst = _load_instance(args)
    budgets = [int(b) for b in args.budgets.split(",") if b]
    algs = [a for a in args.algs.split(",") if a]
    with _out_ctx(args) as fh:
        recs = harness.sweep([inst], algs, budgets, args.trials, fh,
                             opt=args.opt)
    return 0 if all(r.valid for r in recs) else 1


def cmd_analytic(args):
    with _out_ctx(args) as fh:
        w = csv.writer(fh)
        w.writerow(["K", "L", "sigma", "gamma", "B_P", "B_Q",
                    "B_P_decimal", "B_Q_decimal", "ratio", "ratio_decimal",
                    "dist_to_limit_max"])
        for K in args.K:
            ar = pr.analytic_ratios(K, args.L if args.L else K)
            _dlo, dhi = ar.distance_to_limit()
            w.writerow([ar.K, ar.L, ar.sigma, ar.gamma, ar.b_p, ar.b_q,
                        f"{float(ar.b_p):.6f}", f"{float(ar.b_q):.6f}",
                        ar.cover_ratio, f"{float(ar.cover_ratio):.6f}",
                        f"{float(dhi):.6f}"])
    return 0


def cmd_fvec(args):
    fam = fvec.build_family(args.dim, Fraction(args.eps), args.size,
                            seed=args.seed, max_retries=args.retries)
    text = fam.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_export(args):
    inst = _load_instance(args)
    if args.edges:
        with open(args.edges, "w") as fh:
            inst_mod.export_stream_text(inst, fh)
        print(f"wrote edge stream to {args.edges}")
    if args.vertices:
        with open(args.vertices, "w") as fh:
            inst_mod.export_vertices_text(inst, fh)
        print(f"wrote vertex registry to {args.vertices}")
    return 0


class _out_ctx:
    def __init__(self, args):
        self.path = getattr(args, "out", None)
        self.fh = None

    def __enter__(self):
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path and self.fh:
            self.fh.close()
        return False


def _add_instance_args(sp, seed_default=0):
    sp.add_argument("--instance", help="instance file from `gen`")
    sp.add_argument("--fixture", help="named preset: fix-a | fix-b | fix-c")
    sp.add_argument("--config", help="JSON config path")
    sp.add_argument("--seed", type=int, default=seed_default)


def build_parser():
    p = argparse.ArgumentParser(prog="kvvstream", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("params", help="derive m, W and validate a config")
    sp.add_argument("-K", type=int)
    sp.add_argument("--config")
    sp.set_defaults(fn=cmd_params)

    sp = sub.add_parser("gen", help="sample an instance and write it")
    _add_instance_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_gen)

    sp = sub.add_parser("verify", help="run structural verification suites")
    _add_instance_args(sp)
    sp.add_argument("--suite", default="all",
                    choices=list(verify.SUITES) + ["all"])
    sp.add_argument("--deep", action="store_true",
                    help="exhaustive variants of the heavy checks")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("run", help="run one algorithm under a budget")
    _add_instance_args(sp)
    sp.add_argument("--alg", required=True,
                    choices=["greedy", "uniform", "clairvoyant", "store_all"])
    sp.add_argument("--budget", type=int, required=True)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--opt", default="auto",
                    choices=["auto", "exact", "constructive"])
    sp.add_argument("--format", default="csv", choices=["csv", "json"])
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("sweep", help="grid of runs to CSV")
    _add_instance_args(sp)
    sp.add_argument("--algs", default="greedy,uniform")
    sp.add_argument("--budgets", required=True, help="comma-separated")
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--opt", default="auto")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("analytic", help="exact witness-ratio table")
    sp.add_argument("-K", type=int, nargs="+", required=True)
    sp.add_argument("-L", type=int)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_analytic)

    sp = sub.add_parser("fvec", help="near-orthogonal vector family as JSON")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--eps", required=True, help="rational, e.g. 1/2")
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--retries", type=int, default=200)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_fvec)

    sp = sub.add_parser("export", help="text edge stream / vertex registry")
    _add_instance_args(sp)
    sp.add_argument("--edges")
    sp.add_argument("--vertices")
    sp.set_defaults(fn=cmd_export)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        raise
    try:
        return args.fn(args)
    except (ParamError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
