"""Command-line driver. Every subcommand prints one JSON document on stdout.

Exit codes: 0 success, 1 certificate failure, 2 usage or parse error,
3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from fasrecon import bonding, construction, finspace, homology, limit, metric
from fasrecon.certificate import jsonable
from fasrecon.errors import CapExceeded, FasreconError
from fasrecon.scalar import fmt_scalar, parse_scalar

EXIT_OK, EXIT_CERT, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --- building blocks ---------------------------------------------------------------


def _probes(args):
    if args.probes is None:
        return construction.DEFAULT_PROBES
    return [parse_scalar(p) for p in args.probes.split(",") if p.strip()]


def _paper_family(args):
    if args.paper_example:
        return f"paper-{args.paper_example}"
    if args.space == "interval":
        return "paper-interval"
    return None


def sample_from_args(args) -> metric.MetricSample:
    family = _paper_family(args)
    if family:
        if args.space not in (None, "interval"):
            raise UsageError("--paper-example requires --space interval")
        return construction.paper_sample(family, args.levels, _probes(args))
    space = args.space
    if space is None:
        raise UsageError("no space given (use --space or --fas)")
    if space == "grid":
        return metric.gen_interval_grid(args.m)
    if space == "padic":
        return metric.gen_padic(args.p, args.k)
    if space == "convergent":
        return metric.gen_convergent(args.N)
    if space == "circle":
        return metric.gen_circle(args.m, args.metric or "arc")
    if space == "cantor":
        return metric.gen_cantor(args.cantor_depth, args.metric or "line")
    if space == "file":
        if not args.path:
            raise UsageError("--space file needs --path")
        return metric.ingest(args.path, args.format)
    raise UsageError(f"unknown space {space!r}")


def fas_from_args(args) -> construction.Fas:
    if getattr(args, "fas", None):
        text = sys.stdin.read() if args.fas == "-" else Path(args.fas).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid Fas JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
        return construction.Fas.from_json(doc)
    family = _paper_family(args)
    if family == "paper-interval":
        fas = construction.paper_interval_fas(args.levels, _probes(args))
    elif family == "paper-unnested":
        fas = construction.paper_unnested_fas(args.levels, _probes(args))
    else:
        sample = sample_from_args(args)
        enum = (construction.DenseEnumeration.farthest_first(sample) if args.enum == "farthest"
                else construction.DenseEnumeration.index(sample))
        ratio = Fraction(args.ratio) if args.ratio else construction.DEFAULT_RATIO
        eps1 = parse_scalar(args.eps1) if args.eps1 else None
        if args.builder == "ultra":
            fas = construction.build_ultra_fas(sample, args.levels, ratio, antichain=not args.no_antichain)
        elif args.builder == "countable":
            fas = construction.build_countable_fas(sample, enum, args.levels, eps1, ratio)
        else:
            fas = construction.build_fas(sample, eps1, args.levels, enum, ratio)
    if getattr(args, "nestify", False):
        fas = construction.nestify(fas)
    return fas


def _point(fas, key) -> int:
    try:
        return fas.sample.lookup(key)
    except KeyError as exc:
        raise UsageError(str(exc)) from None


def _labels(fas, members):
    return [fas.sample.labels[m] for m in members]


def _thread_json(fas, t: limit.Thread) -> dict:
    phi = limit.phi_estimate(fas, t)
    doc = t.to_json()
    doc["labels"] = [_labels(fas, C.members) for C in t.elements]
    doc["phi"] = {"representative": phi.representative,
                  "label": fas.sample.labels[phi.representative], "radius": fmt_scalar(phi.radius)}
    return doc


# --- subcommands -------------------------------------------------------------------


def cmd_gen(args):
    sample = sample_from_args(args)
    if args.matrix:
        rows = [str(len(sample))]
        rows += [",".join(fmt_scalar(sample.d(i, j)) for j in sample.points) for i in sample.points]
        return "\n".join(rows) + "\n", EXIT_OK
    doc = {"space": sample.descriptor, "name": sample.name, "n": len(sample), "exact": sample.exact,
           "labels": list(sample.labels), "diameter": sample.diameter, "min_distance": sample.min_distance}
    code = EXIT_OK
    if args.validate:
        report = metric.validate_metric(sample)
        doc["validation"] = report.to_json()
        doc["ultrametric"] = metric.is_ultrametric(sample).to_json()
        code = EXIT_OK if report.valid else EXIT_CERT
    return doc, code


def cmd_fas(args):
    fas = fas_from_args(args)
    if args.action == "nestify":
        fas = construction.nestify(fas)
    return fas.to_json(), EXIT_OK


def cmd_verify(args):
    cert = construction.verify_adjusted(fas_from_args(args))
    return cert.to_json(), EXIT_OK if cert.passed else EXIT_CERT


def cmd_level(args):
    fas = fas_from_args(args)
    return finspace.LevelSpace.build(fas, args.n, args.cap).to_json(), EXIT_OK


def cmd_threads(args):
    fas = fas_from_args(args)
    depth = args.depth or len(fas)
    threads = limit.enumerate_threads(fas, depth, args.cap)
    return {"depth": depth, "count": len(threads), "threads": [_thread_json(fas, t) for t in threads]}, EXIT_OK


def cmd_fiber(args):
    fas = fas_from_args(args)
    x = _point(fas, args.x)
    depth = args.depth or len(fas)
    M = args.M or min(depth + 1, len(fas))
    threads = limit.fiber(fas, x, depth, M, args.cap)
    return {"x": x, "label": fas.sample.labels[x], "depth": depth, "M": M, "count": len(threads),
            "threads": [_thread_json(fas, t) for t in threads]}, EXIT_OK


def cmd_star(args):
    fas = fas_from_args(args)
    x = _point(fas, args.x)
    M = args.M or len(fas)
    star = limit.xn_star(fas, args.n, x, M)
    doc = star.to_json()
    doc.update({"x": x, "candidates": list(limit.xn_candidates(fas, args.n, x)),
                "labels": _labels(fas, star.points)})
    return doc, EXIT_OK


def cmd_certify(args):
    fas = fas_from_args(args)
    if args.kind == "ultra-commute":
        cert = bonding.check_ultra_commute(fas)
        return cert.to_json(), EXIT_OK if cert.passed else EXIT_CERT
    if args.kind == "bonding":
        cert = bonding.check_bonding(fas, args.cap)
        return cert.to_json(), EXIT_OK if cert.passed else EXIT_CERT
    if args.x is None:
        raise UsageError("--x is required for injectivity certificates")
    x = _point(fas, args.x)
    if args.n0 is None:
        cert = limit.certify_point(fas, x)
    else:
        levels = [int(v) for v in args.check_levels.split(",")] if args.check_levels else None
        cert = limit.injectivity_certificate(fas, x, args.n0, levels)
    return cert.to_json(), EXIT_OK if cert.verdict != "fail" else EXIT_CERT


def cmd_betti(args):
    fas = fas_from_args(args)
    levels = [args.n] if args.n else range(1, len(fas) + 1)
    return [homology.betti_report(fas, n, args.max_dim, args.cap) for n in levels], EXIT_OK


def cmd_export(args):
    fas = fas_from_args(args)
    if args.format == "map":
        if not 1 <= args.n < len(fas):
            raise UsageError("--format map needs 1 <= --n < number of levels")
        return bonding.map_dump(fas, args.n, args.cap) + "\n", EXIT_OK
    return finspace.export_poset(fas, args.n, args.format, args.cap).rstrip("\n") + "\n", EXIT_OK


# --- parser ------------------------------------------------------------------------


def _space_options(p):
    g = p.add_argument_group("space")
    g.add_argument("--space", choices=["interval", "grid", "padic", "convergent", "circle", "cantor", "file"])
    g.add_argument("--m", type=int, default=9, help="grid denominator / circle size")
    g.add_argument("--p", type=int, default=3)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--N", type=int, default=8)
    g.add_argument("--cantor-depth", type=int, default=3)
    g.add_argument("--metric", help="circle: arc|chord; cantor: line|ultrametric")
    g.add_argument("--path")
    g.add_argument("--format-in", dest="format", choices=["csv", "json"])
    g.add_argument("--probes", help="comma-separated extra points for the worked interval families")


def _fas_options(p):
    g = p.add_argument_group("fas")
    g.add_argument("--fas", help="Fas JSON file ('-' for stdin); otherwise built from the flags below")
    g.add_argument("--paper-example", choices=["interval", "unnested"])
    g.add_argument("--builder", choices=["greedy", "countable", "ultra"], default="greedy")
    g.add_argument("--levels", type=int, default=4)
    g.add_argument("--eps1")
    g.add_argument("--ratio")
    g.add_argument("--enum", choices=["index", "farthest"], default="index")
    g.add_argument("--no-antichain", action="store_true")
    g.add_argument("--nestify", action="store_true")
    g.add_argument("--cap", type=int, default=finspace.DEFAULT_CAP)


COMMANDS = {}


def build_parser():
    parser = argparse.ArgumentParser(prog="fasrecon", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of option defaults")
    parser.add_argument("--out", help="also write the result into this directory")
    subs = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = subs.add_parser(name, help=help)
        _space_options(p)
        _fas_options(p)
        p.set_defaults(func=func)
        COMMANDS[name] = p
        return p

    p = add("gen", cmd_gen, "generate or ingest a metric sample")
    p.add_argument("--matrix", action="store_true", help="emit a distance-matrix CSV")
    p.add_argument("--validate", action="store_true")
    p = add("fas", cmd_fas, "build or nestify a FAS")
    p.add_argument("action", choices=["build", "nestify"])
    add("verify", cmd_verify, "certify adjustedness of a FAS")
    p = add("level", cmd_level, "materialize one poset level")
    p.add_argument("--n", type=int, required=True)
    p = add("threads", cmd_threads, "enumerate truncated inverse-limit threads")
    p.add_argument("--depth", type=int)
    p = add("fiber", cmd_fiber, "threads converging to a point")
    p.add_argument("--x", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--M", type=int)
    p = add("star", cmd_star, "the truncated set X_n^*")
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=int)
    p = add("certify", cmd_certify, "injectivity / ultrametric / bonding certificates")
    p.add_argument("--kind", choices=["injectivity", "ultra-commute", "bonding"], default="injectivity")
    p.add_argument("--x")
    p.add_argument("--n0", type=int)
    p.add_argument("--check-levels")
    p = add("betti", cmd_betti, "mod-2 Betti numbers per level")
    p.add_argument("--n", type=int)
    p.add_argument("--max-dim", type=int, default=homology.DEFAULT_MAX_DIM)
    p = add("export", cmd_export, "DOT / JSON poset or bonding-map dump")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=["dot", "json", "map"], default="dot")
    return parser


def _dump(result) -> str:
    if isinstance(result, str):
        return result
    return json.dumps(jsonable(result), sort_keys=True, indent=1) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"fasrecon: cannot read config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for sub in COMMANDS.values():
            sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    try:
        if args.cap < 1:
            raise UsageError("--cap must be positive")
        result, code = args.func(args)
    except CapExceeded as exc:
        print(f"fasrecon: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, FasreconError, ValueError, KeyError, IndexError, OSError) as exc:
        print(f"fasrecon: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = _dump(result)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        suffix = ".dot" if text.startswith("digraph") else (".csv" if args.command == "gen" and args.matrix else ".json")
        (out / f"{args.command}{suffix}").write_text(text, encoding="utf-8")
    if code == EXIT_CERT:
        print("fasrecon: certificate failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
