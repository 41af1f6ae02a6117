"""Command-line front end.

Exit codes: 0 success, 1 certified infeasibility (hop-infeasible LP, no
certificate, failed verification), 2 input errors, 3 internal limits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Any, Sequence

from .certificate.deletion import PremiseError, deletion_routing_lb
from .certificate.moving_cut import (
    CertificateError,
    MovingCut,
    best_coding_lower_bound,
    coding_lower_bound,
    unit_cut,
    verify_moving_cut,
)
from .flow.exact import ExactSolveError, solve_exact
from .flow.mwu import solve_mwu
from .flow.paths import PathLimitExceeded
from .flow.solution import HOP_INFEASIBLE
from .gaps.base import base_instance, permutation_paths
from .gaps.bipartite import LimitExceeded, build_colored_bipartite
from .gaps.product import ProductError, outer_arcs, product
from .gaps.recurrence import recurrence_csv, recurrence_table
from .gaps.verify import verify_gap
from .instance import GapInstance, InstanceError, UnicastInstance, hop_distance, load_instance
from .protocol.compose import CompositionError, compose_product_protocol
from .protocol.trace import ProtocolTrace, ReplayError, replay_coding, replay_routing, routing_as_coding
from .protocol.xor import xor_star_protocol
from .routing import RouteError, Schedule, assignment_from_paths, route, schedule

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _fraction(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("ε must lie in (0, 1)")
    return v


def _dump(data: Any) -> str:
    return json.dumps(data, indent=1) + "\n"


def _write(path: str | None, text: str) -> None:
    if path:
        FsPath(path).write_text(text, encoding="utf-8", newline="\n")


def _read_json(path: str) -> Any:
    try:
        return json.loads(FsPath(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_INPUT) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}", EXIT_INPUT) from exc


def _load(path: str | None) -> UnicastInstance | GapInstance:
    if not path:
        raise CliError("--instance is required", EXIT_INPUT)
    try:
        return load_instance(path)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_INPUT) from exc


def _plain(obj: UnicastInstance | GapInstance) -> UnicastInstance:
    return obj.instance if isinstance(obj, GapInstance) else obj


def _fmt(x: Fraction | int | float | None) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _plain(_load(args.instance))
    if args.T is None:
        raise CliError("solve needs --T", EXIT_INPUT)
    if args.method == "exact":
        sol = solve_exact(inst, args.T, path_limit=args.limit_paths)
    elif args.method == "mwu":
        sol = solve_mwu(inst, args.T, args.eps, seed=args.seed)
    else:
        try:
            sol = solve_exact(inst, args.T, path_limit=args.limit_paths)
        except ExactSolveError:
            sol = solve_mwu(inst, args.T, args.eps, seed=args.seed)
    _write(args.out, _dump(sol.to_json()))
    print(f"z={float(sol.z):.3f} T={sol.T} status={sol.status}")
    return EXIT_INFEASIBLE if sol.status == HOP_INFEASIBLE else EXIT_OK


def _permutation_schedule(gap: GapInstance, seed: int) -> Schedule:
    k = gap.instance.k
    if gap.instance != base_instance(k).instance:
        raise CliError("--permutation applies only to base instances", EXIT_INPUT)
    return schedule(gap.instance, assignment_from_paths(gap.instance, permutation_paths(k)), seed)


def cmd_route(args: argparse.Namespace) -> int:
    obj = _load(args.instance)
    inst = _plain(obj)
    if args.permutation:
        if not isinstance(obj, GapInstance):
            raise CliError("--permutation applies only to base instances", EXIT_INPUT)
        sched = _permutation_schedule(obj, args.seed)
        summary = f"makespan={sched.makespan} paths=permutation"
    else:
        try:
            res = route(inst, args.T_max or 64, seed=args.seed, eps=args.eps)
        except RouteError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_INFEASIBLE
        sched = res.schedule
        T = res.solution.T if res.solution else 0
        a = res.assignment
        summary = f"makespan={sched.makespan} T={T} congestion={a.congestion} dilation={a.dilation} beta={float(res.beta):.3f}"
    times = replay_routing(inst, sched)
    assert times.makespan == sched.makespan
    _write(args.out, _dump(sched.to_json()))
    print(summary)
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    inst = _plain(_load(args.instance))
    if args.cut:
        try:
            cut = MovingCut.from_json(_read_json(args.cut))
            rep = verify_moving_cut(inst, cut)
        except CertificateError as exc:
            raise CliError(str(exc), EXIT_INPUT) from exc
        print(f"capacity={rep.capacity} demand={rep.demand} distance={rep.distance} valid={str(rep.valid).lower()}")
        for r in rep.reasons:
            print(r, file=sys.stderr)
        return EXIT_OK if rep.valid else EXIT_INFEASIBLE
    if args.T is not None:
        res = coding_lower_bound(inst, args.T, seed=args.seed, eps=args.eps, path_limit=args.limit_paths)
    else:
        res = best_coding_lower_bound(inst, args.T_max or 64, seed=args.seed, eps=args.eps, path_limit=args.limit_paths)
    if res.cut is not None:
        _write(args.out, _dump(res.cut.to_json()))
    print(f"status={res.status} T={res.T} bound={_fmt(res.bound)} z={float(res.solution.z):.3f}")
    return EXIT_OK if res.status == "certified" else EXIT_INFEASIBLE


def _load_protocol(path: str, inst: UnicastInstance) -> ProtocolTrace | Schedule:
    data = _read_json(path)
    if isinstance(data, dict) and "packets" in data:
        return Schedule.from_json(data, inst)
    return ProtocolTrace.from_json(data)


def cmd_simulate(args: argparse.Namespace) -> int:
    inst = _plain(_load(args.instance))
    if not (args.trace or args.schedule):
        raise CliError("simulate needs --trace or --schedule", EXIT_INPUT)
    proto = _load_protocol(args.trace or args.schedule, inst)
    if isinstance(proto, Schedule):
        times, kind = replay_routing(inst, proto), "routing"
    elif proto.is_routing:
        times, kind = replay_routing(inst, proto), "routing"
    else:
        times, kind = replay_coding(inst, proto), "coding"
    _write(args.out, _dump({"kind": kind, "times": list(times), "makespan": times.makespan}))
    print(f"kind={kind} makespan={times.makespan} times={','.join(map(str, times))}")
    return EXIT_OK


def sidecar(out: str, tag: str) -> str:
    """``x/prod.json`` -> ``x/prod.<tag>.json``."""
    p = FsPath(out)
    return str(p.with_name(f"{p.stem}.{tag}.json" if p.suffix == ".json" else f"{p.name}.{tag}.json"))


def cmd_forge(args: argparse.Namespace) -> int:
    if not args.out:
        raise CliError("forge needs --out", EXIT_INPUT)
    if args.kind == "base":
        gap = base_instance(args.k)
        _write(args.out, _dump(gap.to_json()))
        print(f"nodes={len(gap.instance.nodes)} edges={len(gap.instance.edges)} k={gap.instance.k}")
        return EXIT_OK
    if args.kind == "xor":
        _write(args.out, _dump(xor_star_protocol(args.k).to_json()))
        print("rounds=3")
        return EXIT_OK
    if args.kind == "permutation":
        gap = base_instance(args.k)
        sched = _permutation_schedule(gap, args.seed)
        _write(args.out, _dump(sched.to_json()))
        print(f"makespan={sched.makespan}")
        return EXIT_OK
    # product
    if not (args.outer and args.inner):
        raise CliError("forge product needs --outer and --inner", EXIT_INPUT)
    outer, inner = _load(args.outer), _load(args.inner)
    if not (isinstance(outer, GapInstance) and isinstance(inner, GapInstance)):
        raise CliError("product factors must be gap instances", EXIT_INPUT)
    B = build_colored_bipartite(
        len(outer_arcs(outer)), inner.instance.k, args.girth, max_nodes=args.limit_nodes, seed=args.seed
    )
    prod, wiring = product(outer, inner, B)
    _write(args.out, _dump(prod.to_json()))
    _write(sidecar(args.out, "wiring"), _dump(wiring.to_json()))
    extra = ""
    if args.outer_trace and args.inner_trace:
        composed = compose_product_protocol(
            ProtocolTrace.from_json(_read_json(args.outer_trace)),
            ProtocolTrace.from_json(_read_json(args.inner_trace)),
            prod,
            wiring,
        )
        _write(sidecar(args.out, "trace"), _dump(composed.to_json()))
        extra = f" composed_rounds={composed.length}"
    p = prod.params
    print(f"n1={B.n1} n2={B.n2} girth={B.girth()} nodes={len(prod.instance.nodes)} edges={len(prod.instance.edges)} "
          f"a={p.a} b={p.b} f={p.f} k={p.k} m={p.m} r={_fmt(p.r)} u={_fmt(p.u)}{extra}")
    return EXIT_OK


GAP_HEADER = ("instance", "route_makespan", "cut_lb", "coding_ub", "gap_lo", "gap_hi")


def _routing_lb(obj: UnicastInstance | GapInstance) -> int:
    inst = _plain(obj)
    lb = max(hop_distance(inst, (), s.source, s.sink) for s in inst.sessions)
    if isinstance(obj, GapInstance):
        report = verify_gap(obj)
        if report.passed:
            try:
                lb = max(lb, deletion_routing_lb(obj).value)
            except PremiseError:
                pass
    return lb


def gap_row(
    name: str,
    obj: UnicastInstance | GapInstance,
    trace: ProtocolTrace | Schedule | None,
    sched: Schedule | None,
    args: argparse.Namespace,
) -> list[str]:
    inst = _plain(obj)
    if sched is None:
        sched = route(inst, args.T_max or 64, seed=args.seed, eps=args.eps).schedule
    route_makespan = replay_routing(inst, sched).makespan
    cut_lb: Fraction | int = unit_cut(inst).distance
    try:
        best = best_coding_lower_bound(inst, args.T_max or 64, seed=args.seed, eps=args.eps, path_limit=args.limit_paths)
        if best.status == "certified":
            cut_lb = max(cut_lb, best.bound)
    except CertificateError:
        pass
    coding_ub = None
    if trace is not None:
        if isinstance(trace, Schedule):
            coding_ub = replay_routing(inst, trace).makespan
        else:
            coding_ub = replay_coding(inst, trace if not trace.is_routing else routing_as_coding(inst, trace)).makespan
    route_lb = _routing_lb(obj)
    gap_lo = Fraction(route_lb, coding_ub) if coding_ub else None
    gap_hi = Fraction(route_makespan, cut_lb) if cut_lb else None
    return [name, str(route_makespan), _fmt(cut_lb), _fmt(coding_ub), _fmt(gap_lo), _fmt(gap_hi)]


def cmd_gap_report(args: argparse.Namespace) -> int:
    paths = args.instance or []
    if not paths:
        raise CliError("gap-report needs at least one --instance", EXIT_INPUT)
    for flag, vals in (("--trace", args.trace), ("--schedule", args.schedule)):
        if vals and len(vals) != len(paths):
            raise CliError(f"give {flag} once per --instance or not at all", EXIT_INPUT)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GAP_HEADER)
    for n, path in enumerate(paths):
        obj = _load(path)
        inst = _plain(obj)
        trace = _load_protocol(args.trace[n], inst) if args.trace and args.trace[n] != "-" else None
        sched = None
        if args.schedule and args.schedule[n] != "-":
            loaded = _load_protocol(args.schedule[n], inst)
            if not isinstance(loaded, Schedule):
                raise CliError(f"{args.schedule[n]}: expected a routing schedule", EXIT_INPUT)
            sched = loaded
        w.writerow(gap_row(FsPath(path).stem, obj, trace, sched, args))
    text = buf.getvalue()
    _write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_recurrences(args: argparse.Namespace) -> int:
    if args.r < 5:
        raise CliError("--r must be >= 5", EXIT_INPUT)
    text = recurrence_csv(recurrence_table(args.levels, args.r))
    _write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, many: bool = False) -> None:
    if many:
        p.add_argument("--instance", action="append", help="instance JSON file (repeatable)")
    else:
        p.add_argument("--instance", help="instance JSON file")
    p.add_argument("--T", type=_positive, help="hop horizon")
    p.add_argument("--T-max", dest="T_max", type=_positive, help="largest horizon for doubling search")
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 10), help="MWU accuracy (default 1/10)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file")
    p.add_argument("--limit-nodes", dest="limit_nodes", type=_positive, default=50_000)
    p.add_argument("--limit-paths", dest="limit_paths", type=_positive, default=100_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codinggap", description="Routing versus network coding makespan toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="hop-bounded concurrent flow")
    _add_common(p)
    p.add_argument("--method", choices=("auto", "exact", "mwu"), default="auto")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("route", help="build and replay a routing schedule")
    _add_common(p)
    p.add_argument("--permutation", action="store_true", help="base instances: use the hand-built permutation paths")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("certify", help="moving-cut lower bound on coding makespan")
    _add_common(p)
    p.add_argument("--cut", help="verify this moving-cut JSON instead of extracting one")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="replay a trace or schedule")
    _add_common(p)
    p.add_argument("--trace")
    p.add_argument("--schedule")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("forge", help="write base or product gap instances and protocols")
    _add_common(p)
    p.add_argument("kind", choices=("base", "xor", "permutation", "product"))
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--outer")
    p.add_argument("--inner")
    p.add_argument("--girth", type=int, default=4)
    p.add_argument("--outer-trace", dest="outer_trace")
    p.add_argument("--inner-trace", dest="inner_trace")
    p.set_defaults(func=cmd_forge)

    p = sub.add_parser("gap-report", help="CSV of routing and coding bounds")
    _add_common(p, many=True)
    p.add_argument("--trace", action="append", help="coding protocol per instance ('-' for none)")
    p.add_argument("--schedule", action="append", help="routing schedule per instance ('-' to route)")
    p.set_defaults(func=cmd_gap_report)

    p = sub.add_parser("recurrences", help="CSV of the level-i parameter recurrences")
    _add_common(p)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--r", type=int, default=5)
    p.set_defaults(func=cmd_recurrences)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InstanceError, ReplayError, ProductError, CompositionError, CertificateError, PremiseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PathLimitExceeded, ExactSolveError, LimitExceeded) as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
