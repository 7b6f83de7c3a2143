"""Command-line front end.

Every subcommand prints one JSON document. Exit status: 0 when all checks
pass, 1 when a numerical check fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Callable

import numpy as np

from . import shannon, worked
from .graph import GraphParseError, WeightedGraph, load_graph, load_signal, load_vertex_values
from .partition import (
    Partition,
    SubsetChain,
    anchored_chain,
    chain_constants,
    load_shells,
    partition_constants,
    poincare_forward_check,
    poincare_support_on_S0_check,
    poincare_zero_on_S0_check,
    reverse_check,
    shell_estimate_check,
)
from .records import dumps, jsonable
from .sampling import (
    exact_frame_bounds,
    frame_reconstruct,
    plancherel_polya_check,
    sampling_bounds,
)
from .spectral import PWProjector, decompose, spectral_geometry_report

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _p_value(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or 'inf': {text!r}") from None


def _open(path: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) " + ", ".join("--" + m for m in missing))


def _graph(args) -> WeightedGraph:
    _need(args, "graph")
    with _open(args.graph) as fe:
        if args.nu is None:
            return load_graph(fe, edge_source=args.graph)
        with _open(args.nu) as fn:
            return load_graph(fe, fn, edge_source=args.graph, weight_source=args.nu)


def _shells(args, g, attr: str, kind):
    path = getattr(args, attr)
    with _open(path) as fh:
        shells = load_shells(fh, source=path)
    try:
        return kind.from_shells(g, shells)
    except ValueError as e:
        raise GraphParseError(str(e), None, path) from None


def _signal(args, g) -> np.ndarray:
    with _open(args.signal) as fh:
        return load_signal(g, fh, source=args.signal)


# -- subcommands --------------------------------------------------------------------


def cmd_constants(args):
    g = _graph(args)
    if args.partition is None and args.chain is None:
        raise UsageError("constants: give --partition and/or --chain")
    out: dict = {"p": args.p}
    if args.partition is not None:
        out["partition_constants"] = partition_constants(g, _shells(args, g, "partition", Partition), args.p)
    if args.chain is not None:
        out["chain_constants"] = chain_constants(g, _shells(args, g, "chain", SubsetChain), args.p)
    return out, True


def cmd_poincare(args):
    _need(args, "partition", "signal")
    g = _graph(args)
    P = _shells(args, g, "partition", Partition)
    f = _signal(args, g)
    C = _shells(args, g, "chain", SubsetChain) if args.chain else None
    checks = []
    if not math.isinf(args.p):
        checks.append(poincare_forward_check(g, P, f, args.p))
    if np.all(f[P.idx[0]] == 0):
        checks.append(poincare_zero_on_S0_check(g, P, f, args.p))
    if C is not None and not math.isinf(args.p):
        checks.append(reverse_check(g, C, f, args.p))
        outside = np.ones(g.n_vertices, dtype=bool)
        outside[C.idx[0]] = False
        cc = chain_constants(g, C, args.p)
        if np.all(f[outside] == 0) and cc.a_hat is not None and cc.a_hat > 1:
            checks.append(poincare_support_on_S0_check(g, C, f, args.p))
    if not checks:
        raise UsageError("poincare: p = inf needs a signal vanishing on S_0")
    ok = all(c.passed for c in checks)
    return {"p": args.p, "checks": checks, "passed": ok}, ok


def cmd_shells(args):
    _need(args, "partition", "signal")
    g = _graph(args)
    P = _shells(args, g, "partition", Partition)
    recs = shell_estimate_check(g, P, _signal(args, g), args.p)
    ok = all(r.passed for r in recs)
    return {"p": args.p, "shells": recs, "passed": ok}, ok


def cmd_spectrum(args):
    g = _graph(args)
    dec = decompose(g)
    return {"n_vertices": g.n_vertices, "eigenvalues": dec.eigenvalues}, True


def cmd_pw_project(args):
    _need(args, "signal", "omega")
    g = _graph(args)
    f = _signal(args, g)
    proj = PWProjector(decompose(g), args.omega)
    pf = proj(f)
    return {
        "omega": args.omega,
        "dim": proj.dim,
        "residual": proj.residual(f),
        "signal": dict(zip(g.vertices, pf.tolist())),
    }, True


def cmd_geometry(args):
    _need(args, "partition")
    g = _graph(args)
    P = _shells(args, g, "partition", Partition)
    C = _shells(args, g, "chain", SubsetChain) if args.chain else None
    f = None
    if args.signal is not None:
        _need(args, "omega")
        f = _signal(args, g)
    rep = spectral_geometry_report(g, decompose(g), P, f=f, omega=args.omega, chain=C)
    return rep.to_dict(), rep.passed


def _initial_set(args, g) -> list[str]:
    _need(args, "partition")
    with _open(args.partition) as fh:
        shells = load_shells(fh, source=args.partition)
    return shells[0]


def cmd_frame_bounds(args):
    _need(args, "omega")
    g = _graph(args)
    S0 = _initial_set(args, g)
    fb = sampling_bounds(g, S0, args.omega)
    lo, hi = exact_frame_bounds(decompose(g), args.omega, S0)
    ok = fb.A <= lo * (1 + 1e-9) + 1e-12 and hi <= fb.B * (1 + 1e-9)
    return {"bounds": fb.to_dict(), "exact": {"lower": lo, "upper": hi}, "passed": bool(ok)}, bool(ok)


def cmd_pp_check(args):
    _need(args, "partition", "omega")
    g = _graph(args)
    P = _shells(args, g, "partition", Partition)
    if args.chain:
        C = _shells(args, g, "chain", SubsetChain)
    else:
        C = anchored_chain(g, P.shells)
        if C is None:
            raise UsageError("pp-check: no chain keeps all of S_0; pass one with --chain")
    dec = decompose(g)
    if args.signal is not None:
        f = _signal(args, g)
    else:
        if args.seed is None:
            raise UsageError("pp-check: without --signal a random signal is drawn and --seed is required")
        f = PWProjector(dec, args.omega).random_element(np.random.default_rng(args.seed))
    rep = plancherel_polya_check(g, dec, args.omega, P, C, f)
    return rep.to_dict(), rep.passed


def cmd_reconstruct(args):
    _need(args, "samples", "omega")
    g = _graph(args)
    with _open(args.samples) as fh:
        samples = load_vertex_values(g, fh, source=args.samples)
    if not samples:
        raise UsageError("reconstruct: the samples file lists no vertices")
    truth = _signal(args, g) if args.signal else None
    trace = frame_reconstruct(
        decompose(g),
        args.omega,
        list(samples),
        samples,
        relaxation=args.relaxation,
        tol=args.tol,
        max_iter=args.max_iter,
        truth=truth,
    )
    return trace.to_dict(g), trace.converged


def cmd_shannon(args):
    _need(args, "k", "omega")
    seed = 0 if args.seed is None else args.seed
    demo = shannon.shannon_demo(args.k, args.omega, args.periods, seed=seed)
    return demo.to_dict(), demo.passed


def cmd_examples(args):
    rep = worked.all_examples()
    return rep, rep["passed"]


COMMANDS: dict[str, tuple[Callable, str]] = {
    "constants": (cmd_constants, "partition / chain constants"),
    "poincare": (cmd_poincare, "Poincare-type inequality checks on a signal"),
    "shells": (cmd_shells, "per-shell norm propagation diagnostics"),
    "spectrum": (cmd_spectrum, "Laplacian eigenvalues"),
    "pw-project": (cmd_pw_project, "project a signal onto PW_omega"),
    "geometry": (cmd_geometry, "shell constants versus the spectrum"),
    "frame-bounds": (cmd_frame_bounds, "two-set frame bounds for the initial set"),
    "pp-check": (cmd_pp_check, "Plancherel-Polya inequalities for a signal"),
    "reconstruct": (cmd_reconstruct, "frame-algorithm reconstruction from samples"),
    "shannon": (cmd_shannon, "integer-line sampling demo on a cycle"),
    "examples": (cmd_examples, "star, wheel and integer-line examples"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", metavar="PATH")
    common.add_argument("--nu", metavar="PATH")
    common.add_argument("--partition", metavar="PATH")
    common.add_argument("--chain", metavar="PATH")
    common.add_argument("--signal", metavar="PATH")
    common.add_argument("--samples", metavar="PATH")
    common.add_argument("--p", type=_p_value, default=2.0, metavar="FLOAT|inf")
    common.add_argument("--omega", type=float)
    common.add_argument("--k", type=int)
    common.add_argument("--periods", type=int, default=45)
    common.add_argument("--relaxation", type=float)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--max-iter", type=int, default=10000)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--pretty", action="store_true", help="human-readable table instead of JSON")
    parser = argparse.ArgumentParser(prog="pwsampling", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render_pretty(payload) -> str:
    rows = list(_flatten(jsonable(payload)))
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    func = COMMANDS[args.command][0]
    try:
        payload, ok = func(args)
    except (UsageError, GraphParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    payload = {"command": args.command, **jsonable(payload)}
    text = render_pretty(payload) if args.pretty else dumps(payload) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            print(f"error: cannot write {args.out}: {e.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
