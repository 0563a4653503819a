"""Command-line surface.

Subcommands: ``relent`` (divergence of two operator files), ``measure``
(distance to a free family with certified brackets), ``certify`` (dual
lower-bound certificate), ``nongauss`` (divergence from the closest Gaussian
state), ``bound`` (energy-constrained continuity bounds, with optional CSV
sweeps), and ``witness`` (separable state matching the marginals of a pure
state).

Reports go to standard output as one ``key = value`` line each, numbers with
17 significant digits; ``--json`` appends a machine block.  Exit codes:
0 success, 2 argument or file-format errors, 3 numeric rejections, 4 solver
non-convergence (the report is still emitted).
"""

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .bounds import (
    BoundRequest,
    OscillatorSpec,
    bipartite_bound,
    bipartite_bound_oscillator,
    entropy_ceiling,
    g_min,
    g_oscillator,
    multipartite_bound_sqrt,
    multipartite_bound_t,
)
from .entropy import relative_entropy
from .errors import RelentError, StateFileError
from .freesets import (
    PiSep,
    Ppt,
    RainsSet,
    Sep,
    separable_witness_from_pure,
)
from .gaussian import FockRep, relent_non_gaussianity, _leakage
from .operators import eig_hermitian
from .solver import SolverConfig, certify, minimize_primal
from .stateio import load_state, save_state

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_NOCONV = 4


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


class Report:
    def __init__(self, command, argv):
        self.rows = [("command", command), ("argv", " ".join(argv))]

    def add(self, key, value):
        self.rows.append((key, value))

    def digest(self, label, path):
        with open(path, "rb") as fh:
            h = hashlib.sha256(fh.read()).hexdigest()[:16]
        self.rows.append((label, h))

    def emit(self, as_json=False):
        for key, value in self.rows:
            print(f"{key} = {_fmt(value)}")
        if as_json:
            block = {k: (_fmt(v) if isinstance(v, float) and math.isinf(v) else v)
                     for k, v in self.rows}
            print("--- machine ---")
            print(json.dumps(block, sort_keys=True))


def _parse_indices(text):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok != "")
    except ValueError as exc:
        raise StateFileError(f"bad index list {text!r}") from exc


def _parse_partitions(text):
    parts = []
    for chunk in text.split(";"):
        blocks = tuple(_parse_indices(b) for b in chunk.split("|"))
        parts.append(blocks)
    return tuple(parts)


def _parse_floats(text):
    try:
        return tuple(float(tok) for tok in text.split(",") if tok != "")
    except ValueError as exc:
        raise StateFileError(f"bad float list {text!r}") from exc


def _family(args, dims):
    if args.set == "sep":
        return Sep(dims, _parse_indices(args.split))
    if args.set == "pisep":
        if not args.partitions:
            raise StateFileError("--partitions is required for --set pisep")
        return PiSep(dims, _parse_partitions(args.partitions))
    if args.set == "ppt":
        return Ppt(dims, _parse_indices(args.split))
    if args.set == "rains":
        return RainsSet(dims, _parse_indices(args.split))
    raise StateFileError(f"unknown family {args.set!r}")


def _solver_config(args):
    return SolverConfig(max_iters=args.max_iters, tol=args.tol,
                        lmo_restarts=args.restarts, seed=args.seed)


def _add_solver_flags(sub):
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--max-iters", type=int, default=500)
    sub.add_argument("--seed", type=int, default=7)
    sub.add_argument("--restarts", type=int, default=24)


def _build_parser():
    ap = argparse.ArgumentParser(prog="relent",
                                 description="relative-entropy resource measures")
    ap.add_argument("--json", action="store_true", help="append a machine block")
    ap.add_argument("--verbose", action="store_true", help="progress logs on stderr")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("relent", help="relative entropy of two operator files")
    p.add_argument("x")
    p.add_argument("y")

    p = sub.add_parser("measure", help="distance to a free-state family")
    p.add_argument("state")
    p.add_argument("--set", required=True, choices=["sep", "pisep", "ppt", "rains"])
    p.add_argument("--split", default="0")
    p.add_argument("--partitions", default="")
    p.add_argument("--dump", default="")
    _add_solver_flags(p)

    p = sub.add_parser("certify", help="dual lower-bound certificate")
    p.add_argument("state")
    p.add_argument("--set", required=True, choices=["sep", "pisep", "ppt", "rains"])
    p.add_argument("--split", default="0")
    p.add_argument("--partitions", default="")
    p.add_argument("--x-file", default="")
    p.add_argument("--eps", default="1e-3,1e-4,1e-5")
    _add_solver_flags(p)

    p = sub.add_parser("nongauss", help="divergence from the closest Gaussian state")
    p.add_argument("state")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--cutoff", type=int, required=True)

    p = sub.add_parser("bound", help="energy-constrained continuity bounds")
    p.add_argument("variant", choices=["bipartite", "multipartite"])
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--d0", type=int, default=2)
    p.add_argument("--modes", type=int, default=1)
    p.add_argument("--freqs", default="1.0")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--g", default="oscillator", choices=["gmin", "oscillator"])
    p.add_argument("--emax", type=float, default=0.0,
                   help="envelope truncation energy for --g gmin (default 1e4 * E)")
    p.add_argument("--sweep", default="", metavar="eps=a:b:n")

    p = sub.add_parser("witness", help="separable witness for a pure state")
    p.add_argument("state")
    p.add_argument("--dims", default="")
    p.add_argument("--dump", default="")

    return ap


def _cmd_relent(args, report):
    x = load_state(args.x)
    y = load_state(args.y)
    report.digest("input_x", args.x)
    report.digest("input_y", args.y)
    rep = relative_entropy(x, y)
    report.add("value", float(rep.value))
    report.add("support_ok", rep.support_ok)
    report.add("x_spectrum_min", rep.spectrum_summary.x_min)
    report.add("x_spectrum_max", rep.spectrum_summary.x_max)
    report.add("y_spectrum_min", rep.spectrum_summary.y_min)
    report.add("y_spectrum_max", rep.spectrum_summary.y_max)
    return EXIT_OK


def _log(args, msg):
    if args.verbose:
        print(msg, file=sys.stderr)


def _cmd_measure(args, report):
    rho = load_state(args.state)
    report.digest("input_state", args.state)
    spec = _family(args, rho.dims)
    cfg = _solver_config(args)
    _log(args, f"solving {args.set} family on dims {rho.dims} "
               f"(tol={cfg.tol:g}, max_iters={cfg.max_iters})")
    res = minimize_primal(rho, spec, cfg)
    _log(args, f"finished after {res.iterations} iterations, gap={res.gap:.3e}")
    report.add("set", args.set)
    report.add("upper", res.upper)
    report.add("lower", res.lower)
    report.add("gap", res.gap)
    report.add("iterations", res.iterations)
    report.add("converged", res.converged)
    report.add("membership_residual", res.membership)
    report.add("seed", args.seed)
    if args.dump:
        save_state(args.dump, res.minimizer)
        report.add("dump", args.dump)
    return EXIT_OK if res.converged else EXIT_NOCONV


def _cmd_certify(args, report):
    rho = load_state(args.state)
    report.digest("input_state", args.state)
    spec = _family(args, rho.dims)
    cfg = _solver_config(args)
    x = load_state(args.x_file) if args.x_file else None
    _log(args, "certifying" + (" with supplied candidate" if x is not None
                               else f" over ladder {args.eps}"))
    cert, primal = certify(rho, spec, cfg, eps_ladder=_parse_floats(args.eps), x=x)
    _log(args, f"certificate residual {cert.inner_sup_residual:.3e}")
    report.add("set", args.set)
    report.add("bound", cert.bound)
    report.add("inner_sup_value", cert.inner_sup_value)
    report.add("inner_sup_residual", cert.inner_sup_residual)
    reliable = cert.inner_sup_residual <= cfg.tol
    report.add("reliable", reliable)
    if primal is not None:
        report.add("primal_upper", primal.upper)
    report.add("seed", args.seed)
    return EXIT_OK if reliable else EXIT_NOCONV


def _cmd_nongauss(args, report):
    state = load_state(args.state)
    report.digest("input_state", args.state)
    rep = FockRep(args.modes, args.cutoff, state)
    value = relent_non_gaussianity(rep)
    report.add("value", value)
    report.add("leakage", _leakage(rep))
    report.add("modes", args.modes)
    report.add("cutoff", args.cutoff)
    return EXIT_OK


def _bound_once(args, eps):
    req = BoundRequest(eps=eps, energy=args.energy, d0=args.d0,
                       m=args.m, s=args.s, variant=args.variant)
    spec = OscillatorSpec(args.modes, _parse_floats(args.freqs))
    emax = args.emax if args.emax > 0 else 1e4 * args.energy

    if args.g == "oscillator":
        g = lambda e: g_oscillator(spec, e)
    else:
        g = lambda e: g_min(spec, max(e, 1e-12), emax)

    if args.variant == "bipartite":
        if args.g == "oscillator":
            return bipartite_bound_oscillator(req, spec)
        return bipartite_bound(req, g)
    value, t_star = multipartite_bound_t(req, g)
    return value, t_star


def _cmd_bound(args, report):
    value, t_star = _bound_once(args, args.eps)
    report.add("variant", args.variant)
    report.add("value", value)
    report.add("t_star", t_star)
    if args.variant == "multipartite":
        req = BoundRequest(eps=args.eps, energy=args.energy, d0=args.d0,
                           m=args.m, s=args.s, variant=args.variant)
        spec = OscillatorSpec(args.modes, _parse_floats(args.freqs))
        sqrt_val = multipartite_bound_sqrt(req, lambda e: entropy_ceiling(spec, e))
        report.add("value_sqrt", sqrt_val)
    if args.sweep:
        name, _, rng = args.sweep.partition("=")
        if name != "eps" or not rng:
            raise StateFileError(f"bad sweep spec {args.sweep!r} (expected eps=a:b:n)")
        try:
            a, b, n = rng.split(":")
            a, b, n = float(a), float(b), int(n)
        except ValueError as exc:
            raise StateFileError(f"bad sweep spec {args.sweep!r}") from exc
        print("eps,value,t_star")
        for eps in np.geomspace(a, b, n):
            v, t = _bound_once(args, float(eps))
            print(f"{_fmt(float(eps))},{_fmt(v)},{_fmt(t)}")
    return EXIT_OK


def _cmd_witness(args, report):
    op = load_state(args.state)
    report.digest("input_state", args.state)
    dims = _parse_indices(args.dims) if args.dims else op.dims
    es = eig_hermitian(op)
    if es.eigenvalues[-1] < 1.0 - 1e-8:
        raise ValueError("witness input must be a pure state (top eigenvalue 1)")
    psi = es.eigenvectors[:, -1]
    sigma = separable_witness_from_pure(psi, dims)
    value = float(relative_entropy(op.with_mat(np.outer(psi, psi.conj())), sigma).value)
    report.add("value", value)
    report.add("dims", ",".join(str(d) for d in dims))
    if args.dump:
        save_state(args.dump, sigma)
        report.add("dump", args.dump)
    return EXIT_OK


_HANDLERS = {
    "relent": _cmd_relent,
    "measure": _cmd_measure,
    "certify": _cmd_certify,
    "nongauss": _cmd_nongauss,
    "bound": _cmd_bound,
    "witness": _cmd_witness,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    report = Report(args.cmd, argv)
    report.add("version", __version__)
    start = time.perf_counter()
    try:
        code = _HANDLERS[args.cmd](args, report)
    except StateFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RelentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report.add("wall_time_s", time.perf_counter() - start)
    report.emit(as_json=args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
