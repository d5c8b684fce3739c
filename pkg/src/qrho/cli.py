"""Command-line front end.

Exit status: 0 when a factor / full factorization / passing suite is
produced, 2 when the run completed without one, 1 for usage or
precondition errors.  Results go to stdout (JSON with ``--output json``);
per-step diagnostics go to stderr in text mode.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .algorithms import (
    BackendFailure,
    ClassicalBackend,
    FactorConfig,
    FactorResult,
    divisors,
    extended_shor,
    factor,
    pollard_rho_classical,
    quantum_rho,
    quantum_rho_linear,
    shor,
)
from .arith import CapacityError, NotCoprimeError, multiplicative_order
from .collisions import classify, verify_characterization
from .quantum_sim import (
    MAX_ELL,
    CircuitBackend,
    CircuitConfig,
    register_sizes,
    run_period_finding,
    trace,
)
from .sequences import LinearFamily, Polynomial, QuadraticFamily, closed_form_context, closed_form_g
from .verify import SUITES, run_suite

OK, USAGE, NONE_FOUND = 0, 1, 2
TOP_OUTCOMES = 12
STAGES = ("psi0", "psi1", "psi2", "psi3", "psi4", "psi5")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE)


def _natural(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text}")
    return value


def _integer(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal integer: {text!r}") from None


def _backend(args):
    if args.backend == "circuit":
        return CircuitBackend(seed=args.seed, max_attempts=args.attempts)
    return ClassicalBackend()


def _emit(args, payload: dict, lines: list[str], diagnostics: list[str] = ()) -> None:
    if args.output == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
        return
    for line in lines:
        print(line)
    for line in diagnostics:
        print(line, file=sys.stderr)


def _diag_lines(diag: dict) -> list[str]:
    return [f"  {k}: {v}" for k, v in diag.items()]


def _report_result(args, res: FactorResult, backend=None) -> int:
    payload = res.to_dict()
    if backend is not None and getattr(backend, "history", None):
        payload["backend_history"] = backend.history
    if res.found:
        line = f"{res.algorithm}: {res.N} = {res.factor} * {res.N // res.factor}"
    else:
        line = f"{res.algorithm}: no factor of {res.N} found"
    _emit(args, payload, [line], _diag_lines(res.diagnostics))
    return OK if res.found else NONE_FOUND


def cmd_factor(args) -> int:
    if args.N < 2:
        raise UsageError("N must be >= 2")
    config = FactorConfig(trial_bound=args.trial_bound, attempts=args.attempts, seed=args.seed)
    if args.backend == "circuit":
        config.backend = CircuitBackend(seed=args.seed, max_attempts=args.attempts)
    fz = factor(args.N, config)
    diag = [f"  {json.dumps(step, sort_keys=True)}" for step in fz.steps]
    text = f"{args.N} = {fz}"
    if len(fz.factors) == 1 and fz.factors[0].exponent == 1 and fz.complete:
        text += " (prime)"
    if not fz.complete:
        text += f"  [unfactored remainder {fz.remainder}]"
    _emit(args, fz.to_dict(), [text], diag)
    return OK if fz.complete else NONE_FOUND


def cmd_rho(args) -> int:
    return _report_result(args, pollard_rho_classical(args.n, Polynomial.raw(args.e, args.c), args.x0))


def cmd_qrho(args) -> int:
    family = QuadraticFamily(args.a, args.b, args.n)
    backend = _backend(args)
    return _report_result(args, quantum_rho(args.n, family, args.x0, backend, r=args.r), backend)


def cmd_shor(args) -> int:
    backend = _backend(args)
    return _report_result(args, shor(args.x, args.n, backend), backend)


def cmd_xshor(args) -> int:
    backend = _backend(args)
    return _report_result(args, extended_shor(args.x, args.n, backend), backend)


def cmd_qrho_linear(args) -> int:
    backend = _backend(args)
    return _report_result(args, quantum_rho_linear(args.a, args.n, backend), backend)


def _coprime_split(N: int, A: int | None) -> tuple[int, int]:
    if A is not None:
        if A < 2 or N % A or math.gcd(A, N // A) != 1 or A == N:
            raise UsageError(f"{A} does not give a coprime split of {N}")
        return A, N // A
    fz = factor(N)
    if not fz.complete:
        raise UsageError(f"could not factor {N} to find a coprime split")
    if len(fz.factors) < 2:
        raise UsageError(f"{N} is a prime or prime power; no coprime split exists")
    A = fz.factors[0].value
    return A, N // A


def cmd_analyze(args) -> int:
    A, B = _coprime_split(args.N, args.split)
    poly = Polynomial.raw(args.e, args.c)
    rep = verify_characterization(poly, args.x0, A, B)
    payload = {"polynomial": str(poly), "x0": args.x0, **rep.to_dict()}
    lines = [
        f"N = {rep.N} = {A} * {B}, f(x) = {poly} (mod N), x0 = {args.x0}",
        f"mu = {rep.mu}, lambda = {rep.lam}, lambda_A = {rep.lambda_A}, lambda_B = {rep.lambda_B}",
        "distinguishing primes: "
        + (", ".join(f"{d.t} ({d.e_A} vs {d.e_B})" for d in rep.distinguishing) or "none"),
    ]
    if rep.m is None:
        lines.append("cycle lengths equal: no nontrivial collision exists on this cycle")
    else:
        w = rep.witness
        lines.append(f"m = {rep.m}: pair ({w.i}, {w.j}) gives gcd {w.gcd_value} ({w.kind.value})")
        for t, pw in rep.per_prime:
            lines.append(f"  t = {t}: offset {pw.j - pw.i}, pair ({pw.i}, {pw.j}) gives gcd {pw.gcd_value} ({pw.kind.value})")
        if rep.counterexamples:
            lines.append(f"in-cycle elements without a proper factor: {rep.counterexamples}")
    found = rep.witness is not None and rep.witness.kind.value == "nontrivial"
    _emit(args, payload, lines)
    return OK if found else NONE_FOUND


def cmd_simulate(args) -> int:
    N = args.N
    n, ell = register_sizes(N)
    if ell > MAX_ELL:
        raise UsageError(
            f"N = {N} needs ell = {ell} > {MAX_ELL} qubits; use the oracle backend (qrho/qrho-linear) instead"
        )
    if args.linear is not None:
        family = LinearFamily(args.linear, N)
        anchor_index = 0
        setup = {"family": "linear", "a": family.a}

        def g(i: int) -> int:
            return pow(family.a, i, N)

    else:
        family = QuadraticFamily(args.a, args.b, N)
        ctx = closed_form_context(family, args.x0)
        anchor_index = N
        setup = {"family": "quadratic", "a": family.a, "b": family.b, "x0": ctx.x0, "alpha": ctx.alpha, "r": ctx.r}

        def g(i: int) -> int:
            return closed_form_g(ctx, i)

    config = CircuitConfig.build(N, g, shift=anchor_index, seed=args.seed)
    stages = tuple(args.stage) if args.stage else STAGES
    snapshot = trace(config, stages, entries=bool(args.stage or args.trace))
    period, measurements = run_period_finding(config, args.attempts, np.random.default_rng(args.seed))

    anchor = g(anchor_index)
    result = None
    tried = []
    for d in divisors(period, N):
        j = anchor_index + period // d
        w = classify(g(j), anchor, N, anchor_index, j)
        tried.append({"d": d, "pair": [anchor_index, j], "values": [g(j), anchor], "gcd": w.gcd_value})
        if w.kind.value == "nontrivial":
            result = w.gcd_value
            break

    if args.trace:
        with open(args.trace, "w") as fh:
            json.dump(snapshot, fh, sort_keys=True)
    if not args.stage and args.trace:
        # the file gets amplitude listings, stdout only the summaries
        snapshot = {**snapshot, "stages": [{k: v for k, v in st.items() if k != "entries"} for st in snapshot["stages"]]}
    payload = {
        "setup": setup,
        "trace": snapshot,
        "measurements": measurements,
        "r_g": period,
        "tried": tried,
        "factor": result,
    }
    support = snapshot["distribution"]
    top = sorted(support.items(), key=lambda kv: (-kv[1], int(kv[0])))[:TOP_OUTCOMES]
    dist = ", ".join(f"{c}: {p:.6f}" for c, p in sorted(top, key=lambda kv: int(kv[0])))
    if len(support) > TOP_OUTCOMES:
        dist += f", ... ({len(support)} outcomes in support)"
    lines = [f"N = {N}, n = {n}, ell = {ell}, shift = {config.shift}, setup = {setup}"]
    for st in snapshot["stages"]:
        classes = st["classes"]
        shown = ", ".join(list(classes)[:8]) + (", ..." if len(classes) > 8 else "")
        lines.append(f"{st['label']}: support {st['support_size']}, third-register classes {{{shown}}}")
    lines.append(f"outcome distribution: {{{dist}}}")
    lines.append("measurements: " + ", ".join(f"c={m['c']} -> {m['q']}" for m in measurements))
    lines.append(f"r_g = {period}")
    for t in tried:
        lines.append(f"d = {t['d']}: gcd({t['values'][0]} - {t['values'][1]}, {N}) = {t['gcd']}")
    lines.append(f"factor: {result}" if result else "no factor found")
    _emit(args, payload, lines)
    return OK if result else NONE_FOUND


def cmd_verify(args) -> int:
    res = run_suite(args.suite, args.bound, args.seed)
    lines = [res.summary()]
    lines += [f"  counterexample: {json.dumps(c, sort_keys=True)}" for c in res.counterexamples]
    _emit(args, res.to_dict(), lines)
    return OK if res.passed else NONE_FOUND


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=_natural, default=0)
    common.add_argument("--backend", choices=("oracle", "circuit"), default="oracle")
    common.add_argument("--attempts", type=_natural, default=16)

    parser = _Parser(prog="qrho", description="Pollard-rho / Shor factoring with simulated period finding")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("factor", parents=[common], help="full prime-power factorization")
    p.add_argument("N", type=_natural)
    p.add_argument("--trial-bound", type=_natural, default=10_000)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("rho", parents=[common], help="classical Pollard rho with Floyd")
    p.add_argument("--n", type=_natural, required=True)
    p.add_argument("--e", type=_natural, default=2)
    p.add_argument("--c", type=_integer, default=1)
    p.add_argument("--x0", type=_natural, default=2)
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("qrho", parents=[common], help="quantum rho, quadratic family")
    p.add_argument("--n", type=_natural, required=True)
    p.add_argument("--a", type=_integer, default=1)
    p.add_argument("--b", type=_integer, default=2)
    p.add_argument("--x0", type=_natural, default=2)
    p.add_argument("--r", type=_natural, default=None, help="known ord(alpha, N) (skips the order query)")
    p.set_defaults(func=cmd_qrho)

    for name, func, help_ in (
        ("shor", cmd_shor, "Shor's algorithm"),
        ("xshor", cmd_xshor, "Shor extended to small prime divisors of the order"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--x", type=_natural, required=True)
        p.add_argument("--n", type=_natural, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("qrho-linear", parents=[common], help="quantum rho, linear family a^i")
    p.add_argument("--a", type=_natural, required=True)
    p.add_argument("--n", type=_natural, required=True)
    p.set_defaults(func=cmd_qrho_linear)

    p = sub.add_parser("analyze", parents=[common], help="cycle lengths and collision characterization")
    p.add_argument("N", type=_natural)
    p.add_argument("--e", type=_natural, default=2)
    p.add_argument("--c", type=_integer, default=1)
    p.add_argument("--x0", type=_natural, default=2)
    p.add_argument("--split", type=_natural, default=None, help="coprime divisor A to use (default: smallest prime power)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", parents=[common], help="simulate the period-finding circuit")
    p.add_argument("N", type=_natural)
    p.add_argument("--a", type=_integer, default=1)
    p.add_argument("--b", type=_integer, default=2)
    p.add_argument("--x0", type=_natural, default=2)
    p.add_argument("--linear", type=_natural, default=None, metavar="A", help="use the linear family i -> A^i")
    p.add_argument("--stage", action="append", choices=STAGES, help="stages to include (repeatable)")
    p.add_argument("--trace", metavar="PATH", help="also write the stage trace JSON here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--bound", type=_natural, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, NotCoprimeError, ValueError, CapacityError) as exc:
        print(f"qrho {args.command}: error: {exc}", file=sys.stderr)
        return USAGE
    except BackendFailure as exc:
        print(f"qrho {args.command}: backend failure: {exc}", file=sys.stderr)
        return NONE_FOUND


if __name__ == "__main__":
    sys.exit(main())
