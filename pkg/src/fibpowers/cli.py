"""Command-line entry point.

Data goes to standard output (JSON or JSON-lines), progress to standard
error.  Exit codes: 0 success, 2 I/O error, 3 configuration error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import mpmath

from . import certificates as certs
from .bounds import DEFAULT_PREC, theta
from .kraus import DEFAULT_K_MAX, kraus_search
from .powertest import DEFAULT_L_BUDGET, min_index, scan_range
from .seqcore import DomainError, SeqKind
from .sieve import SieveSession, run_sieve
from .threelog import ZERO_LEMMA_VARIANTS, ThreeLogParams, fib_p_reduction, maurice_check

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_VERIFY = 0, 2, 3, 4


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    args: argparse.Namespace

    def validate(self) -> None:
        a = self.args
        if getattr(a, "workers", 1) < 1:
            raise ConfigError("workers must be at least 1")
        if self.command == "scan" and a.min_n is not None and a.max_n < a.min_n:
            raise ConfigError("empty n range")
        if self.command == "kraus" and a.p_max < a.p_min:
            raise ConfigError("empty p range")


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _emit_records(records, out: str | None) -> int:
    if out:
        return certs.write_records(out, records)
    n = 0
    for rec in records:
        sys.stdout.write(certs.dumps(rec) + "\n")
        n += 1
    return n


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# Commands

def cmd_scan(a) -> int:
    kind = SeqKind.parse(a.seq)
    lo = a.min_n if a.min_n is not None else min_index(kind)
    t0 = time.perf_counter()
    report = scan_range(kind, lo, a.max_n, workers=a.workers, l_budget=a.l_budget)
    by_n: dict[int, list] = {}
    for w in report.witnesses:
        by_n.setdefault(w.n, []).append(w)
    records = [certs.powertest_record(kind, n, by_n.get(n, [])) for n in range(lo, a.max_n + 1)]
    _emit_records(records, a.out)
    summary = {"kind": kind.value, "n_lo": lo, "n_hi": a.max_n, "checked": report.checked,
               "failures": [list(f) for f in report.failures],
               "elapsed_s": round(time.perf_counter() - t0, 3)}
    if a.out:
        _print_json(summary)
    else:
        _progress(json.dumps(summary))
    return EXIT_OK if report.ok else EXIT_VERIFY


def _kraus_task(args):
    kind, p, k_max = args
    return p, kraus_search(kind, p, k_max)


def cmd_kraus(a) -> int:
    from sympy import primerange
    kind = SeqKind.parse(a.seq)
    ps = list(primerange(max(a.p_min, 7), a.p_max + 1))
    tasks = [(kind, p, a.k_max) for p in ps]
    if a.workers > 1:
        with ProcessPoolExecutor(max_workers=a.workers) as pool:
            results = list(pool.map(_kraus_task, tasks, chunksize=8))
    else:
        results = [_kraus_task(t) for t in tasks]
    missing = [p for p, c in results if c is None]
    _emit_records([certs.kraus_record(c) for _, c in results if c is not None], a.out)
    summary = {"kind": kind.value, "primes": len(ps), "certified": len(ps) - len(missing),
               "missing": missing}
    if a.out:
        _print_json(summary)
    else:
        _progress(json.dumps(summary))
    return EXIT_OK if not missing else EXIT_VERIFY


def _sieve_session(a, kind: SeqKind) -> SieveSession:
    if a.n_max_log10 is not None:
        n_max_log = float(mpmath.mpf(a.n_max_log10) * mpmath.log(10))
    else:
        n_max_log = theta(kind, a.p, a.precision)[1].ln_value
    session = None
    if a.resume:
        if not a.checkpoint:
            raise ConfigError("--resume needs --checkpoint")
        session = SieveSession.load(a.checkpoint)
        if session.kind is not kind or session.p != a.p or session.q != a.q:
            raise ConfigError("checkpoint belongs to a different run")

    def progress(s: SieveSession, l: int) -> None:
        _progress(f"l={l} |N|={len(s.n_set)} log10(a)={s.log10_lower_bound():.4f}")

    checkpoint = (lambda s: s.save(a.checkpoint)) if a.checkpoint else None
    s = run_sieve(kind, a.p, a.q, n_max_log=n_max_log, max_prime=a.max_prime, l_max=a.l_max,
                  session=session, progress=progress, checkpoint=checkpoint)
    if checkpoint:
        checkpoint(s)
    return s


def _sieve_summary(s: SieveSession) -> dict:
    a = s.lower_bound
    return {"kind": s.kind.value, "p": s.p, "q": s.q, "status": s.status,
            "pairs": len(s.pairs), "modulus_hex": hex(s.k_s),
            "residues_hex": [hex(r) for r in s.n_set.residues],
            "lower_bound": str(a) if a is not None else None,
            "log10_lower_bound": s.log10_lower_bound(),
            "log10_n_max": float(mpmath.mpf(s.n_max_log) / mpmath.log(10))
            if s.n_max_log is not None else None}


def cmd_sieve(a) -> int:
    kind = SeqKind.parse(a.seq)
    t0 = time.perf_counter()
    s = _sieve_session(a, kind)
    if a.out:
        certs.write_records(a.out, [certs.sieve_record(s)])
    summary = _sieve_summary(s)
    summary["elapsed_s"] = round(time.perf_counter() - t0, 3)
    _print_json(summary)
    return EXIT_OK if s.status == "contradiction" else EXIT_VERIFY


def cmd_bounds(a) -> int:
    kind = SeqKind.parse(a.seq)
    th, nm = theta(kind, a.p, a.precision)
    rec = certs.bounds_record(kind, a.p)
    if a.out:
        certs.write_records(a.out, [rec])
    _print_json({"kind": kind.value, "p": a.p, "log10_theta": th.log10, "log10_n_max": nm.log10})
    return EXIT_OK


def cmd_threelog_check(a) -> int:
    with open(a.params) as fh:
        try:
            params = ThreeLogParams.from_json(json.load(fh))
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad parameter block: {exc}") from exc
    v = maurice_check(params, a.variant)
    if a.out:
        certs.write_records(a.out, [certs.threelog_record(params, a.variant)])
    _print_json({"conditions": v.conditions, "structural": v.structural, "passed": v.passed,
                 "o_lhs": mpmath.nstr(v.o_lhs, 20), "o_rhs": mpmath.nstr(v.o_rhs, 20),
                 "lambda_prime_log_bound": mpmath.nstr(v.lambda_prime_log_bound, 20)
                 if v.lambda_prime_log_bound is not None else None,
                 "windows": {k: (int(x) if isinstance(x, int) else float(x))
                             for k, x in v.degenerate_cases.items()},
                 "assumptions": list(v.assumptions)})
    return EXIT_OK if v.passed else EXIT_VERIFY


def cmd_threelog_reduce(a) -> int:
    if SeqKind.parse(a.seq) is not SeqKind.FIB:
        raise ConfigError("the three-logarithm reduction is implemented for --seq fib")
    trace = fib_p_reduction(max_iter=a.max_iter, variant=a.variant)
    for i, step in enumerate(trace.steps, 1):
        _progress(f"pass {i}: p < {float(step.p_out):.6g}")
    final = float(trace.final_bound)
    _print_json({"matveev_bound": float(trace.p_matveev), "converged": trace.converged,
                 "steps": [s.summary() for s in trace.steps], "final_bound": final,
                 "below_2e8": final < 2e8})
    return EXIT_OK if trace.converged and final < 2e8 else EXIT_VERIFY


def cmd_certify(a) -> int:
    """Kraus certificate, analytic bound and sieve for a single exponent p."""
    kind = SeqKind.parse(a.seq)
    records = []
    cert = kraus_search(kind, a.p, a.k_max)
    if cert is not None:
        records.append(certs.kraus_record(cert))
    records.append(certs.bounds_record(kind, a.p))
    s = _sieve_session(a, kind)
    records.append(certs.sieve_record(s))
    _emit_records(records, a.out)
    ok = cert is not None and s.status == "contradiction"
    summary = {"kind": kind.value, "p": a.p, "kraus": cert is not None, "sieve": s.status,
               "certified": ok}
    if a.out:
        _print_json(summary)
    else:
        _progress(json.dumps(summary))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_verify(a) -> int:
    results = certs.verify_file(a.input)
    bad = [r for r in results if not r.ok]
    for r in bad:
        _print_json({"line": r.line, "stage": r.stage, "problems": r.problems})
    _progress(json.dumps({"records": len(results), "failed": len(bad)}))
    return EXIT_VERIFY if bad or not results else EXIT_OK


# ---------------------------------------------------------------------------
# Parser and configuration

def build_parser() -> _Parser:
    parser = _Parser(prog="fibpowers", description="Perfect powers in Fibonacci and Lucas sequences")
    parser.add_argument("--config", help="key=value file; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def seq(p):
        p.add_argument("--seq", choices=("fib", "lucas"), required=True)

    def out(p):
        p.add_argument("--out", help="certificate file (JSON-lines)")

    p = sub.add_parser("scan", help="witness primes for small indices")
    seq(p)
    out(p)
    p.add_argument("--min-n", type=int, default=None)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--l-budget", type=int, default=DEFAULT_L_BUDGET)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("kraus", help="Kraus certificates for a range of exponents")
    seq(p)
    out(p)
    p.add_argument("--p-min", type=int, default=7)
    p.add_argument("--p-max", type=int, required=True)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_kraus)

    def sieve_args(p):
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--q", type=int, default=5)
        p.add_argument("--n-max-log10", type=float, default=None,
                       help="override the analytic upper bound for n (log base 10)")
        p.add_argument("--max-prime", type=int, default=1000)
        p.add_argument("--l-max", type=int, default=10 ** 7)
        p.add_argument("--checkpoint")
        p.add_argument("--resume", action="store_true")
        p.add_argument("--precision", type=int, default=DEFAULT_PREC)

    p = sub.add_parser("sieve", help="residue-class sieve lower bound for n")
    seq(p)
    out(p)
    sieve_args(p)
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("bounds", help="analytic upper bound for n")
    seq(p)
    out(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--precision", type=int, default=DEFAULT_PREC)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("threelog", help="three-logarithm checker and exponent reduction")
    tsub = p.add_subparsers(dest="threelog_command", required=True, parser_class=_Parser)
    c = tsub.add_parser("check")
    c.add_argument("--params", required=True)
    c.add_argument("--variant", choices=ZERO_LEMMA_VARIANTS, default="prop")
    out(c)
    c.set_defaults(func=cmd_threelog_check)
    r = tsub.add_parser("reduce")
    seq(r)
    r.add_argument("--variant", choices=ZERO_LEMMA_VARIANTS, default="prop")
    r.add_argument("--max-iter", type=int, default=12)
    r.set_defaults(func=cmd_threelog_reduce)

    p = sub.add_parser("certify", help="Kraus, bound and sieve records for one exponent")
    seq(p)
    out(p)
    sieve_args(p)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="re-check a certificate file")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def _all_parsers(parser: argparse.ArgumentParser):
    yield parser
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for child in action.choices.values():
                yield from _all_parsers(child)


def read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{i}: expected key=value")
            key, value = (x.strip() for x in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    """Install config values as parser defaults (so explicit flags win)."""
    used = set()
    for p in _all_parsers(parser):
        for action in p._actions:
            if action.dest in values:
                v = values[action.dest]
                if isinstance(action, argparse._StoreTrueAction):
                    v = v.lower() in ("1", "true", "yes", "on")
                action.default = v
                action.required = False
                used.add(action.dest)
    unknown = set(values) - used
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")


def parse(argv) -> RunConfig:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        apply_config(parser, read_config(known.config))
    args = parser.parse_args(argv)
    cfg = RunConfig(args.command, args)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse(argv)
        return cfg.args.func(cfg.args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
