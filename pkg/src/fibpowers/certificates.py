"""JSON-lines certificates and their offline re-verification.

Each record is {"schema", "stage", "inputs", "outputs", "hash", "meta"}.  The
hash is the SHA-256 of the canonical JSON of stage, inputs and outputs, so it
does not depend on the timing data kept in "meta".  Big integers are stored
as hex strings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import gmpy2
import mpmath
from sympy import primerange

from .bounds import theta
from .kraus import KrausCertificate, verify_certificate
from .powertest import PowerWitness, exponent_cap
from .seqcore import SeqKind
from .sieve import ResidueClassSet, SieveSession, refine
from .threelog import ThreeLogParams, maurice_check

SCHEMA_VERSION = 1
STAGES = ("powertest", "kraus", "sieve", "bounds", "threelog")


def payload_hash(stage: str, inputs: dict, outputs: dict) -> str:
    blob = json.dumps({"stage": stage, "inputs": inputs, "outputs": outputs},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def make_record(stage: str, inputs: dict, outputs: dict, meta: dict | None = None) -> dict:
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    rec = {"schema": SCHEMA_VERSION, "stage": stage, "inputs": inputs, "outputs": outputs,
           "hash": payload_hash(stage, inputs, outputs)}
    if meta:
        rec["meta"] = meta
    return rec


def dumps(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def write_records(path: str, records: Iterable[dict], append: bool = False) -> int:
    n = 0
    with open(path, "a" if append else "w") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")
            n += 1
    return n


def read_records(path: str) -> Iterator[tuple[int, dict | None, str | None]]:
    """Yield (line number, record, parse error) for every nonblank line."""
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield i, json.loads(line), None
            except json.JSONDecodeError as exc:
                yield i, None, f"invalid JSON: {exc}"


# ---------------------------------------------------------------------------
# Record builders

def powertest_record(kind: SeqKind, n: int, witnesses: list[PowerWitness]) -> dict:
    return make_record("powertest", {"kind": kind.value, "n": n},
                       {"witnesses": [[w.p, hex(w.l)] for w in sorted(witnesses, key=lambda w: w.p)]})


def kraus_record(cert: KrausCertificate) -> dict:
    d = cert.to_json()
    meta = {"elapsed_ms": d.pop("elapsed_ms")}
    inputs = {"kind": d["kind"], "p": d["p"]}
    outputs = {k: v for k, v in d.items() if k not in inputs}
    return make_record("kraus", inputs, outputs, meta)


def sieve_record(s: SieveSession) -> dict:
    ck = s.to_checkpoint()
    inputs = {"kind": ck["kind"], "p": ck["p"], "q": ck["q"], "pairs": ck["pairs"],
              "n_max_log": mpmath.nstr(mpmath.mpf(s.n_max_log), 40) if s.n_max_log is not None else None}
    outputs = {"modulus_hex": ck["modulus_hex"], "residues_hex": ck["residues_hex"],
               "lower_bound_hex": ck["lower_bound_hex"], "status": ck["status"]}
    return make_record("sieve", inputs, outputs)


def bounds_record(kind: SeqKind, p: int) -> dict:
    th, nm = theta(kind, p)
    return make_record("bounds", {"kind": kind.value, "p": p},
                       {"log_theta": mpmath.nstr(th.ln_value, 40),
                        "log_n_max": mpmath.nstr(nm.ln_value, 40)})


def threelog_record(params: ThreeLogParams, variant: str) -> dict:
    v = maurice_check(params, variant)
    return make_record("threelog", {"params": params.to_json(), "variant": variant},
                       {"conditions": v.conditions, "structural": v.structural, "passed": v.passed})


# ---------------------------------------------------------------------------
# Verification

def _verify_powertest(inp: dict, out: dict) -> list[str]:
    kind, n = SeqKind.parse(inp["kind"]), int(inp["n"])
    problems = []
    listed = {}
    for p, l_hex in out["witnesses"]:
        listed[int(p)] = int(l_hex, 16)
    needed = set(primerange(2, exponent_cap(n) + 1))
    missing = needed - listed.keys()
    if missing:
        problems.append(f"n={n}: no witness for p in {sorted(missing)[:5]}")
    term = gmpy2.fib(n) if kind is SeqKind.FIB else gmpy2.lucas(n)
    for p, l in listed.items():
        ok = (gmpy2.is_prime(p) and gmpy2.is_prime(l) and l % 5 in (1, 4) and (l - 1) % p == 0)
        if ok:
            v = int(term % l)
            ok = v != 0 and pow(v, (l - 1) // p, l) != 1
        if not ok:
            problems.append(f"n={n}, p={p}: witness l={l} does not re-check")
    return problems


def _verify_kraus(inp: dict, out: dict) -> list[str]:
    cert = KrausCertificate.from_json({**out, **inp})
    return verify_certificate(cert)


def _verify_sieve(inp: dict, out: dict) -> list[str]:
    kind = SeqKind.parse(inp["kind"])
    q = int(inp["q"])
    current = ResidueClassSet(6, (1, 5))
    for l, ql in inp["pairs"]:
        if int(ql) != q:
            return [f"pair ({l}, {ql}) uses a different q"]
        current = refine(current, kind, int(l), q)
    problems = []
    if current.modulus != int(out["modulus_hex"], 16):
        problems.append("modulus differs from the re-derived lcm of K(l)")
    if list(current.residues) != [int(r, 16) for r in out["residues_hex"]]:
        problems.append("residue set differs from the re-derived N(S)")
    a = current.lower_bound()
    stated = out.get("lower_bound_hex")
    if (hex(a) if a is not None else None) != stated:
        problems.append("lower bound differs")
    if out.get("status") == "contradiction":
        if inp.get("n_max_log") is None or a is None:
            problems.append("contradiction claimed without n_max")
        else:
            with mpmath.workdps(60):
                if not mpmath.log(a) > mpmath.mpf(inp["n_max_log"]):
                    problems.append("lower bound does not exceed n_max")
    return problems


def _verify_bounds(inp: dict, out: dict) -> list[str]:
    th, nm = theta(inp["kind"], int(inp["p"]))
    problems = []
    with mpmath.workdps(60):
        for key, val in (("log_theta", th.ln_value), ("log_n_max", nm.ln_value)):
            if abs(mpmath.mpf(out[key]) - val) > mpmath.mpf(10) ** -30 * (1 + abs(val)):
                problems.append(f"{key} differs")
    return problems


def _verify_threelog(inp: dict, out: dict) -> list[str]:
    v = maurice_check(ThreeLogParams.from_json(inp["params"]), inp.get("variant", "prop"))
    problems = []
    if v.conditions != out["conditions"] or v.passed != out["passed"]:
        problems.append("condition verdicts differ")
    return problems


_VERIFIERS = {"powertest": _verify_powertest, "kraus": _verify_kraus, "sieve": _verify_sieve,
              "bounds": _verify_bounds, "threelog": _verify_threelog}


@dataclass
class RecordResult:
    line: int
    stage: str | None
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def verify_record(rec: dict) -> list[str]:
    """Re-check one record; returns the list of problems (empty when sound)."""
    try:
        if rec.get("schema") != SCHEMA_VERSION:
            return [f"unsupported schema {rec.get('schema')!r}"]
        stage, inp, out = rec["stage"], rec["inputs"], rec["outputs"]
        problems = []
        if payload_hash(stage, inp, out) != rec.get("hash"):
            problems.append("hash mismatch")
        if stage not in _VERIFIERS:
            return problems + [f"unknown stage {stage!r}"]
        return problems + _VERIFIERS[stage](inp, out)
    except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
        return [f"malformed record: {type(exc).__name__}: {exc}"]


def verify_file(path: str) -> list[RecordResult]:
    """Re-check every record, isolating failures per record."""
    results = []
    for line, rec, err in read_records(path):
        if err:
            results.append(RecordResult(line, None, [err]))
            continue
        results.append(RecordResult(line, rec.get("stage") if isinstance(rec, dict) else None,
                                    verify_record(rec) if isinstance(rec, dict) else ["not an object"]))
    return results

