#!/usr/bin/env python3
"""
cli.py · fairdiv
Fair allocation of indivisible goods and chores from the command line.

Usage
─────
▸ solve:       python cli.py solve --method ef1po|ef1po-zeros|mms|mmspo -f inst.json [--trace run.jsonl]
▸ check:       python cli.py check --property ef1|ef|mms|po -f inst.json --allocation alloc.json [--oracle]
▸ MMS value:   python cli.py mms-value --agent 1 -f inst.json [--oracle] [--bundles k]
▸ generate:    python cli.py gen --class wolex --kind goods -n 3 -m 9 --seed 7
▸ self-check:  python cli.py fixtures

Without -f the instance document is read from stdin (paste, finish with END).
Standard output carries JSON documents only; progress goes to stderr.

Exit status: 0 ok / property holds · 1 property fails · 2 bad input or
oracle budget · 3 class/method mismatch · 4 internal invariant failure.
"""

# ── stdlib
import argparse, sys
from pathlib import Path

# ── local
from fairdiv.core import (ClassMismatch, ClassTag, FairDivError, Instance, InstanceError,
                          InvariantViolation, Kind, allocation_to_doc, dumps, instance_to_doc,
                          parse_allocation, parse_instance)
from fairdiv.fairness import Property, is_ef, is_ef1, is_mms_alloc
from fairdiv.fisher import solve_ef1_po, solve_ef1_po_with_zeros
from fairdiv.fixtures import run_fixtures
from fairdiv.gen import GenSpec, generate
from fairdiv.mms import mms_benchmark, mms_partition_factored, solve_mms
from fairdiv.oracle import EnumerationBudget, exact_mms, is_po_bruteforce
from fairdiv.pareto import po_by_cycles, solve_mms_po
from fairdiv.utils import jsonable, log, trace_path, write_trace

METHODS = ("ef1po", "ef1po-zeros", "mms", "mmspo")
MARKET  = ("ef1po", "ef1po-zeros")


# ── input / output ──────────────────────────────────────────────────────
def read_text(path) -> str:
    if path:
        return Path(path).read_text(encoding="utf-8")
    if sys.stdin.isatty():
        log("Paste instance JSON, finish with END on its own line:")
    lines = []
    for ln in sys.stdin:
        if ln.strip().upper() == "END":
            break
        lines.append(ln)
    return "".join(lines)


def read_instance(args) -> Instance:
    try:
        text = read_text(args.file)
    except OSError as e:
        raise InstanceError(f"cannot read instance: {e}") from None
    if not text.strip():
        raise InstanceError("no instance document provided")
    return parse_instance(text)


def emit(doc: dict):
    print(dumps(jsonable(doc)), flush=True)


# ── certificates ────────────────────────────────────────────────────────
def po_report(inst: Instance, alloc, budget: EnumerationBudget) -> dict:
    """Exhaustive PO verdict within budget, exchange cycles beyond it."""
    if budget.allows(inst.n, inst.m):
        doc = is_po_bruteforce(inst, alloc, budget).to_doc(inst)
        doc["via"] = "oracle"
        return doc
    return cycles_report(inst, alloc)


def cycles_report(inst: Instance, alloc) -> dict:
    doc = po_by_cycles(inst, alloc).to_doc(inst)
    doc["via"] = "exchange-cycles"
    return doc


def mms_report(inst: Instance, alloc, oracle: bool = False, budget=None) -> dict:
    if oracle:
        values = tuple(exact_mms(row, inst.n, budget)[0] for row in inst.valuations)
        work = inst
    else:
        work, values = mms_benchmark(inst)
    doc = is_mms_alloc(work, alloc, values).to_doc(inst)
    doc["mms_values"] = list(values)
    if work is not inst:
        doc["canonical"] = True            # values are on the canonical wolex rows
    return doc


def certify(inst: Instance, alloc, method: str) -> dict:
    budget = EnumerationBudget()
    certs = {"ef1": is_ef1(inst, alloc).to_doc(inst)}
    required = ["ef1", "po"] if method in MARKET else []
    if method in ("mms", "mmspo"):
        certs["mms"] = mms_report(inst, alloc)
        required.append("mms")
    if method == "mmspo":
        required.append("po")
    try:
        certs["po"] = po_report(inst, alloc, budget)
    except ClassMismatch as e:
        if "po" in required:
            raise
        # informational for plain mms
        certs["po"] = {"property": "po", "holds": None, "via": "unavailable", "reason": str(e)}
    failed = [k for k in required if not certs[k]["holds"]]
    if failed:
        raise InvariantViolation(f"{method} output fails its own certificate(s): {', '.join(failed)}")
    return certs


# ── subcommands ─────────────────────────────────────────────────────────
def cmd_solve(args) -> int:
    inst = read_instance(args)
    log(f"🧮 {args.method}: n={inst.n}, m={inst.m}, {inst.kind.value}")
    extra = {}
    if args.method in MARKET:
        if inst.kind is not Kind.CHORES:
            raise ClassMismatch(f"{args.method} needs a bivalued chores instance")
        solver = solve_ef1_po if args.method == "ef1po" else solve_ef1_po_with_zeros
        result = solver(inst)
        alloc = result.allocation
        extra = {"p": result.p, "prices": list(result.prices), "price_drops": result.phase3_runs}
        if args.trace:
            path = write_trace(trace_path(args.trace), result.trace)
            log(f"📝 trace → {path}")
    elif args.method == "mms":
        alloc = solve_mms(inst)
    else:
        alloc = solve_mms_po(inst)
    log("🔍 certifying …")
    doc = allocation_to_doc(inst, alloc, certify(inst, alloc, args.method))
    if extra:
        doc["market"] = extra
    emit(doc)
    log("✅ done")
    return 0


def cmd_check(args) -> int:
    inst = read_instance(args)
    try:
        alloc = parse_allocation(Path(args.allocation).read_text(encoding="utf-8"), inst)
    except OSError as e:
        raise InstanceError(f"cannot read allocation: {e}") from None
    prop = Property(args.property)
    if prop is Property.EF:
        doc = is_ef(inst, alloc).to_doc(inst)
    elif prop is Property.EF1:
        doc = is_ef1(inst, alloc).to_doc(inst)
    elif prop is Property.MMS:
        doc = mms_report(inst, alloc, oracle=args.oracle)
    elif args.oracle:
        doc = is_po_bruteforce(inst, alloc).to_doc(inst)
        doc["via"] = "oracle"
    else:
        doc = cycles_report(inst, alloc)
    emit(doc)
    log(("✅ " if doc["holds"] else "❌ ") + f"{prop.value} {'holds' if doc['holds'] else 'fails'}")
    return 0 if doc["holds"] else 1


def agent_index(inst: Instance, ref: str) -> int:
    if ref.isdigit():
        i = int(ref) - 1
        if not 0 <= i < inst.n:
            raise InstanceError(f"agent {ref} out of range 1..{inst.n}")
        return i
    if ref not in inst.agents:
        raise InstanceError(f"unknown agent {ref!r}")
    return inst.agents.index(ref)


def cmd_mms_value(args) -> int:
    inst = read_instance(args)
    i = agent_index(inst, args.agent)
    k = args.bundles or inst.n
    if k < 1:
        raise InstanceError("--bundles must be at least 1")
    row = inst.valuations[i]
    if args.oracle:
        value, part = exact_mms(row, k)
    else:
        part = mms_partition_factored(row, k)
        value = part.min_value
    emit({"agent": inst.agents[i], "bundles": k, "value": value,
          "partition": [[inst.items[r] for r in sorted(b)] for b in part.bundles],
          "via": "oracle" if args.oracle else "greedy"})
    return 0


def cmd_gen(args) -> int:
    spec = GenSpec(ClassTag(args.cls), Kind(args.kind), args.n, args.m, seed=args.seed,
                   p=args.p, tiers=args.tiers)
    emit(instance_to_doc(generate(spec)))
    return 0


def cmd_fixtures(args) -> int:
    results = run_fixtures()
    for r in results:
        log(("✅ " if r.passed else "❌ ") + r.name)
    emit({"fixtures": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]})
    return 0 if all(r.passed for r in results) else 1


# ── main ────────────────────────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Random seed (gen)")
    common.add_argument("--trace", help="Write the solver event log here (ef1po)")
    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("-f", "--file", help="Instance JSON file (default: stdin)")

    ap = argparse.ArgumentParser(description="Fair division solvers and checkers")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, source], help="Compute a fair allocation")
    p.add_argument("--method", required=True, choices=METHODS)
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("check", parents=[common, source], help="Test an allocation")
    p.add_argument("--property", required=True, choices=[x.value for x in Property if x is not Property.PEF1])
    p.add_argument("--allocation", required=True, help="Allocation JSON file")
    p.add_argument("--oracle", action="store_true", help="Use the brute-force oracle")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("mms-value", parents=[common, source], help="Maximin share of one agent")
    p.add_argument("--agent", required=True, help="1-based index or agent name")
    p.add_argument("--bundles", type=int, help="Number of bundles (default n)")
    p.add_argument("--oracle", action="store_true", help="Use the brute-force oracle")
    p.set_defaults(run=cmd_mms_value)

    p = sub.add_parser("gen", parents=[common], help="Seeded random instance")
    p.add_argument("--class", dest="cls", required=True, choices=[t.value for t in ClassTag])
    p.add_argument("--kind", required=True, choices=[k.value for k in Kind])
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--p", type=int, help="Bivalue ratio")
    p.add_argument("--tiers", type=int, help="Weakly lexicographic tier count")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("fixtures", parents=[common], help="Run the worked-example corpus")
    p.set_defaults(run=cmd_fixtures)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except FairDivError as e:
        log(f"❌ {type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
