"""Command-line entry point.

Subcommands: validate, eat, solve, verify, sample, estimate, oracle, repro.
Instances are given either as a bundled fixture name (FIX-A .. FIX-E) or as
a path to an instance JSON file.  All randomized commands take --seed (an
unsigned 64-bit integer) and are byte-for-byte reproducible: same command
line, same output.

Exit codes: 0 success, 2 a checked property failed (witness in the output),
3 bad input or precondition, 4 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Callable, Optional

from . import fixtures
from .audit import (
    check_bounded_charity,
    check_ef,
    check_ef1,
    check_efx,
    check_efx_with_charity,
    check_exante_ef,
    check_po_lex,
    check_sdef_instance,
    check_stochastic_dominance_half,
    check_support,
    exante_ratio,
    min_exante_ratio,
)
from .charity_algos import bounded_charity, random_charity_swap
from .core import (
    FractionalAllocation,
    Instance,
    IntegralAllocation,
    PreconditionError,
    RandomizedAllocation,
    ResourceCapError,
    format_rational,
    load_instance,
    parse_rational,
    validate_instance,
    value_of,
)
from .eating import (
    eat_report,
    fractional_outcome,
    full_run,
    ordinal_rankings,
    representative_matrix,
    rounds_allocation,
    run_eating,
    summarize,
    unit_run,
)
from .lex_algos import (
    depround_k2_sample,
    k2_sampler,
    solve_lex_bobw,
    uniform_permutation,
    utse,
)
from .oracle import (
    enumerate_efx,
    estimate,
    exact_distribution_charity,
    sdef_feasibility,
)
from .rng import derive_seed
from .rounding import Decomposition, bvn_decompose

EXIT_OK = 0
EXIT_PROPERTY = 2
EXIT_PRECONDITION = 3
EXIT_CAP = 4


class PropertyFailure(Exception):
    """A checked property did not hold; payload carries the witness."""

    def __init__(self, message: str, payload: Optional[dict] = None):
        super().__init__(message)
        self.payload = payload or {}


def _load(args) -> Instance:
    name = args.instance
    eps = parse_rational(args.epsilon) if getattr(args, "epsilon", None) else None
    if name in fixtures.FIXTURE_NAMES:
        return fixtures.get_fixture(name, epsilon=eps)
    if eps is not None:
        raise PreconditionError("--epsilon only applies to the bundled fixtures")
    return load_instance(name)


def _emit(data: dict, out: Optional[str]) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_allocation(path: str):
    with open(path) as fh:
        data = json.load(fh)
    if "support" in data:
        return RandomizedAllocation.from_json(data)
    return IntegralAllocation.from_json(data)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    inst = _load(args)
    report = validate_instance(inst)
    _emit(report.to_json(), args.output)
    return EXIT_OK if report.ok else EXIT_PROPERTY


def cmd_eat(args) -> int:
    inst = _load(args)
    pad = args.pad
    if pad is None:
        pad = max(0, inst.n - inst.m) if args.duration is None else 0
    duration = (
        parse_rational(args.duration)
        if args.duration is not None
        else Fraction(1)
    )
    trace = run_eating(inst, duration, n_dummies=pad)
    _emit(eat_report(inst, trace), args.output)
    return EXIT_OK


def _audit_distribution(inst: Instance, dist: RandomizedAllocation, checkers) -> dict:
    reports = check_support(inst, dist, checkers)
    out = {name: rep.to_json() for name, rep in reports.items()}
    ratio = min_exante_ratio(dist, inst)
    out["min_exante_ratio"] = None if ratio is None else format_rational(ratio)
    return out


def _require_pass(audits: dict) -> None:
    failed = {
        name: rep
        for name, rep in audits.items()
        if isinstance(rep, dict) and rep.get("passed") is False
    }
    if failed:
        raise PropertyFailure("ex-post audit failed", {"audits": audits})


def cmd_solve(args) -> int:
    inst = _load(args)
    alg = args.algorithm
    result: dict = {"algorithm": alg}

    def need_seed():
        if args.seed is None:
            raise PreconditionError(f"--seed is required for the {alg} sampler")
        return args.seed

    if alg == "utse":
        decomposition = None
        if args.decomposition:
            with open(args.decomposition) as fh:
                decomposition = Decomposition.from_json(json.load(fh))
        dist = utse(inst, decomposition=decomposition)
        result["distribution"] = dist.to_json()
        result["audits"] = _audit_distribution(
            inst, dist, {"efx": check_efx, "po_lex": check_po_lex}
        )
    elif alg == "lex-bobw":
        solved = solve_lex_bobw(inst, seed=args.seed)
        result["k"] = solved.k
        result["kind"] = solved.kind
        if solved.kind == "distribution":
            result["distribution"] = solved.distribution.to_json()
            result["audits"] = _audit_distribution(
                inst, solved.distribution, {"efx": check_efx, "po_lex": check_po_lex}
            )
        else:
            alloc = solved.sample
            result["allocation"] = alloc.to_json()
            result["audits"] = {
                "efx": check_efx(inst, alloc).to_json(),
                "po_lex": check_po_lex(inst, alloc).to_json(),
            }
    elif alg == "depround-k2":
        alloc = depround_k2_sample(inst, need_seed())
        result["allocation"] = alloc.to_json()
        result["audits"] = {
            "efx": check_efx(inst, alloc).to_json(),
            "po_lex": check_po_lex(inst, alloc).to_json(),
        }
    elif alg == "uniform-perm":
        dist = uniform_permutation(inst, mode="exact")
        result["distribution"] = dist.to_json()
        result["audits"] = _audit_distribution(inst, dist, {"po_lex": check_po_lex})
        result["audits"]["exante_half_ef"] = check_exante_ef(
            dist, inst, Fraction(1, 2)
        ).to_json()
    elif alg == "charity":
        alloc, trace = random_charity_swap(inst, need_seed())
        result["allocation"] = alloc.to_json()
        result["trace"] = trace.to_json()
        result["audits"] = {
            "efx_with_charity": check_efx_with_charity(inst, alloc).to_json()
        }
    elif alg == "bounded-charity":
        start, trace = random_charity_swap(inst, need_seed())
        alloc = bounded_charity(inst, start, step_cap=args.step_cap)
        result["allocation"] = alloc.to_json()
        result["trace"] = trace.to_json()
        result["audits"] = {
            "bounded_charity": check_bounded_charity(inst, alloc).to_json()
        }
    else:  # pragma: no cover - argparse restricts choices
        raise PreconditionError(f"unknown algorithm {alg}")

    _require_pass(result["audits"])
    _emit(result, args.output)
    return EXIT_OK


_VERIFY_CHECKERS: dict[str, Callable] = {
    "ef": check_ef,
    "ef1": check_ef1,
    "efx": check_efx,
    "efx-charity": check_efx_with_charity,
    "bounded-charity": check_bounded_charity,
    "po-lex": check_po_lex,
}


def cmd_verify(args) -> int:
    inst = _load(args)
    target = _load_allocation(args.allocation)
    props = [p.strip() for p in args.properties.split(",") if p.strip()]
    unknown = [p for p in props if p not in _VERIFY_CHECKERS and p != "sdef"]
    if unknown:
        raise PreconditionError(f"unknown properties: {', '.join(unknown)}")

    audits: dict = {}
    if isinstance(target, RandomizedAllocation):
        named = {p: _VERIFY_CHECKERS[p] for p in props if p != "sdef"}
        for name, rep in check_support(inst, target, named).items():
            audits[name] = rep.to_json()
        if "sdef" in props:
            rows = target.associated_fractional(inst.m).entries
            audits["sdef"] = check_sdef_instance(inst, rows).to_json()
    else:
        for p in props:
            if p == "sdef":
                rows = [
                    [Fraction(1) if g in target.bundles[i] else Fraction(0) for g in inst.goods]
                    for i in inst.agents
                ]
                audits["sdef"] = check_sdef_instance(inst, rows).to_json()
            else:
                audits[p] = _VERIFY_CHECKERS[p](inst, target).to_json()

    _emit({"audits": audits}, args.output)
    ok = all(rep["passed"] for rep in audits.values())
    return EXIT_OK if ok else EXIT_PROPERTY


_SAMPLERS = ("depround-k2", "charity", "bounded-charity", "uniform-perm")


def _make_sampler(inst: Instance, name: str) -> Callable[[int], IntegralAllocation]:
    if name == "depround-k2":
        return k2_sampler(inst)
    if name == "charity":
        return lambda seed: random_charity_swap(inst, seed)[0]
    if name == "bounded-charity":
        return lambda seed: bounded_charity(inst, random_charity_swap(inst, seed)[0])
    if name == "uniform-perm":
        return lambda seed: uniform_permutation(inst, mode="sample", seed=seed)
    raise PreconditionError(f"unknown sampler {name}")  # pragma: no cover


def cmd_sample(args) -> int:
    inst = _load(args)
    sampler = _make_sampler(inst, args.algorithm)
    draws = []
    for r in range(args.count):
        alloc = sampler(derive_seed(args.seed, r))
        draws.append(alloc.to_json())
    _emit({"algorithm": args.algorithm, "seed": args.seed, "samples": draws}, args.output)
    return EXIT_OK


def cmd_estimate(args) -> int:
    inst = _load(args)
    if args.samples < 1000:
        raise PreconditionError("--samples must be at least 1000")
    sampler = _make_sampler(inst, args.sampler)
    n, N = inst.n, args.samples

    # one pass of draws, then per ordered pair a delta-method interval on the
    # ratio of mean own value to mean value of the other agent's bundle
    own = [[0.0] * n for _ in range(n)]  # own[i][j] accumulates v_i(X_j)
    sq = [[0.0] * n for _ in range(n)]
    cross = [[0.0] * n for _ in range(n)]  # v_i(X_i) * v_i(X_j) per pair
    for r in range(N):
        alloc = sampler(derive_seed(args.seed, r))
        vals = [[float(value_of(inst, i, alloc.bundles[j])) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                own[i][j] += vals[i][j]
                sq[i][j] += vals[i][j] ** 2
                if j != i:
                    cross[i][j] += vals[i][i] * vals[i][j]

    pairs = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            mi = own[i][i] / N
            mj = own[i][j] / N
            var_i = sq[i][i] / N - mi * mi
            var_j = sq[i][j] / N - mj * mj
            cov = cross[i][j] / N - mi * mj
            if mj == 0.0:
                pairs.append(
                    {"pair": [i, j], "own_mean": mi, "other_mean": mj, "ratio": None}
                )
                continue
            ratio = mi / mj
            # first-order variance of a ratio of correlated means
            var_r = (
                var_i / (mj * mj)
                + (mi * mi) * var_j / (mj**4)
                - 2 * mi * cov / (mj**3)
            ) / N
            se = math.sqrt(max(var_r, 0.0))
            pairs.append(
                {
                    "pair": [i, j],
                    "own_mean": mi,
                    "other_mean": mj,
                    "ratio": ratio,
                    "stderr": se,
                    "ci99_7": [ratio - 3 * se, ratio + 3 * se],
                }
            )
    _emit(
        {"sampler": args.sampler, "seed": args.seed, "samples": N, "pairs": pairs},
        args.output,
    )
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args)
    op = args.op
    if op == "enumerate-efx":
        allocs = enumerate_efx(inst)
        _emit({"count": len(allocs), "allocations": [a.to_json() for a in allocs]}, args.output)
        return EXIT_OK
    if op == "sdef-feasibility":
        if args.supports:
            with open(args.supports) as fh:
                data = json.load(fh)
            supports = [IntegralAllocation.from_json(d) for d in data["allocations"]]
        else:
            supports = list(enumerate_efx(inst))
        if not supports:
            raise PreconditionError("no support allocations to mix")
        res = sdef_feasibility(inst, supports)
        _emit(res.to_json(), args.output)
        return EXIT_OK
    if op in ("exact-charity", "exact-bounded-charity"):
        algorithm = 3 if op == "exact-charity" else 4
        dist = exact_distribution_charity(inst, algorithm=algorithm, leaf_cap=args.leaf_cap)
        checker = check_efx_with_charity if algorithm == 3 else check_bounded_charity
        audits = {name: rep.to_json() for name, rep in check_support(inst, dist, {"support": checker}).items()}
        audits["stochastic_dominance_half"] = check_stochastic_dominance_half(dist, inst).to_json()
        _emit({"distribution": dist.to_json(), "audits": audits}, args.output)
        ok = all(rep["passed"] for rep in audits.values())
        return EXIT_OK if ok else EXIT_PROPERTY
    raise PreconditionError(f"unknown oracle op {op}")  # pragma: no cover


# ---------------------------------------------------------------------------
# replication scenarios


def _repro_impossibility(args) -> dict:
    inst = fixtures.fix_a()
    allocs = enumerate_efx(inst)
    res = sdef_feasibility(inst, allocs)
    report = {
        "scenario": "impossibility",
        "efx_count": len(allocs),
        "allocations": [a.to_json() for a in allocs],
        "feasibility": res.to_json(),
        "claim": "exactly 4 EFX allocations and no prefix-dominance-fair mixture over them",
    }
    if len(allocs) != 4 or res.feasible:
        raise PropertyFailure("impossibility replication mismatch", report)
    report["summary"] = "4 EFX allocations; sd-EF mixture infeasible"
    return report


def _repro_example_4_1(args) -> dict:
    eps = parse_rational(args.epsilon) if args.epsilon else fixtures.DEFAULT_EPSILON
    inst = fixtures.fix_b(eps)
    dist = uniform_permutation(inst, mode="exact")
    frac = dist.associated_fractional(inst.m)
    ratio = exante_ratio(dist, inst, 0, 1)
    expected = Fraction(432) + 5808 * eps
    expected /= Fraction(576) + 528 * eps
    report = {
        "scenario": "example-4-1",
        "epsilon": format_rational(eps),
        "matrix": [[format_rational(x) for x in row] for row in frac.entries],
        "ratio_pair_1_2": format_rational(ratio),
        "expected_ratio": format_rational(expected),
    }
    if ratio != expected:
        raise PropertyFailure("closed-form ratio mismatch", report)
    return report


def _repro_utse_tight(args) -> dict:
    eps = parse_rational(args.epsilon) if args.epsilon else fixtures.DEFAULT_EPSILON
    inst = fixtures.fix_c(eps)
    summary = summarize(unit_run(inst))
    if summary.k != 2:
        raise PropertyFailure(
            "eating summary does not have k = 2", {"k": format_rational(summary.k)}
        )
    pinned = Decomposition(
        terms=(
            (Fraction(1, 2), (0, 1, 3, 4)),
            (Fraction(1, 2), (1, 0, 2, 3)),
        )
    )
    dist_pinned = utse(inst, decomposition=pinned)
    ratio_pinned = exante_ratio(dist_pinned, inst, 0, 1)
    expected = (Fraction(3) + 25 * eps / 32) / (Fraction(7, 2) + 3 * eps / 4)
    dist_default = utse(inst)
    ratio_default = min_exante_ratio(dist_default, inst)
    report = {
        "scenario": "utse-tight",
        "epsilon": format_rational(eps),
        "matrix": [[format_rational(x) for x in row] for row in summary.X],
        "k": format_rational(summary.k),
        "pinned_ratio_pair_1_2": format_rational(ratio_pinned),
        "expected_pinned_ratio": format_rational(expected),
        "default_min_ratio": format_rational(ratio_default),
    }
    if ratio_pinned != expected:
        raise PropertyFailure("pinned-decomposition ratio mismatch", report)
    if ratio_default < Fraction(6, 7):
        raise PropertyFailure("default decomposition ratio below 6/7", report)
    return report


def _repro_ps_baseline(args) -> dict:
    name = args.instance or "FIX-A"
    eps = getattr(args, "epsilon", None)
    inst = (
        fixtures.get_fixture(name, epsilon=parse_rational(eps) if eps else None)
        if name in fixtures.FIXTURE_NAMES
        else load_instance(name)
    )
    trace = full_run(inst)
    frac = fractional_outcome(trace)
    sdef = check_sdef_instance(inst, frac.entries)
    matrix = representative_matrix(trace)
    decomp = bvn_decompose(matrix)
    term_reports = []
    all_pass = True
    for weight, assignment in decomp.terms:
        alloc = rounds_allocation(assignment, inst.n, inst.m)
        ef1 = check_ef1(inst, alloc)
        po = check_po_lex(inst, alloc)
        all_pass = all_pass and ef1.passed and po.passed
        term_reports.append(
            {
                "weight": format_rational(weight),
                "allocation": alloc.to_json(),
                "ef1": ef1.to_json(),
                "po_lex": po.to_json(),
            }
        )
    report = {
        "scenario": "ps-baseline",
        "instance": name,
        "sdef": sdef.to_json(),
        "terms": term_reports,
    }
    if not sdef.passed or not all_pass:
        raise PropertyFailure("eating baseline property failed", report)
    report["summary"] = (
        f"sd-EF pass; all {len(term_reports)} terms EF1 and picking-sequence reconstructible"
    )
    return report


_SCENARIOS = {
    "impossibility": _repro_impossibility,
    "example-4-1": _repro_example_4_1,
    "utse-tight": _repro_utse_tight,
    "ps-baseline": _repro_ps_baseline,
}


def cmd_repro(args) -> int:
    report = _SCENARIOS[args.scenario](args)
    _emit(report, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _add_common(p, instance=True):
    if instance:
        p.add_argument("instance", help="fixture name (FIX-A..FIX-E) or instance JSON path")
    p.add_argument("--epsilon", help="rational p/q for the epsilon-parameterized fixtures")
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")


def _seed_type(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bobw",
        description="Lotteries over indivisible-goods allocations that are fair "
        "both in expectation and in every realized outcome.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file or fixture")
    _add_common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("eat", help="run the simultaneous-eating simulation")
    _add_common(p)
    p.add_argument("--duration", help="eating time as p/q (default 1)")
    p.add_argument("--pad", type=int, help="number of dummy goods to append")
    p.set_defaults(fn=cmd_eat)

    p = sub.add_parser("solve", help="run an allocation algorithm with audits")
    _add_common(p)
    p.add_argument(
        "--algorithm",
        required=True,
        choices=["utse", "depround-k2", "lex-bobw", "uniform-perm", "charity", "bounded-charity"],
    )
    p.add_argument("--seed", type=_seed_type)
    p.add_argument("--decomposition", help="JSON file pinning the lottery decomposition (utse only)")
    p.add_argument("--step-cap", type=int, help="work limit for bounded-charity")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify", help="audit an allocation or distribution file")
    _add_common(p)
    p.add_argument("--allocation", required=True, help="allocation/distribution JSON path")
    p.add_argument(
        "--properties",
        required=True,
        help="comma list: ef, ef1, efx, efx-charity, bounded-charity, po-lex, sdef",
    )
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sample", help="draw allocations from a sampler")
    _add_common(p)
    p.add_argument("--algorithm", required=True, choices=list(_SAMPLERS))
    p.add_argument("--seed", type=_seed_type, required=True)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("estimate", help="Monte Carlo pairwise ratio table")
    _add_common(p)
    p.add_argument("--sampler", required=True, choices=list(_SAMPLERS))
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=_seed_type, required=True)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("oracle", help="brute-force references and exact distributions")
    _add_common(p)
    p.add_argument(
        "--op",
        required=True,
        choices=["enumerate-efx", "sdef-feasibility", "exact-charity", "exact-bounded-charity"],
    )
    p.add_argument("--supports", help="allocations JSON for sdef-feasibility")
    p.add_argument("--leaf-cap", type=int, default=10**6)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("repro", help="replication scenarios with exact expected values")
    p.add_argument("scenario", choices=sorted(_SCENARIOS))
    p.add_argument("--instance", help="override instance (ps-baseline only)")
    p.add_argument("--epsilon", help="rational p/q for epsilon-parameterized scenarios")
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")
    p.set_defaults(fn=cmd_repro)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PropertyFailure as exc:
        _emit({"error": str(exc), **exc.payload}, getattr(args, "output", None))
        return EXIT_PROPERTY
    except ResourceCapError as exc:
        sys.stderr.write(f"resource cap: {exc}\n")
        return EXIT_CAP
    except (PreconditionError, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
