"""Tour of the lottery constructions for lexicographic agents: the tail
lottery, the k = 2 sampler, and the uniform random-order baseline.

Run:  python3 demos/lottery_tour.py
"""

from fractions import Fraction

from bobw import (
    check_efx,
    check_exante_ef,
    check_po_lex,
    check_support,
    format_rational,
    get_fixture,
    k2_sampler,
    min_exante_ratio,
    solve_lex_bobw,
    summarize,
    uniform_permutation,
    unit_run,
    utse,
)


def _show_distribution(dist) -> None:
    for weight, alloc in dist.support:
        bundles = " | ".join(repr(sorted(b)) for b in alloc.bundles)
        print(f"  {format_rational(weight):>5}  {bundles}")


def main() -> None:
    # tail lottery on a two-agent fixture where one good is split
    inst = get_fixture("FIX-D")
    dist = utse(inst)
    print("tail lottery support (two agents, three goods):")
    _show_distribution(dist)
    audits = check_support(inst, dist, {"efx": check_efx, "po": check_po_lex})
    print("  every outcome efx:", audits["efx"].passed, " po:", audits["po"].passed)
    print("  worst pairwise expectation ratio:", format_rational(min_exante_ratio(dist, inst)))

    # when exactly two agents still hold a split good, sample instead
    inst_c = get_fixture("FIX-C")
    k = summarize(unit_run(inst_c)).k
    print(f"\nfour-agent fixture has k = {k}; drawing three samples:")
    sample = k2_sampler(inst_c)
    for seed in (0, 1, 2):
        alloc = sample(seed)
        bundles = " | ".join(repr(sorted(b)) for b in alloc.bundles)
        print(f"  seed {seed}: {bundles}")

    routed = solve_lex_bobw(inst_c, seed=0)
    print(f"  dispatcher route for this fixture: kind={routed.kind}, k={routed.k}")

    # baseline: uniform random picking order, half envy-free in expectation
    inst_b = get_fixture("FIX-B")
    baseline = uniform_permutation(inst_b, mode="exact")
    half_ef = check_exante_ef(baseline, inst_b, Fraction(1, 2))
    print("\nuniform random-order baseline on the six-agent fixture:")
    print("  half envy-free in expectation:", half_ef.passed)
    print("  worst ratio:", format_rational(min_exante_ratio(baseline, inst_b)))


if __name__ == "__main__":
    main()
