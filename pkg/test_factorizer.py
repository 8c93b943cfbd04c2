import time

import pytest
from pydantic import ValidationError

from errors import PreconditionError
from factorizer import (
    Driver,
    FactorConfig,
    OuterPivot,
    factor_complete,
    factor_gcd,
    gcd_multilinear,
    partition_fd,
    partition_modfd,
    splits_along,
)
from generator import GenSpec, generate_instance
from identity import IsEqualConfig
from polynomial import Polynomial, VarTable, parse, product_of
from precheck import cooccurrence_classes
from sample_inputs.formulas import F_PHI_FULL, F_PHI_FULL_FACTORS, F_PSI, F_PSI_FACTORS


def factor_set(F: Polynomial, driver: Driver | str, **options) -> set[Polynomial]:
    return set(factor_complete(F, driver, FactorConfig(**options)).all_factors())


@pytest.mark.parametrize("driver", list(Driver))
def test_golden_product(driver):
    F = parse(F_PSI)
    assert factor_set(F, driver) == {parse(text, F.vars) for text in F_PSI_FACTORS}


@pytest.mark.parametrize("driver", list(Driver))
def test_golden_full_dnf_polynomial(driver):
    F = parse(F_PHI_FULL)
    assert factor_set(F, driver) == {parse(text, F.vars) for text in F_PHI_FULL_FACTORS}


def test_partitions_agree_on_golden_product():
    F = parse(F_PSI)
    fd = partition_fd(F, "x")
    modfd = partition_modfd(F, "x")
    assert fd == modfd
    assert F.vars.names_of(fd.sigma_same) == ["x", "y"]
    assert F.vars.names_of(fd.sigma_other) == ["u", "v"]
    assert fd.factorable


def test_partition_hint_changes_nothing():
    F = parse(F_PSI)
    hint = cooccurrence_classes(F)
    assert partition_modfd(F, "u", hint=hint) == partition_modfd(F, "u")
    assert partition_fd(F, "u", hint=hint) == partition_fd(F, "u")


def test_partition_threads_changes_nothing():
    instance = generate_instance(GenSpec(n=12, m=16, seed=3, planted=(6, 4, 6, 4)))
    F = instance.polynomial
    x = F.variables()[0]
    assert partition_modfd(F, x, threads=4) == partition_modfd(F, x)


@pytest.mark.parametrize("call_budget", [1, 4, 16, 256])
def test_capped_partition_matches_exact(call_budget):
    for seed in range(8):
        planted = generate_instance(GenSpec(n=14, m=30, seed=seed, planted=(8, 6, 6, 5)))
        unplanted = generate_instance(GenSpec(n=10, m=24, seed=seed))
        for F in (planted.polynomial, unplanted.polynomial):
            for x in F.variables()[:3]:
                exact = partition_fd(F, x)
                assert partition_modfd(F, x, call_budget=call_budget) == exact
                assert partition_modfd(F, x, threads=3, call_budget=call_budget) == exact


def test_capped_partition_reports_only_finished_checks():
    F = generate_instance(GenSpec(n=14, m=30, seed=5, planted=(8, 6, 6, 5))).polynomial
    seen = []
    partition_modfd(
        F, F.variables()[0], call_budget=1, on_classified=lambda y, same, s: seen.append(y)
    )
    assert len(seen) == len(set(seen))


def test_splits_along():
    F = parse(F_PSI)
    assert splits_along(F, F.vars.mask_of(["x", "y"]))
    assert splits_along(F, F.vars.mask_of(["u", "v"]))
    assert not splits_along(F, F.vars.mask_of(["x"]))
    assert not splits_along(F, F.support())
    assert not splits_along(parse("x*y + u"), parse("x*y + u").vars.mask_of(["x", "y"]))


def test_call_budget_does_not_change_factors():
    for seed in range(6):
        instance = generate_instance(GenSpec(n=20, m=60, seed=seed, planted=(10, 10, 10, 6)))
        F = instance.polynomial
        for call_budget in (0, 1, 8):
            result = factor_complete(F, cfg=FactorConfig(call_budget=call_budget))
            assert set(result.all_factors()) == set(instance.parts)


def test_partition_preconditions():
    with pytest.raises(PreconditionError):
        partition_fd(parse("x*y + x*z"), "x")  # x divides F
    with pytest.raises(PreconditionError):
        partition_modfd(parse("x + 1"), "x")
    F = parse("x*y + u", VarTable(["u", "w", "x", "y"]))
    with pytest.raises(PreconditionError):
        partition_modfd(F, "w")


def test_irreducible_single_factor():
    F = parse("x*y + u")
    for driver in Driver:
        result = factor_complete(F, driver)
        assert result.factors == [F]
        assert not result.factorable


def test_trivial_divisors_are_reported():
    F = parse("x*z*u + x*z*v + x*u + x*v")
    result = factor_complete(F)
    assert [str(t) for t in result.trivial] == ["x", "1 + z"]
    assert result.factors == [parse("u + v", F.vars)]
    assert result.count == 3
    assert result.product(F.vars) == F


def test_constant_input_rejected():
    with pytest.raises(PreconditionError):
        factor_complete(parse("1"))
    with pytest.raises(PreconditionError):
        factor_complete(parse("0"))


def test_pure_trivial_product():
    F = parse("x*y + x")
    result = factor_complete(F)
    assert result.factors == []
    assert result.product(F.vars) == F


def test_three_factors():
    vars = VarTable(["a", "b", "c", "d", "e", "f"])
    parts = [parse("a + b", vars), parse("c*d + c + d", vars), parse("e*f + e + 1", vars)]
    F = product_of(parts, vars)
    result = factor_complete(F)
    assert set(result.factors) == set(parts)
    assert set(result.all_factors()) == set(factor_complete(F, Driver.fd).all_factors())


def test_outer_pivot_rule_gives_same_factors(rng, table12, oracles):
    for _ in range(50):
        F = oracles.random_polynomial(rng, table12, list(range(8)), 6)
        if F.is_constant():
            continue
        low = set(factor_complete(F, cfg=FactorConfig(pivot=OuterPivot.lowest)).all_factors())
        high = set(factor_complete(F, cfg=FactorConfig(pivot=OuterPivot.highest)).all_factors())
        assert low == high


def test_matches_brute_force_oracle(rng, table12, oracles):
    checked = 0
    while checked < 150:
        n = int(rng.integers(2, 11))
        F = oracles.random_polynomial(rng, table12, list(range(n)), int(rng.integers(1, 9)))
        if F.is_constant():
            continue
        result = factor_complete(F)
        assert sorted(f.support() for f in result.all_factors()) == oracles.brute_force_supports(F)
        checked += 1


def test_matches_brute_force_on_products(rng, table12, oracles):
    for _ in range(100):
        P = oracles.random_polynomial(rng, table12, [0, 1, 2, 3, 4], 3)
        Q = oracles.random_polynomial(rng, table12, [5, 6, 7, 8, 9], 3)
        F = product_of([P, Q], table12)
        if F.is_constant():
            continue
        supports = oracles.brute_force_supports(F)
        for driver in Driver:
            result = factor_complete(F, driver)
            assert sorted(f.support() for f in result.all_factors()) == supports


@pytest.mark.slow
def test_matches_brute_force_oracle_full(rng, table12, oracles):
    checked = 0
    while checked < 1000:
        n = int(rng.integers(2, 11))
        F = oracles.random_polynomial(rng, table12, list(range(n)), int(rng.integers(1, 12)))
        if F.is_constant():
            continue
        expected = oracles.brute_force_supports(F)
        factor_sets = []
        for driver in Driver:
            result = factor_complete(F, driver)
            assert sorted(f.support() for f in result.all_factors()) == expected
            factor_sets.append(set(result.all_factors()))
        assert factor_sets[0] == factor_sets[1] == factor_sets[2]
        checked += 1


@pytest.mark.parametrize("cutoff", [0, 64, 512, 4096])
def test_cutoff_does_not_change_factors(cutoff):
    for seed in range(10):
        F = generate_instance(GenSpec(n=14, m=20, seed=seed, planted=(7, 4, 7, 5))).polynomial
        reference = set(factor_complete(F).all_factors())
        cfg = FactorConfig(is_equal=IsEqualConfig(cutoff_length=cutoff))
        assert set(factor_complete(F, cfg=cfg).all_factors()) == reference


@pytest.mark.parametrize("planted", [(5, 4, 5, 4), (8, 6, 6, 5), (10, 12, 10, 8)])
def test_planted_partition_recovered(planted):
    n1, m1, n2, m2 = planted
    for seed in range(15):
        instance = generate_instance(GenSpec(n=n1 + n2, m=m1 * m2, seed=seed, planted=planted))
        F = instance.polynomial
        for driver in Driver:
            result = factor_complete(F, driver)
            assert set(result.all_factors()) == set(instance.parts)
            assert result.product(F.vars) == F


@pytest.mark.slow
def test_planted_reconstruction_corpus():
    sizes = [(5, 4, 5, 4), (10, 10, 10, 10), (20, 16, 20, 20), (30, 20, 30, 20)]
    for seed in range(125):
        for planted in sizes:
            n1, m1, n2, m2 = planted
            instance = generate_instance(GenSpec(n=n1 + n2, m=m1 * m2, seed=seed, planted=planted))
            result = factor_complete(instance.polynomial)
            assert sorted(f.support() for f in result.all_factors()) == sorted(
                instance.planted_partition()
            )
            assert result.product(instance.polynomial.vars) == instance.polynomial


@pytest.mark.slow
def test_scale_smoke():
    spec = GenSpec(n=1000, m=10_000, seed=1, planted=(500, 100, 500, 100))
    instance = generate_instance(spec)
    cfg = FactorConfig(driver=Driver.modfd, precheck=True, verify_limit=0)
    start = time.perf_counter()
    result = factor_complete(instance.polynomial, cfg=cfg)
    elapsed = time.perf_counter() - start
    assert set(result.all_factors()) == set(instance.parts)
    assert elapsed <= 60.0


def test_factor_gcd_loop():
    F = parse(F_PSI)
    result = factor_gcd(F)
    assert set(result.factors) == {parse(text, F.vars) for text in F_PSI_FACTORS}


def test_factor_gcd_with_custom_gcd():
    F = parse(F_PSI)
    calls = []

    def gcd_fn(P, Q):
        calls.append((P, Q))
        return gcd_multilinear(P, Q)

    factor_gcd(F, gcd_fn=gcd_fn)
    assert calls


def test_gcd_multilinear():
    vars = VarTable(["u", "v", "x", "y", "z"])
    common = parse("x + y", vars)
    P = product_of([common, parse("u + v", vars)], vars)
    Q = product_of([common, parse("z + 1", vars)], vars)
    assert gcd_multilinear(P, Q) == common
    assert gcd_multilinear(parse("u", vars), parse("x", vars)).is_one()
    with pytest.raises(PreconditionError):
        gcd_multilinear(P, Polynomial.zero(vars))


def test_factor_config_validation():
    with pytest.raises(ValidationError):
        FactorConfig(threads=0)
    with pytest.raises(ValidationError):
        FactorConfig(driver="linzip")
    with pytest.raises(ValidationError):
        FactorConfig(call_budget=-1)
