import pytest
from pydantic import ValidationError

from generator import (
    GenSpec,
    certified_irreducible,
    generate,
    generate_instance,
    variable_table,
)
from polynomial import parse, product_of, strip_trivial_divisors
from precheck import gcd_condition


def test_generate_is_deterministic():
    spec = GenSpec(n=10, m=16, seed=7)
    assert generate(spec) == generate(spec)
    assert generate(spec) != generate(GenSpec(n=10, m=16, seed=8))


def test_random_instance_shape():
    F = generate(GenSpec(n=10, m=16, seed=1))
    assert F.monomial_count == 16
    assert len(set(F.monomials)) == 16
    assert strip_trivial_divisors(F)[0] == []
    assert F.vars.names[0] == "x0" and F.vars.names[-1] == "x9"


def test_planted_instance():
    instance = generate_instance(GenSpec(n=10, m=16, seed=2, planted=(5, 4, 5, 4)))
    F = instance.polynomial
    assert F.monomial_count == 16
    assert F.support().bit_count() <= 10
    assert product_of(instance.parts) == F
    first, second = instance.planted_partition()
    assert first & second == 0
    assert first < 1 << 5 and second >> 5 > 0
    for part in instance.parts:
        assert certified_irreducible(part)
        assert strip_trivial_divisors(part)[0] == []


def test_variable_table_pads_names():
    assert variable_table(12).names[:3] == ("x00", "x01", "x02")
    assert variable_table(1).names == ("x0",)


@pytest.mark.parametrize(
    "options",
    [
        {"n": 3, "m": 9},
        {"n": 4, "m": 4, "p": 0.0},
        {"n": 4, "m": 4, "p": 1.0},
        {"n": 10, "m": 16, "planted": (5, 4, 4, 4)},
        {"n": 10, "m": 15, "planted": (5, 4, 5, 4)},
        {"n": 4, "m": 20, "planted": (2, 5, 2, 4)},
        {"n": 4, "m": 4, "seed": -1},
    ],
)
def test_spec_validation(options):
    with pytest.raises(ValidationError):
        GenSpec(**options)


def test_label():
    assert GenSpec(n=4, m=4, seed=3).label == "n4-m4-p0.5-s3-random"
    assert GenSpec(n=4, m=4, planted=(2, 2, 2, 2)).label.endswith("2x2x2x2")
    assert GenSpec(n=4, m=4, name="tiny").label == "tiny"


def test_certified_irreducible():
    # gcd condition fails
    assert certified_irreducible(parse("x*y + u"))
    # gcd condition holds but the split search finds nothing
    F = parse("x*y + x*z + y*z + 1")
    assert gcd_condition(F)[0]
    assert certified_irreducible(F)
    assert not certified_irreducible(parse("x*u + x*v + y*u + y*v"))
    # (u + y + 1)*(v + x): gcd condition holds and two co-occurrence classes
    assert not certified_irreducible(parse("x*y + x*u + y*v + u*v + x + v"))


def test_planted_parts_may_pass_gcd_condition():
    passing = 0
    for seed in range(200):
        instance = generate_instance(GenSpec(n=8, m=16, seed=seed, planted=(4, 4, 4, 4)))
        assert product_of(instance.parts) == instance.polynomial
        passing += sum(gcd_condition(part)[0] for part in instance.parts)
    assert passing > 0
