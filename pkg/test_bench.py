import math

import polars as pl
import pytest
from sqlmodel import Session, create_engine, select

import bench as bench_module
from bench import (
    BenchPlan,
    ScalingLadder,
    bench,
    canonical_factors,
    characteristic_exponent,
    persist,
    run_instance,
    scaling_report,
    write_csv,
    write_json,
)
from factorizer import Driver, factor_complete
from generator import PRNG_ALGORITHM, GenSpec, generate_instance
from models import BenchRecord

SMALL = GenSpec(n=12, m=20, seed=4, planted=(6, 4, 6, 5))


def test_characteristic_exponent():
    p = characteristic_exponent()
    assert p == pytest.approx(2.226552, abs=1e-5)
    assert 0.75**p + 0.25**p + 2 * 0.5**p == pytest.approx(1.0)


@pytest.mark.parametrize("driver", [Driver.fd, Driver.modfd])
def test_run_instance_matches_plain_mode(driver):
    result = run_instance(SMALL, driver, cutoff=512)
    row = result.row
    assert row.error is None
    assert row.matches_planted is True
    assert row.prng == PRNG_ALGORITHM
    assert row.seed == SMALL.seed
    assert row.classified == len(result.same_times) + len(result.cross_times)
    assert result.cross_times
    plain = factor_complete(generate_instance(SMALL).polynomial, driver)
    assert result.factors == canonical_factors(plain)


def test_run_instance_records_recursion_stats():
    modfd = run_instance(SMALL, Driver.modfd, cutoff=0).row
    fd = run_instance(SMALL, Driver.fd, cutoff=0).row
    assert modfd.calls > 0
    assert modfd.cutoff_hits == 0
    assert fd.calls == 0


def test_failures_are_recorded(monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(bench_module, "factor_complete", broken)
    row = run_instance(SMALL, Driver.modfd, cutoff=512).row
    assert row.error == "RuntimeError: boom"
    assert row.factor_count == 0


def test_bench_sorts_and_sweeps_cutoffs():
    plan = BenchPlan(
        corpus=[SMALL, GenSpec(n=10, m=16, seed=9, planted=(5, 4, 5, 4), name="a-first")],
        drivers=[Driver.modfd, Driver.fd],
        cutoffs=[0, 64, 512],
        threads=2,
    )
    report = bench(plan)
    keys = [(r.row.instance, r.row.driver, r.row.cutoff) for r in report.results]
    assert keys == sorted(keys)
    assert len(keys) == 12
    by_instance: dict[str, set[tuple[str, ...]]] = {}
    for result in report.results:
        by_instance.setdefault(result.row.instance, set()).add(tuple(result.factors))
    assert all(len(factor_sets) == 1 for factor_sets in by_instance.values())
    assert report.scaling is None


def test_bench_is_deterministic():
    plan = BenchPlan(corpus=[SMALL], drivers=[Driver.modfd])
    first, second = bench(plan), bench(plan)
    assert [r.factors for r in first.results] == [r.factors for r in second.results]


def test_scaling_report():
    ladder = ScalingLadder(base=GenSpec(n=12, m=8, seed=5, planted=(6, 2, 6, 4)), steps=3)
    report = scaling_report(ladder)
    assert len(report.lengths) == 3
    assert report.lengths == sorted(report.lengths)
    assert report.analytical_exponent == pytest.approx(2.226552, abs=1e-5)
    assert math.isfinite(report.fitted_exponent)


def test_scaling_needs_planted_base():
    with pytest.raises(ValueError):
        scaling_report(ScalingLadder(base=GenSpec(n=6, m=8)))


def test_outputs(tmp_path):
    report = bench(BenchPlan(corpus=[SMALL], drivers=[Driver.modfd]))

    csv_path = tmp_path / "bench.csv"
    write_csv(report, csv_path)
    frame = pl.read_csv(csv_path)
    assert frame.height == 1
    assert frame["prng"][0] == PRNG_ALGORITHM
    assert frame["seed"][0] == SMALL.seed
    assert "cross_over_same" in frame.columns

    json_path = tmp_path / "bench.json"
    write_json(report, json_path)
    assert bench_module.BenchReport.model_validate_json(json_path.read_text()) == report

    db_path = tmp_path / "bench.db"
    assert persist(report, db_path) == 1
    with Session(create_engine(f"sqlite:///{db_path}")) as session:
        records = session.exec(select(BenchRecord)).all()
    assert len(records) == 1
    assert records[0].instance == SMALL.label
    assert records[0].driver == "modfd"


def test_plan_validation():
    with pytest.raises(ValueError):
        BenchPlan(repeat=0)
    plan = BenchPlan.model_validate_json(
        '{"corpus": [{"n": 10, "m": 16, "planted": [5, 4, 5, 4]}], "drivers": ["fd"]}'
    )
    assert plan.drivers == [Driver.fd]
    assert plan.corpus[0].planted == (5, 4, 5, 4)


@pytest.mark.slow
def test_classification_disparity_report():
    spec = GenSpec(n=100, m=10_000, seed=11, planted=(50, 100, 50, 100))
    result = run_instance(spec, Driver.modfd, cutoff=512)
    row = result.row
    assert row.matches_planted is True
    assert row.same_mean_time > 0 and row.cross_mean_time > 0
    ratio = row.cross_over_same
    assert ratio > 0
    # verdicts on the two sides of the split cost clearly different amounts
    assert max(ratio, 1 / ratio) >= 2
