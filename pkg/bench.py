"""Benchmark harness: driver timings, same/cross classification disparity,
cutoff sweeps and the empirical scaling exponent."""

import itertools
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import polars as pl
from poldantic import to_polars_schema
from pydantic import BaseModel, Field
from scipy.optimize import brentq
from sqlmodel import Session, SQLModel, create_engine

from factorizer import Driver, FactorConfig, Factorization, factor_complete
from generator import PRNG_ALGORITHM, GenSpec, generate_instance
from identity import IsEqualConfig, PivotRule, RecursionStats
from models import BenchRecord, BenchRow
from polynomial import length
from utils import worker_count

logger = logging.getLogger(__name__)


class ScalingLadder(BaseModel):
    """Planted instances whose first part doubles its monomial count each step."""

    base: GenSpec
    steps: int = Field(default=4, ge=2)


class BenchPlan(BaseModel):
    corpus: list[GenSpec] = Field(default_factory=list)
    drivers: list[Driver] = Field(default_factory=lambda: [Driver.fd, Driver.modfd])
    cutoffs: list[int] = Field(default_factory=lambda: [512])
    pivot_rule: PivotRule = PivotRule.balanced_median
    repeat: int = Field(default=1, ge=1)
    threads: int = Field(default=1, ge=1)
    scaling: ScalingLadder | None = None


class BenchResult(BaseModel):
    row: BenchRow
    same_times: list[float] = Field(default_factory=list)
    cross_times: list[float] = Field(default_factory=list)
    factors: list[str] = Field(default_factory=list)


class ScalingReport(BaseModel):
    lengths: list[int]
    seconds: list[float]
    fitted_exponent: float
    analytical_exponent: float


class BenchReport(BaseModel):
    prng: str = PRNG_ALGORITHM
    results: list[BenchResult]
    scaling: ScalingReport | None = None


def characteristic_exponent() -> float:
    """Root of (3/4)^p + (1/4)^p + 2(1/2)^p = 1, about 2.226552."""
    return brentq(lambda p: 0.75**p + 0.25**p + 2 * 0.5**p - 1.0, 1.0, 4.0, xtol=1e-12)


def canonical_factors(result: Factorization) -> list[str]:
    return sorted(str(f) for f in result.all_factors())


def _mean(values: list[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def run_instance(
    spec: GenSpec,
    driver: Driver,
    cutoff: int,
    repeat: int = 1,
    pivot_rule: PivotRule = PivotRule.balanced_median,
) -> BenchResult:
    stats = RecursionStats()
    lock = threading.Lock()
    same_times: list[float] = []
    cross_times: list[float] = []

    def on_classified(y: int, same: bool, seconds: float) -> None:
        with lock:
            (same_times if same else cross_times).append(seconds)

    cfg = FactorConfig(
        driver=driver,
        is_equal=IsEqualConfig(cutoff_length=cutoff, pivot_rule=pivot_rule, recursion_stats=stats),
        # uncapped so every per-variable timing is a complete IsEqual run
        call_budget=0,
    )
    row = dict(
        instance=spec.label,
        prng=PRNG_ALGORITHM,
        seed=spec.seed,
        n=spec.n,
        m=spec.m,
        driver=str(driver),
        cutoff=cutoff,
        repeat=repeat,
    )
    try:
        instance = generate_instance(spec)
        elapsed = []
        result = None
        for _ in range(repeat):
            start = time.perf_counter()
            result = factor_complete(instance.polynomial, cfg=cfg, on_classified=on_classified)
            elapsed.append(time.perf_counter() - start)
    except Exception as e:
        logger.warning("bench %s/%s failed: %s", spec.label, driver, e)
        row.update(
            wall_time=0.0, factor_count=0, factor_sizes="", classified=0,
            same_mean_time=0.0, cross_mean_time=0.0, cross_over_same=0.0,
            calls=0, max_depth=0, cutoff_hits=0, error=f"{type(e).__name__}: {e}",
        )
        return BenchResult(row=BenchRow(**row))

    matches = None
    if instance.parts:
        found = sorted(f.support() for f in result.all_factors())
        matches = found == sorted(instance.planted_partition())
    same_mean, cross_mean = _mean(same_times), _mean(cross_times)
    counters = stats.snapshot()
    row.update(
        wall_time=_mean(elapsed),
        factor_count=result.count,
        factor_sizes=";".join(str(f.monomial_count) for f in result.all_factors()),
        classified=len(same_times) + len(cross_times),
        same_mean_time=same_mean,
        cross_mean_time=cross_mean,
        cross_over_same=cross_mean / same_mean if same_mean > 0 else 0.0,
        calls=counters["calls"] // repeat,
        max_depth=counters["max_depth"],
        cutoff_hits=counters["cutoff_hits"] // repeat,
        matches_planted=matches,
    )
    return BenchResult(
        row=BenchRow(**row),
        same_times=same_times,
        cross_times=cross_times,
        factors=canonical_factors(result),
    )


def scaling_report(ladder: ScalingLadder, pivot_rule: PivotRule = PivotRule.balanced_median) -> ScalingReport:
    base = ladder.base
    if base.planted is None:
        raise ValueError("The scaling ladder needs a planted base instance")
    n1, m1, n2, m2 = base.planted
    cfg = FactorConfig(
        driver=Driver.modfd, is_equal=IsEqualConfig(pivot_rule=pivot_rule), call_budget=0
    )
    lengths, seconds = [], []
    for step in range(ladder.steps):
        size = m1 * 2**step
        spec = base.model_copy(update={"planted": (n1, size, n2, m2), "m": size * m2, "name": None})
        spec = GenSpec.model_validate(spec.model_dump())
        F = generate_instance(spec).polynomial
        start = time.perf_counter()
        factor_complete(F, cfg=cfg)
        seconds.append(time.perf_counter() - start)
        lengths.append(length(F))
        logger.info("scaling step %d: |F|=%d in %.3fs", step, lengths[-1], seconds[-1])
    slope = float(np.polyfit(np.log(lengths), np.log(np.maximum(seconds, 1e-9)), 1)[0])
    return ScalingReport(
        lengths=lengths,
        seconds=seconds,
        fitted_exponent=slope,
        analytical_exponent=characteristic_exponent(),
    )


def bench(plan: BenchPlan) -> BenchReport:
    jobs = list(itertools.product(plan.corpus, plan.drivers, plan.cutoffs))

    def run(job: tuple[GenSpec, Driver, int]) -> BenchResult:
        spec, driver, cutoff = job
        logger.info("bench %s driver=%s cutoff=%d", spec.label, driver, cutoff)
        return run_instance(spec, driver, cutoff, plan.repeat, plan.pivot_rule)

    workers = worker_count(plan.threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    results.sort(key=lambda r: (r.row.instance, r.row.driver, r.row.cutoff))

    scaling = scaling_report(plan.scaling, plan.pivot_rule) if plan.scaling else None
    return BenchReport(results=results, scaling=scaling)


def write_csv(report: BenchReport, path: str | Path) -> None:
    frame = pl.DataFrame(
        [result.row.model_dump() for result in report.results],
        schema=to_polars_schema(BenchRow),
    )
    frame.write_csv(path)


def write_json(report: BenchReport, path: str | Path) -> None:
    Path(path).write_text(report.model_dump_json(indent=2), encoding="utf-8")


def persist(report: BenchReport, db_path: str | Path) -> int:
    engine = create_engine(f"sqlite:///{db_path}")
    SQLModel.metadata.create_all(engine)
    with Session(engine) as session:
        session.add_all(
            BenchRecord.model_validate(result.row.model_dump()) for result in report.results
        )
        session.commit()
    return len(report.results)
