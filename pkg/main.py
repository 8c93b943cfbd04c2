"""f2factor command line: factor, check, dnf, table, gen and bench."""

import argparse
import logging
import sys
from pathlib import Path

from pydantic import TypeAdapter, ValidationError

from applications import (
    DnfMode,
    decompose_dnf,
    decompose_table,
    dnf_to_polynomial,
    format_dnf,
    parse_dnf,
    read_table_csv,
    write_table_csv,
)
from bench import BenchPlan, bench, persist, write_csv, write_json
from errors import F2FactorError, FactorizationDefect
from factorizer import Driver, FactorConfig, OuterPivot, factor_complete
from generator import PRNG_ALGORITHM, GenSpec, generate_instance
from identity import IsEqualConfig, PivotRule
from models import (
    DnfComponentsModel,
    FactorizationModel,
    GeneratedPolynomialModel,
    PolynomialModel,
)
from polynomial import Polynomial, format_polynomial, parse
from precheck import precheck
from utils import configure_logging, read_text_input, strip_comment_lines, thread_cap

logger = logging.getLogger("f2factor")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DEFECT = 3

_POLYNOMIAL_JSON = TypeAdapter(PolynomialModel | GeneratedPolynomialModel)


class CliParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_of(kind):
    def convert(text: str) -> list:
        try:
            return [kind(item.strip()) for item in text.split(",") if item.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e))

    return convert


def load_polynomial(source: str) -> Polynomial:
    """Text (with `#` comment lines) or JSON written by this tool."""
    text = read_text_input(source)
    if text.lstrip().startswith("{"):
        model = _POLYNOMIAL_JSON.validate_json(text)
        if isinstance(model, GeneratedPolynomialModel):
            model = model.polynomial
        return model.to_polynomial()
    return parse(strip_comment_lines(text))


def _emit(text: str, out: str | None = None) -> None:
    if out is None or out == "-":
        print(text)
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info("wrote %s", out)


def _factor_config(args: argparse.Namespace, driver: Driver = Driver.modfd) -> FactorConfig:
    return FactorConfig(
        driver=driver,
        is_equal=IsEqualConfig(cutoff_length=args.cutoff, pivot_rule=args.pivot_rule),
        threads=args.threads,
        precheck=not getattr(args, "no_precheck", False),
        pivot=args.outer_pivot,
    )


def cmd_factor(args: argparse.Namespace) -> int:
    F = load_polynomial(args.input)
    result = factor_complete(F, cfg=_factor_config(args, args.algo))
    if args.json:
        _emit(FactorizationModel.from_factorization(result).model_dump_json(indent=2))
    else:
        _emit("\n".join(format_polynomial(f) for f in result.all_factors()))
    logger.info("%d factors (%s)", result.count, "factorable" if result.factorable else "irreducible")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    report = precheck(load_polynomial(args.input))
    _emit(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_dnf(args: argparse.Namespace) -> int:
    mode = DnfMode.full_dnf if args.mode == "full" else DnfMode.monotone
    f = parse_dnf(strip_comment_lines(read_text_input(args.input)).strip(), mode)
    components = decompose_dnf(f, minimize=args.minimize, cfg=_factor_config(args))
    if args.json:
        model = DnfComponentsModel(
            mode=str(mode),
            formula=format_dnf(f),
            components=[format_dnf(c) for c in components],
            polynomials=[
                PolynomialModel.from_polynomial(dnf_to_polynomial(c), compact=True)
                for c in components
            ],
        )
        _emit(model.model_dump_json(indent=2))
    else:
        _emit("\n".join(f"({format_dnf(c)})" for c in components))
    return EXIT_OK


def _merge_target(text: str | None) -> str | int | None:
    if text is None or text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a table index, got {text!r}")


def cmd_table(args: argparse.Namespace) -> int:
    table = read_table_csv(args.csv, dedupe=args.dedupe)
    decomposition = decompose_table(table, args.merge_constants, cfg=_factor_config(args))
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, part in enumerate(decomposition.tables, start=1):
            write_table_csv(part, out_dir / f"table_{i}.csv")
    if args.json:
        _emit(decomposition.model_dump_json(indent=2))
        return EXIT_OK
    blocks = []
    for i, part in enumerate(decomposition.tables, start=1):
        blocks.append(f"# table {i}\n{write_table_csv(part).rstrip()}")
    for attribute, value in decomposition.constant_columns:
        blocks.append(f"# constant {attribute}={value}")
    _emit("\n".join(blocks))
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    planted = tuple(args.planted) if args.planted else None
    spec = GenSpec(n=args.n, m=args.m, p=args.p, seed=args.seed, planted=planted, name=args.name)
    instance = generate_instance(spec)
    if args.json:
        model = GeneratedPolynomialModel(
            prng=PRNG_ALGORITHM,
            seed=spec.seed,
            spec=spec.model_dump(),
            polynomial=PolynomialModel.from_polynomial(instance.polynomial),
            parts=[PolynomialModel.from_polynomial(part) for part in instance.parts],
        )
        _emit(model.model_dump_json(indent=2), args.out)
        return EXIT_OK
    header = [
        f"# f2factor gen prng={PRNG_ALGORITHM} seed={spec.seed}",
        f"# n={spec.n} m={spec.m} p={spec.p:g} planted={spec.planted}",
    ]
    header += [f"# part: {format_polynomial(part)}" for part in instance.parts]
    _emit("\n".join(header + [format_polynomial(instance.polynomial)]), args.out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    plan = BenchPlan.model_validate_json(read_text_input(args.spec))
    overrides = {
        key: value
        for key, value in (
            ("drivers", args.drivers),
            ("cutoffs", args.cutoffs),
            ("repeat", args.repeat),
            ("threads", args.threads),
        )
        if value is not None
    }
    if overrides:
        plan = BenchPlan.model_validate({**plan.model_dump(), **overrides})

    report = bench(plan)
    if args.out_csv:
        write_csv(report, args.out_csv)
    if args.out_json:
        write_json(report, args.out_json)
    if args.db:
        logger.info("stored %d rows in %s", persist(report, args.db), args.db)

    for result in report.results:
        row = result.row
        status = row.error or (
            f"{row.factor_count} factors, cross/same={row.cross_over_same:.2f}"
            + ("" if row.matches_planted is None else f", planted={row.matches_planted}")
        )
        print(f"{row.instance:<36} {row.driver:<6} cutoff={row.cutoff:<5} {row.wall_time:9.4f}s  {status}")
    if report.scaling:
        print(
            f"scaling exponent: fitted {report.scaling.fitted_exponent:.3f}, "
            f"analytical {report.scaling.analytical_exponent:.6f}"
        )
    return EXIT_OK


def _add_factor_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cutoff", type=int, default=512, help="multiply directly below this length")
    parser.add_argument(
        "--pivot-rule", type=PivotRule, choices=list(PivotRule), default=PivotRule.balanced_median
    )
    parser.add_argument(
        "--outer-pivot", type=OuterPivot, choices=list(OuterPivot), default=OuterPivot.lowest
    )
    parser.add_argument("--threads", type=int, default=1)


def build_parser() -> CliParser:
    parser = CliParser(prog="f2factor", description="Factor multilinear polynomials over GF(2).")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="factor a polynomial into irreducible factors")
    p.add_argument("--in", dest="input", required=True, help="FILE or - for stdin")
    p.add_argument("--algo", type=Driver, choices=list(Driver), default=Driver.modfd)
    p.add_argument("--no-precheck", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_factor_options(p)
    p.set_defaults(handler=cmd_factor)

    p = sub.add_parser("check", help="trivial divisors and necessary conditions")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("dnf", help="AND-decompose a DNF formula")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=["monotone", "full"], default="monotone")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_factor_options(p)
    p.set_defaults(handler=cmd_dnf)

    p = sub.add_parser("table", help="Cartesian decomposition of a CSV table")
    p.add_argument("--csv", required=True)
    p.add_argument("--merge-constants", type=_merge_target, default=None)
    p.add_argument("--dedupe", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out-dir", help="also write each factor table as CSV")
    _add_factor_options(p)
    p.set_defaults(handler=cmd_table)

    p = sub.add_parser("gen", help="generate a random or planted polynomial")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--planted", type=_csv_of(int), help="n1,m1,n2,m2")
    p.add_argument("--name")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("bench", help="run a benchmark plan")
    p.add_argument("--spec", required=True, help="BenchPlan JSON")
    p.add_argument("--drivers", type=_csv_of(Driver))
    p.add_argument("--cutoffs", type=_csv_of(int))
    p.add_argument("--repeat", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.add_argument("--db", help="SQLite file for BenchRecord rows")
    p.set_defaults(handler=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        thread_cap()
    except ValueError as e:
        print(f"f2factor: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(args)
    except FactorizationDefect as e:
        logger.exception("internal defect")
        print(f"f2factor: internal defect: {e}", file=sys.stderr)
        return EXIT_DEFECT
    except ValidationError as e:
        print(f"f2factor: invalid input: {e.error_count()} errors", file=sys.stderr)
        for error in e.errors():
            print(f"  {'.'.join(map(str, error['loc']))}: {error['msg']}", file=sys.stderr)
        return EXIT_DATA
    except (F2FactorError, OSError, UnicodeDecodeError) as e:
        print(f"f2factor: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
