# cache_dse/cli.py
#
# Командная строка: optimize, exhaustive, simulate, compare, hypervolume.
# Коды завершения: 0 - успех, 1 - ошибка входных данных, 2 - ошибка выполнения.

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from cache_dse import __version__
from cache_dse.config import configure_logging
from cache_dse.dependencies import close_redis_connection, create_eval_repository
from cache_dse.errors import CacheDseError, SpecValidationError
from cache_dse.explorer import (
    RunOverrides,
    load_experiment,
    run_compare,
    run_exhaustive,
    run_hypervolume,
    run_optimize,
    run_simulate,
)
from cache_dse.genome import parse_genes, parse_restriction
from cache_dse.moea import NormalizationBounds

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _float_list(text: str, count: int, what: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise SpecValidationError(f"{what}: ожидаются числа через запятую, получено {text!r}") from None
    if len(values) != count:
        raise SpecValidationError(f"{what}: ожидается {count} чисел, получено {len(values)}")
    return values


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", type=Path, required=True, help="JSON-файл эксперимента")
    parser.add_argument("--seed", type=int, help="зерно NSGA-II")
    parser.add_argument("--workers", type=int, help="число рабочих процессов (по умолчанию - число ядер)")
    parser.add_argument("--max-records", type=int, help="обрезать трассы до N обращений")
    parser.add_argument("--demand-only", action="store_true", help="считать только промахи по запросу")
    parser.add_argument("--restrict", default="", help="фиксированные гены: gene=value,...")
    parser.add_argument("--no-memo", action="store_true", help="не использовать кэш оценок")
    parser.add_argument("--output", type=Path, help="каталог результатов вместо output_dir эксперимента")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cache-dse", description="Оптимизация конфигурации кэшей I/D с NSGA-II")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="уровень логирования (по умолчанию LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    optimize = commands.add_parser("optimize", help="поиск фронта Парето NSGA-II")
    _add_run_options(optimize)

    exhaustive = commands.add_parser("exhaustive", help="полный перебор подпространства")
    _add_run_options(exhaustive)
    exhaustive.add_argument("--budget", type=int, help="максимальный размер подпространства")

    simulate = commands.add_parser("simulate", help="оценка одной конфигурации")
    _add_run_options(simulate)
    target = simulate.add_mutually_exclusive_group(required=True)
    target.add_argument("--genome", help="девять генов через запятую")
    target.add_argument("--baseline", help="имя базовой конфигурации")
    simulate.add_argument("--application", help="имя трассы эксперимента")

    compare = commands.add_parser("compare", help="сравнение фронтов с базовыми конфигурациями")
    _add_run_options(compare)
    compare.add_argument(
        "--front", action="append", required=True, metavar="APP=FILE",
        help="front.csv приложения; можно указать несколько раз",
    )
    compare.add_argument("--baselines", help="имена базовых конфигураций через запятую")

    hypervolume = commands.add_parser("hypervolume", help="таблица I_H- по файлам фронтов")
    hypervolume.add_argument("fronts", nargs="+", type=Path, help="файлы front.csv")
    hypervolume.add_argument("--bounds", help="tmin,tmax,emin,emax (по умолчанию - по всем фронтам)")
    hypervolume.add_argument("--ref", default="1.1,1.1", help="опорная точка в нормированном пространстве")
    hypervolume.add_argument("--output", type=Path, help="CSV для таблицы")
    return parser


def _overrides(args: argparse.Namespace) -> RunOverrides:
    return RunOverrides(
        seed=args.seed,
        workers=args.workers,
        max_records=args.max_records,
        demand_only=args.demand_only,
        restriction=parse_restriction(args.restrict),
        use_memo=not args.no_memo,
        output_dir=args.output,
    )


def _parse_fronts(items: Sequence[str]) -> Dict[str, Path]:
    fronts: Dict[str, Path] = {}
    for item in items:
        application, sep, path = item.partition("=")
        if not sep or not application or not path:
            raise SpecValidationError(f"--front: ожидается APP=FILE, получено {item!r}")
        fronts[application] = Path(path)
    return fronts


async def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "hypervolume":
        bounds = NormalizationBounds(*_float_list(args.bounds, 4, "--bounds")) if args.bounds else None
        table = run_hypervolume(args.fronts, bounds, _float_list(args.ref, 2, "--ref"), args.output)
        for row in table.rows:
            print(f"{row.source}\t{row.value!r}")
        print(f"MEAN\t{table.mean!r}\nSTD\t{table.std!r}")
        return

    overrides = _overrides(args)
    spec = load_experiment(args.spec, overrides)
    repository = create_eval_repository() if overrides.use_memo else None
    try:
        if args.command == "optimize":
            for name, result in (await run_optimize(spec, overrides, repository)).items():
                print(f"{name}: {len(result.front)} точек фронта -> {result.output_dir}")
        elif args.command == "exhaustive":
            for name, result in (await run_exhaustive(spec, None, overrides, repository, args.budget)).items():
                print(f"{name}: {len(result.table)} геномов, {len(result.front)} точек фронта -> {result.output_dir}")
        elif args.command == "simulate":
            genome = parse_genes(args.genome) if args.genome else None
            report = await run_simulate(spec, genome, args.baseline, args.application, overrides, repository)
            print(report.model_dump_json(indent=2))
        elif args.command == "compare":
            baselines = [name.strip() for name in args.baselines.split(",")] if args.baselines else None
            report = await run_compare(_parse_fronts(args.front), spec, baselines, overrides, repository)
            print(json.dumps([m.model_dump() for m in report.means], indent=2))
    finally:
        if repository is not None:
            await repository.close()
        await close_redis_connection()


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        asyncio.run(_dispatch(args))
    except SpecValidationError as exc:
        logger.error("Ошибка входных данных: %s", exc)
        return EXIT_VALIDATION
    except CacheDseError as exc:
        logger.error("Ошибка выполнения: %s", exc)
        return EXIT_RUNTIME
    except Exception:
        # ввод-вывод, Redis, пул процессов
        logger.exception("Непредвиденная ошибка выполнения")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
