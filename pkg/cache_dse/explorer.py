# cache_dse/explorer.py
#
# Оркестрация эксперимента: загрузка характеризации, трасс и пространства поиска,
# оптимизация NSGA-II, полный перебор, сравнение с базовыми конфигурациями,
# отчет по одной конфигурации и таблица гиперобъема.
# Каждая операция возвращает результат в памяти и пишет артефакты в каталог вывода.

import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ValidationError

from cache_dse import artifacts
from cache_dse.cache_sim import SimCounters, validate_config
from cache_dse.config import settings
from cache_dse.cost_model import (
    ObjectiveVector,
    check_coverage,
    energy_with_cpu,
    improvement,
    load_characterization,
)
from cache_dse.errors import BudgetExceededError, GenomeError, SpecValidationError, TraceSourceError
from cache_dse.evaluator import Evaluator, PreparedTrace, default_workers
from cache_dse.genome import (
    Genome,
    decode,
    encode,
    enumerate_genomes,
    load_search_space,
    normalize_restriction,
    restricted_cardinality,
    validate_genome,
)
from cache_dse.moea import (
    Individual,
    NormalizationBounds,
    ParetoFront,
    bounds_from_fronts,
    evolve,
    hypervolume_minus,
    nondominated_filter,
)
from cache_dse.repositories.base import BaseEvalRepository
from cache_dse.schemas import (
    BaselineSpec,
    CacheConfig,
    Characterization,
    ExperimentSpec,
    MissMode,
    Prefetch,
    Replacement,
    SearchSpace,
    TraceRef,
    WritePolicy,
)
from cache_dse.trace import TraceSource, load_trace, synth_trace, trace_digest

logger = logging.getLogger(__name__)

EXHAUSTIVE_CHUNK = 4096


def _baseline(name: str, total: int, line: int, ways: int, replacement: Replacement, prefetch: Prefetch) -> BaselineSpec:
    return BaselineSpec(
        name=name,
        icache=CacheConfig(total_size=total, line_size=line, ways=ways, replacement=replacement, prefetch=prefetch),
        dcache=CacheConfig(
            total_size=total, line_size=line, ways=ways, replacement=replacement, prefetch=prefetch,
            write_policy=WritePolicy.COPY_BACK, writable=True,
        ),
    )


# Встроенные базовые конфигурации: одинаковые параметры для I- и D-cache.
BUILTIN_BASELINES: Dict[str, BaselineSpec] = {
    "baseline1": _baseline("baseline1", 16384, 16, 64, Replacement.LRU, Prefetch.ON_DEMAND),
    "baseline2": _baseline("baseline2", 32768, 64, 4, Replacement.RANDOM, Prefetch.ALWAYS_PREFETCH),
    "baseline3": _baseline("baseline3", 32768, 64, 2, Replacement.LRU, Prefetch.ALWAYS_PREFETCH),
}


# Переопределения из командной строки; None означает "взять из файла эксперимента или настроек".
@dataclass
class RunOverrides:
    seed: Optional[int] = None
    workers: Optional[int] = None
    max_records: Optional[int] = None
    demand_only: bool = False
    restriction: Dict[str, int] = field(default_factory=dict)
    use_memo: bool = True
    output_dir: Optional[Path] = None


@dataclass(frozen=True)
class ResolvedBaseline:
    name: str
    icache: CacheConfig
    dcache: CacheConfig
    genome: Optional[Genome]


@dataclass
class ExperimentContext:
    spec: ExperimentSpec
    space: SearchSpace
    characterization: Characterization
    traces: List[PreparedTrace]
    restriction: Dict[int, int]
    baselines: List[ResolvedBaseline]
    workers: int
    sim_seed: int
    use_memo: bool

    def output_dir_for(self, trace: PreparedTrace) -> Path:
        if len(self.traces) == 1:
            return self.spec.output_dir
        return self.spec.output_dir / trace.name

    def trace_named(self, name: str) -> PreparedTrace:
        for trace in self.traces:
            if trace.name == name:
                return trace
        raise SpecValidationError(f"приложение {name!r} не описано в эксперименте")

    def evaluator(self, trace: PreparedTrace, repository: Optional[BaseEvalRepository]) -> Evaluator:
        return Evaluator(
            trace,
            self.characterization,
            self.space,
            miss_mode=self.spec.miss_mode,
            sim_seed=self.sim_seed,
            repository=repository if self.use_memo else None,
            workers=self.workers,
        )


def _resolve_path(value: Optional[Path], base: Path) -> Optional[Path]:
    if value is None or value.is_absolute():
        return value
    return base / value


# Загрузка файла эксперимента. Относительные пути считаются от каталога файла.
def load_experiment(path: Path, overrides: Optional[RunOverrides] = None) -> ExperimentSpec:
    try:
        spec = ExperimentSpec.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SpecValidationError(f"не удалось прочитать эксперимент {path}: {exc}") from exc
    except ValidationError as exc:
        raise SpecValidationError(f"{path}: {exc}") from exc

    base = path.parent
    traces = [
        trace.model_copy(update={"path": _resolve_path(trace.path, base)}) for trace in spec.traces
    ]
    spec = spec.model_copy(update={
        "traces": traces,
        "search_space": _resolve_path(spec.search_space, base),
        "characterization": _resolve_path(spec.characterization, base),
        "output_dir": _resolve_path(spec.output_dir, base),
    })
    return apply_overrides(spec, overrides)


def apply_overrides(spec: ExperimentSpec, overrides: Optional[RunOverrides]) -> ExperimentSpec:
    if overrides is None:
        return spec
    update: Dict[str, Any] = {}
    if overrides.seed is not None:
        update["nsga"] = spec.nsga.model_copy(update={"seed": overrides.seed})
    if overrides.max_records is not None:
        update["traces"] = [t.model_copy(update={"max_records": overrides.max_records}) for t in spec.traces]
    if overrides.demand_only:
        update["miss_mode"] = MissMode.DEMAND_ONLY
    if overrides.restriction:
        update["restriction"] = {**spec.restriction, **overrides.restriction}
    if overrides.output_dir is not None:
        update["output_dir"] = overrides.output_dir
    return spec.model_copy(update=update)


def prepare_trace(ref: TraceRef) -> PreparedTrace:
    if ref.synthetic is not None:
        records = synth_trace(ref.synthetic, ref.count, ref.seed)
        if ref.max_records is not None:
            records = records[: ref.max_records]
    else:
        if not ref.path.is_file():
            raise TraceSourceError(f"трасса {ref.name!r}: файл {ref.path} не найден")
        records = load_trace(TraceSource(origin=ref.path, record_limit=ref.max_records))
    digest = trace_digest(records)
    logger.info("Трасса %s загружена: %d обращений, digest %s", ref.name, len(records), digest[:12])
    return PreparedTrace(name=ref.name, records=tuple(records), digest=digest)


def resolve_baseline(entry: Union[str, BaselineSpec], space: SearchSpace) -> ResolvedBaseline:
    if isinstance(entry, str):
        if entry not in BUILTIN_BASELINES:
            raise SpecValidationError(
                f"неизвестная базовая конфигурация {entry!r}; встроенные: {', '.join(BUILTIN_BASELINES)}"
            )
        entry = BUILTIN_BASELINES[entry]
    if entry.genes is not None:
        genome = validate_genome(entry.genes, space)
        i_cfg, d_cfg = decode(genome, space)
        return ResolvedBaseline(entry.name, i_cfg, d_cfg, genome)

    validate_config(entry.icache)
    validate_config(entry.dcache)
    try:
        genome: Optional[Genome] = encode(entry.icache, entry.dcache, space)
    except GenomeError:
        genome = None
    return ResolvedBaseline(entry.name, entry.icache, entry.dcache, genome)


# Первая и вторая фазы: характеризация и трассы. Все файлы проверяются до симуляции.
def prepare_context(spec: ExperimentSpec, overrides: Optional[RunOverrides] = None) -> ExperimentContext:
    overrides = overrides or RunOverrides()
    space = load_search_space(spec.search_space)
    characterization = load_characterization(spec.characterization)
    baselines = [resolve_baseline(entry, space) for entry in spec.baselines]
    check_coverage(
        characterization,
        space,
        extra=[(name, cfg) for b in baselines for name, cfg in (("icache", b.icache), ("dcache", b.dcache))],
    )
    restriction = normalize_restriction(spec.restriction, space)
    traces = [prepare_trace(ref) for ref in spec.traces]

    workers = overrides.workers or settings.WORKERS or default_workers()
    return ExperimentContext(
        spec=spec,
        space=space,
        characterization=characterization,
        traces=traces,
        restriction=restriction,
        baselines=baselines,
        workers=max(1, workers),
        sim_seed=settings.SIM_SEED,
        use_memo=overrides.use_memo,
    )


async def evaluate_baseline(evaluator: Evaluator, baseline: ResolvedBaseline) -> ObjectiveVector:
    if baseline.genome is not None:
        records = await evaluator.evaluate_genomes([baseline.genome])
        return records[0].objectives
    record = await evaluator.evaluate_configs(baseline.icache, baseline.dcache)
    return record.objectives


def _front_entries(front: ParetoFront) -> List[Tuple[Genome, ObjectiveVector]]:
    return [(m.genome, m.objectives) for m in front.members]


# --- Оптимизация ---

class GenerationLog:
    """Статистика по поколениям для log.csv и сводки INI/AVG/END.

    Улучшения считаются относительно первой базовой конфигурации и усредняются
    по особям популяции.
    """

    def __init__(self, evaluator: Evaluator, baseline: Optional[ObjectiveVector]):
        self.evaluator = evaluator
        self.baseline = baseline
        self.rows: List[Dict[str, Any]] = []
        # Средние улучшения (время, энергия) по каждому поколению.
        self.improvements: List[Tuple[float, float]] = []

    def record(self, generation: int, population: List[Individual]) -> None:
        times = [ind.objectives.exec_time for ind in population]
        energies = [ind.objectives.energy for ind in population]
        time_pct: Optional[float] = None
        energy_pct: Optional[float] = None
        if self.baseline is not None:
            gains = [improvement(self.baseline, ind.objectives) for ind in population]
            time_pct = statistics.fmean(g[0] for g in gains)
            energy_pct = statistics.fmean(g[1] for g in gains)
            self.improvements.append((time_pct, energy_pct))
        self.rows.append({
            "generation": generation,
            "best_exec_time": min(times),
            "mean_exec_time": statistics.fmean(times),
            "best_energy": min(energies),
            "mean_energy": statistics.fmean(energies),
            "time_improvement_pct": time_pct,
            "energy_improvement_pct": energy_pct,
            "distinct_genomes": len(self.evaluator.requested),
        })
        logger.info(
            "Поколение %d: лучшее время %.6g с, лучшая энергия %.6g Дж",
            generation, min(times), min(energies),
        )

    def convergence(self) -> Optional[Dict[str, Dict[str, float]]]:
        if not self.improvements:
            return None
        return {
            "INI": {"time_pct": self.improvements[0][0], "energy_pct": self.improvements[0][1]},
            "AVG": {
                "time_pct": statistics.fmean(i[0] for i in self.improvements),
                "energy_pct": statistics.fmean(i[1] for i in self.improvements),
            },
            "END": {"time_pct": self.improvements[-1][0], "energy_pct": self.improvements[-1][1]},
        }


@dataclass
class OptimizeResult:
    application: str
    front: ParetoFront
    population: List[Individual]
    log: List[Dict[str, Any]]
    summary: Dict[str, Any]
    output_dir: Path
    simulations: int


async def run_optimize(
    spec: ExperimentSpec,
    overrides: Optional[RunOverrides] = None,
    repository: Optional[BaseEvalRepository] = None,
) -> Dict[str, OptimizeResult]:
    context = prepare_context(spec, overrides)
    results: Dict[str, OptimizeResult] = {}
    for trace in context.traces:
        results[trace.name] = await _optimize_one(context, trace, repository)
    return results


async def _optimize_one(
    context: ExperimentContext, trace: PreparedTrace, repository: Optional[BaseEvalRepository]
) -> OptimizeResult:
    spec = context.spec
    async with context.evaluator(trace, repository) as evaluator:
        baseline = context.baselines[0] if context.baselines else None
        baseline_vec = await evaluate_baseline(evaluator, baseline) if baseline is not None else None
        # базовая линия не входит в число геномов, запрошенных алгоритмом
        evaluator.requested.clear()

        usable = baseline_vec
        if baseline_vec is not None and 0.0 in baseline_vec:
            logger.warning("Базовая конфигурация %s дает нулевую цель: улучшения не считаются", baseline.name)
            usable = None
        log = GenerationLog(evaluator, usable)
        logger.info(
            "Оптимизация %s: популяция %d, поколений %d, seed %d, рабочих %d",
            trace.name, spec.nsga.population_size, spec.nsga.generations, spec.nsga.seed, evaluator.workers,
        )
        population, front = await evolve(evaluator, context.space, spec.nsga, context.restriction, log.record)
        distinct = len(evaluator.requested)
        simulations = evaluator.simulations

    out = context.output_dir_for(trace)
    entries = _front_entries(front)
    artifacts.write_front_csv(out / "front.csv", entries, context.space)
    artifacts.write_pareto_set_json(out / "pareto_set.json", trace.name, trace.digest, entries, context.space)
    artifacts.write_log_csv(out / "log.csv", log.rows)

    summary = {
        "application": trace.name,
        "trace_digest": trace.digest,
        "records": len(trace.records),
        "seed": spec.nsga.seed,
        "generations": spec.nsga.generations,
        "population_size": spec.nsga.population_size,
        "miss_mode": spec.miss_mode.value,
        "restriction": {k: v for k, v in sorted(spec.restriction.items())},
        "front_size": len(front),
        "distinct_genomes": distinct,
        "baseline": baseline.name if baseline is not None else None,
        "baseline_objectives": (
            {"exec_time": baseline_vec.exec_time, "energy": baseline_vec.energy} if baseline_vec else None
        ),
        "convergence": log.convergence(),
    }
    artifacts.write_json(out / "summary.json", summary)
    logger.info("Фронт %s: %d точек, артефакты записаны в %s", trace.name, len(front), out)
    return OptimizeResult(trace.name, front, population, log.rows, summary, out, simulations)


# --- Полный перебор ---

@dataclass
class ExhaustiveResult:
    application: str
    table: List[Tuple[Genome, ObjectiveVector]]
    front: List[Tuple[Genome, ObjectiveVector]]
    output_dir: Path


async def run_exhaustive(
    spec: ExperimentSpec,
    restriction: Optional[Mapping[str, int]] = None,
    overrides: Optional[RunOverrides] = None,
    repository: Optional[BaseEvalRepository] = None,
    budget: Optional[int] = None,
) -> Dict[str, ExhaustiveResult]:
    if restriction:
        spec = spec.model_copy(update={"restriction": {**spec.restriction, **restriction}})
    context = prepare_context(spec, overrides)
    budget = budget or spec.exhaustive_budget or settings.EXHAUSTIVE_BUDGET
    size = restricted_cardinality(context.space, context.restriction)
    if size > budget:
        raise BudgetExceededError(f"подпространство из {size} геномов превышает бюджет {budget}")

    genomes = list(enumerate_genomes(context.space, context.restriction))
    results: Dict[str, ExhaustiveResult] = {}
    for trace in context.traces:
        logger.info("Полный перебор %s: %d геномов", trace.name, size)
        table: List[Tuple[Genome, ObjectiveVector]] = []
        async with context.evaluator(trace, repository) as evaluator:
            for start in range(0, len(genomes), EXHAUSTIVE_CHUNK):
                chunk = genomes[start:start + EXHAUSTIVE_CHUNK]
                table.extend(zip(chunk, await evaluator(chunk)))

        front = nondominated_filter(table, key=lambda entry: entry[1])
        out = context.output_dir_for(trace)
        artifacts.write_objective_table(out / "exhaustive.csv", table, context.space)
        artifacts.write_front_csv(out / "front.csv", front, context.space)
        artifacts.write_pareto_set_json(out / "pareto_set.json", trace.name, trace.digest, front, context.space)
        logger.info("Точный фронт %s: %d точек", trace.name, len(front))
        results[trace.name] = ExhaustiveResult(trace.name, table, front, out)
    return results


# --- Сравнение с базовыми конфигурациями ---

class ComparePoint(BaseModel):
    application: str
    baseline: str
    index: int
    exec_time: float
    energy: float
    time_pct: float
    energy_pct: float


class CompareMean(BaseModel):
    application: str
    baseline: str
    time_pct: float
    energy_pct: float


class CompareReport(BaseModel):
    points: List[ComparePoint]
    means: List[CompareMean]


AVERAGE_ROW = "AVERAGE"


# Чистая часть сравнения: проценты по каждой точке, средние по фронту и среднее по приложениям.
def compare_fronts(
    fronts: Mapping[str, Sequence[ObjectiveVector]],
    baselines: Mapping[str, Mapping[str, ObjectiveVector]],
) -> CompareReport:
    points: List[ComparePoint] = []
    means: List[CompareMean] = []
    per_baseline: Dict[str, List[CompareMean]] = {}
    for application, front in fronts.items():
        for baseline_name, baseline in baselines[application].items():
            gains = [improvement(baseline, ObjectiveVector(*p)) for p in front]
            for index, (p, (time_pct, energy_pct)) in enumerate(zip(front, gains)):
                points.append(ComparePoint(
                    application=application, baseline=baseline_name, index=index,
                    exec_time=p[0], energy=p[1], time_pct=time_pct, energy_pct=energy_pct,
                ))
            if not gains:
                logger.warning("Фронт %s пуст: сравнение с %s пропущено", application, baseline_name)
                continue
            mean = CompareMean(
                application=application,
                baseline=baseline_name,
                time_pct=statistics.fmean(g[0] for g in gains),
                energy_pct=statistics.fmean(g[1] for g in gains),
            )
            means.append(mean)
            per_baseline.setdefault(baseline_name, []).append(mean)

    if len(fronts) > 1:
        for baseline_name, rows in per_baseline.items():
            means.append(CompareMean(
                application=AVERAGE_ROW,
                baseline=baseline_name,
                time_pct=statistics.fmean(r.time_pct for r in rows),
                energy_pct=statistics.fmean(r.energy_pct for r in rows),
            ))
    return CompareReport(points=points, means=means)


async def run_compare(
    front_files: Mapping[str, Path],
    spec: ExperimentSpec,
    baseline_names: Optional[Sequence[Union[str, BaselineSpec]]] = None,
    overrides: Optional[RunOverrides] = None,
    repository: Optional[BaseEvalRepository] = None,
) -> CompareReport:
    """Сравнение фронтов с базовыми конфигурациями.

    `front_files` сопоставляет имя приложения (трассы эксперимента) и файл front.csv.
    Базовые конфигурации оцениваются на трассе соответствующего приложения.
    """
    if baseline_names:
        spec = spec.model_copy(update={"baselines": list(baseline_names)})
    context = prepare_context(spec, overrides)
    if not context.baselines:
        raise SpecValidationError("для сравнения нужна хотя бы одна базовая конфигурация")

    fronts: Dict[str, List[ObjectiveVector]] = {}
    baselines: Dict[str, Dict[str, ObjectiveVector]] = {}
    for application, path in front_files.items():
        trace = context.trace_named(application)
        fronts[application] = [row.objectives for row in artifacts.read_front_csv(path)]
        async with context.evaluator(trace, repository) as evaluator:
            baselines[application] = {
                b.name: await evaluate_baseline(evaluator, b) for b in context.baselines
            }

    report = compare_fronts(fronts, baselines)
    out = spec.output_dir
    artifacts.write_table(
        out / "compare_points.csv",
        ("application", "baseline", "index", "ExTime", "Energy", "time_pct", "energy_pct"),
        [(p.application, p.baseline, p.index, p.exec_time, p.energy, p.time_pct, p.energy_pct) for p in report.points],
    )
    artifacts.write_table(
        out / "compare.csv",
        ("application", "baseline", "time_pct", "energy_pct"),
        [(m.application, m.baseline, m.time_pct, m.energy_pct) for m in report.means],
    )
    logger.info("Сравнение записано в %s", out)
    return report


# --- Одна конфигурация ---

class SimulationReport(BaseModel):
    application: str
    genes: Optional[List[int]]
    icache: CacheConfig
    dcache: CacheConfig
    i_counters: SimCounters
    d_counters: SimCounters
    exec_time: float
    energy: float
    energy_with_cpu: Optional[float] = None


async def run_simulate(
    spec: ExperimentSpec,
    genome: Optional[Sequence[int]] = None,
    baseline: Optional[str] = None,
    application: Optional[str] = None,
    overrides: Optional[RunOverrides] = None,
    repository: Optional[BaseEvalRepository] = None,
) -> SimulationReport:
    if (genome is None) == (baseline is None):
        raise SpecValidationError("нужно указать либо геном, либо базовую конфигурацию")
    context = prepare_context(spec, overrides)
    trace = context.trace_named(application) if application else context.traces[0]

    async with context.evaluator(trace, repository) as evaluator:
        if genome is not None:
            genome = validate_genome(list(genome), context.space)
            i_cfg, d_cfg = decode(genome, context.space)
            record = (await evaluator.evaluate_genomes([genome]))[0]
        else:
            resolved = resolve_baseline(baseline, context.space)
            check_coverage(context.characterization, context.space, [("icache", resolved.icache), ("dcache", resolved.dcache)])
            genome, i_cfg, d_cfg = resolved.genome, resolved.icache, resolved.dcache
            if genome is not None:
                record = (await evaluator.evaluate_genomes([genome]))[0]
            else:
                record = await evaluator.evaluate_configs(i_cfg, d_cfg)

    full_energy = None
    if context.characterization.cpu_power_w is not None:
        full_energy = energy_with_cpu(
            record.i_counters, record.d_counters, i_cfg, d_cfg,
            context.characterization, context.characterization.cpu_power_w, spec.miss_mode,
        )
    return SimulationReport(
        application=trace.name,
        genes=list(genome) if genome is not None else None,
        icache=i_cfg,
        dcache=d_cfg,
        i_counters=record.i_counters,
        d_counters=record.d_counters,
        exec_time=record.objectives.exec_time,
        energy=record.objectives.energy,
        energy_with_cpu=full_energy,
    )


# --- Гиперобъем ---

class HypervolumeRow(BaseModel):
    source: str
    value: float


class HypervolumeTable(BaseModel):
    rows: List[HypervolumeRow]
    mean: float
    std: float
    bounds: Tuple[float, float, float, float]
    ref: Tuple[float, float]


def hypervolume_table(
    fronts: Mapping[str, Sequence[Sequence[float]]],
    bounds: Optional[NormalizationBounds] = None,
    ref: Sequence[float] = (1.1, 1.1),
) -> HypervolumeTable:
    if not fronts:
        raise SpecValidationError("нужен хотя бы один фронт")
    bounds = bounds or bounds_from_fronts(list(fronts.values()))
    rows = [
        HypervolumeRow(source=name, value=hypervolume_minus(points, ref, bounds))
        for name, points in fronts.items()
    ]
    values = [row.value for row in rows]
    # statistics считает в точной арифметике: одинаковые значения дают std ровно 0
    return HypervolumeTable(
        rows=rows,
        mean=float(statistics.mean(values)),
        std=float(statistics.pstdev(values)),
        bounds=tuple(bounds),
        ref=(float(ref[0]), float(ref[1])),
    )


def run_hypervolume(
    front_files: Sequence[Path],
    bounds: Optional[NormalizationBounds] = None,
    ref: Sequence[float] = (1.1, 1.1),
    output: Optional[Path] = None,
) -> HypervolumeTable:
    if not front_files:
        raise SpecValidationError("нужен хотя бы один файл фронта")
    resolved = [Path(path).resolve() for path in front_files]
    duplicates = sorted({str(path) for path, key in zip(front_files, resolved) if resolved.count(key) > 1})
    if duplicates:
        raise SpecValidationError(f"файлы фронтов указаны повторно: {', '.join(duplicates)}")
    fronts = {str(path): [row.objectives for row in artifacts.read_front_csv(path)] for path in front_files}
    table = hypervolume_table(fronts, bounds, ref)
    if output is not None:
        artifacts.write_table(
            output,
            ("source", "IH_minus"),
            [(row.source, row.value) for row in table.rows] + [("MEAN", table.mean), ("STD", table.std)],
        )
        logger.info("Таблица гиперобъема записана в %s", output)
    return table
