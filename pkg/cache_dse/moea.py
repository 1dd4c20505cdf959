# cache_dse/moea.py
#
# NSGA-II над целочисленными геномами: быстрая недоминируемая сортировка,
# crowding distance, бинарный турнир, одноточечный кроссовер, целочисленная
# мутация, элитистский отбор (mu + lambda). Плюс утилиты Парето-фронта и
# двумерный гиперобъем. Все цели минимизируются.

import inspect
import logging
import math
from dataclasses import dataclass
from typing import Awaitable, Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from cache_dse.cost_model import ObjectiveVector
from cache_dse.errors import CacheDseError, EvaluationError, HypervolumeError
from cache_dse.genome import Genome, gene_domains
from cache_dse.schemas import NsgaParams, SearchSpace

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Пакетная оценка поколения: список геномов -> список векторов целей в том же порядке.
BatchProblem = Callable[[Sequence[Genome]], Awaitable[Sequence[ObjectiveVector]]]


@dataclass
class Individual:
    genome: Genome
    objectives: ObjectiveVector
    rank: int = 0
    crowding: float = 0.0


@dataclass
class ParetoFront:
    members: List[Individual]

    # Ранг 0 популяции без повторов генома; порядок - по целям, затем по генам.
    @classmethod
    def from_population(cls, population: Sequence[Individual]) -> "ParetoFront":
        unique: Dict[Genome, Individual] = {}
        for ind in population:
            if ind.rank == 0 and ind.genome not in unique:
                unique[ind.genome] = ind
        members = sorted(unique.values(), key=lambda ind: (tuple(ind.objectives), tuple(ind.genome)))
        return cls(members)

    def objectives(self) -> List[ObjectiveVector]:
        return [ind.objectives for ind in self.members]

    def genomes(self) -> List[Genome]:
        return [ind.genome for ind in self.members]

    def __len__(self) -> int:
        return len(self.members)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def fast_nondominated_sort(pop: Sequence[Individual]) -> List[List[Individual]]:
    n = len(pop)
    dominated_by: List[List[int]] = [[] for _ in range(n)]
    domination_count = [0] * n

    # каждая пара сравнивается один раз
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(pop[i].objectives, pop[j].objectives):
                dominated_by[i].append(j)
                domination_count[j] += 1
            elif dominates(pop[j].objectives, pop[i].objectives):
                dominated_by[j].append(i)
                domination_count[i] += 1

    fronts: List[List[int]] = [[i for i in range(n) if domination_count[i] == 0]]
    while fronts[-1]:
        next_front: List[int] = []
        for p in fronts[-1]:
            for q in dominated_by[p]:
                domination_count[q] -= 1
                if domination_count[q] == 0:
                    next_front.append(q)
        fronts.append(sorted(next_front))
    fronts.pop()

    result: List[List[Individual]] = []
    for rank, front in enumerate(fronts):
        members = [pop[i] for i in front]
        for ind in members:
            ind.rank = rank
        result.append(members)
    return result


def crowding_distance(front: Sequence[Individual]) -> List[float]:
    size = len(front)
    distances = [0.0] * size
    if size == 0:
        return distances
    if size <= 2:
        distances = [math.inf] * size
    else:
        for m in range(len(front[0].objectives)):
            order = sorted(range(size), key=lambda i: front[i].objectives[m])
            low = front[order[0]].objectives[m]
            high = front[order[-1]].objectives[m]
            distances[order[0]] = math.inf
            distances[order[-1]] = math.inf
            span = high - low
            if span == 0:
                continue
            for k in range(1, size - 1):
                idx = order[k]
                if distances[idx] != math.inf:
                    gap = front[order[k + 1]].objectives[m] - front[order[k - 1]].objectives[m]
                    distances[idx] += gap / span
    for ind, distance in zip(front, distances):
        ind.crowding = distance
    return distances


def assign_rank_and_crowding(pop: Sequence[Individual]) -> List[List[Individual]]:
    fronts = fast_nondominated_sort(pop)
    for front in fronts:
        crowding_distance(front)
    return fronts


# Crowded-comparison: меньший ранг, затем большая crowding distance.
def _crowded_better(a: Individual, b: Individual) -> bool:
    if a.rank != b.rank:
        return a.rank < b.rank
    return a.crowding > b.crowding


def tournament_select(pop: Sequence[Individual], rng: np.random.Generator) -> Individual:
    first, second = (pop[int(i)] for i in rng.integers(len(pop), size=2))
    return second if _crowded_better(second, first) else first


def single_point_crossover(
    p1: Sequence[int], p2: Sequence[int], rng: np.random.Generator, point: Optional[int] = None
) -> Tuple[Genome, Genome]:
    if len(p1) != len(p2):
        raise ValueError("родители разной длины")
    k = int(rng.integers(1, len(p1))) if point is None else point
    child1 = Genome(*(tuple(p1[:k]) + tuple(p2[k:])))
    child2 = Genome(*(tuple(p2[:k]) + tuple(p1[k:])))
    return child1, child2


def int_flip_mutation(
    g: Sequence[int],
    p_mutation: float,
    space: SearchSpace,
    rng: np.random.Generator,
    domains: Optional[List[List[int]]] = None,
) -> Genome:
    domains = domains if domains is not None else gene_domains(space)
    genes = list(g)
    for index, domain in enumerate(domains):
        if rng.random() < p_mutation:
            genes[index] = domain[int(rng.integers(len(domain)))]
    return Genome(*genes)


def random_genome(domains: List[List[int]], rng: np.random.Generator) -> Genome:
    return Genome(*(domain[int(rng.integers(len(domain)))] for domain in domains))


# Адаптер: поэлементная функция Genome -> ObjectiveVector (синхронная или async)
# превращается в пакетную задачу. Исключение оборачивается вместе с геномом.
def batch_problem(fn: Callable[[Genome], Union[ObjectiveVector, Awaitable[ObjectiveVector]]]) -> BatchProblem:
    async def evaluate(genomes: Sequence[Genome]) -> List[ObjectiveVector]:
        results = []
        for genome in genomes:
            try:
                value = fn(genome)
                if inspect.isawaitable(value):
                    value = await value
            except CacheDseError:
                raise
            except Exception as exc:
                raise EvaluationError(genome, exc) from exc
            results.append(ObjectiveVector(*value))
        return results

    return evaluate


async def _evaluate(problem: BatchProblem, genomes: Sequence[Genome]) -> List[Individual]:
    # оцениваем только уникальные геномы, результат раскладываем по ключу
    unique = list(dict.fromkeys(genomes))
    values = await problem(unique)
    by_genome = dict(zip(unique, values))
    return [Individual(genome, ObjectiveVector(*by_genome[genome])) for genome in genomes]


def _make_offspring(
    population: Sequence[Individual],
    space: SearchSpace,
    params: NsgaParams,
    domains: List[List[int]],
    rng: np.random.Generator,
) -> List[Genome]:
    offspring: List[Genome] = []
    while len(offspring) < params.population_size:
        parent1 = tournament_select(population, rng).genome
        parent2 = tournament_select(population, rng).genome
        if rng.random() < params.p_crossover:
            child1, child2 = single_point_crossover(parent1, parent2, rng)
        else:
            child1, child2 = parent1, parent2
        offspring.append(int_flip_mutation(child1, params.p_mutation, space, rng, domains))
        offspring.append(int_flip_mutation(child2, params.p_mutation, space, rng, domains))
    return offspring[: params.population_size]


def environmental_selection(combined: Sequence[Individual], size: int) -> List[Individual]:
    survivors: List[Individual] = []
    for front in assign_rank_and_crowding(combined):
        if len(survivors) + len(front) <= size:
            survivors.extend(front)
            if len(survivors) == size:
                break
            continue
        # сортировка устойчива: при равной crowding distance сохраняется исходный порядок
        ranked = sorted(front, key=lambda ind: -ind.crowding)
        survivors.extend(ranked[: size - len(survivors)])
        break
    return survivors


GenerationCallback = Callable[[int, List[Individual]], None]


async def evolve(
    problem: BatchProblem,
    space: SearchSpace,
    params: NsgaParams,
    restriction: Optional[Mapping[int, int]] = None,
    on_generation: Optional[GenerationCallback] = None,
) -> Tuple[List[Individual], ParetoFront]:
    """Поколенческий цикл NSGA-II.

    Один последовательный генератор (зерно `params.seed`) отвечает за инициализацию,
    турниры, точки кроссовера и мутацию. Оценка случайных чисел не потребляет, поэтому
    результат не зависит от того, сколько процессов считает поколение.
    `on_generation(t, population)` вызывается для начальной популяции (t = 0) и после
    каждого поколения.
    """
    rng = np.random.default_rng(params.seed)
    domains = gene_domains(space, restriction)

    initial = [random_genome(domains, rng) for _ in range(params.population_size)]
    population = await _evaluate(problem, initial)
    assign_rank_and_crowding(population)
    if on_generation is not None:
        on_generation(0, population)

    for generation in range(1, params.generations + 1):
        offspring = await _evaluate(problem, _make_offspring(population, space, params, domains, rng))
        population = environmental_selection(population + offspring, params.population_size)
        logger.debug("Поколение %d: размер фронта %d", generation, sum(1 for ind in population if ind.rank == 0))
        if on_generation is not None:
            on_generation(generation, population)

    return population, ParetoFront.from_population(population)


# Недоминируемые элементы по перебору всех пар; элементы с равными целями сохраняются.
def nondominated_filter(items: Sequence[T], key: Callable[[T], Sequence[float]]) -> List[T]:
    values = [tuple(key(item)) for item in items]
    # сортировка по целям позволяет проверять только предшественников
    order = sorted(range(len(items)), key=lambda i: values[i])
    kept: List[int] = []
    for i in order:
        if not any(dominates(values[j], values[i]) for j in kept):
            kept.append(i)
    return [items[i] for i in sorted(kept)]


# --- Гиперобъем ---

class NormalizationBounds(NamedTuple):
    time_min: float
    time_max: float
    energy_min: float
    energy_max: float


def hypervolume_2d(points: Sequence[Sequence[float]], ref: Sequence[float]) -> float:
    ref_x, ref_y = float(ref[0]), float(ref[1])
    inside = [(float(p[0]), float(p[1])) for p in points if p[0] < ref_x and p[1] < ref_y]
    if len(inside) < len(points):
        logger.warning("Гиперобъем: %d точек не доминируют опорную точку и отброшены", len(points) - len(inside))
    if not inside:
        logger.warning("Гиперобъем: нет точек внутри области опорной точки")
        return 0.0

    volume = 0.0
    current_y = ref_y
    for x, y in sorted(inside):
        if y < current_y:
            volume += (ref_x - x) * (current_y - y)
            current_y = y
    return volume


def bounds_from_fronts(fronts: Sequence[Sequence[Sequence[float]]]) -> NormalizationBounds:
    points = np.array([p for front in fronts for p in front], dtype=float).reshape(-1, 2)
    if points.size == 0:
        raise HypervolumeError("нет точек для вычисления границ нормализации")
    low = points.min(axis=0)
    high = points.max(axis=0)
    # вырожденный диапазон расширяется до единичного относительно минимума
    for m in range(2):
        if high[m] <= low[m]:
            high[m] = low[m] + (abs(low[m]) or 1.0)
    return NormalizationBounds(float(low[0]), float(high[0]), float(low[1]), float(high[1]))


def normalize(points: Sequence[Sequence[float]], bounds: NormalizationBounds) -> np.ndarray:
    low = np.array([bounds.time_min, bounds.energy_min], dtype=float)
    high = np.array([bounds.time_max, bounds.energy_max], dtype=float)
    if not (np.all(np.isfinite(low)) and np.all(np.isfinite(high))) or np.any(high <= low):
        raise HypervolumeError(f"вырожденные границы нормализации: {tuple(bounds)}")
    array = np.array(points, dtype=float).reshape(-1, 2)
    return (array - low) / (high - low)


def hypervolume_minus(
    front: Union[ParetoFront, Sequence[Sequence[float]]],
    ref: Sequence[float] = (1.1, 1.1),
    normalization: Optional[NormalizationBounds] = None,
) -> float:
    points = front.objectives() if isinstance(front, ParetoFront) else list(front)
    if len(points) == 0:
        return 0.0
    if normalization is None:
        raise HypervolumeError("нужны границы нормализации")
    normalized = normalize(points, normalization)
    return -hypervolume_2d(normalized.tolist(), ref)
