# cache_dse/evaluator.py
#
# Мемоизированная оценка конфигураций: геном -> симуляция трассы -> вектор целей.
# Схема "мастер - рабочие": поколение превращается в очередь уникальных геномов,
# рабочие процессы считают симуляции, мастер собирает результаты по ключу генома
# до отбора. Оценка - чистая функция ключа, поэтому результат не зависит от
# числа рабочих и от того, включен ли кэш.

import asyncio
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from cache_dse.cache_sim import SimCounters, simulate
from cache_dse.cost_model import ObjectiveVector, characterization_digest, objectives
from cache_dse.errors import CacheDseError, EvaluationError
from cache_dse.genome import Genome, decode, space_digest
from cache_dse.repositories.base import BaseEvalRepository, EvalRecord
from cache_dse.schemas import CacheConfig, Characterization, MissMode, SearchSpace
from cache_dse.trace import AccessRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreparedTrace:
    name: str
    records: Tuple[AccessRecord, ...]
    digest: str


# Трасса рабочего процесса: передается один раз через initializer пула.
_WORKER_TRACE: Tuple[AccessRecord, ...] = ()


def _init_worker(records: Tuple[AccessRecord, ...]) -> None:
    global _WORKER_TRACE
    _WORKER_TRACE = records


def _simulate_in_worker(i_cfg: CacheConfig, d_cfg: CacheConfig, seed: int) -> Tuple[SimCounters, SimCounters]:
    return simulate(_WORKER_TRACE, i_cfg, d_cfg, seed)


def default_workers() -> int:
    return os.cpu_count() or 1


class Evaluator:
    def __init__(
        self,
        trace: PreparedTrace,
        characterization: Characterization,
        space: SearchSpace,
        *,
        miss_mode: MissMode = MissMode.COMBINED,
        sim_seed: int = 0,
        repository: Optional[BaseEvalRepository] = None,
        workers: int = 1,
    ):
        self.trace = trace
        self.characterization = characterization
        self.space = space
        self.miss_mode = miss_mode
        self.sim_seed = sim_seed
        self.repository = repository
        self.workers = max(1, workers)
        self.key_prefix = (
            f"{trace.digest}:{characterization_digest(characterization)}:{miss_mode.value}:{sim_seed}:"
        )
        # Гены - индексы в таблицах пространства, поэтому ключ генома включает его отпечаток.
        self.genome_prefix = f"{self.key_prefix}g:{space_digest(space)}:"
        # Сколько симуляций реально выполнено (промахи кэша оценок).
        self.simulations = 0
        # Уникальные геномы, запрошенные за время жизни оценщика.
        self.requested: Set[Genome] = set()
        self._pool: Optional[ProcessPoolExecutor] = None

    def genome_key(self, genome: Genome) -> str:
        return self.genome_prefix + ",".join(str(g) for g in genome)

    def config_key(self, i_cfg: CacheConfig, d_cfg: CacheConfig) -> str:
        return self.key_prefix + "c:" + i_cfg.describe() + "|" + d_cfg.describe()

    def _get_pool(self) -> ProcessPoolExecutor:
        if self._pool is None:
            self._pool = ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=_init_worker,
                initargs=(self.trace.records,),
            )
        return self._pool

    async def _simulate_many(self, jobs: List[Tuple[CacheConfig, CacheConfig, int]]) -> List[Tuple[SimCounters, SimCounters]]:
        if self.workers == 1 or len(jobs) == 1:
            return [simulate(self.trace.records, *job) for job in jobs]
        loop = asyncio.get_running_loop()
        pool = self._get_pool()
        return list(await asyncio.gather(*(
            loop.run_in_executor(pool, _simulate_in_worker, *job) for job in jobs
        )))

    async def _evaluate_keyed(
        self, items: List[Tuple[str, object, CacheConfig, CacheConfig, int]]
    ) -> Dict[str, EvalRecord]:
        keys = [item[0] for item in items]
        cached = await self.repository.get_many(keys) if self.repository is not None else {}
        pending = [item for item in items if item[0] not in cached]
        logger.debug("Оценка пакета: %d в кэше, %d к расчету", len(cached), len(pending))
        if not pending:
            return cached

        try:
            counters = await self._simulate_many([(i_cfg, d_cfg, seed) for _, _, i_cfg, d_cfg, seed in pending])
        except EvaluationError:
            raise
        except Exception as exc:
            if len(pending) == 1:
                raise EvaluationError(pending[0][1], exc) from exc
            # пул не говорит, какая задача упала: пересчитываем по одной, чтобы назвать геном
            for _, label, i_cfg, d_cfg, seed in pending:
                try:
                    simulate(self.trace.records, i_cfg, d_cfg, seed)
                except Exception as inner:
                    raise EvaluationError(label, inner) from inner
            raise

        fresh: Dict[str, EvalRecord] = {}
        for (key, label, i_cfg, d_cfg, _), (i_counters, d_counters) in zip(pending, counters):
            try:
                vector = objectives(i_counters, d_counters, i_cfg, d_cfg, self.characterization, self.miss_mode)
            except CacheDseError as exc:
                raise EvaluationError(label, exc) from exc
            fresh[key] = EvalRecord(i_counters=i_counters, d_counters=d_counters, objectives=vector)
        self.simulations += len(fresh)
        if self.repository is not None:
            await self.repository.put_many(fresh)
        return {**cached, **fresh}

    async def evaluate_genomes(self, genomes: Sequence[Genome]) -> List[EvalRecord]:
        unique = list(dict.fromkeys(Genome(*g) for g in genomes))
        self.requested.update(unique)
        items = []
        for genome in unique:
            i_cfg, d_cfg = decode(genome, self.space)
            items.append((self.genome_key(genome), genome, i_cfg, d_cfg, self.sim_seed))
        results = await self._evaluate_keyed(items)
        by_genome = {genome: results[self.genome_key(genome)] for genome in unique}
        return [by_genome[Genome(*g)] for g in genomes]

    # Интерфейс пакетной задачи для moea.evolve.
    async def __call__(self, genomes: Sequence[Genome]) -> List[ObjectiveVector]:
        return [record.objectives for record in await self.evaluate_genomes(genomes)]

    # Оценка произвольной пары конфигураций (базовые линии вне пространства поиска).
    async def evaluate_configs(self, i_cfg: CacheConfig, d_cfg: CacheConfig) -> EvalRecord:
        key = self.config_key(i_cfg, d_cfg)
        label = (i_cfg.describe(), d_cfg.describe())
        results = await self._evaluate_keyed([(key, label, i_cfg, d_cfg, self.sim_seed)])
        return results[key]

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    async def __aenter__(self) -> "Evaluator":
        return self

    async def __aexit__(self, *exc_info) -> None:
        self.close()
