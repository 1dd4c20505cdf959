# cache_dse/cost_model.py
#
# Две целевые функции: время выполнения (шесть слагаемых: обращения, задержка DRAM
# и заполнение строки для каждого кэша) и энергия без слагаемого execTime x CPU_power.
# Плюс проценты улучшения относительно базовой конфигурации и загрузка таблицы
# характеризации.

import hashlib
import json
import logging
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Tuple

from pydantic import ValidationError

from cache_dse.cache_sim import SimCounters
from cache_dse.errors import CharacterizationError, ImprovementError
from cache_dse.schemas import CacheConfig, CacheTiming, Characterization, MissMode, SearchSpace

logger = logging.getLogger(__name__)


class ObjectiveVector(NamedTuple):
    exec_time: float
    energy: float


def _timing(ch: Characterization, cache_name: str, config: CacheConfig) -> CacheTiming:
    entry = ch.find(cache_name, config.line_size, config.ways)
    if entry is None:
        raise CharacterizationError(
            f"{cache_name}: нет характеризации для line_size={config.line_size}, ways={config.ways}"
        )
    return entry


def exec_time(
    i: SimCounters,
    d: SimCounters,
    i_cfg: CacheConfig,
    d_cfg: CacheConfig,
    ch: Characterization,
    mode: MissMode = MissMode.COMBINED,
) -> float:
    i_t = _timing(ch, "icache", i_cfg)
    d_t = _timing(ch, "dcache", d_cfg)
    dram = ch.dram
    i_miss = i.misses(mode)
    d_miss = d.misses(mode)
    return (
        i.accesses * i_t.access_time_s
        + i_miss * dram.access_time_s
        + i_miss * i_cfg.line_size / dram.bandwidth_bps
        + d.accesses * d_t.access_time_s
        + d_miss * dram.access_time_s
        + d_miss * d_cfg.line_size / dram.bandwidth_bps
    )


# Слагаемое заполнения строки (access_energy x line_size) берется в исходном виде:
# энергия обращения трактуется как энергия на байт именно в этом слагаемом.
def energy(
    i: SimCounters,
    d: SimCounters,
    i_cfg: CacheConfig,
    d_cfg: CacheConfig,
    ch: Characterization,
    mode: MissMode = MissMode.COMBINED,
) -> float:
    i_t = _timing(ch, "icache", i_cfg)
    d_t = _timing(ch, "dcache", d_cfg)
    dram = ch.dram
    i_miss = i.misses(mode)
    d_miss = d.misses(mode)
    return (
        i.accesses * i_t.access_energy_j
        + d.accesses * d_t.access_energy_j
        + i_miss * i_t.access_energy_j * i_cfg.line_size
        + d_miss * d_t.access_energy_j * d_cfg.line_size
        + i_miss * dram.access_power_w * (dram.access_time_s + i_cfg.line_size / dram.bandwidth_bps)
        + d_miss * dram.access_power_w * (dram.access_time_s + d_cfg.line_size / dram.bandwidth_bps)
    )


# Полная энергия со слагаемым CPU. Только для диагностики, целевой функцией не является.
def energy_with_cpu(
    i: SimCounters,
    d: SimCounters,
    i_cfg: CacheConfig,
    d_cfg: CacheConfig,
    ch: Characterization,
    cpu_power: float,
    mode: MissMode = MissMode.COMBINED,
) -> float:
    return exec_time(i, d, i_cfg, d_cfg, ch, mode) * cpu_power + energy(i, d, i_cfg, d_cfg, ch, mode)


def objectives(
    i: SimCounters,
    d: SimCounters,
    i_cfg: CacheConfig,
    d_cfg: CacheConfig,
    ch: Characterization,
    mode: MissMode = MissMode.COMBINED,
) -> ObjectiveVector:
    return ObjectiveVector(exec_time(i, d, i_cfg, d_cfg, ch, mode), energy(i, d, i_cfg, d_cfg, ch, mode))


def improvement(baseline: ObjectiveVector, optimized: ObjectiveVector) -> Tuple[float, float]:
    if baseline.exec_time == 0 or baseline.energy == 0:
        raise ImprovementError(f"нулевая компонента базовой линии: {tuple(baseline)}")
    return (
        100.0 * (baseline.exec_time - optimized.exec_time) / baseline.exec_time,
        100.0 * (baseline.energy - optimized.energy) / baseline.energy,
    )


# Ключи (line_size, ways), которые требуются пространству поиска для каждого кэша.
def required_keys(space: SearchSpace) -> dict:
    return {
        "icache": {(line, ways) for line in space.icache.line_sizes for ways in space.icache.ways},
        "dcache": {(line, ways) for line in space.dcache.line_sizes for ways in space.dcache.ways},
    }


def check_coverage(ch: Characterization, space: SearchSpace, extra: Iterable[Tuple[str, CacheConfig]] = ()) -> None:
    missing = []
    for cache_name, keys in required_keys(space).items():
        missing.extend(f"{cache_name}{key}" for key in sorted(keys) if ch.find(cache_name, *key) is None)
    for cache_name, config in extra:
        if ch.find(cache_name, config.line_size, config.ways) is None:
            missing.append(f"{cache_name}({config.line_size}, {config.ways})")
    if missing:
        raise CharacterizationError("таблица характеризации не покрывает: " + ", ".join(missing))


def load_characterization(path: Path, space: Optional[SearchSpace] = None) -> Characterization:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CharacterizationError(f"не удалось прочитать {path}: {exc}") from exc
    try:
        ch = Characterization.model_validate_json(raw)
    except ValidationError as exc:
        raise CharacterizationError(f"{path}: {exc}") from exc
    if space is not None:
        check_coverage(ch, space)
    if ch.synthetic:
        logger.warning("Таблица характеризации %s помечена как синтетическая", path)
    logger.info("Характеризация загружена: %s", path)
    return ch


def characterization_digest(ch: Characterization) -> str:
    canonical = json.dumps(ch.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
