# cache_dse/cache_sim.py
#
# Функциональный симулятор множественно-ассоциативного кэша для пары I-cache/D-cache.
# Считает обращения, промахи по требованию, предвыборки, обратные и сквозные записи;
# эти счетчики затем подставляются в модели времени и энергии (cost_model).

import hashlib
from dataclasses import dataclass, replace
from typing import Iterable, List, NamedTuple, Optional, Tuple

from cache_dse.errors import CacheConfigError, CacheUsageError
from cache_dse.schemas import CacheConfig, MissMode, Prefetch, Replacement, WritePolicy
from cache_dse.trace import ADDRESS_SPACE, AccessKind, AccessRecord


LINE_SIZES = (8, 16, 32, 64)
WAYS = (1, 2, 4, 8, 16, 32, 64)

_MASK64 = (1 << 64) - 1


@dataclass
class SimCounters:
    accesses: int = 0
    demand_misses: int = 0
    prefetch_fetches: int = 0
    writebacks: int = 0
    writethroughs: int = 0

    @property
    def hits(self) -> int:
        return self.accesses - self.demand_misses

    # Число промахов для моделей стоимости: каждая предвыборка стоит столько же
    # обращений к DRAM, сколько промах, если не выбран режим demand-only.
    def misses(self, mode: MissMode = MissMode.COMBINED) -> int:
        if mode == MissMode.DEMAND_ONLY:
            return self.demand_misses
        return self.demand_misses + self.prefetch_fetches


class AccessOutcome(NamedTuple):
    hit: bool
    lines_fetched: int
    writebacks_emitted: int


def derive_seed(*parts: object) -> int:
    digest = hashlib.blake2b("|".join(str(p) for p in parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


# Генератор xorshift64 (13, 7, 17) для политики RANDOM.
class XorShift64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        # splitmix64 разводит близкие зерна и не дает нулевого состояния
        z = (seed + 0x9E3779B97F4A7C15) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        self.state = z or 0x9E3779B97F4A7C15

    def next(self) -> int:
        x = self.state
        x ^= (x << 13) & _MASK64
        x ^= x >> 7
        x ^= (x << 17) & _MASK64
        self.state = x
        return x


class CacheState:
    """Состояние одного кэша.

    Валидность строки выражается наличием тега в `tags[set][way]` (None - пустой путь);
    `lookup[set]` отображает тег в номер пути. `stamps` хранит логическое время
    установки (FIFO) или последнего обращения (LRU).
    """

    def __init__(self, config: CacheConfig, seed: int = 0):
        self.config = config
        self.sets = config.sets
        self.tags: List[List[Optional[int]]] = [[None] * config.ways for _ in range(self.sets)]
        self.dirty: List[List[bool]] = [[False] * config.ways for _ in range(self.sets)]
        self.stamps: List[List[int]] = [[0] * config.ways for _ in range(self.sets)]
        self.lookup: List[dict] = [{} for _ in range(self.sets)]
        self.clock = 0
        self.rng = XorShift64(seed) if config.replacement == Replacement.RANDOM else None
        self.counters = SimCounters()

    def contains(self, set_index: int, tag: int) -> bool:
        return tag in self.lookup[set_index]


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


def validate_config(config: CacheConfig) -> None:
    if not _is_power_of_two(config.total_size):
        raise CacheConfigError("total_size", f"{config.total_size} не является степенью двойки")
    if config.line_size not in LINE_SIZES:
        raise CacheConfigError("line_size", f"{config.line_size} не входит в {LINE_SIZES}")
    if config.ways not in WAYS:
        raise CacheConfigError("ways", f"{config.ways} не входит в {WAYS}")
    if config.total_size < config.line_size * config.ways:
        raise CacheConfigError(
            "ways",
            f"{config.total_size} B нельзя разбить на множества по {config.ways} x {config.line_size} B",
        )
    if config.writable and config.write_policy is None:
        raise CacheConfigError("write_policy", "для кэша данных нужна политика записи")
    if not config.writable and config.write_policy is not None:
        raise CacheConfigError("write_policy", "кэш только для чтения не имеет политики записи")


def new_cache(config: CacheConfig, seed: int = 0) -> CacheState:
    validate_config(config)
    return CacheState(config, seed)


def decompose(config: CacheConfig, address: int) -> Tuple[int, int, int]:
    block_number = address // config.line_size
    sets = config.sets
    return block_number // sets, block_number % sets, block_number


def _choose_victim(state: CacheState, set_index: int) -> int:
    ways = state.config.ways
    if len(state.lookup[set_index]) < ways:
        return state.tags[set_index].index(None)
    if state.rng is not None:
        return state.rng.next() % ways
    stamps = state.stamps[set_index]
    return min(range(ways), key=stamps.__getitem__)


# Установка строки в множество; возвращает число обратных записей (0 или 1).
def _install(state: CacheState, set_index: int, tag: int, dirty: bool) -> int:
    way = _choose_victim(state, set_index)
    tags = state.tags[set_index]
    emitted = 0
    victim = tags[way]
    if victim is not None:
        del state.lookup[set_index][victim]
        if state.dirty[set_index][way]:
            state.counters.writebacks += 1
            emitted = 1
    tags[way] = tag
    state.lookup[set_index][tag] = way
    state.dirty[set_index][way] = dirty
    state.clock += 1
    state.stamps[set_index][way] = state.clock
    return emitted


def access(state: CacheState, record: AccessRecord) -> AccessOutcome:
    config = state.config
    is_write = record.kind == AccessKind.DATA_WRITE
    if is_write and not config.writable:
        raise CacheUsageError(f"запись по адресу {record.address:#x} в кэш только для чтения")

    counters = state.counters
    block_number = record.address // config.line_size
    sets = state.sets
    tag, set_index = divmod(block_number, sets)
    copy_back = config.write_policy == WritePolicy.COPY_BACK

    counters.accesses += 1
    fetched = 0
    writebacks = 0
    way = state.lookup[set_index].get(tag)
    hit = way is not None

    if hit:
        if config.replacement == Replacement.LRU:
            state.clock += 1
            state.stamps[set_index][way] = state.clock
        if is_write:
            if copy_back:
                state.dirty[set_index][way] = True
            else:
                counters.writethroughs += 1
    else:
        counters.demand_misses += 1
        if is_write and not copy_back:
            # write-through без размещения по промаху записи
            counters.writethroughs += 1
        else:
            writebacks += _install(state, set_index, tag, dirty=is_write)
            fetched += 1

    if config.prefetch == Prefetch.ALWAYS_PREFETCH or (config.prefetch == Prefetch.MISS_PREFETCH and not hit):
        next_block = (block_number + 1) % (ADDRESS_SPACE // config.line_size)
        next_tag, next_set = divmod(next_block, sets)
        if next_tag not in state.lookup[next_set]:
            writebacks += _install(state, next_set, next_tag, dirty=False)
            counters.prefetch_fetches += 1
            fetched += 1

    return AccessOutcome(hit, fetched, writebacks)


# Прогон трассы через пару кэшей: выборки инструкций идут в I-cache,
# чтения и записи данных - в D-cache. Зерно RANDOM разводится на два кэша.
# Зерно зависит только от глобального SIM_SEED, не от генома: конфигурации,
# отличающиеся лишь политикой записи, на трассе без записей дают равные счетчики.
def simulate(
    trace: Iterable[AccessRecord],
    i_config: CacheConfig,
    d_config: CacheConfig,
    seed: int = 0,
) -> Tuple[SimCounters, SimCounters]:
    if i_config.writable:
        raise CacheConfigError("writable", "кэш инструкций должен быть только для чтения")
    if not d_config.writable:
        raise CacheConfigError("writable", "кэш данных должен допускать запись")

    i_state = new_cache(i_config, derive_seed(seed, "icache"))
    d_state = new_cache(d_config, derive_seed(seed, "dcache"))
    for record in trace:
        access(i_state if record.kind == AccessKind.INSTR_FETCH else d_state, record)
    return replace(i_state.counters), replace(d_state.counters)
