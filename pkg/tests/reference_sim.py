# tests/reference_sim.py
#
# Независимый наивный симулятор для проверки cache_sim: каждое множество - список
# строк в порядке замещения (первый элемент - кандидат на вытеснение для LRU/FIFO).
# Для RANDOM список хранится по путям, а номер пути берется из того же xorshift64,
# что и в основном симуляторе, иначе счетчики не сравнить.

from typing import Dict, List, Optional, Tuple

from cache_dse.cache_sim import SimCounters, XorShift64, derive_seed
from cache_dse.schemas import CacheConfig, Prefetch, Replacement, WritePolicy
from cache_dse.trace import AccessKind, AccessRecord


class _Line:
    def __init__(self, block: int, dirty: bool):
        self.block = block
        self.dirty = dirty


class ReferenceCache:
    def __init__(self, config: CacheConfig, seed: int):
        self.config = config
        self.sets = config.total_size // (config.line_size * config.ways)
        # LRU/FIFO: список по порядку замещения; RANDOM: фиксированные пути (None - пусто).
        self.lists: List[List[_Line]] = [[] for _ in range(self.sets)]
        self.slots: List[List[Optional[_Line]]] = [[None] * config.ways for _ in range(self.sets)]
        self.rng = XorShift64(seed) if config.replacement == Replacement.RANDOM else None
        self.counters = SimCounters()

    def _find(self, block: int) -> Optional[_Line]:
        s = block % self.sets
        lines = self.slots[s] if self.rng else self.lists[s]
        for line in lines:
            if line is not None and line.block == block:
                return line
        return None

    def _insert(self, block: int, dirty: bool) -> None:
        s = block % self.sets
        new = _Line(block, dirty)
        if self.rng:
            slots = self.slots[s]
            if None in slots:
                way = slots.index(None)
            else:
                way = self.rng.next() % self.config.ways
                if slots[way].dirty:
                    self.counters.writebacks += 1
            slots[way] = new
            return
        lines = self.lists[s]
        if len(lines) == self.config.ways:
            victim = lines.pop(0)
            if victim.dirty:
                self.counters.writebacks += 1
        lines.append(new)

    def _touch(self, line: _Line) -> None:
        if self.config.replacement == Replacement.LRU:
            lines = self.lists[line.block % self.sets]
            lines.remove(line)
            lines.append(line)

    def access(self, record: AccessRecord) -> None:
        cfg = self.config
        block = record.address // cfg.line_size
        is_write = record.kind == AccessKind.DATA_WRITE
        self.counters.accesses += 1
        line = self._find(block)
        if line is not None:
            self._touch(line)
            if is_write:
                if cfg.write_policy == WritePolicy.COPY_BACK:
                    line.dirty = True
                else:
                    self.counters.writethroughs += 1
        else:
            self.counters.demand_misses += 1
            if is_write and cfg.write_policy == WritePolicy.WRITE_THROUGH:
                self.counters.writethroughs += 1
            else:
                self._insert(block, is_write)

        if cfg.prefetch == Prefetch.ALWAYS_PREFETCH or (cfg.prefetch == Prefetch.MISS_PREFETCH and line is None):
            nxt = (block + 1) % ((1 << 64) // cfg.line_size)
            if self._find(nxt) is None:
                self._insert(nxt, False)
                self.counters.prefetch_fetches += 1


def reference_simulate(
    trace: List[AccessRecord], i_cfg: CacheConfig, d_cfg: CacheConfig, seed: int = 0
) -> Tuple[SimCounters, SimCounters]:
    caches: Dict[bool, ReferenceCache] = {
        True: ReferenceCache(i_cfg, derive_seed(seed, "icache")),
        False: ReferenceCache(d_cfg, derive_seed(seed, "dcache")),
    }
    for record in trace:
        caches[record.kind == AccessKind.INSTR_FETCH].access(record)
    return caches[True].counters, caches[False].counters
