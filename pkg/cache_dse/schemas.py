# cache_dse/schemas.py
#
# Pydantic-модели входных файлов и доменных параметров: конфигурация одного кэша,
# таблица характеризации (время и энергия доступа по конфигурациям), пространство поиска, параметры
# NSGA-II, описание трасс, базовых конфигураций и эксперимента целиком.
# Модели только описывают и валидируют данные; вычисления живут в модулях
# trace, cache_sim, cost_model, genome и moea.

from enum import Enum
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    FiniteFloat,
    PositiveInt,
    PrivateAttr,
    field_validator,
    model_validator,
)


class Replacement(str, Enum):
    LRU = "LRU"
    FIFO = "FIFO"
    RANDOM = "RANDOM"


class Prefetch(str, Enum):
    ON_DEMAND = "ON_DEMAND"
    ALWAYS_PREFETCH = "ALWAYS_PREFETCH"
    MISS_PREFETCH = "MISS_PREFETCH"


class WritePolicy(str, Enum):
    COPY_BACK = "COPY_BACK"
    WRITE_THROUGH = "WRITE_THROUGH"


# Какие промахи учитываются в моделях времени и энергии.
class MissMode(str, Enum):
    COMBINED = "combined"        # demand_misses + prefetch_fetches
    DEMAND_ONLY = "demand-only"  # только промахи по требованию


# Параметры одного кэша. Инварианты (степени двойки, целое число множеств)
# проверяет cache_sim.new_cache, чтобы ошибка называла конкретное поле.
class CacheConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    total_size: int = Field(description="Общий объем кэша в байтах")
    line_size: int = Field(description="Размер строки в байтах")
    ways: int = Field(description="Степень ассоциативности")
    replacement: Replacement = Replacement.LRU
    prefetch: Prefetch = Prefetch.ON_DEMAND
    write_policy: Optional[WritePolicy] = None
    writable: bool = False

    @property
    def sets(self) -> int:
        return self.total_size // (self.line_size * self.ways)

    # Компактное текстовое представление, используется в ключах мемоизации и логах.
    def describe(self) -> str:
        policy = self.write_policy.value if self.write_policy else "RO"
        return (
            f"{self.total_size}B/{self.line_size}L/{self.ways}W/"
            f"{self.replacement.value}/{self.prefetch.value}/{policy}"
        )


PositiveFinite = Annotated[FiniteFloat, Field(gt=0)]


# --- Характеризация (вход первой фазы) ---

class CacheTiming(BaseModel):
    line_size: PositiveInt
    ways: PositiveInt
    access_time_s: PositiveFinite
    access_energy_j: PositiveFinite


class DramTiming(BaseModel):
    access_time_s: PositiveFinite
    access_power_w: PositiveFinite
    bandwidth_bps: PositiveFinite


class Characterization(BaseModel):
    icache: List[CacheTiming]
    dcache: List[CacheTiming]
    dram: DramTiming
    # Мощность CPU нужна только для диагностического расчета полной энергии.
    cpu_power_w: Optional[PositiveFinite] = None
    synthetic: bool = False
    note: Optional[str] = None

    _index: Optional[Dict[str, Dict[tuple, CacheTiming]]] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _unique_keys(self) -> "Characterization":
        for cache_name in ("icache", "dcache"):
            seen = set()
            for entry in getattr(self, cache_name):
                key = (entry.line_size, entry.ways)
                if key in seen:
                    raise ValueError(f"{cache_name}: повторная запись для line_size={key[0]}, ways={key[1]}")
                seen.add(key)
        return self

    # Поиск записи по ключу (line_size, ways); индекс строится при первом обращении.
    def find(self, cache_name: str, line_size: int, ways: int) -> Optional[CacheTiming]:
        if self._index is None:
            self._index = {
                name: {(e.line_size, e.ways): e for e in getattr(self, name)}
                for name in ("icache", "dcache")
            }
        return self._index[cache_name].get((line_size, ways))


# --- Пространство поиска ---

class CacheDimensions(BaseModel):
    line_sizes: List[int]
    ways: List[int]
    replacements: List[Replacement]
    prefetches: List[Prefetch]

    @field_validator("line_sizes", "ways", "replacements", "prefetches")
    @classmethod
    def _non_empty_unique(cls, values: list) -> list:
        if not values:
            raise ValueError("таблица значений гена не может быть пустой")
        if len(set(values)) != len(values):
            raise ValueError("таблица значений гена содержит повторы")
        return values


class SearchSpace(BaseModel):
    model_config = ConfigDict(frozen=True)

    icache: CacheDimensions
    dcache: CacheDimensions
    write_policies: List[WritePolicy]
    i_total_size: PositiveInt = 16384
    d_total_size: PositiveInt = 16384

    @field_validator("write_policies")
    @classmethod
    def _policies_non_empty(cls, values: list) -> list:
        if not values or len(set(values)) != len(values):
            raise ValueError("write_policies: нужен непустой список без повторов")
        return values

    # Пространство по умолчанию: 16 KB, строки 8..64 байта, 4..64 пути.
    @classmethod
    def default(cls) -> "SearchSpace":
        dims = CacheDimensions(
            line_sizes=[8, 16, 32, 64],
            ways=[4, 8, 16, 32, 64],
            replacements=[Replacement.LRU, Replacement.FIFO, Replacement.RANDOM],
            prefetches=[Prefetch.ON_DEMAND, Prefetch.ALWAYS_PREFETCH, Prefetch.MISS_PREFETCH],
        )
        return cls(
            icache=dims,
            dcache=dims,
            write_policies=[WritePolicy.COPY_BACK, WritePolicy.WRITE_THROUGH],
        )


# --- Параметры NSGA-II ---

class NsgaParams(BaseModel):
    generations: int = Field(250, ge=0)
    population_size: int = Field(100, ge=2)
    p_crossover: float = Field(0.9, ge=0.0, le=1.0)
    p_mutation: float = Field(1.0 / 9.0, ge=0.0, le=1.0)
    seed: int = Field(0, ge=0)

    @field_validator("population_size")
    @classmethod
    def _even_population(cls, value: int) -> int:
        if value % 2:
            raise ValueError("размер популяции должен быть четным")
        return value


# --- Трассы ---

class TraceMix(BaseModel):
    instr: float = 1.0
    read: float = 0.0
    write: float = 0.0


class SynthesisSpec(BaseModel):
    pattern: Literal["sequential", "uniform", "loop"] = "sequential"
    start: int = Field(0, ge=0)
    stride: int = 4
    # Диапазон [low, high) для равномерного шаблона.
    low: int = Field(0, ge=0)
    high: int = Field(0x1000, ge=0)
    # Размер рабочего множества в байтах для циклического шаблона.
    working_set: int = 4096
    mix: TraceMix = Field(default_factory=TraceMix)


class TraceRef(BaseModel):
    name: str = Field(min_length=1)
    path: Optional[Path] = None
    synthetic: Optional[SynthesisSpec] = None
    count: Optional[PositiveInt] = None
    seed: int = Field(0, ge=0)
    max_records: Optional[PositiveInt] = None

    @model_validator(mode="after")
    def _one_origin(self) -> "TraceRef":
        if (self.path is None) == (self.synthetic is None):
            raise ValueError(f"трасса {self.name!r}: нужно указать ровно одно из path/synthetic")
        if self.synthetic is not None and self.count is None:
            raise ValueError(f"трасса {self.name!r}: для синтетической трассы нужен count")
        return self


# --- Базовые конфигурации и эксперимент ---

class BaselineSpec(BaseModel):
    name: str = Field(min_length=1)
    genes: Optional[List[int]] = None
    icache: Optional[CacheConfig] = None
    dcache: Optional[CacheConfig] = None

    @model_validator(mode="after")
    def _genes_or_configs(self) -> "BaselineSpec":
        has_configs = self.icache is not None and self.dcache is not None
        if (self.genes is None) == (not has_configs):
            raise ValueError(f"базовая конфигурация {self.name!r}: нужны либо genes, либо icache+dcache")
        return self


class ExperimentSpec(BaseModel):
    traces: List[TraceRef] = Field(min_length=1)
    search_space: Optional[Path] = None
    characterization: Path
    nsga: NsgaParams = Field(default_factory=NsgaParams)
    # Имена встроенных базовых конфигураций или явные описания.
    baselines: List[Union[str, BaselineSpec]] = Field(default_factory=lambda: ["baseline1"])
    miss_mode: MissMode = MissMode.COMBINED
    output_dir: Path = Path("results")
    restriction: Dict[str, int] = Field(default_factory=dict)
    exhaustive_budget: Optional[PositiveInt] = None

    @field_validator("traces")
    @classmethod
    def _unique_trace_names(cls, traces: List[TraceRef]) -> List[TraceRef]:
        names = [t.name for t in traces]
        if len(set(names)) != len(names):
            raise ValueError("имена трасс (приложений) должны быть уникальными")
        return traces
