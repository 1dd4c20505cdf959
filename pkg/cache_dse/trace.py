# cache_dse/trace.py
#
# Трассы обращений к памяти в текстовом формате Dinero "din": одна запись на строку,
# `<метка> <шестнадцатеричный адрес>`, где метка 0 - чтение данных, 1 - запись
# данных, 2 - выборка инструкции. Пустые строки и строки с `#` пропускаются.
# Здесь же генератор детерминированных синтетических трасс для тестов.

import hashlib
import logging
import re
from enum import IntEnum
from pathlib import Path
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt

from cache_dse.errors import TraceParseError, TraceSourceError
from cache_dse.schemas import SynthesisSpec

logger = logging.getLogger(__name__)

ADDRESS_SPACE = 1 << 64
ADDRESS_MASK = ADDRESS_SPACE - 1

_HEX_ADDRESS = re.compile(r"^(0[xX])?[0-9a-fA-F]+$")


class AccessKind(IntEnum):
    DATA_READ = 0
    DATA_WRITE = 1
    INSTR_FETCH = 2


class AccessRecord(NamedTuple):
    kind: AccessKind
    address: int


# Источник трассы: путь к файлу или последовательность строк в памяти,
# плюс необязательное ограничение на число записей.
class TraceSource(BaseModel):
    model_config = ConfigDict(frozen=True)

    origin: Union[Path, Tuple[str, ...]]
    record_limit: Optional[PositiveInt] = None


def parse_record(line: str, line_number: Optional[int] = None) -> AccessRecord:
    tokens = line.split()
    if not tokens:
        raise TraceParseError("пустая строка", line_number)
    if len(tokens) < 2:
        raise TraceParseError("отсутствует адрес", line_number)

    label, raw_address = tokens[0], tokens[1]
    if label not in ("0", "1", "2"):
        raise TraceParseError(f"недопустимая метка {label!r} (ожидается 0, 1 или 2)", line_number)
    if not _HEX_ADDRESS.match(raw_address):
        raise TraceParseError(f"адрес {raw_address!r} не является шестнадцатеричным числом", line_number)

    address = int(raw_address, 16)
    if address > ADDRESS_MASK:
        raise TraceParseError(f"адрес {raw_address!r} не помещается в 64 бита", line_number)
    return AccessRecord(AccessKind(int(label)), address)


def format_record(record: AccessRecord) -> str:
    return f"{int(record.kind)} {record.address:x}"


def _iter_lines(origin: Union[Path, Tuple[str, ...]]) -> Iterator[str]:
    if isinstance(origin, Path):
        try:
            with origin.open("r", encoding="ascii") as handle:
                yield from handle
        except (OSError, UnicodeDecodeError) as exc:
            raise TraceSourceError(f"не удалось прочитать трассу {origin}: {exc}") from exc
    else:
        yield from origin


# Потоковое чтение: записи выдаются в порядке файла, не более record_limit штук.
def stream(source: TraceSource) -> Iterator[AccessRecord]:
    limit = source.record_limit
    emitted = 0
    for line_number, line in enumerate(_iter_lines(source.origin), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield parse_record(stripped, line_number)
        emitted += 1
        if limit is not None and emitted >= limit:
            return


def load_trace(source: TraceSource) -> List[AccessRecord]:
    records = list(stream(source))
    logger.info("Загружено записей трассы: %d", len(records))
    return records


# Дайджест содержимого трассы: входит в ключ кэша оценок.
def trace_digest(records: Sequence[AccessRecord]) -> str:
    digest = hashlib.sha256()
    for record in records:
        digest.update(format_record(record).encode("ascii"))
        digest.update(b"\n")
    return digest.hexdigest()


def write_trace(path: Path, records: Sequence[AccessRecord]) -> None:
    with path.open("w", encoding="ascii", newline="\n") as handle:
        for record in records:
            handle.write(format_record(record) + "\n")


# Синтетическая трасса: чистая функция от (шаблон, count, seed).
# Адреса порождает шаблон, тип каждой записи выбирается по долям mix.
def synth_trace(pattern: SynthesisSpec, count: int, seed: int) -> List[AccessRecord]:
    if count <= 0:
        raise TraceSourceError("число записей синтетической трассы должно быть положительным")

    mix = np.array([pattern.mix.read, pattern.mix.write, pattern.mix.instr], dtype=float)
    if np.any(mix < 0) or not np.isclose(mix.sum(), 1.0, rtol=0.0, atol=1e-9):
        raise TraceSourceError(f"доли instr:read:write должны быть неотрицательны и давать в сумме 1, получено {mix.tolist()}")

    rng = np.random.default_rng(seed)
    kinds = rng.choice(3, size=count, p=mix / mix.sum())

    if pattern.pattern == "sequential":
        addresses = [(pattern.start + pattern.stride * i) & ADDRESS_MASK for i in range(count)]
    elif pattern.pattern == "uniform":
        if pattern.high <= pattern.low:
            raise TraceSourceError(f"пустой диапазон адресов [{pattern.low:#x}, {pattern.high:#x})")
        if pattern.high > ADDRESS_SPACE:
            raise TraceSourceError("верхняя граница диапазона выходит за 64 бита")
        addresses = rng.integers(pattern.low, pattern.high, size=count, dtype=np.uint64).tolist()
    else:
        if pattern.working_set <= 0:
            raise TraceSourceError("размер рабочего множества должен быть положительным")
        addresses = [
            (pattern.start + (pattern.stride * i) % pattern.working_set) & ADDRESS_MASK
            for i in range(count)
        ]

    return [AccessRecord(AccessKind(int(kind)), int(address)) for kind, address in zip(kinds, addresses)]
