# cache_dse/genome.py
#
# Хромосома из 9 целых генов <-> пара конфигураций (I-cache, D-cache).
# Порядок генов: LI, WI, RI, SI (строка, пути, замещение, предвыборка I-cache),
# LD, WD, RD, SD (то же для D-cache), AD (политика записи D-cache).
# Значение гена - индекс в таблице SearchSpace, поэтому альтернативные пространства
# (32 KB, другие степени ассоциативности) задаются данными, а не кодом.

import hashlib
import itertools
import json
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from cache_dse.errors import GenomeError
from cache_dse.schemas import CacheConfig, SearchSpace

logger = logging.getLogger(__name__)

GENE_NAMES: Tuple[str, ...] = ("LI", "WI", "RI", "SI", "LD", "WD", "RD", "SD", "AD")


class Genome(NamedTuple):
    li: int
    wi: int
    ri: int
    si: int
    ld: int
    wd: int
    rd: int
    sd: int
    ad: int


# Таблицы значений всех девяти генов в порядке хранения.
def gene_tables(space: SearchSpace) -> List[list]:
    i, d = space.icache, space.dcache
    return [
        i.line_sizes, i.ways, i.replacements, i.prefetches,
        d.line_sizes, d.ways, d.replacements, d.prefetches,
        space.write_policies,
    ]


def cardinality(space: SearchSpace) -> int:
    total = 1
    for table in gene_tables(space):
        total *= len(table)
    return total


def validate_genome(genes: Sequence[int], space: SearchSpace) -> Genome:
    if len(genes) != len(GENE_NAMES):
        raise GenomeError(f"ожидается {len(GENE_NAMES)} генов, получено {len(genes)}")
    for name, value, table in zip(GENE_NAMES, genes, gene_tables(space)):
        if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < len(table):
            raise GenomeError(f"ген {name}={value!r} вне диапазона [0, {len(table) - 1}]")
    return Genome(*genes)


def decode(g: Sequence[int], space: SearchSpace) -> Tuple[CacheConfig, CacheConfig]:
    g = validate_genome(g, space)
    t = gene_tables(space)
    i_cfg = CacheConfig(
        total_size=space.i_total_size,
        line_size=t[0][g.li],
        ways=t[1][g.wi],
        replacement=t[2][g.ri],
        prefetch=t[3][g.si],
        write_policy=None,
        writable=False,
    )
    d_cfg = CacheConfig(
        total_size=space.d_total_size,
        line_size=t[4][g.ld],
        ways=t[5][g.wd],
        replacement=t[6][g.rd],
        prefetch=t[7][g.sd],
        write_policy=t[8][g.ad],
        writable=True,
    )
    return i_cfg, d_cfg


def _index_of(table: list, value, name: str) -> int:
    try:
        return table.index(value)
    except ValueError:
        raise GenomeError(f"значение {name}={value!r} отсутствует в пространстве поиска") from None


def encode(i_cfg: CacheConfig, d_cfg: CacheConfig, space: SearchSpace) -> Genome:
    if i_cfg.total_size != space.i_total_size:
        raise GenomeError(f"I-cache {i_cfg.total_size} B, а пространство задает {space.i_total_size} B")
    if d_cfg.total_size != space.d_total_size:
        raise GenomeError(f"D-cache {d_cfg.total_size} B, а пространство задает {space.d_total_size} B")
    if i_cfg.writable or not d_cfg.writable:
        raise GenomeError("I-cache должен быть только для чтения, D-cache - допускать запись")
    values = (
        i_cfg.line_size, i_cfg.ways, i_cfg.replacement, i_cfg.prefetch,
        d_cfg.line_size, d_cfg.ways, d_cfg.replacement, d_cfg.prefetch,
        d_cfg.write_policy,
    )
    return Genome(*(
        _index_of(table, value, name)
        for name, value, table in zip(GENE_NAMES, values, gene_tables(space))
    ))


# Ограничение фиксирует значения отдельных генов. Ключ - имя гена ("WD") или индекс.
def normalize_restriction(
    restriction: Optional[Mapping[Union[str, int], int]], space: SearchSpace
) -> Dict[int, int]:
    if not restriction:
        return {}
    tables = gene_tables(space)
    normalized: Dict[int, int] = {}
    for key, value in restriction.items():
        if isinstance(key, str) and not key.isdigit():
            if key.upper() not in GENE_NAMES:
                raise GenomeError(f"неизвестный ген {key!r}; допустимы {', '.join(GENE_NAMES)}")
            index = GENE_NAMES.index(key.upper())
        else:
            index = int(key)
            if not 0 <= index < len(GENE_NAMES):
                raise GenomeError(f"индекс гена {index} вне диапазона")
        if not 0 <= value < len(tables[index]):
            raise GenomeError(f"ограничение {GENE_NAMES[index]}={value} вне диапазона [0, {len(tables[index]) - 1}]")
        normalized[index] = value
    return normalized


def parse_restriction(text: str) -> Dict[str, int]:
    restriction: Dict[str, int] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise GenomeError(f"ожидается gene=value, получено {item!r}")
        try:
            restriction[name.strip()] = int(value)
        except ValueError:
            raise GenomeError(f"значение гена {name!r} не является целым: {value!r}") from None
    return restriction


def parse_genes(text: str) -> List[int]:
    try:
        return [int(part) for part in text.replace(" ", "").split(",") if part]
    except ValueError:
        raise GenomeError(f"геном должен быть списком целых через запятую: {text!r}") from None


def parse_genome(text: str, space: SearchSpace) -> Genome:
    return validate_genome(parse_genes(text), space)


# Допустимые значения каждого гена с учетом ограничения.
def gene_domains(space: SearchSpace, restriction: Optional[Mapping[int, int]] = None) -> List[List[int]]:
    restriction = restriction or {}
    return [
        [restriction[index]] if index in restriction else list(range(len(table)))
        for index, table in enumerate(gene_tables(space))
    ]


def restricted_cardinality(space: SearchSpace, restriction: Optional[Mapping[int, int]] = None) -> int:
    total = 1
    for domain in gene_domains(space, restriction):
        total *= len(domain)
    return total


# Перебор в лексикографическом порядке.
def enumerate_genomes(space: SearchSpace, restriction: Optional[Mapping[int, int]] = None) -> Iterator[Genome]:
    for genes in itertools.product(*gene_domains(space, restriction)):
        yield Genome(*genes)


def load_search_space(path: Optional[Path]) -> SearchSpace:
    if path is None:
        return SearchSpace.default()
    try:
        space = SearchSpace.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise GenomeError(f"не удалось прочитать пространство поиска {path}: {exc}") from exc
    except ValidationError as exc:
        raise GenomeError(f"{path}: {exc}") from exc
    logger.info("Пространство поиска %s: %d конфигураций", path, cardinality(space))
    return space


# Один и тот же геном означает разные конфигурации в разных пространствах поиска.
def space_digest(space: SearchSpace) -> str:
    canonical = json.dumps(space.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
