# cache_dse/artifacts.py
#
# Файлы результатов: front.csv (девять декодированных параметров в порядке колонок
# LI, WI, RI, SI, LD, WD, RD, AD, SD и две цели), pareto_set.json, log.csv,
# summary.json, таблица полного перебора, отчеты сравнения и гиперобъема.
# Числа с плавающей точкой пишутся через repr, что дает точное восстановление
# значения при чтении.

import csv
import json
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from cache_dse.cost_model import ObjectiveVector
from cache_dse.errors import SpecValidationError
from cache_dse.genome import GENE_NAMES, Genome, decode, gene_tables
from cache_dse.schemas import SearchSpace

FRONT_GENE_COLUMNS: Tuple[str, ...] = ("LI", "WI", "RI", "SI", "LD", "WD", "RD", "AD", "SD")
FRONT_COLUMNS: Tuple[str, ...] = FRONT_GENE_COLUMNS + ("ExTime", "Energy")

LOG_COLUMNS: Tuple[str, ...] = (
    "generation",
    "best_exec_time",
    "mean_exec_time",
    "best_energy",
    "mean_energy",
    "time_improvement_pct",
    "energy_improvement_pct",
    "distinct_genomes",
)


class FrontRow(NamedTuple):
    genome: Optional[Genome]
    objectives: ObjectiveVector


def _symbol(value: Any) -> str:
    return str(getattr(value, "value", value))


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def genome_symbols(genome: Genome, space: SearchSpace) -> Dict[str, str]:
    tables = gene_tables(space)
    return {name: _symbol(tables[GENE_NAMES.index(name)][genome[GENE_NAMES.index(name)]]) for name in GENE_NAMES}


def genome_from_symbols(row: Dict[str, str], space: SearchSpace) -> Genome:
    genes = []
    for name, table in zip(GENE_NAMES, gene_tables(space)):
        symbol = row[name].strip()
        matches = [index for index, value in enumerate(table) if _symbol(value) == symbol]
        if not matches:
            raise SpecValidationError(f"значение {name}={symbol!r} отсутствует в пространстве поиска")
        genes.append(matches[0])
    return Genome(*genes)


def _write_rows(path: Path, columns: Sequence[str], rows: Sequence[Sequence[str]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def write_front_csv(path: Path, entries: Sequence[Tuple[Genome, ObjectiveVector]], space: SearchSpace) -> Path:
    rows = []
    for genome, objectives in sorted(entries, key=lambda e: (tuple(e[1]), tuple(e[0]))):
        symbols = genome_symbols(genome, space)
        rows.append([symbols[name] for name in FRONT_GENE_COLUMNS] + [_fmt(objectives.exec_time), _fmt(objectives.energy)])
    return _write_rows(path, FRONT_COLUMNS, rows)


def read_front_csv(path: Path, space: Optional[SearchSpace] = None) -> List[FrontRow]:
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise SpecValidationError(f"не удалось прочитать фронт {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        missing = [column for column in ("ExTime", "Energy") if column not in (reader.fieldnames or [])]
        if missing:
            raise SpecValidationError(f"{path}: нет колонок {', '.join(missing)}")
        rows = []
        for line_number, row in enumerate(reader, start=2):
            try:
                objectives = ObjectiveVector(float(row["ExTime"]), float(row["Energy"]))
            except (TypeError, ValueError) as exc:
                raise SpecValidationError(f"{path}, строка {line_number}: некорректное значение цели") from exc
            genome = genome_from_symbols(row, space) if space is not None else None
            rows.append(FrontRow(genome, objectives))
    return rows


def write_objective_table(path: Path, entries: Sequence[Tuple[Genome, ObjectiveVector]], space: SearchSpace) -> Path:
    rows = []
    for genome, objectives in entries:
        symbols = genome_symbols(genome, space)
        rows.append([symbols[name] for name in FRONT_GENE_COLUMNS] + [_fmt(objectives.exec_time), _fmt(objectives.energy)])
    return _write_rows(path, FRONT_COLUMNS, rows)


def write_pareto_set_json(
    path: Path,
    application: str,
    trace_digest: str,
    entries: Sequence[Tuple[Genome, ObjectiveVector]],
    space: SearchSpace,
) -> Path:
    members = []
    for genome, objectives in sorted(entries, key=lambda e: (tuple(e[1]), tuple(e[0]))):
        i_cfg, d_cfg = decode(genome, space)
        members.append({
            "genes": list(genome),
            "icache": i_cfg.model_dump(mode="json"),
            "dcache": d_cfg.model_dump(mode="json"),
            "objectives": {"exec_time": objectives.exec_time, "energy": objectives.energy},
        })
    document = {"application": application, "trace_digest": trace_digest, "members": members}
    return write_json(path, document)


def write_json(path: Path, document: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_log_csv(path: Path, rows: Sequence[Dict[str, Any]]) -> Path:
    formatted = []
    for row in rows:
        formatted.append([
            str(row[column]) if isinstance(row[column], int) else _fmt(row[column])
            for column in LOG_COLUMNS
        ])
    return _write_rows(path, LOG_COLUMNS, formatted)


def write_table(path: Path, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    return _write_rows(
        path,
        columns,
        [[_fmt(value) if isinstance(value, float) else str(value) for value in row] for row in rows],
    )
