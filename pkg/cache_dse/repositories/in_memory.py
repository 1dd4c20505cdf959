# cache_dse/repositories/in_memory.py
#
# Кэш оценок в оперативной памяти. Подходит для одиночных запусков и тестов:
# данные живут, пока жив объект репозитория.

from typing import Dict, Mapping, Sequence

from .base import BaseEvalRepository, EvalRecord


class InMemoryEvalRepository(BaseEvalRepository):
    def __init__(self):
        self.records: Dict[str, EvalRecord] = {}  # ключ оценки -> запись

    async def get_many(self, keys: Sequence[str]) -> Dict[str, EvalRecord]:
        return {key: self.records[key] for key in keys if key in self.records}

    async def put_many(self, records: Mapping[str, EvalRecord]) -> None:
        self.records.update(records)

    async def count(self) -> int:
        return len(self.records)

    async def clear(self) -> None:
        self.records.clear()
