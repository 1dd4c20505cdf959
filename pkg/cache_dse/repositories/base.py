# cache_dse/repositories/base.py
#
# Этот модуль определяет запись кэша оценок `EvalRecord` и абстрактный базовый
# класс `BaseEvalRepository` - контракт для всех хранилищ мемоизации.
# Паттерн "Репозиторий" отделяет цикл оптимизации от деталей хранения
# (In-Memory, SQLite, Redis). Все методы асинхронные.

from abc import ABC, abstractmethod
from typing import Dict, Mapping, Sequence

from pydantic import BaseModel

from cache_dse.cache_sim import SimCounters
from cache_dse.cost_model import ObjectiveVector


# Результат одной оценки: счетчики обоих кэшей и вектор целей.
# JSON-сериализация pydantic сохраняет float без потери точности.
class EvalRecord(BaseModel):
    i_counters: SimCounters
    d_counters: SimCounters
    objectives: ObjectiveVector


class BaseEvalRepository(ABC):
    # Возвращает найденные записи по ключам; отсутствующие ключи в ответ не попадают.
    @abstractmethod
    async def get_many(self, keys: Sequence[str]) -> Dict[str, EvalRecord]:
        pass

    # Сохраняет записи. Повторная запись того же ключа допустима: оценка - чистая
    # функция ключа, поэтому значения совпадают.
    @abstractmethod
    async def put_many(self, records: Mapping[str, EvalRecord]) -> None:
        pass

    # Число сохраненных записей.
    @abstractmethod
    async def count(self) -> int:
        pass

    # Удаляет все записи этого кэша.
    @abstractmethod
    async def clear(self) -> None:
        pass

    async def close(self) -> None:
        return None
