# cache_dse/repositories/sqlite.py
#
# Кэш оценок в SQLite через асинхронный драйвер aiosqlite. Записи переживают
# перезапуск, поэтому повторные прогоны на той же трассе не пересчитывают симуляции.

from typing import Dict, Mapping, Optional, Sequence

from cache_dse.database import get_db_connection, init_db
from .base import BaseEvalRepository, EvalRecord

# SQLite ограничивает число параметров в одном запросе.
_CHUNK = 500


class SQLiteEvalRepository(BaseEvalRepository):
    def __init__(self, database_path: Optional[str] = None):
        self.database_path = database_path
        self._initialized = False

    async def _ensure_schema(self) -> None:
        if not self._initialized:
            await init_db(self.database_path)
            self._initialized = True

    async def get_many(self, keys: Sequence[str]) -> Dict[str, EvalRecord]:
        await self._ensure_schema()
        found: Dict[str, EvalRecord] = {}
        async for db in get_db_connection(self.database_path):
            for start in range(0, len(keys), _CHUNK):
                chunk = list(keys[start:start + _CHUNK])
                placeholders = ",".join("?" * len(chunk))
                cursor = await db.execute(
                    f"SELECT key, payload FROM evaluations WHERE key IN ({placeholders})",
                    tuple(chunk),
                )
                for key, payload in await cursor.fetchall():
                    found[key] = EvalRecord.model_validate_json(payload)
        return found

    async def put_many(self, records: Mapping[str, EvalRecord]) -> None:
        if not records:
            return
        await self._ensure_schema()
        async for db in get_db_connection(self.database_path):
            # INSERT OR REPLACE: последняя запись побеждает, значения все равно совпадают
            await db.executemany(
                "INSERT OR REPLACE INTO evaluations (key, payload) VALUES (?, ?)",
                [(key, record.model_dump_json()) for key, record in records.items()],
            )
            await db.commit()

    async def count(self) -> int:
        await self._ensure_schema()
        total = 0
        async for db in get_db_connection(self.database_path):
            cursor = await db.execute("SELECT COUNT(*) FROM evaluations")
            row = await cursor.fetchone()
            total = int(row[0])
        return total

    async def clear(self) -> None:
        await self._ensure_schema()
        async for db in get_db_connection(self.database_path):
            await db.execute("DELETE FROM evaluations")
            await db.commit()
