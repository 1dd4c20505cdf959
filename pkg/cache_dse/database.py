# cache_dse/database.py
#
# Модуль для работы с базой данных SQLite кэша оценок.
# Предоставляет асинхронное соединение и инициализацию схемы (таблица evaluations).

from typing import AsyncIterator, Optional

import aiosqlite

from cache_dse.config import settings


# Асинхронный генератор соединения. Путь берется из настроек, если не передан явно.
async def get_db_connection(database_path: Optional[str] = None) -> AsyncIterator[aiosqlite.Connection]:
    async with aiosqlite.connect(database_path or settings.SQLITE_DATABASE_PATH) as db:
        yield db


# Создает таблицу evaluations, если ее еще нет:
#   - key: TEXT PRIMARY KEY (дайджест трассы, характеризации, режим, зерно, гены)
#   - payload: TEXT NOT NULL (JSON записи EvalRecord)
async def init_db(database_path: Optional[str] = None) -> None:
    async with aiosqlite.connect(database_path or settings.SQLITE_DATABASE_PATH) as db:
        await db.execute("""
            CREATE TABLE IF NOT EXISTS evaluations (
                key TEXT PRIMARY KEY,
                payload TEXT NOT NULL
            )
        """)
        await db.commit()
