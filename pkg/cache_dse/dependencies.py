# cache_dse/dependencies.py
#
# Выбор реализации кэша оценок в зависимости от EVAL_CACHE_TYPE и управление
# подключением к Redis. Используется CLI (create_eval_repository) и
# HTTP-сервисом (get_eval_repository как зависимость FastAPI).

import logging
from typing import AsyncGenerator, Optional

from redis.asyncio import Redis

from cache_dse.config import EvalCacheType, settings
from cache_dse.repositories.base import BaseEvalRepository
from cache_dse.repositories.in_memory import InMemoryEvalRepository
from cache_dse.repositories.redis_repo import RedisEvalRepository
from cache_dse.repositories.sqlite import SQLiteEvalRepository

logger = logging.getLogger(__name__)

# Общий клиент Redis, чтобы не открывать соединение на каждую операцию.
_redis_client: Optional[Redis] = None

# In-Memory кэш HTTP-сервиса живет столько же, сколько процесс.
_in_memory_repo: Optional[InMemoryEvalRepository] = None


def create_eval_repository(cache_type: Optional[EvalCacheType] = None) -> BaseEvalRepository:
    global _redis_client
    cache_type = cache_type or settings.EVAL_CACHE_TYPE
    if cache_type == EvalCacheType.IN_MEMORY:
        return InMemoryEvalRepository()
    if cache_type == EvalCacheType.SQLITE:
        return SQLiteEvalRepository(settings.SQLITE_DATABASE_PATH)
    if cache_type == EvalCacheType.REDIS:
        if _redis_client is None:
            _redis_client = Redis.from_url(settings.REDIS_URL)
        return RedisEvalRepository(redis_client=_redis_client)
    raise ValueError(f"Неизвестный тип кэша оценок: {cache_type}")


async def get_eval_repository() -> AsyncGenerator[BaseEvalRepository, None]:
    global _in_memory_repo
    if settings.EVAL_CACHE_TYPE == EvalCacheType.IN_MEMORY:
        if _in_memory_repo is None:
            _in_memory_repo = InMemoryEvalRepository()
        yield _in_memory_repo
    else:
        yield create_eval_repository()


# Подключение к Redis при старте; при неудаче сервис продолжает работу без клиента.
async def connect_to_redis() -> None:
    global _redis_client
    if settings.EVAL_CACHE_TYPE == EvalCacheType.REDIS:
        logger.info("Подключение к Redis...")
        _redis_client = Redis.from_url(settings.REDIS_URL)
        try:
            await _redis_client.ping()
            logger.info("Подключение к Redis установлено")
        except Exception as exc:
            logger.error("Не удалось подключиться к Redis: %s", exc)
            _redis_client = None


async def close_redis_connection() -> None:
    global _redis_client
    if _redis_client is not None:
        logger.info("Закрытие соединения с Redis...")
        await _redis_client.close()
        _redis_client = None
