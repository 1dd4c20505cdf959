# tests/test_redis_repo.py
#
# Тесты RedisEvalRepository. Клиент Redis заменен AsyncMock, который хранит
# данные во внутреннем словаре и повторяет поведение mget/mset/scan_iter/delete.

from unittest.mock import AsyncMock, MagicMock

import pytest
from redis.asyncio import Redis

from cache_dse.cache_sim import SimCounters
from cache_dse.cost_model import ObjectiveVector
from cache_dse.repositories.base import EvalRecord
from cache_dse.repositories.redis_repo import RedisEvalRepository


# Имитация асинхронного итератора для scan_iter.
class AsyncIterator:
    def __init__(self, seq):
        self.seq = list(seq)
        self.i = 0

    async def __anext__(self):
        if self.i >= len(self.seq):
            raise StopAsyncIteration
        result = self.seq[self.i]
        self.i += 1
        return result

    def __aiter__(self):
        return self


@pytest.fixture
def mock_redis_client():
    mock = AsyncMock(spec=Redis)
    mock.mock_data = {}

    async def mock_mget(keys):
        return [mock.mock_data.get(key) for key in keys]

    async def mock_mset(mapping):
        for key, value in mapping.items():
            mock.mock_data[key] = value.encode("utf-8")
        return True

    async def mock_delete(*keys):
        removed = 0
        for key in keys:
            str_key = key.decode("utf-8") if isinstance(key, bytes) else key
            removed += mock.mock_data.pop(str_key, None) is not None
        return removed

    def mock_scan_iter(pattern):
        prefix = pattern.rstrip("*")
        return AsyncIterator(k.encode("utf-8") for k in mock.mock_data if k.startswith(prefix))

    # команды redis-py объявлены синхронными, поэтому async-методы задаются явно
    mock.mget = AsyncMock(side_effect=mock_mget)
    mock.mset = AsyncMock(side_effect=mock_mset)
    mock.delete = AsyncMock(side_effect=mock_delete)
    mock.scan_iter = MagicMock(side_effect=mock_scan_iter)
    return mock


@pytest.fixture
def redis_repo(mock_redis_client):
    return RedisEvalRepository(redis_client=mock_redis_client)


def _record() -> EvalRecord:
    return EvalRecord(
        i_counters=SimCounters(accesses=10, demand_misses=2),
        d_counters=SimCounters(accesses=4, writebacks=1),
        objectives=ObjectiveVector(0.1 + 0.2, 1e-300),
    )


async def test_put_many_uses_prefix(redis_repo, mock_redis_client):
    await redis_repo.put_many({"abc": _record()})
    assert list(mock_redis_client.mock_data) == ["eval:abc"]
    mock_redis_client.mset.assert_awaited_once()


async def test_get_many_roundtrip(redis_repo):
    await redis_repo.put_many({"a": _record()})
    found = await redis_repo.get_many(["a", "missing"])
    assert list(found) == ["a"]
    assert found["a"] == _record()
    assert found["a"].objectives.exec_time == 0.1 + 0.2


async def test_empty_requests_skip_redis(redis_repo, mock_redis_client):
    assert await redis_repo.get_many([]) == {}
    await redis_repo.put_many({})
    mock_redis_client.mget.assert_not_awaited()
    mock_redis_client.mset.assert_not_awaited()


async def test_count_and_clear_only_touch_eval_keys(redis_repo, mock_redis_client):
    mock_redis_client.mock_data["other:key"] = b"x"
    await redis_repo.put_many({"a": _record(), "b": _record()})
    assert await redis_repo.count() == 2
    await redis_repo.clear()
    assert await redis_repo.count() == 0
    assert "other:key" in mock_redis_client.mock_data
