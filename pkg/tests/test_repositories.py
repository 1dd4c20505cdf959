# tests/test_repositories.py
#
# Тесты хранилищ кэша оценок In-Memory и SQLite. SQLite работает с настоящим
# файлом во временном каталоге (фикстура tmp_path), поэтому проверяется и схема,
# и сохранение между экземплярами репозитория.

import pytest

from cache_dse.cache_sim import SimCounters
from cache_dse.config import EvalCacheType, settings
from cache_dse.cost_model import ObjectiveVector
from cache_dse.dependencies import create_eval_repository
from cache_dse.repositories.base import EvalRecord
from cache_dse.repositories.in_memory import InMemoryEvalRepository
from cache_dse.repositories.sqlite import SQLiteEvalRepository


def _record(seed: int) -> EvalRecord:
    return EvalRecord(
        i_counters=SimCounters(accesses=100 + seed, demand_misses=seed, prefetch_fetches=1),
        d_counters=SimCounters(accesses=50, demand_misses=3, writebacks=seed, writethroughs=2),
        # значения без короткого десятичного представления проверяют точность JSON
        objectives=ObjectiveVector(1 / 3 + seed, 2 / 7 * 1e-9),
    )


@pytest.fixture(params=["in_memory", "sqlite"])
async def repository(request, tmp_path):
    if request.param == "in_memory":
        repo = InMemoryEvalRepository()
    else:
        repo = SQLiteEvalRepository(str(tmp_path / "eval_cache.db"))
    yield repo
    await repo.close()


async def test_get_missing_keys(repository):
    assert await repository.get_many(["a", "b"]) == {}
    assert await repository.count() == 0


async def test_put_and_get_roundtrip(repository):
    records = {f"k{i}": _record(i) for i in range(5)}
    await repository.put_many(records)
    found = await repository.get_many(["k0", "k3", "absent"])
    assert set(found) == {"k0", "k3"}
    assert found["k3"] == records["k3"]
    assert found["k3"].objectives.exec_time == 1 / 3 + 3
    assert await repository.count() == 5


async def test_put_is_idempotent(repository):
    await repository.put_many({"k": _record(1)})
    await repository.put_many({"k": _record(1)})
    assert await repository.count() == 1
    assert (await repository.get_many(["k"]))["k"] == _record(1)


async def test_clear(repository):
    await repository.put_many({"a": _record(0), "b": _record(1)})
    await repository.clear()
    assert await repository.count() == 0


async def test_sqlite_large_batch_is_chunked(tmp_path):
    repo = SQLiteEvalRepository(str(tmp_path / "big.db"))
    records = {f"key-{i}": _record(i % 7) for i in range(1200)}
    await repo.put_many(records)
    found = await repo.get_many(list(records))
    assert len(found) == 1200


async def test_sqlite_persists_between_instances(tmp_path):
    path = str(tmp_path / "persist.db")
    await SQLiteEvalRepository(path).put_many({"k": _record(2)})
    assert (await SQLiteEvalRepository(path).get_many(["k"]))["k"] == _record(2)


def test_factory_selects_backend(monkeypatch, tmp_path):
    monkeypatch.setattr(settings, "SQLITE_DATABASE_PATH", str(tmp_path / "f.db"))
    assert isinstance(create_eval_repository(EvalCacheType.IN_MEMORY), InMemoryEvalRepository)
    sqlite_repo = create_eval_repository(EvalCacheType.SQLITE)
    assert isinstance(sqlite_repo, SQLiteEvalRepository)
    assert sqlite_repo.database_path == str(tmp_path / "f.db")
