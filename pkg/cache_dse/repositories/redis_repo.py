# cache_dse/repositories/redis_repo.py
#
# Кэш оценок в Redis. Ключи имеют вид "eval:<ключ оценки>", значения - JSON EvalRecord.
# Несколько процессов оптимизации могут разделять один Redis.

from typing import Dict, List, Mapping, Sequence

from redis.asyncio import Redis

from .base import BaseEvalRepository, EvalRecord


class RedisEvalRepository(BaseEvalRepository):
    def __init__(self, redis_client: Redis):
        self.redis = redis_client
        self.key_prefix = "eval:"

    async def get_many(self, keys: Sequence[str]) -> Dict[str, EvalRecord]:
        if not keys:
            return {}
        payloads = await self.redis.mget([f"{self.key_prefix}{key}" for key in keys])
        return {
            key: EvalRecord.model_validate_json(payload)
            for key, payload in zip(keys, payloads)
            if payload
        }

    async def put_many(self, records: Mapping[str, EvalRecord]) -> None:
        if not records:
            return
        await self.redis.mset({
            f"{self.key_prefix}{key}": record.model_dump_json() for key, record in records.items()
        })

    async def _all_keys(self) -> List[bytes]:
        keys = []
        async for key in self.redis.scan_iter(f"{self.key_prefix}*"):
            keys.append(key)
        return keys

    async def count(self) -> int:
        return len(await self._all_keys())

    async def clear(self) -> None:
        keys = await self._all_keys()
        if keys:
            await self.redis.delete(*keys)
