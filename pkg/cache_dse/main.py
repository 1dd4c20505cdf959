# cache_dse/main.py
#
# HTTP-интерфейс к оценщику конфигураций на FastAPI.
# Жизненный цикл открывает и закрывает выбранное хранилище кэша оценок,
# маршруты дают декодирование генома, оценку конфигурации на трассе эксперимента
# (файл SPEC_FILE), расчет улучшений и таблицу гиперобъема.

import logging
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import Depends, FastAPI, HTTPException, status
from pydantic import BaseModel, Field

from cache_dse import __version__
from cache_dse.config import EvalCacheType, settings
from cache_dse.cost_model import ObjectiveVector, improvement
from cache_dse.database import init_db
from cache_dse.dependencies import close_redis_connection, connect_to_redis, get_eval_repository
from cache_dse.errors import CacheDseError, SpecValidationError
from cache_dse.explorer import (
    HypervolumeTable,
    RunOverrides,
    SimulationReport,
    hypervolume_table,
    load_experiment,
    run_simulate,
)
from cache_dse.genome import decode, load_search_space
from cache_dse.moea import NormalizationBounds
from cache_dse.repositories.base import BaseEvalRepository
from cache_dse.schemas import CacheConfig, ExperimentSpec

logger = logging.getLogger(__name__)


class GenesRequest(BaseModel):
    genes: List[int]


class DecodedGenome(BaseModel):
    icache: CacheConfig
    dcache: CacheConfig


class EvaluationRequest(GenesRequest):
    application: Optional[str] = None


class ObjectivesModel(BaseModel):
    exec_time: float
    energy: float


class ImprovementRequest(BaseModel):
    baseline: ObjectivesModel
    optimized: ObjectivesModel


class ImprovementResponse(BaseModel):
    time_pct: float
    energy_pct: float


class HypervolumeRequest(BaseModel):
    fronts: Dict[str, List[List[float]]] = Field(min_length=1)
    bounds: Optional[List[float]] = Field(None, min_length=4, max_length=4)
    ref: List[float] = Field(default_factory=lambda: [1.1, 1.1], min_length=2, max_length=2)


def _http_error(exc: CacheDseError) -> HTTPException:
    if isinstance(exc, SpecValidationError):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    logger.error("Ошибка выполнения запроса: %s", exc)
    return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(exc))


def _experiment() -> ExperimentSpec:
    if not settings.SPEC_FILE:
        raise SpecValidationError("не задан SPEC_FILE: оценка недоступна")
    return load_experiment(Path(settings.SPEC_FILE))


@asynccontextmanager
async def lifespan(app: FastAPI):
    if settings.EVAL_CACHE_TYPE == EvalCacheType.SQLITE:
        logger.info("Инициализация кэша оценок SQLite...")
        await init_db()
    elif settings.EVAL_CACHE_TYPE == EvalCacheType.REDIS:
        await connect_to_redis()
    yield
    if settings.EVAL_CACHE_TYPE == EvalCacheType.REDIS:
        await close_redis_connection()


# Отдельная фабрика позволяет тестам получать чистый экземпляр приложения.
def create_fastapi_app() -> FastAPI:
    app_instance = FastAPI(
        title="Cache DSE",
        description="Оценка конфигураций кэшей I/D: время выполнения и энергия",
        version=__version__,
        lifespan=lifespan,
    )

    @app_instance.post("/genomes/decode", response_model=DecodedGenome)
    async def decode_genome(request: GenesRequest):
        try:
            space_path = _experiment().search_space if settings.SPEC_FILE else None
            i_cfg, d_cfg = decode(request.genes, load_search_space(space_path))
        except CacheDseError as exc:
            raise _http_error(exc) from exc
        return DecodedGenome(icache=i_cfg, dcache=d_cfg)

    # Оценка проходит через тот же кэш, что и оптимизация в CLI.
    @app_instance.post("/evaluations", response_model=SimulationReport)
    async def evaluate(request: EvaluationRequest, repository: BaseEvalRepository = Depends(get_eval_repository)):
        try:
            return await run_simulate(
                _experiment(), request.genes, None, request.application,
                RunOverrides(workers=1), repository,
            )
        except CacheDseError as exc:
            raise _http_error(exc) from exc

    @app_instance.post("/improvements", response_model=ImprovementResponse)
    async def improvements(request: ImprovementRequest):
        try:
            time_pct, energy_pct = improvement(
                ObjectiveVector(request.baseline.exec_time, request.baseline.energy),
                ObjectiveVector(request.optimized.exec_time, request.optimized.energy),
            )
        except CacheDseError as exc:
            raise _http_error(exc) from exc
        return ImprovementResponse(time_pct=time_pct, energy_pct=energy_pct)

    @app_instance.post("/hypervolume", response_model=HypervolumeTable)
    async def hypervolume(request: HypervolumeRequest):
        bounds = NormalizationBounds(*request.bounds) if request.bounds else None
        try:
            return hypervolume_table(request.fronts, bounds, request.ref)
        except CacheDseError as exc:
            raise _http_error(exc) from exc

    return app_instance


# Экземпляр для запуска через uvicorn: `uvicorn cache_dse.main:app`.
app = create_fastapi_app()
