# cache_dse/config.py
#
# Модуль конфигурации приложения. Определяет тип хранилища кэша оценок
# (In-Memory, SQLite, Redis), параметры подключения к бэкендам, число рабочих
# процессов и общие параметры запуска. Использует pydantic-settings для чтения
# настроек из переменных окружения или файла .env.

import logging
from enum import Enum
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


# Перечисление доступных бэкендов для кэша оценок (мемоизации симуляций).
class EvalCacheType(str, Enum):
    IN_MEMORY = "in_memory"  # Словарь в памяти процесса, живет один запуск
    SQLITE = "sqlite"        # Файл SQLite, переживает перезапуски
    REDIS = "redis"          # Redis, может разделяться между несколькими запусками


# Класс настроек приложения. Значения читаются из окружения и файла .env.
class Settings(BaseSettings):
    # `extra="ignore"` позволяет держать в .env переменные других сервисов.
    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    EVAL_CACHE_TYPE: EvalCacheType = EvalCacheType.IN_MEMORY

    REDIS_URL: Optional[str] = "redis://localhost:6379/0"

    # Путь к файлу SQLite с сохраненными оценками.
    SQLITE_DATABASE_PATH: str = "./eval_cache.db"

    # Число рабочих процессов для оценки поколения; None - по числу ядер.
    WORKERS: Optional[int] = None

    # Глобальное зерно генератора для политики замещения RANDOM.
    # Не совпадает с зерном NSGA-II: разные запуски алгоритма видят один и тот же ландшафт.
    SIM_SEED: int = 0

    # Максимальный размер подпространства для полного перебора.
    EXHAUSTIVE_BUDGET: int = 64800

    LOG_LEVEL: str = "INFO"

    # Файл эксперимента, который обслуживает HTTP-интерфейс (/evaluations).
    SPEC_FILE: Optional[str] = None


settings = Settings()


# Настройка логирования для CLI и HTTP-сервиса: один потоковый обработчик на корневом логгере.
def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
