# cache_dse/errors.py
#
# Иерархия исключений пакета. Ветка SpecValidationError описывает ошибки входных
# данных (CLI завершается с кодом 1, HTTP отвечает 422), ветка CacheDseRuntimeError -
# ошибки во время вычислений (код 2, HTTP 500).

from typing import Any, Optional, Sequence


class CacheDseError(Exception):
    """Базовое исключение пакета."""


# --- Ошибки валидации входных данных ---

class SpecValidationError(CacheDseError):
    pass


class TraceParseError(SpecValidationError):
    # Номер строки хранится отдельно, чтобы вызывающий код мог сослаться на позицию в файле.
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        location = f"строка {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message}")


class TraceSourceError(SpecValidationError):
    pass


class CacheConfigError(SpecValidationError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class CharacterizationError(SpecValidationError):
    pass


class GenomeError(SpecValidationError):
    pass


# --- Ошибки выполнения ---

class CacheDseRuntimeError(CacheDseError):
    pass


class CacheUsageError(CacheDseRuntimeError):
    pass


class EvaluationError(CacheDseRuntimeError):
    def __init__(self, genome: Sequence[Any], cause: BaseException):
        self.genome = tuple(genome)
        self.cause = cause
        super().__init__(f"ошибка оценки генома {list(self.genome)}: {cause}")


class BudgetExceededError(CacheDseRuntimeError):
    pass


class HypervolumeError(CacheDseRuntimeError):
    pass


# Нулевая компонента базовой линии в формулах улучшения.
class ImprovementError(CacheDseRuntimeError, ZeroDivisionError):
    pass
