# tests/conftest.py
#
# Общие фикстуры: пути к данным примера и фабрика файлов эксперимента
# во временном каталоге.

import json
from pathlib import Path
from typing import Any, Callable, Dict

import pytest

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# Фиксированный I-cache оставляет 4*5*3*3*2 = 360 геномов.
FIXED_ICACHE = {"LI": 1, "WI": 1, "RI": 0, "SI": 0}


def synthetic_trace(name: str = "kernel", count: int = 2000, seed: int = 1, write: float = 0.1) -> Dict[str, Any]:
    return {
        "name": name,
        "synthetic": {
            "pattern": "uniform",
            "low": 0,
            "high": 1 << 15,
            "mix": {"instr": 0.5, "read": 0.5 - write, "write": write},
        },
        "count": count,
        "seed": seed,
    }


@pytest.fixture
def make_experiment(tmp_path) -> Callable[..., Path]:
    def factory(file_name: str = "experiment.json", **fields: Any) -> Path:
        document = {
            "traces": [synthetic_trace()],
            "search_space": str(DATA_DIR / "default_space.json"),
            "characterization": str(DATA_DIR / "characterization_sample.json"),
            "nsga": {"generations": 10, "population_size": 20, "seed": 0},
            "baselines": ["baseline1"],
            "output_dir": "out",
            "restriction": dict(FIXED_ICACHE),
        }
        document.update(fields)
        path = tmp_path / file_name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return factory
