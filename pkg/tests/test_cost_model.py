# tests/test_cost_model.py
#
# Тесты моделей времени и энергии на ручных примерах, процентов улучшения
# и загрузки таблицы характеризации.

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from cache_dse.cache_sim import SimCounters
from cache_dse.cost_model import (
    ObjectiveVector,
    check_coverage,
    characterization_digest,
    energy,
    energy_with_cpu,
    exec_time,
    improvement,
    load_characterization,
    objectives,
)
from cache_dse.errors import CharacterizationError, ImprovementError
from cache_dse.schemas import CacheConfig, Characterization, MissMode, SearchSpace, WritePolicy

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

I_CFG = CacheConfig(total_size=16384, line_size=8, ways=4)
D_CFG = CacheConfig(total_size=16384, line_size=16, ways=8, write_policy=WritePolicy.COPY_BACK, writable=True)


@pytest.fixture
def characterization() -> Characterization:
    return Characterization(
        icache=[{"line_size": 8, "ways": 4, "access_time_s": 1e-9, "access_energy_j": 0.1e-9}],
        dcache=[{"line_size": 16, "ways": 8, "access_time_s": 2e-9, "access_energy_j": 0.3e-9}],
        dram={"access_time_s": 100e-9, "access_power_w": 0.5, "bandwidth_bps": 1e9},
        cpu_power_w=0.25,
    )


def test_exec_time_access_only(characterization):
    i = SimCounters(accesses=1000)
    assert exec_time(i, SimCounters(), I_CFG, D_CFG, characterization) == pytest.approx(1.0e-6, rel=1e-12)


def test_exec_time_with_misses(characterization):
    i = SimCounters(accesses=100, demand_misses=10)
    value = exec_time(i, SimCounters(), I_CFG, D_CFG, characterization)
    assert value == pytest.approx(100e-9 + 10 * 1e-7 + 10 * 8 / 1e9, rel=1e-12)
    assert value == pytest.approx(1.18e-6, rel=1e-12)


def test_energy_access_only(characterization):
    i = SimCounters(accesses=1000)
    assert energy(i, SimCounters(), I_CFG, D_CFG, characterization) == pytest.approx(1.0e-7, rel=1e-12)


def test_energy_miss_terms(characterization):
    i = SimCounters(accesses=100, demand_misses=10)
    expected = 100 * 0.1e-9 + 10 * 0.1e-9 * 8 + 10 * 0.5 * (100e-9 + 8 / 1e9)
    assert energy(i, SimCounters(), I_CFG, D_CFG, characterization) == pytest.approx(expected, rel=1e-12)


def test_zero_counters_give_zero_objectives(characterization):
    assert objectives(SimCounters(), SimCounters(), I_CFG, D_CFG, characterization) == ObjectiveVector(0.0, 0.0)


@pytest.mark.parametrize(
    "i,d",
    [
        (SimCounters(accesses=5000, demand_misses=120, prefetch_fetches=30), SimCounters(accesses=2000, demand_misses=75)),
        (SimCounters(accesses=1, demand_misses=1), SimCounters(accesses=1, demand_misses=1, prefetch_fetches=1)),
        (SimCounters(accesses=77777, prefetch_fetches=999), SimCounters(accesses=3, writebacks=2, writethroughs=1)),
        (SimCounters(), SimCounters(accesses=400, demand_misses=400, prefetch_fetches=400)),
        (SimCounters(accesses=123456, demand_misses=6543, prefetch_fetches=321), SimCounters(accesses=98765, demand_misses=4321, prefetch_fetches=12)),
    ],
)
@pytest.mark.parametrize("mode", list(MissMode))
def test_hand_evaluation(characterization, i, d, mode):
    ti, td, dram_at, bw, pw = 1e-9, 2e-9, 100e-9, 1e9, 0.5
    ei, ed = 0.1e-9, 0.3e-9
    mi = i.demand_misses + (0 if mode == MissMode.DEMAND_ONLY else i.prefetch_fetches)
    md = d.demand_misses + (0 if mode == MissMode.DEMAND_ONLY else d.prefetch_fetches)
    t = i.accesses * ti + mi * dram_at + mi * 8 / bw + d.accesses * td + md * dram_at + md * 16 / bw
    e = (
        i.accesses * ei + d.accesses * ed + mi * ei * 8 + md * ed * 16
        + mi * pw * (dram_at + 8 / bw) + md * pw * (dram_at + 16 / bw)
    )
    assert exec_time(i, d, I_CFG, D_CFG, characterization, mode) == pytest.approx(t, rel=1e-12, abs=0)
    assert energy(i, d, I_CFG, D_CFG, characterization, mode) == pytest.approx(e, rel=1e-12, abs=0)


def test_energy_with_cpu_adds_time_term(characterization):
    i, d = SimCounters(accesses=100, demand_misses=10), SimCounters(accesses=50, demand_misses=5)
    base = objectives(i, d, I_CFG, D_CFG, characterization)
    assert energy_with_cpu(i, d, I_CFG, D_CFG, characterization, 0.25) == pytest.approx(
        base.exec_time * 0.25 + base.energy, rel=1e-12
    )


def test_missing_characterization_entry(characterization):
    other = CacheConfig(total_size=16384, line_size=32, ways=4)
    with pytest.raises(CharacterizationError):
        exec_time(SimCounters(), SimCounters(), other, D_CFG, characterization)


def test_improvement_examples():
    assert improvement(ObjectiveVector(0.1, 1.0), ObjectiveVector(0.05, 1.0)) == pytest.approx((50.0, 0.0))
    assert improvement(ObjectiveVector(0.1, 1.0), ObjectiveVector(0.1, 1.0)) == (0.0, 0.0)
    assert improvement(ObjectiveVector(0.1, 1.0), ObjectiveVector(0.1, 1.5))[1] == pytest.approx(-50.0)


def test_improvement_zero_baseline():
    with pytest.raises(ImprovementError):
        improvement(ObjectiveVector(0.0, 1.0), ObjectiveVector(0.1, 1.0))
    with pytest.raises(ZeroDivisionError):
        improvement(ObjectiveVector(1.0, 0.0), ObjectiveVector(0.1, 1.0))


def test_duplicate_keys_rejected():
    entry = {"line_size": 8, "ways": 4, "access_time_s": 1e-9, "access_energy_j": 1e-10}
    with pytest.raises(ValueError):
        Characterization(
            icache=[entry, entry], dcache=[entry],
            dram={"access_time_s": 1e-7, "access_power_w": 0.5, "bandwidth_bps": 1e9},
        )


def test_non_positive_values_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "icache": [{"line_size": 8, "ways": 4, "access_time_s": 0.0, "access_energy_j": 1e-10}],
        "dcache": [],
        "dram": {"access_time_s": 1e-7, "access_power_w": 0.5, "bandwidth_bps": 1e9},
    }), encoding="utf-8")
    with pytest.raises(CharacterizationError):
        load_characterization(path)


def test_sample_table_covers_default_space():
    ch = load_characterization(DATA_DIR / "characterization_sample.json", SearchSpace.default())
    assert ch.synthetic
    assert ch.find("dcache", 64, 2) is not None


def test_coverage_reports_missing_keys(characterization):
    with pytest.raises(CharacterizationError) as info:
        check_coverage(characterization, SearchSpace.default())
    assert "icache(8, 8)" in str(info.value)


def test_digest_is_stable(characterization):
    copy = Characterization.model_validate(characterization.model_dump())
    assert characterization_digest(copy) == characterization_digest(characterization)


def _random_counters(rng):
    accesses = int(rng.integers(1, 10_000))
    return SimCounters(
        accesses=accesses,
        demand_misses=int(rng.integers(0, accesses)),
        prefetch_fetches=int(rng.integers(0, accesses)),
        writebacks=int(rng.integers(0, 100)),
    )


def _scaled(counters, factor):
    return SimCounters(
        accesses=counters.accesses * factor,
        demand_misses=counters.demand_misses * factor,
        prefetch_fetches=counters.prefetch_fetches * factor,
        writebacks=counters.writebacks * factor,
    )


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("mode", list(MissMode))
def test_objectives_are_linear_in_counters(characterization, seed, mode):
    rng = np.random.default_rng(seed)
    i, d = _random_counters(rng), _random_counters(rng)
    base = objectives(i, d, I_CFG, D_CFG, characterization, mode)
    doubled = objectives(_scaled(i, 2), _scaled(d, 2), I_CFG, D_CFG, characterization, mode)
    assert doubled.exec_time == pytest.approx(2 * base.exec_time, rel=1e-12)
    assert doubled.energy == pytest.approx(2 * base.energy, rel=1e-12)

    # слагаемые промахов: разность с той же трассой без промахов
    hits_only = objectives(
        replace(i, demand_misses=0, prefetch_fetches=0), replace(d, demand_misses=0, prefetch_fetches=0),
        I_CFG, D_CFG, characterization, mode,
    )
    more_misses = objectives(
        replace(i, demand_misses=2 * i.demand_misses, prefetch_fetches=2 * i.prefetch_fetches),
        replace(d, demand_misses=2 * d.demand_misses, prefetch_fetches=2 * d.prefetch_fetches),
        I_CFG, D_CFG, characterization, mode,
    )
    for field in ("exec_time", "energy"):
        miss_part = getattr(base, field) - getattr(hits_only, field)
        assert getattr(more_misses, field) - getattr(hits_only, field) == pytest.approx(2 * miss_part, rel=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_one_more_miss_never_lowers_objectives(characterization, seed):
    rng = np.random.default_rng(100 + seed)
    i, d = _random_counters(rng), _random_counters(rng)
    base = objectives(i, d, I_CFG, D_CFG, characterization)
    for more_i, more_d in (
        (replace(i, demand_misses=i.demand_misses + 1), d),
        (i, replace(d, demand_misses=d.demand_misses + 1)),
        (replace(i, prefetch_fetches=i.prefetch_fetches + 1), d),
        (i, replace(d, prefetch_fetches=d.prefetch_fetches + 1)),
    ):
        worse = objectives(more_i, more_d, I_CFG, D_CFG, characterization)
        assert worse.exec_time > base.exec_time
        assert worse.energy > base.energy
    # в режиме demand-only выборки предвыборки не стоят ничего
    demand = objectives(i, d, I_CFG, D_CFG, characterization, MissMode.DEMAND_ONLY)
    extra = objectives(replace(i, prefetch_fetches=i.prefetch_fetches + 1), d, I_CFG, D_CFG, characterization, MissMode.DEMAND_ONLY)
    assert extra == demand
