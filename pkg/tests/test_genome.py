# tests/test_genome.py
#
# Тесты кодирования конфигураций в геном: декодирование примеров, биекция,
# ограничения генов и перебор пространства поиска.

import hashlib
from pathlib import Path

import pytest

from cache_dse.errors import GenomeError
from cache_dse.genome import (
    Genome,
    cardinality,
    decode,
    encode,
    enumerate_genomes,
    load_search_space,
    normalize_restriction,
    parse_genome,
    parse_restriction,
    restricted_cardinality,
)
from cache_dse.schemas import CacheConfig, Prefetch, Replacement, SearchSpace, WritePolicy

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
SPACE = SearchSpace.default()


def test_decode_worked_example():
    i_cfg, d_cfg = decode([1, 0, 1, 2, 0, 2, 0, 0, 0], SPACE)
    assert (i_cfg.line_size, i_cfg.ways, i_cfg.replacement, i_cfg.prefetch) == (
        16, 4, Replacement.FIFO, Prefetch.MISS_PREFETCH,
    )
    assert not i_cfg.writable and i_cfg.write_policy is None
    assert (d_cfg.line_size, d_cfg.ways, d_cfg.replacement, d_cfg.prefetch, d_cfg.write_policy) == (
        8, 16, Replacement.LRU, Prefetch.ON_DEMAND, WritePolicy.COPY_BACK,
    )
    assert encode(i_cfg, d_cfg, SPACE) == Genome(1, 0, 1, 2, 0, 2, 0, 0, 0)


def test_decode_all_zero_genome():
    i_cfg, d_cfg = decode([0] * 9, SPACE)
    assert i_cfg == CacheConfig(total_size=16384, line_size=8, ways=4)
    assert d_cfg.write_policy == WritePolicy.COPY_BACK and d_cfg.ways == 4


@pytest.mark.parametrize(
    "genes",
    [[0, 0, 3, 0, 0, 0, 0, 0, 0], [4, 0, 0, 0, 0, 0, 0, 0, 0], [0] * 8, [0] * 8 + [2], [0] * 8 + [-1]],
)
def test_decode_rejects_out_of_range(genes):
    with pytest.raises(GenomeError):
        decode(genes, SPACE)


def test_encode_rejects_foreign_size():
    i_cfg, d_cfg = decode([0] * 9, SPACE)
    with pytest.raises(GenomeError):
        encode(i_cfg.model_copy(update={"total_size": 32768}), d_cfg, SPACE)


def test_encode_rejects_value_outside_tables():
    i_cfg, d_cfg = decode([0] * 9, SPACE)
    with pytest.raises(GenomeError):
        encode(i_cfg.model_copy(update={"ways": 2}), d_cfg, SPACE)


def test_full_space_count_and_bijection():
    assert cardinality(SPACE) == 64800
    digests = set()
    for genome in enumerate_genomes(SPACE):
        assert encode(*decode(genome, SPACE), SPACE) == genome
        digests.add(hashlib.sha256(repr(tuple(genome)).encode()).hexdigest())
    assert len(digests) == 64800


def test_enumeration_is_lexicographic():
    genomes = list(enumerate_genomes(SPACE, {0: 0, 1: 0, 2: 0, 3: 0, 4: 0, 5: 0, 6: 0}))
    assert genomes == sorted(genomes)
    assert genomes[0] == Genome(0, 0, 0, 0, 0, 0, 0, 0, 0)
    assert len(genomes) == 6


def test_restricted_counts():
    fixed_i = normalize_restriction({"LI": 0, "WI": 2, "RI": 0, "SI": 1}, SPACE)
    assert restricted_cardinality(SPACE, fixed_i) == 360
    assert len(list(enumerate_genomes(SPACE, fixed_i))) == 360
    everything = normalize_restriction({name: 0 for name in ("LI", "WI", "RI", "SI", "LD", "WD", "RD", "SD", "AD")}, SPACE)
    assert list(enumerate_genomes(SPACE, everything)) == [Genome(*[0] * 9)]


def test_restriction_accepts_indices_and_names():
    assert normalize_restriction({"wd": 1, "8": 0}, SPACE) == {5: 1, 8: 0}
    assert normalize_restriction({2: 1}, SPACE) == {2: 1}


@pytest.mark.parametrize("restriction", [{"XX": 0}, {"AD": 2}, {"9": 0}])
def test_restriction_validation(restriction):
    with pytest.raises(GenomeError):
        normalize_restriction(restriction, SPACE)


def test_parse_helpers():
    assert parse_restriction("WD=1, AD=0") == {"WD": 1, "AD": 0}
    assert parse_restriction("") == {}
    assert parse_genome("1,0,1,2,0,2,0,0,0", SPACE) == Genome(1, 0, 1, 2, 0, 2, 0, 0, 0)
    with pytest.raises(GenomeError):
        parse_restriction("WD")
    with pytest.raises(GenomeError):
        parse_genome("a,b", SPACE)


def test_search_space_file_matches_default():
    assert load_search_space(DATA_DIR / "default_space.json") == SPACE
    assert load_search_space(None) == SPACE


def test_alternative_space_is_data_driven(tmp_path):
    path = tmp_path / "space32.json"
    text = (DATA_DIR / "default_space.json").read_text(encoding="utf-8")
    path.write_text(text.replace("16384", "32768"), encoding="utf-8")
    space = load_search_space(path)
    i_cfg, _ = decode([0] * 9, space)
    assert i_cfg.total_size == 32768


def test_invalid_space_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"icache": {"line_sizes": []}}', encoding="utf-8")
    with pytest.raises(GenomeError):
        load_search_space(path)
