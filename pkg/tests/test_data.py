"""Tests for corpus generation, CSV persistence, and splitting."""

import math

import pytest

from propopt.data import (
    CSV_HEADER,
    Dataset,
    DesignRecord,
    generate,
    load,
    save,
    split,
)
from propopt.errors import DatasetFormatError, GenerationError
from propopt.solver import BladeGeometry, Requirement, evaluate
from propopt.space import DesignSpaceConfig


def make_synthetic(n):
    records = []
    for i in range(n):
        req = Requirement(20e3 + 37.0 * i, 5.0 + (i % 140) * 0.1, 600.0 + i)
        geom = BladeGeometry(3 + i % 4, 1.0 + (i % 25) * 0.1, 0.2 + (i % 25) * 0.02,
                             0.15, 1.0)
        records.append(DesignRecord(req, geom, 0.55 + (i % 40) * 0.01))
    return Dataset(records=records, efficiency_floor=0.5)


class TestGenerate:
    def test_floor_respected(self, small_dataset):
        assert len(small_dataset) == 300
        assert min(r.efficiency for r in small_dataset.records) >= 0.5
        assert max(r.efficiency for r in small_dataset.records) < 1.0

    def test_canonically_sorted_and_unique(self, small_dataset):
        keys = [r.pair_key() for r in small_dataset.records]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_records_valid(self, small_dataset):
        for rec in small_dataset.records[::29]:
            rec.validate()

    def test_labels_reproduce_under_reevaluation(self, small_dataset):
        for rec in small_dataset.records[::43]:
            perf = evaluate(rec.geometry, rec.requirement)
            assert perf.feasible
            assert abs(perf.efficiency - rec.efficiency) <= 1e-12 * rec.efficiency

    def test_parallelism_does_not_change_records(self):
        cfg = DesignSpaceConfig(rng_seed=7)
        seq = generate(cfg, 30, parallelism=1)
        par = generate(cfg, 30, parallelism=2)
        assert seq.records == par.records

    def test_determinism_same_seed(self):
        cfg = DesignSpaceConfig(rng_seed=5)
        assert generate(cfg, 25).records == generate(cfg, 25).records

    def test_distinct_seeds_differ(self):
        a = generate(DesignSpaceConfig(rng_seed=1), 25)
        b = generate(DesignSpaceConfig(rng_seed=2), 25)
        assert a.records != b.records

    def test_unreachable_floor_raises(self):
        with pytest.raises(GenerationError):
            generate(DesignSpaceConfig(rng_seed=0), 3, efficiency_floor=0.99)

    def test_rejects_bad_arguments(self):
        cfg = DesignSpaceConfig()
        with pytest.raises(GenerationError):
            generate(cfg, 0)
        with pytest.raises(GenerationError):
            generate(cfg, 10, efficiency_floor=1.0)
        with pytest.raises(GenerationError):
            generate(cfg, 10, efficiency_floor=-0.1)


class TestPersistence:
    def test_roundtrip(self, small_dataset, tmp_path):
        path = tmp_path / "corpus.csv"
        save(small_dataset, path)
        back = load(path, generation_config=small_dataset.generation_config,
                    efficiency_floor=small_dataset.efficiency_floor)
        assert back == small_dataset

    def test_roundtrip_is_float_exact(self, small_dataset, tmp_path):
        path = tmp_path / "corpus.csv"
        save(small_dataset, path)
        back = load(path)
        for a, b in zip(small_dataset.records, back.records):
            assert a.efficiency == b.efficiency
            assert a.requirement.thrust_req == b.requirement.thrust_req
            assert a.geometry.diameter == b.geometry.diameter

    def test_header_only_file_is_empty_dataset(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(",".join(CSV_HEADER) + "\n", encoding="utf-8")
        assert load(path).records == []

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError):
            load(path)

    def test_out_of_range_efficiency_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        row = "51783,7.5,3551,4,1.2,0.24,0.15,1,0.008,1.2"
        path.write_text(",".join(CSV_HEADER) + "\n" + row + "\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError):
            load(path)

    def test_malformed_row_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        good = "51783,7.5,3551,4,1.2,0.24,0.15,1,0.008,0.7"
        path.write_text(
            ",".join(CSV_HEADER) + "\n" + good + "\nnot,a,row\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError, match=":3"):
            load(path)

    def test_non_numeric_field_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        row = "51783,fast,3551,4,1.2,0.24,0.15,1,0.008,0.7"
        path.write_text(",".join(CSV_HEADER) + "\n" + row + "\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError, match=":2"):
            load(path)

    def test_duplicate_pair_rejected(self, tmp_path):
        path = tmp_path / "dup.csv"
        row = "51783,7.5,3551,4,1.2,0.24,0.15,1,0.008,0.7"
        path.write_text(
            ",".join(CSV_HEADER) + "\n" + row + "\n" + row + "\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError):
            load(path)


class TestSplit:
    def test_five_percent_of_thousand(self):
        ds = make_synthetic(1000)
        train, test = split(ds, 0.05, seed=3)
        assert len(test) == 50 and len(train) == 950
        train_keys = {r.pair_key() for r in train.records}
        test_keys = {r.pair_key() for r in test.records}
        assert not (train_keys & test_keys)
        assert train_keys | test_keys == {r.pair_key() for r in ds.records}

    def test_rounding_boundary(self):
        ds = make_synthetic(2)
        train, test = split(ds, 0.5, seed=0)
        assert len(train) == 1 and len(test) == 1

    def test_determinism(self):
        ds = make_synthetic(200)
        a = split(ds, 0.1, seed=12)
        b = split(ds, 0.1, seed=12)
        assert a[0].records == b[0].records
        assert a[1].records == b[1].records

    def test_preserves_order_within_parts(self, small_dataset):
        train, test = split(small_dataset, 0.2, seed=5)
        for part in (train, test):
            keys = [r.pair_key() for r in part.records]
            assert keys == sorted(keys)

    def test_rejects_bad_fraction(self):
        ds = make_synthetic(10)
        with pytest.raises(ValueError):
            split(ds, 0.0, seed=1)
        with pytest.raises(ValueError):
            split(ds, 1.0, seed=1)
