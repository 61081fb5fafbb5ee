import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from innloops import __version__
from innloops.loop_core import read_looptab
from innloops.shared.errors import (EXIT_INVARIANT, EXIT_RESOURCE, EXIT_USAGE, InnLoopsError,
                                    NotLatin, SearchLimitExceeded, UsageError)
from innloops.shared.logging_config import get_logger, log_table_call, setup_logging
from innloops.shared.models import (AnalysisReport, DeltaMuParams, ExperimentName,
                                    ExperimentSpec)
from innloops.shared.settings import DEFAULT_SEED, Settings, get_settings
from innloops.shared.store import LoopStore, dump_json

from .conftest import cyclic


class TestStore:
    def test_tables_and_documents(self, tmp_path):
        store = LoopStore(tmp_path)
        path = store.write_table("loops", "z4", cyclic(4))
        store.write_document("loops", "z4", {"order": 4})
        assert path == tmp_path / "loops" / "z4.tab"
        assert read_looptab(path) == cyclic(4)
        assert store.read_document("loops", "z4") == {"order": 4}
        assert store.delete("loops", "z4")
        assert not path.exists()
        assert store.read_document("loops", "z4") is None
        assert not store.delete("loops", "z4")

    def test_missing_and_unreadable_documents(self, tmp_path):
        store = LoopStore(tmp_path)
        assert store.read_document("census", "groups64") is None
        (tmp_path / "census").mkdir()
        (tmp_path / "census" / "groups64.json").write_text("{not json")
        assert store.read_document("census", "groups64") is None

    def test_json_is_canonical(self):
        assert dump_json({"b": 1, "a": [1, 2]}) == dump_json({"a": [1, 2], "b": 1})
        assert dump_json({}).endswith("\n")


class TestDeltaMuParams:
    @given(st.integers(min_value=0, max_value=2 ** 21 - 1),
           st.integers(min_value=0, max_value=2 ** 7 - 1))
    def test_integer_encoding(self, delta, mu):
        params = DeltaMuParams.from_ints(delta, mu)
        assert (params.delta_int, params.mu_int) == (delta, mu)
        assert DeltaMuParams.from_hex(params.delta_hex, params.mu_hex) == params

    def test_bit_k_means_minus_one(self):
        params = DeltaMuParams.from_ints(0b101, 0b10)
        assert params.delta_bits[:3] == (-1, 1, -1)
        assert params.mu_bits[:2] == (1, -1)
        assert params.delta_hex == "000005" and params.mu_hex == "02"

    def test_defaults_are_trivial(self):
        assert DeltaMuParams().delta_int == 0
        assert DeltaMuParams() == DeltaMuParams.from_hex("0", "0")

    @pytest.mark.parametrize("kwargs", [
        dict(delta_bits=(1,) * 20),
        dict(mu_bits=(1,) * 7 + (1,)),
        dict(mu_bits=(1, 0, 1, 1, 1, 1, 1)),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValidationError):
            DeltaMuParams(**kwargs)

    def test_random_draws_follow_the_generator(self):
        first = DeltaMuParams.random(np.random.Generator(np.random.PCG64(3)))
        second = DeltaMuParams.random(np.random.Generator(np.random.PCG64(3)))
        assert first == second


class TestReports:
    def _report(self, **overrides):
        fields = dict(order=8, is_associative=True, left_nucleus_size=8, middle_nucleus_size=8,
                      right_nucleus_size=8, nucleus_size=8, center_size=2,
                      associator_subloop_size=1, nilpotency_class=2, mu_count=0,
                      power_associative=True, nuclei_cover_loop=True,
                      nucleus_elementary_abelian_2=False, center_is_associator_subloop=False)
        fields.update(overrides)
        return AnalysisReport(**fields)

    def test_consistent_report(self):
        assert self._report().order == 8

    def test_center_must_divide_nucleus(self):
        with pytest.raises(ValidationError):
            self._report(center_size=3)

    def test_associativity_must_match_count(self):
        with pytest.raises(ValidationError):
            self._report(mu_count=5)

    def test_experiment_spec_bounds(self):
        with pytest.raises(ValidationError):
            ExperimentSpec(name=ExperimentName.THETA_FAMILY, samples=0)
        with pytest.raises(ValidationError):
            ExperimentSpec(name="no-such-experiment")
        with pytest.raises(ValidationError):
            ExperimentSpec(name=ExperimentName.THETA_FAMILY, seed=-1)
        assert ExperimentSpec(name="theta-family").seed == DEFAULT_SEED


class TestSettings:
    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("INNLOOPS_LOG_LEVEL", "debug")
        monkeypatch.setenv("INNLOOPS_WORKERS", "4")
        settings = Settings()
        assert settings.log_level == "DEBUG"
        assert settings.workers == 4

    def test_invalid_log_level(self, monkeypatch):
        monkeypatch.setenv("INNLOOPS_LOG_LEVEL", "chatty")
        with pytest.raises(ValidationError):
            Settings()

    def test_cached_settings(self, isolated_settings, tmp_path):
        assert get_settings() is isolated_settings
        assert isolated_settings.cache_dir == tmp_path / "cache"


class TestErrorsAndLogging:
    def test_exit_codes(self):
        assert InnLoopsError("x").exit_code == EXIT_INVARIANT
        assert NotLatin("x").exit_code == EXIT_INVARIANT
        assert SearchLimitExceeded("x").exit_code == EXIT_RESOURCE
        assert UsageError("x").exit_code == EXIT_USAGE

    def test_json_logs_go_to_stderr(self, capsys):
        setup_logging("innloops-test", "INFO", json_format=True)
        get_logger("test").info("Table checked",
                                **log_table_call("analyze", np.int64(8), sizes=np.array([1, 2])))
        captured = capsys.readouterr()
        assert captured.out == ""
        line = json.loads(captured.err.strip().splitlines()[-1])
        assert line["event"] == "Table checked"
        assert line["order"] == 8
        assert line["parameters"] == {"sizes": [1, 2]}
        assert line["service"] == "innloops-test"
        assert line["version"] == __version__
