"""Tests for the run configuration and the report schema."""

import csv
import json
import logging
import sys

import pytest
import structlog

from core.config import Settings
from core.logging import setup_logging
from models.multiindex import TailSpec
from schemas.config import RunConfig, load_run_config
from schemas.report import CheckRecord, DecayEntry, DecayTable, Report
from utils.exceptions import ConfigError


class TestRunConfig:
    """Test validation of run configs."""

    def test_defaults(self):
        """Test the default config draws a seeded random q."""
        config = RunConfig()
        assert config.mode == "all"
        assert config.q_matrix() == RunConfig().q_matrix()
        assert config.q_matrix().max_modulus() <= config.random_q.max_modulus

    def test_complex_entries_in_every_notation(self):
        """Test numbers, 'a+bj' strings and [re, im] pairs."""
        config = RunConfig.model_validate(
            {"d": 2, "q_entries": [[None, "0.3+0.4j"], [[0.3, -0.4], None]]}
        )
        Q = config.q_matrix()
        assert Q.q(1, 2) == 0.3 + 0.4j
        assert Q.q(2, 1) == 0.3 - 0.4j

    def test_entries_serialize_as_pairs(self):
        """Test that complex entries are written as [re, im]."""
        config = RunConfig.model_validate({"d": 2, "q_entries": [[None, 0.5], [0.5, None]]})
        dumped = config.model_dump(mode="json")
        assert dumped["q_entries"][0][1] == [0.5, 0.0]

    def test_non_hermitian_pair_named(self):
        """Test that the offending pair appears in the error."""
        with pytest.raises(ConfigError, match=r"\(1, 2\)"):
            load_run_config(q_entries=[[None, 0.5], [0.4, None]])

    def test_modulus_bound(self):
        """Test that |q_ij| >= 1 is rejected."""
        with pytest.raises(ConfigError, match="modulus"):
            load_run_config(q_entries=[[None, 1.0], [1.0, None]])

    def test_unknown_field_rejected(self):
        """Test that typos in the config are errors."""
        with pytest.raises(ConfigError):
            load_run_config(fock_dept=3)

    def test_tail_letters_must_fit_alphabet(self):
        """Test that the reference uses letters 1..d."""
        with pytest.raises(ConfigError, match="tail.ref"):
            load_run_config(d=2, tail={"ref": ";3"})

    def test_contrast_must_be_inequivalent(self):
        """Test that the contrast ref lies in another class."""
        with pytest.raises(ConfigError, match="tail-equivalent"):
            load_run_config(tail={"ref": ";2", "contrast_ref": "1;2"})

    def test_contrast_picked_automatically(self):
        """Test the first constant tail outside the class of ref."""
        config = load_run_config(tail={"ref": ";1"})
        assert config.contrast_tail() == TailSpec((), (2,))

    def test_bad_tail_text(self):
        """Test that malformed tails are config errors."""
        with pytest.raises(ConfigError):
            load_run_config(tail={"ref": "12"})


class TestLoadRunConfig:
    """Test reading config files and applying overrides."""

    def test_file_and_dotted_overrides(self, tmp_path):
        """Test that dotted keys set nested fields and None values are skipped."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"d": 3, "tolerances": {"metric": 1e-9}}))
        config = load_run_config(str(path), **{"tolerances.exact": 1e-11, "mode": None})
        assert config.d == 3
        assert config.tolerances.exact == 1e-11
        assert config.tolerances.metric == 1e-9
        assert config.mode == "all"

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file is a config error."""
        with pytest.raises(ConfigError) as exc_info:
            load_run_config(str(tmp_path / "missing.json"))
        assert exc_info.value.field == "config"

    def test_non_object_file(self, tmp_path):
        """Test that the file must hold a JSON object."""
        path = tmp_path / "run.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            load_run_config(str(path))

    def test_validation_error_field(self):
        """Test that the failing location is reported."""
        with pytest.raises(ConfigError) as exc_info:
            load_run_config(**{"tolerances.exact": -1.0})
        assert exc_info.value.field == "tolerances.exact"


class TestSettings:
    """Test the environment-driven settings."""

    def test_env_prefix(self, monkeypatch):
        """Test QISO_ variables."""
        monkeypatch.setenv("QISO_LOG_FORMAT", "json")
        monkeypatch.setenv("QISO_MAX_WORKERS", "8")
        settings = Settings()
        assert settings.log_format == "json"
        assert settings.max_workers == 8


class TestReport:
    """Test summarizing and writing reports."""

    def _report(self, with_decay: bool = True) -> Report:
        checks = [
            CheckRecord(suite="fock", name="isometry", passed=True, metrics={"max_residual": 0.0}),
            CheckRecord(suite="fock", name="commutation", passed=False, witness={"row": 1}),
        ]
        tables = []
        if with_decay:
            tables.append(
                DecayTable(
                    name="tail_decay_reference",
                    mu=";2",
                    rows=[DecayEntry(label="[1 | +0]", n=1, norm=0.0)],
                )
            )
        return Report(mode="all", checks=checks, decay_tables=tables)

    def test_summarize(self):
        """Test pass and fail counts."""
        report = self._report()
        summary = report.summarize()
        assert (summary.passed, summary.failed, summary.total) == (1, 1, 2)
        assert not report.ok

    def test_write_json_and_decay_csv(self, tmp_path):
        """Test that the JSON report and the decay CSV are written side by side."""
        report = self._report()
        report.summarize()
        written = report.write(str(tmp_path / "out" / "report.json"))
        assert [path.name for path in written] == ["report.json", "report.json.decay.csv"]
        data = json.loads(written[0].read_text())
        assert data["summary"]["failed"] == 1
        assert data["checks"][1]["witness"] == {"row": 1}
        with written[1].open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["table", "mu", "label", "n", "norm"]
        assert rows[1][:4] == ["tail_decay_reference", ";2", "[1 | +0]", "1"]

    def test_write_without_decay(self, tmp_path):
        """Test that no CSV is written without decay tables."""
        written = self._report(with_decay=False).write(str(tmp_path / "report.json"))
        assert len(written) == 1


class TestLogging:
    """Test the structlog setup."""

    def test_logs_go_to_stderr(self, capsys):
        """Test that log lines stay off stdout."""
        try:
            setup_logging(Settings(log_level="INFO", log_format="json"))
            structlog.get_logger("stream_check").info("stream_check_event", value=1)
            captured = capsys.readouterr()
        finally:
            logging.basicConfig(format="%(message)s", stream=sys.__stderr__, force=True)
        assert "stream_check_event" in captured.err
        assert "stream_check_event" not in captured.out
