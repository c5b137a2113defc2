"""Unit tests for lp_workbench.report: rendering and the JSON round trip."""

import json

import pytest

from lp_workbench.report import Report, TaskResult, emit_report, load_report, render_text


@pytest.fixture
def report():
    return Report(
        "catalog.toml",
        7,
        [
            TaskResult("1", "weyl", "pass", "claim one", {"weyl": [{"p": "3", "principal": True}]},
                       elapsed=0.25),
            TaskResult("2", "leavitt", "fail", "claim two", {}, error="rejected: bad", elapsed=1.5),
        ],
    )


class TestReport:
    def test_summary_counts_every_status(self, report):
        assert report.summary() == {
            "pass": 1, "fail": 1, "inconclusive-interval": 0, "inconclusive-guard": 0,
        }
        assert report.failed

    def test_json_has_no_timings(self, report):
        assert "elapsed" not in json.dumps(report.to_dict())
        assert "error" not in report.to_dict()["tasks"][0]


class TestRenderText:
    def test_layout(self, report):
        text = render_text(report)
        assert "[task.1] weyl: PASS" in text
        assert "[task.2] leavitt: FAIL" in text
        assert "  error: rejected: bad" in text
        assert "principal: yes" in text
        assert "summary: pass 1, fail 1" in text


class TestEmit:
    def test_round_trip(self, report, tmp_path):
        written = emit_report(report, tmp_path, "both")
        assert {p.name for p in written} == {"report.txt", "report.json", "timings.json"}
        back = load_report(tmp_path / "report.json")
        assert back.to_dict() == report.to_dict()
        assert [r.elapsed for r in back.results] == [0.25, 1.5]

    def test_json_is_stable(self, report, tmp_path):
        emit_report(report, tmp_path / "a", "json")
        emit_report(report, tmp_path / "b", "json")
        first = (tmp_path / "a" / "report.json").read_bytes()
        assert first == (tmp_path / "b" / "report.json").read_bytes()

    def test_unknown_format(self, report, tmp_path):
        with pytest.raises(ValueError):
            emit_report(report, tmp_path, "xml")
