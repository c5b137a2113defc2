"""Unit tests for lp_workbench.utils: no filesystem needed beyond tmp_path."""

import re

from lp_workbench.utils import (
    chunk_lines,
    close_log_file,
    fmt_float,
    fmt_label,
    log,
    plural,
    set_log_file,
    stopwatch,
)


class TestFmtFloat:
    def test_twelve_significant_digits(self):
        assert fmt_float(1 / 3) == "0.333333333333"

    def test_integers_stay_short(self):
        assert fmt_float(2.0) == "2"

    def test_non_finite(self):
        assert fmt_float(float("nan")) == "nan"
        assert fmt_float(float("inf")) == "inf"
        assert fmt_float(float("-inf")) == "-inf"


class TestFmtLabel:
    def test_tuple(self):
        assert fmt_label((0, 1)) == "(0,1)"

    def test_nested(self):
        assert fmt_label(((0, 1), "a")) == "((0,1),a)"

    def test_scalar(self):
        assert fmt_label("x") == "x"


class TestPlural:
    def test_singular(self):
        assert plural(1, "task") == "1 task"

    def test_plural(self):
        assert plural(0, "task") == "0 tasks"
        assert plural(3, "task") == "3 tasks"


class TestChunkLines:
    def test_packs_items(self):
        assert chunk_lines(["ab", "cd", "ef"], width=6) == ["ab, cd", "ef"]

    def test_long_item_gets_own_line(self):
        assert chunk_lines(["abcdefgh", "x"], width=4) == ["abcdefgh", "x"]

    def test_empty(self):
        assert chunk_lines([]) == []


class TestStopwatch:
    def test_records_elapsed(self):
        with stopwatch() as elapsed:
            sum(range(1000))
        assert elapsed[0] >= 0.0


class TestLog:
    def test_writes_timestamped_line_to_file(self, tmp_path, capsys):
        path = tmp_path / "run.log"
        set_log_file(open(path, "w", encoding="utf-8"))
        try:
            log("hello")
        finally:
            close_log_file()
        assert re.fullmatch(r"\[\d\d:\d\d:\d\d\] hello\n", path.read_text(encoding="utf-8"))
        assert "hello" in capsys.readouterr().out

    def test_close_is_idempotent(self):
        close_log_file()
        close_log_file()
