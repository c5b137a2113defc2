"""Tests for task dispatch (lp_workbench.pipeline) and the CLI exit codes."""

import json

import pytest

from lp_workbench import main as cli
from lp_workbench.pipeline import run, run_task
from lp_workbench.specfile import parse_spec_text

PAIR2 = """\
[groupoid.pair2]
kind = "pair"
points = 2
"""


def one_task(body: str, objects: str = PAIR2):
    return parse_spec_text(objects + "\n[task.1]\n" + body).tasks[0]


class TestRunTask:
    def test_weyl_recovers_pair_groupoid(self):
        task = one_task('command = "weyl"\ngroupoid = "pair2"\np = 3\nexpect_arrows = 4\n')
        result = run_task(task, seed=1)
        assert result.status == "pass"
        (entry,) = result.data["weyl"]
        assert entry["weyl_arrows"] == 4
        assert entry["principal"] is True
        assert len(entry["isomorphism"]) == 4
        assert set(entry["isomorphism"].values()) == {"(0,0)", "(0,1)", "(1,0)", "(1,1)"}

    def test_weyl_random_pairs_are_rechecked(self):
        body = 'command = "weyl"\ngroupoid = "pair2"\np = 3\nsoundness_samples = 60\n'
        result = run_task(one_task(body), seed=2)
        assert result.status == "pass"
        pairs = result.data["weyl"][0]["random_pairs"]
        assert pairs["accepted"] + pairs["rejected"] == 60
        assert pairs["bisections_recovered"] == pairs["accepted"]
        assert pairs["rejections_rechecked"] == pairs["rejected"]
        assert sum(pairs["rejected_by_condition"].values()) == pairs["rejected"]

    def test_norms_check_multipliers(self):
        result = run_task(one_task('command = "norms"\ngroupoid = "pair2"\nsamples = 5\np = 3\n'))
        assert result.status in ("pass", "inconclusive-interval")
        (entry,) = result.data["norms"]
        assert entry["multiplier_violations"] == 0

    def test_crossed_samples_the_expectation(self):
        objects = '[action.rot3]\nkind = "rotation"\nn = 3\n'
        body = 'command = "crossed"\naction = "rot3"\np = 3\nsamples = 2\n'
        result = run_task(one_task(body, objects), seed=4)
        assert result.status == "pass"
        (entry,) = result.data["crossed"]
        assert entry["expectation_samples"] == 2

    def test_confluence_for_l4(self):
        body = 'command = "leavitt"\ncheck = "confluence"\nn = 4\nsamples = 25\n'
        result = run_task(one_task(body), seed=5)
        assert result.status == "pass"
        assert result.data["n"] == 4
        assert result.data["degree"] == 3
        assert result.data["mismatches"] == 0

    def test_weyl_at_p_two_fails(self):
        task = one_task('command = "weyl"\ngroupoid = "pair2"\np = 2\n')
        result = run_task(task, seed=1)
        assert result.status == "fail"
        assert "p != 2" in result.error

    def test_guard_is_inconclusive(self):
        objects = '[groupoid.pair3]\nkind = "pair"\npoints = 3\n'
        body = 'command = "validate"\ngroupoid = "pair3"\ntolerances = { max_bisections = 5 }\n'
        result = run_task(one_task(body, objects), seed=1)
        assert result.status == "inconclusive-guard"
        assert "exceeds guard 5" in result.error

    def test_validate_reports_objects(self):
        result = run_task(one_task('command = "validate"\ngroupoid = "pair2"\nsamples = 2\n'))
        assert result.status == "pass"
        (entry,) = result.data["objects"]
        assert entry["arrows"] == 4
        assert entry["bisections"] == 7
        assert entry["identity_samples"] == 2

    def test_core_of_matrix_algebra(self):
        objects = '[algebra.m2]\nkind = "matrix"\nn = 2\n'
        body = 'command = "core"\nalgebra = "m2"\np = [1, 3]\nexpect = "diagonal"\n'
        result = run_task(one_task(body, objects))
        assert result.status == "pass"
        assert [c["core_dimension"] for c in result.data["cores"]] == [2, 2]

    @pytest.mark.parametrize("check", ["covariant", "absorption"])
    def test_leavitt_checks_pass(self, check):
        result = run_task(one_task(f'command = "leavitt"\ncheck = "{check}"\n'))
        assert result.status == "pass"

    @pytest.mark.parametrize("check", ["covariant", "absorption"])
    def test_mutated_leavitt_fails(self, check):
        result = run_task(one_task(f'command = "leavitt"\ncheck = "{check}"\nmutate = true\n'))
        assert result.status == "fail"
        assert result.data["mutated"] is True

    def test_lamperti(self):
        result = run_task(one_task('command = "lamperti"\nn = 3\nsamples = 10\n'))
        assert result.status == "pass"
        (entry,) = result.data["lamperti"]
        assert entry["recovered"] == 10
        assert entry["rejected"] == entry["non_lamperti"] == 1

    def test_seeded_runs_repeat(self):
        task = one_task('command = "norms"\ngroupoid = "pair2"\nsamples = 5\np = 3\n')
        first, second = run_task(task, seed=9), run_task(task, seed=9)
        assert first.data == second.data


class TestRun:
    def test_results_keep_spec_order(self):
        text = PAIR2 + "".join(
            f'\n[task.{k}]\ncommand = "weyl"\ngroupoid = "pair2"\np = {p}\n'
            for k, p in ((1, 3), (2, 2), (3, 1))
        )
        report = run(parse_spec_text(text), seed=3, workers=3)
        assert [r.key for r in report.results] == ["1", "2", "3"]
        assert [r.status for r in report.results] == ["pass", "fail", "pass"]
        assert report.failed
        assert report.summary()["fail"] == 1


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "LOG_DIR", tmp_path / "logs")
    return tmp_path


class TestMain:
    def test_empty_spec_exits_zero(self, workdir):
        spec = workdir / "empty.toml"
        spec.write_text("", encoding="utf-8")
        out = workdir / "out"
        assert cli.main([str(spec), "--out", str(out), "--format", "json"]) == cli.EXIT_OK
        data = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert data["tasks"] == []

    def test_failing_task_exits_one(self, workdir):
        spec = workdir / "mutated.toml"
        spec.write_text(
            '[task.1]\ncommand = "leavitt"\ncheck = "absorption"\nmutate = true\n',
            encoding="utf-8",
        )
        out = workdir / "out"
        assert cli.main([str(spec), "--out", str(out), "--format", "text"]) == cli.EXIT_FAILED
        assert "FAIL" in (out / "report.txt").read_text(encoding="utf-8")

    def test_bad_spec_exits_two(self, workdir):
        spec = workdir / "broken.toml"
        spec.write_text('[task.1]\ncommand = "nothing"\n', encoding="utf-8")
        assert cli.main([str(spec), "--out", str(workdir / "out")]) == cli.EXIT_USAGE

    def test_missing_spec_exits_two(self, workdir):
        assert cli.main([str(workdir / "absent.toml")]) == cli.EXIT_USAGE

    def test_unknown_tolerance_is_usage_error(self, workdir):
        with pytest.raises(SystemExit) as info:
            cli.main(["--tolerance", "speed=3"])
        assert info.value.code == 2

    def test_negative_seed_is_usage_error(self, workdir):
        with pytest.raises(SystemExit) as info:
            cli.main(["--seed", "-1"])
        assert info.value.code == 2
