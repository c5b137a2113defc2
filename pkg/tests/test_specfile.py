"""Unit tests for lp_workbench.specfile: parsing, references and error locations."""

import pytest

from lp_workbench.catalog import cyclic_group
from lp_workbench.config import CATALOG_SPEC
from lp_workbench.errors import SpecFileError
from lp_workbench.exact import ExactMatrix
from lp_workbench.specfile import matrices_by_element, parse_spec, parse_spec_text

MINIMAL = """\
[groupoid.g]
kind = "pair"
points = 2

[task.1]
command = "weyl"
groupoid = "g"
p = 3
"""


class TestMinimalSpec:
    def test_parses(self):
        spec = parse_spec_text(MINIMAL)
        assert list(spec.groupoids) == ["g"]
        assert len(spec.groupoids["g"]) == 4
        (task,) = spec.tasks
        assert task.key == "1"
        assert task.command == "weyl"
        assert task.line == 5
        assert [p.p for p in task.p_values] == [3.0]
        assert task.params["groupoids"] == [spec.groupoids["g"]]

    def test_p_list(self):
        spec = parse_spec_text(MINIMAL.replace("p = 3", 'p = [1, "3/2", 3]'))
        assert [p.p for p in spec.tasks[0].p_values] == [1.0, 1.5, 3.0]

    def test_seed_and_tolerances(self):
        text = MINIMAL + "seed = 7\ntolerances = { power_tol = 1e-8 }\n"
        task = parse_spec_text(text).tasks[0]
        assert task.seed == 7
        assert task.tolerances.power_tol == pytest.approx(1e-8)

    def test_empty_spec(self):
        spec = parse_spec_text("")
        assert spec.tasks == []


class TestErrors:
    def test_undefined_reference_has_line(self):
        with pytest.raises(SpecFileError, match="undefined groupoid 'h'") as info:
            parse_spec_text(MINIMAL.replace('groupoid = "g"', 'groupoid = "h"'))
        assert info.value.line == 7
        assert info.value.column == 1

    def test_self_reference(self):
        text = '[action.a]\nkind = "relabel"\naction = "a"\nlabels = [0]\n'
        with pytest.raises(SpecFileError, match="refers to itself") as info:
            parse_spec_text(text)
        assert info.value.line == 1

    def test_unknown_command(self):
        with pytest.raises(SpecFileError, match="unknown command 'frobnicate'"):
            parse_spec_text(MINIMAL.replace('"weyl"', '"frobnicate"'))

    def test_unknown_key(self):
        with pytest.raises(SpecFileError, match="key not understood by 'weyl'") as info:
            parse_spec_text(MINIMAL + "depth = 3\n")
        assert info.value.line == 9

    def test_negative_seed(self):
        with pytest.raises(SpecFileError, match="seed must be nonnegative"):
            parse_spec_text(MINIMAL + "seed = -1\n")

    def test_unknown_tolerance(self):
        with pytest.raises(SpecFileError, match="unknown tolerance"):
            parse_spec_text(MINIMAL + "tolerances = { speed = 1 }\n")

    def test_missing_requirement(self):
        text = '[task.1]\ncommand = "weyl"\np = 3\n'
        with pytest.raises(SpecFileError, match="'weyl' needs one of: groupoids"):
            parse_spec_text(text)

    def test_bad_leavitt_check(self):
        text = '[task.1]\ncommand = "leavitt"\ncheck = "everything"\n'
        with pytest.raises(SpecFileError, match="check must be one of"):
            parse_spec_text(text)

    def test_negative_count(self):
        text = '[task.1]\ncommand = "lamperti"\nn = -2\n'
        with pytest.raises(SpecFileError, match="nonnegative integer"):
            parse_spec_text(text)

    def test_unknown_section(self):
        with pytest.raises(SpecFileError, match="unknown section") as info:
            parse_spec_text("[widgets.a]\nx = 1\n")
        assert info.value.line == 1

    def test_syntax_error_has_line(self):
        with pytest.raises(SpecFileError, match="syntax error") as info:
            parse_spec_text('[group.a]\nkind named\n')
        assert info.value.line == 2

    def test_unknown_kind(self):
        with pytest.raises(SpecFileError, match="unknown kind 'torus'"):
            parse_spec_text('[groupoid.g]\nkind = "torus"\n')

    def test_both_singular_and_plural(self):
        text = MINIMAL + 'groupoids = ["g"]\n'
        with pytest.raises(SpecFileError, match="either 'groupoid' or 'groupoids'"):
            parse_spec_text(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecFileError, match="cannot read"):
            parse_spec(tmp_path / "absent.toml")


class TestObjects:
    def test_action_takes_section_name(self):
        text = '[action.spin]\nkind = "rotation"\nn = 3\n'
        spec = parse_spec_text(text)
        assert spec.actions["spin"].name == "spin"

    def test_named_group_fallback(self):
        text = '[action.t]\nkind = "translation"\ngroup = "Z2"\n'
        spec = parse_spec_text(text)
        assert spec.groups["Z2"].order == 2

    def test_maps_action_needs_full_table(self):
        text = (
            '[action.m]\nkind = "maps"\ngroup = "Z2"\npoints = 2\n'
            "images = [[0, 1]]\n"
        )
        with pytest.raises(SpecFileError, match="need 2 rows"):
            parse_spec_text(text)

    def test_basis_algebra(self):
        text = '[algebra.d]\nkind = "basis"\nmatrices = [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]\n'
        spec = parse_spec_text(text)
        assert spec.algebras["d"].dimension == 2

    def test_matrices_by_element_count(self):
        Z2 = cyclic_group(2)
        with pytest.raises(SpecFileError, match="need 2 implementers"):
            matrices_by_element(Z2, [ExactMatrix.identity(2)])
        pairs = matrices_by_element(Z2, [ExactMatrix.identity(2)] * 2)
        assert set(pairs) == set(Z2.elements)


class TestCatalog:
    def test_catalog_parses(self):
        spec = parse_spec(CATALOG_SPEC)
        assert len(spec.tasks) == 26
        assert {t.command for t in spec.tasks} <= {
            "validate", "core", "weyl", "coe", "norms", "crossed", "leavitt", "hermitian",
            "lamperti",
        }
        assert all(t.line is not None for t in spec.tasks)
