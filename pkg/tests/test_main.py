"""Tests for the command-line surface, payload schemas and the cross-check workflow."""

import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

import schemas
from errors import InputError
from main import cli, run_cross_check
from rootdatum import general_linear, special_linear_2

SL2 = {"rank": 1, "roots": [[2], [-2]], "simple": [0], "coroots": [[1], [-1]], "gram": [[1]]}
TORUS2 = {"rank": 2, "gram": [[1, 0], [0, 1]]}
NILPOTENT = {"pairs": [{"index": 0, "A": [[2]], "B": [[2]]}]}
A2_CENTRE = {
    "cone": {"dim": 3, "generators": [[1, 0, -1], [0, 1, -1]]},
    "stabilizer": [{"weyl_word": []}, {"weyl_word": [0]}],
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_json(tmp_path):
    """Write a payload to a JSON file and return its path."""
    def write(name, payload):
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return str(path)
    return write


@pytest.fixture
def gl3(write_json):
    return write_json("gl3.json", general_linear(3).to_dict())


@pytest.fixture
def sl2(write_json):
    return write_json("sl2.json", SL2)


def run_json(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


class TestValidate:
    """The validate command."""

    def test_valid_datum(self, runner, sl2, gl3):
        """Valid data report their Weyl group order."""
        assert run_json(runner, ["validate", "--datum", sl2])["weyl_group_order"] == 2
        report = run_json(runner, ["validate", "--datum", gl3])
        assert report["valid"] is True
        assert report["weyl_group_order"] == 6

    def test_not_positive_definite(self, runner, write_json):
        """A negative Gram matrix exits 2 and names the field."""
        path = write_json("bad.json", dict(SL2, gram=[[-1]]))
        result = runner.invoke(cli, ["validate", "--datum", path])
        assert result.exit_code == 2
        assert "gram: not positive definite" in result.output

    def test_datum_round_trip(self):
        """to_dict output loads back through the schema."""
        datum = schemas.load_model(schemas.DatumModel, special_linear_2().to_dict()).to_datum()
        assert datum == special_linear_2()


class TestOptimize:
    """Optimal classes from explicit pairs."""

    def test_nilpotent(self, runner, sl2, write_json):
        """A = B = {2} in rank one gives M^2 = 4."""
        report = run_json(runner, ["optimize", "--datum", sl2, "--problem", write_json("p.json", NILPOTENT)])
        assert report["kind"] == "positive"
        assert report["m_squared"] == "4"
        assert report["witnesses"] == [{"index": 0, "ray": ["1"]}]

    def test_text_format(self, runner, sl2, write_json):
        """Text output is indented key: value lines."""
        result = runner.invoke(
            cli, ["optimize", "--datum", sl2, "--problem", write_json("p.json", NILPOTENT), "--format", "text"]
        )
        assert result.exit_code == 0
        assert 'm_squared: "4"' in result.stdout

    def test_deterministic(self, runner, gl3, write_json):
        """Two runs print identical reports."""
        problem = write_json("p.json", {"pairs": [{"index": 0, "A": [[1, -1, 0]], "B": [[2, 1, -3]]}]})
        args = ["optimize", "--datum", gl3, "--problem", problem]
        assert runner.invoke(cli, args).stdout == runner.invoke(cli, args).stdout

    def test_invalid_json(self, runner, sl2, write_json):
        """Unparseable files exit 2."""
        result = runner.invoke(cli, ["optimize", "--datum", sl2, "--problem", write_json("p.json", "{not json")])
        assert result.exit_code == 2

    def test_floats_rejected(self, runner, sl2, write_json):
        """Coordinates must be integers or p/q strings."""
        problem = write_json("p.json", {"pairs": [{"index": 0, "A": [], "B": [[2.0]]}]})
        result = runner.invoke(cli, ["optimize", "--datum", sl2, "--problem", problem])
        assert result.exit_code == 2

    def test_rational_strings(self, runner, sl2, write_json):
        """B = {1/2} scales M by 1/2."""
        problem = write_json("p.json", {"pairs": [{"index": 0, "B": [["1/2"]]}]})
        assert run_json(runner, ["optimize", "--datum", sl2, "--problem", problem])["m_squared"] == "1/4"


class TestOracle:
    """The brute-force oracle command."""

    def test_quadrant(self, runner, write_json):
        """max lam1/|lam| over lam2 >= 0 is 1."""
        datum = write_json("t.json", TORUS2)
        problem = write_json("p.json", {"pairs": [{"index": 0, "A": [[0, 1]], "B": [[1, 0]]}]})
        report = run_json(runner, ["oracle", "--datum", datum, "--problem", problem, "--radius", "5"])
        assert report["ratio_squared"] == "1"
        assert report["radius"] == 5


class TestCrossCheck:
    """Exact solver against the oracle."""

    def test_agree(self, runner, sl2, write_json):
        """The nilpotent optimum lies inside radius 10."""
        problem = write_json("p.json", NILPOTENT)
        report = run_json(runner, ["cross-check", "--datum", sl2, "--problem", problem, "--radius", "10", "--seed", "7"])
        assert report["verdict"] == "AGREE"
        assert report["functoriality"] is True

    def test_empty_b(self, runner, sl2, write_json):
        """An empty B is +infinity on both sides."""
        problem = write_json("p.json", {"pairs": [{"index": 0, "A": [[2]], "B": []}]})
        report = run_json(runner, ["cross-check", "--datum", sl2, "--problem", problem])
        assert report["verdict"] == "AGREE"

    def test_bound_only(self, runner, gl3, write_json):
        """The ray (2,1,-3) does not fit in radius 1; exit status stays 0."""
        problem = write_json("p.json", {"pairs": [{"index": 0, "B": [[2, 1, -3]]}]})
        report = run_json(runner, ["cross-check", "--datum", gl3, "--problem", problem, "--radius", "1"])
        assert report["verdict"] == "ORACLE_BOUND_ONLY"
        assert report["message"].startswith("oracle bound only")

    def test_instability_task(self):
        """The workflow also runs on instability payloads."""
        payload = {
            "representation": {"weights": [[2], [0], [-2]], "labels": ["e", "h", "f"]},
            "vectors": [{"e": 1}],
        }
        state = run_cross_check(special_linear_2(), payload, task="instability", radius=4)
        assert state["verdict"] == "AGREE"
        assert state["exact"].m_squared == 4

    def test_unknown_task(self):
        """Only optimize and instability can be cross-checked."""
        with pytest.raises(InputError):
            run_cross_check(special_linear_2(), NILPOTENT, task="centre")

    def test_seed_is_cross_check_only(self, runner, sl2, write_json):
        """Deterministic commands have no --seed option."""
        problem = write_json("p.json", NILPOTENT)
        result = runner.invoke(cli, ["optimize", "--datum", sl2, "--problem", problem, "--seed", "7"])
        assert result.exit_code == 2
        assert "No such option" in result.output


class TestInstabilityCommand:
    """Null-cone reports."""

    def test_natural_representation(self, runner, gl3, write_json):
        """(1,1,0) in K^3 has M^2 = 1/2 and is destabilized within radius 2."""
        problem = write_json("p.json", {
            "representation": {"weights": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "labels": ["e1", "e2", "e3"]},
            "vectors": [{"e1": 1, "e2": 1}],
        })
        report = run_json(runner, ["instability", "--datum", gl3, "--problem", problem, "--radius", "2", "--scan"])
        assert report["optimal_class"]["m_squared"] == "1/2"
        assert report["mode"] == "null-cone"
        assert report["hilbert_mumford"][0]["unstable"] is True

    def test_scan_is_opt_in(self, runner, gl3, write_json):
        """Without --scan no lattice search is run."""
        problem = write_json("p.json", {
            "representation": {"weights": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "labels": ["e1", "e2", "e3"]},
            "vectors": [{"e1": 1}],
        })
        assert run_json(runner, ["instability", "--datum", gl3, "--problem", problem])["hilbert_mumford"] == []

    def test_scan_over_budget(self, runner, gl3, write_json):
        """A ball larger than the budget is reported per vector; the run still succeeds."""
        problem = write_json("p.json", {
            "representation": {"weights": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "labels": ["e1", "e2", "e3"]},
            "vectors": [{"e1": 1}],
        })
        args = ["instability", "--datum", gl3, "--problem", problem, "--scan", "--radius", "5", "--budget", "10"]
        scan = run_json(runner, args)["hilbert_mumford"][0]
        assert scan["unstable"] is None
        assert "exceeds the budget" in scan["error"]

    def test_rank_seven(self, runner, write_json):
        """e1 in the natural representation of GL_7: M^2 = 1 at the default radius."""
        datum = write_json("gl7.json", general_linear(7).to_dict())
        problem = write_json("p.json", {
            "representation": {
                "weights": [[1 if i == j else 0 for i in range(7)] for j in range(7)],
                "labels": [f"e{j + 1}" for j in range(7)],
            },
            "vectors": [{"e1": 1}],
        })
        report = run_json(runner, ["instability", "--datum", datum, "--problem", problem])
        assert report["optimal_class"]["m_squared"] == "1"
        assert report["optimal_class"]["witnesses"][0]["ray"] == ["1", "0", "0", "0", "0", "0", "0"]

    def test_unknown_label(self, runner, gl3, write_json):
        """Vectors may only name known coordinates."""
        problem = write_json("p.json", {
            "representation": {"weights": [[1, 0, 0]], "labels": ["e1"]},
            "vectors": [{"e7": 1}],
        })
        result = runner.invoke(cli, ["instability", "--datum", gl3, "--problem", problem])
        assert result.exit_code == 2


class TestCentreCommands:
    """centre, verify-centre and parabolic."""

    def test_centre(self, runner, gl3, write_json):
        """The (1 2)-stable cone has centre (1,1,-2)."""
        report = run_json(runner, ["centre", "--datum", gl3, "--problem", write_json("c.json", A2_CENTRE)])
        assert report["centre"] == [1, 1, -2]
        assert report["m_squared"] == "2/3"

    def test_centre_of_full_space(self, runner, gl3, write_json):
        """A completely reducible subset has no guaranteed centre."""
        problem = write_json("c.json", {"cone": {"dim": 3, "inequalities": []}})
        result = runner.invoke(cli, ["centre", "--datum", gl3, "--problem", problem])
        assert result.exit_code == 2
        assert "completely reducible" in result.output

    def test_cone_rank_mismatch(self, runner, gl3, write_json):
        """The cone must live in the datum's lattice."""
        problem = write_json("c.json", {"cone": {"dim": 2, "generators": [[1, 0]]}})
        result = runner.invoke(cli, ["centre", "--datum", gl3, "--problem", problem])
        assert result.exit_code == 2

    def test_verify_centre(self, runner, gl3, write_json):
        """A ray is its own centre."""
        problem = write_json("v.json", {"cone": {"dim": 3, "generators": [[1, 0, -1]]}, "centre": [1, 0, -1]})
        report = run_json(runner, ["verify-centre", "--datum", gl3, "--problem", problem])
        assert report["passed"] is True
        assert report["mu"] == "1"

    def test_parabolic(self, runner, gl3, write_json):
        """(1,1,-2) has unipotent radical roots 1 and 2."""
        problem = write_json("l.json", {"lambda": [1, 1, -2]})
        report = run_json(runner, ["parabolic", "--datum", gl3, "--problem", problem])
        assert report["parabolic"]["ru_roots"] == [1, 2]
        assert report["parabolic"]["proper"] is True


class TestSchemas:
    """Payload validation."""

    def test_error_names_field(self):
        """The first pydantic error becomes an InputError with a dotted field."""
        with pytest.raises(InputError) as exc:
            schemas.load_model(schemas.ProblemModel, {"pairs": [{"index": 0, "B": [[1.5]]}]})
        assert exc.value.field.startswith("pairs.0.B")

    def test_extra_keys_forbidden(self):
        """Unknown keys are errors."""
        with pytest.raises(InputError):
            schemas.load_model(schemas.DatumModel, dict(SL2, colour="red"))

    def test_parse_vector(self):
        """Integers and p/q strings become Fractions."""
        assert schemas.parse_vector([1, "-2/4", "3"]) == (1, Fraction(-1, 2), 3)

    def test_bad_rational_text(self):
        """'1.5' is not a rational literal."""
        with pytest.raises(InputError):
            schemas.load_model(schemas.PairModel, {"index": 0, "B": [["1.5"]]})
