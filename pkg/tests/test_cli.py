import json
from importlib import resources

import jsonschema
import pytest

from gridsight.cli import COMMANDS, main


def schema(name):
    return json.loads(resources.files("gridsight").joinpath(f"schemas/{name}.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    data = json.loads(out)
    jsonschema.validate(data, schema(argv[0]))
    return data


class TestCommands:
    def test_hp(self, capsys):
        data = run_json(capsys, "hp", "--p", "11", "--d", "3", "--t", "10,10")
        assert data["hp"] == 6 and data["hp_star"] == 1

    def test_width(self, capsys):
        data = run_json(capsys, "width", "--p", "5", "--d", "3", "--t", "2,3")
        assert data["width"] == 4 == len(data["antichain"]) == len(data["cover"])

    def test_width_signs(self, capsys):
        data = run_json(capsys, "width", "--p", "11", "--t", "1,1", "--signs", "1,-1")
        assert data["signs"] == [1, -1] and data["width"] > 1

    def test_antichain(self, capsys):
        data = run_json(capsys, "antichain", "--p", "11", "--t", "1,1")
        assert data["size"] == len(data["heights"]) == len(data["points"])

    def test_lll(self, capsys):
        data = run_json(capsys, "lll", "--p", "11", "--d", "4", "--t", "3,5,7")
        assert data["covolume"] == 11 ** 3 and data["size_reduced"] and data["lovasz"]

    @pytest.mark.parametrize("kind", ["toy", "primitive"])
    def test_cover(self, capsys, kind):
        data = run_json(capsys, "cover", "--p", "11", "--t", "3,4", "--kind", kind)
        assert data["width"] <= data["cover_size"] <= data["bound"]

    def test_fourier(self, capsys):
        data = run_json(capsys, "fourier-check", "--max-p", "7")
        assert data["passed"]

    def test_simulate_scene(self, capsys, tmp_path):
        scene = tmp_path / "scene.json"
        scene.write_text(json.dumps({"n": 4, "d": 2, "cubes": [[1, 0], [2, 0], [1, 1]]}))
        data = run_json(capsys, "simulate", str(scene), "--rays", "32")
        assert data["visible_count"] <= data["exact_visible_count"] == 3

    def test_simulate_construction(self, capsys):
        data = run_json(capsys, "simulate", "--p", "11", "--theta", "45")
        assert data["visible_count"] >= 13

    def test_construct(self, capsys, tmp_path):
        out = tmp_path / "c.json"
        assert main(["construct", "--p", "11", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        jsonschema.validate(data, schema("construct"))
        assert data["predicted_count"] == 13

    def test_scaling_csv_and_svg(self, capsys, tmp_path):
        out = tmp_path / "scaling"
        assert main(["scaling", "--primes", "11,13,17", "--format", "csv", "--out", str(out)]) == 0
        assert (tmp_path / "scaling.csv").read_text().startswith("p,families")
        assert (tmp_path / "scaling.svg").read_text().startswith("<svg")

    def test_scaling_json(self, capsys):
        data = run_json(capsys, "scaling", "--primes", "11,13,17")
        assert data["slope"] is not None

    def test_verify_all(self, capsys):
        code, out, err = run(capsys, "verify-all", "--max-p", "13")
        data = json.loads(out)
        jsonschema.validate(data, schema("verify-all"))
        failing = sorted(r["name"] for r in data["rows"] if not r["passed"])
        # the literal half split and the p=13 interior-point gap fail by construction
        assert failing == ["half-split-equal", "lattice-antichain-size"]
        assert code == 1
        assert "FAIL  half-split-equal" in err


class TestContract:
    def test_every_command_has_a_schema(self):
        for name in COMMANDS:
            jsonschema.Draft202012Validator.check_schema(schema(name))

    def test_deterministic(self, capsys):
        a = run(capsys, "construct", "--p", "13")[1]
        b = run(capsys, "construct", "--p", "13")[1]
        assert a == b

    def test_config_file_and_flag_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"p": 11, "t": [3, 7]}))
        data = run_json(capsys, "hp", "--config", str(cfg))
        assert data["t"] == [3, 7]
        data = run_json(capsys, "hp", "--config", str(cfg), "--t", "10,10")
        assert data["t"] == [10, 10]

    def test_bad_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert run(capsys, "hp", "--config", str(cfg))[0] == 2

    @pytest.mark.parametrize("argv", [
        ["nope"],
        ["hp", "--p", "11", "--unknown", "1"],
        ["hp", "--p", "12", "--t", "1,1"],
        ["hp", "--p", "11", "--t", "1,1,1"],
        ["hp", "--p", "11"],
        ["cover", "--p", "11", "--t", "1,4", "--kind", "primitive"],
        ["hp", "--p", "11", "--t", "1,1", "--format", "csv"],
        ["width", "--p", "11", "--t", "1,1", "--signs", "1,0"],
    ])
    def test_usage_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_thread_env(self, capsys, monkeypatch):
        monkeypatch.setenv("GRIDSIGHT_THREADS", "0")
        assert run(capsys, "hp", "--p", "11", "--t", "1,1")[0] == 2
        monkeypatch.setenv("GRIDSIGHT_THREADS", "4")
        assert run(capsys, "hp", "--p", "11", "--t", "1,1")[0] == 0

    def test_assertion_failure_exit_code(self, capsys, monkeypatch):
        import gridsight.cli as cli

        def boom(cfg):
            raise AssertionError("forced")
        monkeypatch.setitem(cli.HANDLERS, "hp", boom)
        code, _, err = run(capsys, "hp", "--p", "11", "--t", "1,1")
        assert code == 1 and "assertion failed" in err
