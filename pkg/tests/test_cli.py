import json
import math

import pytest

from ribbontau.cli import EXIT_CONFIG_ERROR, EXIT_OK, main


@pytest.fixture
def torus_graph_file(tmp_path):
    path = tmp_path / "torus.json"
    path.write_text(json.dumps({"n": 2, "vertices": [[1, 2, -1, -2]]}))
    return str(path)


@pytest.fixture
def loop_model_file(tmp_path):
    graph = {"n": 1, "vertices": [[1, -1]]}
    corners = {
        "N": 2,
        "corners": {
            "1": [[[0.4, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.15, 0.0]]],
            "-1": [[[0.35, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.2, 0.0]]],
        },
    }
    model = {"graph": graph, "corners": corners, "group": "u", "couplings": ["p_infinity"]}
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model))
    return str(path)


class TestGraphInfo:
    def test_torus(self, torus_graph_file, capsys):
        assert main(["graph", "info", "--graph", torus_graph_file]) == EXIT_OK
        out = capsys.readouterr().out
        assert "V = 1, n = 2, F = 1, chi = 0" in out

    def test_json_mode(self, torus_graph_file, capsys):
        assert main(["graph", "info", "--graph", torus_graph_file, "--json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["V"] == 1 and payload["F"] == 1 and payload["chi"] == 0

    def test_missing_file(self, capsys):
        assert main(["graph", "info", "--graph", "/nonexistent.json"]) == EXIT_CONFIG_ERROR
        assert "error:" in capsys.readouterr().err


class TestSeries:
    def test_hciz_scalar(self, capsys):
        code = main(
            ["series", "hciz", "--N", "1", "--a", "0.5", "--b", "0.5", "--order", "20", "--json"]
        )
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        value = complex(*payload["value"])
        assert abs(value - math.exp(0.25)) < 1e-10

    def test_z_series_model(self, loop_model_file, capsys):
        assert main(["series", "z", "--model", loop_model_file, "--order", "8", "--json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert "last_shell_magnitude" in payload
        assert payload["config"]["order"] == 8

    def test_z_series_from_graph_and_corners(self, tmp_path, capsys):
        (tmp_path / "g.json").write_text(json.dumps({"n": 1, "vertices": [[1, -1]]}))
        corners = {
            "N": 2,
            "corners": {
                "1": [[[0.4, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.15, 0.0]]],
                "-1": [[[0.35, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.2, 0.0]]],
            },
        }
        (tmp_path / "c.json").write_text(json.dumps(corners))
        code = main(["series", "z", "--graph", str(tmp_path / "g.json"),
                     "--corners", str(tmp_path / "c.json"), "--order", "8", "--json"])
        assert code == EXIT_OK
        direct = json.loads(capsys.readouterr().out)
        # same model expressed through a model file gives the same value
        model = {"graph": {"n": 1, "vertices": [[1, -1]]}, "corners": corners,
                 "group": "u", "couplings": ["p_infinity"]}
        (tmp_path / "m.json").write_text(json.dumps(model))
        assert main(["series", "z", "--model", str(tmp_path / "m.json"),
                     "--order", "8", "--json"]) == EXIT_OK
        via_model = json.loads(capsys.readouterr().out)
        assert direct["value"] == via_model["value"]

    def test_bgw_blocks(self, capsys):
        code = main(
            ["series", "bgw", "--N", "1", "--a", "0.5", "--b", "0.4", "--beta", "0.3",
             "--group", "su", "--order", "12", "--qmax", "4", "--json"]
        )
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert "0" in payload["q_blocks"] and "1" in payload["q_blocks"]


class TestVerify:
    def test_su4_degenerate_pass(self, capsys):
        code = main(
            ["verify", "su-4", "--N", "2", "--lam", "1,1", "--a", "0.7,0.4", "--b", "0.5,0.3",
             "--samples", "1000", "--seed", "0", "--json"]
        )
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["pass"] is True
        assert payload["z"] is None
        assert payload["config"]["samples"] == 1000

    def test_byte_identical_json(self, capsys):
        argv = ["verify", "orth-2a", "--N", "2", "--lam", "1", "--mu", "1",
                "--a", "0.9,0.5", "--b", "0.8,0.4", "--samples", "2000", "--seed", "5", "--json"]
        assert main(argv) == EXIT_OK
        first = capsys.readouterr().out
        assert main(argv) == EXIT_OK
        second = capsys.readouterr().out
        assert first == second

    def test_missing_params(self, capsys):
        assert main(["verify", "orth-2a", "--N", "2"]) == EXIT_CONFIG_ERROR


class TestScopeErrors:
    def test_su_multi_vertex_model(self, tmp_path, capsys):
        graph = {"n": 1, "vertices": [[1], [-1]]}
        corners = {
            "N": 1,
            "corners": {"1": [[[0.5, 0.0]]], "-1": [[[0.4, 0.0]]]},
        }
        model = {"graph": graph, "corners": corners, "group": "su",
                 "couplings": ["p_infinity", "p_infinity"]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(model))
        code = main(["verify", "z-integral", "--model", str(path), "--samples", "1000"])
        assert code == EXIT_CONFIG_ERROR
        assert "single" in capsys.readouterr().err


class TestKpCheck:
    def test_exponential_tau(self, tmp_path, capsys):
        spec = {
            "couplings": [0.0] * 10,
            "spectrum": [0.3],
            "weight": {"num_shifts": [], "den_shifts": []},
            "max_weight": 10,
        }
        path = tmp_path / "tau.json"
        path.write_text(json.dumps(spec))
        code = main(["kp-check", "--tau", str(path), "--base", "0.03,0.04,0.03",
                     "--step", "0.02", "--json"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["pass"] is True
        assert payload["residual_abs"] <= 1e-8
