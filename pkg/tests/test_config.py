import os

import pytest
from pydantic import ValidationError

import config
from config import RunConfig, load_config, resolve_run_config, thread_limit


class TestLoadConfig:
    def test_kebab_keys_become_field_names(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("a-step: 0.05\nt-grid: [0.5, 0.1]\nmap-spec:\n  name: tilted\nseed: 3\n")
        values = load_config(str(path))
        assert values == {"a_step": 0.05, "t_grid": [0.5, 0.1], "map_spec": {"name": "tilted"}, "seed": 3}

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(str(tmp_path / "absent.yaml"))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("")
        with pytest.raises(ValueError):
            load_config(str(path))

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("- seed\n- 3\n")
        with pytest.raises(ValueError):
            load_config(str(path))

    def test_example_file_resolves(self):
        example = os.path.join(os.path.dirname(os.path.dirname(__file__)), "config.example.yaml")
        run_config = resolve_run_config("moduli", load_config(example))
        assert run_config.seed == 0
        assert run_config.a_step == 0.01
        assert run_config.name == "all"


class TestResolveRunConfig:
    def test_defaults(self):
        run_config = resolve_run_config("ar-bound")
        assert run_config.seed == 0
        assert (run_config.delta, run_config.gamma) == (0.5, 0.5)

    def test_overrides_win_and_none_is_ignored(self):
        run_config = resolve_run_config("iterate", {"gamma": 0.25, "seed": 5}, {"gamma": 0.75, "seed": None})
        assert run_config.gamma == 0.75
        assert run_config.seed == 5

    def test_lambda_spelling(self):
        run_config = resolve_run_config("check-condition", {"lambda": 0.3})
        assert run_config.lam == 0.3
        assert run_config.dump()["lambda"] == 0.3

    @pytest.mark.parametrize(
        "values",
        [{"gamma": 1.0}, {"lambda": 0.0}, {"p": 0.5}, {"resolution": 4}, {"unknown_key": 1}, {"condition": "D"}],
    )
    def test_schema_violations(self, values):
        with pytest.raises(ValidationError):
            resolve_run_config("suite", values)

    def test_unknown_command(self):
        with pytest.raises(ValidationError):
            resolve_run_config("serve")


class TestRunConfig:
    def test_sup_norm(self):
        run_config = RunConfig(command="moduli", p="sup", dim=3)
        assert run_config.norm_kind.kind == "sup_norm"
        assert run_config.space.dimension == 3

    def test_a_grid(self):
        assert RunConfig(command="moduli", a_step=0.5).a_grid() == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]

    @pytest.mark.parametrize("dimension, step", [(1, 0.005), (2, 0.1), (3, 0.25), (5, config.COARSEST_GRID_STEP)])
    def test_grid_step_defaults_by_dimension(self, dimension, step):
        assert RunConfig(command="check-condition").grid_step(dimension) == step

    def test_explicit_grid_step_wins(self):
        assert RunConfig(command="iterate", step=0.05).grid_step(2) == 0.05

    def test_inline_map_wins(self):
        spec = {
            "name": "tilted",
            "body": {
                "kind": "box",
                "space": {"kind": "p_norm", "p": 2.0, "dimension": 1},
                "lower": [0.0],
                "upper": [1.0],
            },
            "rule": {"kind": "affine", "matrix": [[0.5]], "offset": [0.25]},
        }
        run_config = resolve_run_config("iterate", {"map": "half", "map_spec": spec})
        assert run_config.mapping().name == "tilted"

    def test_frozen(self):
        run_config = RunConfig(command="ledger")
        with pytest.raises(ValidationError):
            run_config.seed = 4


class TestThreadLimit:
    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv("FPT_LAB_THREADS", "3")
        assert thread_limit() == 3

    def test_invalid_value_falls_back(self, monkeypatch):
        monkeypatch.setenv("FPT_LAB_THREADS", "many")
        assert thread_limit() == (os.cpu_count() or 1)

    def test_nonpositive_value(self, monkeypatch):
        monkeypatch.setenv("FPT_LAB_THREADS", "0")
        assert thread_limit() == 1

    def test_commands_match_schema(self):
        for command in config.COMMANDS:
            assert RunConfig(command=command).command == command
