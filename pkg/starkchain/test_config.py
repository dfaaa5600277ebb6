"""
Tests for settings, run-file parsing and the pydantic run models.
"""

import pytest
from pydantic import ValidationError

from starkchain.core.config import Settings, load_run_file
from starkchain.core.errors import ConfigError
from starkchain.models import ChainParams, Command, DynamicsSpec, FitSpec, GridSpec, RunConfig, figure_recipe


def write(tmp_path, text: str):
    path = tmp_path / "run.env"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_settings_defaults():
    cfg = Settings(_env_file=None)
    assert cfg.dt == 0.02
    assert cfg.t_max == 8.0
    assert cfg.restabilize_every == 1
    assert cfg.critical_tol == 1e-9
    assert cfg.rank_floor == 1e-13
    assert cfg.entropy_eps == 1e-12
    assert cfg.dense_cap == 2048
    assert cfg.fit_window == (10, 90)
    assert cfg.ipr_fraction == 0.2
    assert cfg.threads >= 1


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("STARKCHAIN_DT", "0.05")
    monkeypatch.setenv("STARKCHAIN_OUTPUT_DIR", "elsewhere")
    cfg = Settings(_env_file=None)
    assert cfg.dt == 0.05
    assert cfg.output_path.name == "elsewhere"


def test_run_file_values(tmp_path):
    path = write(
        tmp_path,
        "# fig2 template\n"
        "N=100\n"
        "J=1\n"
        "gamma=0.219\n"
        "F1=0\n"
        "F2=0.2\n"
        "\n"
        "gamma_grid=0.01,0.5,30\n"
        "cuts=0.081, 0.219\n"
        "window=10,90\n",
    )
    values = load_run_file(path)
    assert values["N"] == 100 and isinstance(values["N"], int)
    assert values["gamma"] == 0.219
    assert values["gamma_grid"] == (0.01, 0.5, 30)
    assert values["cuts"] == (0.081, 0.219)
    assert values["window"] == (10, 90)


@pytest.mark.parametrize(
    "text,line,key",
    [
        ("N=100\nBOGUS=1\n", 2, "BOGUS"),
        ("N=100\nJ=1\n\n# comment\ngamma=abc\n", 5, "gamma"),
        ("N=\n", 1, "N"),
        ("N=1.5\n", 1, "N"),
        ("N=10\nF2=1\nratio_grid=0.1,2\n", 3, "ratio_grid"),
    ],
)
def test_run_file_errors_name_line_and_key(tmp_path, text, line, key):
    path = write(tmp_path, text)
    with pytest.raises(ConfigError) as exc:
        load_run_file(path)
    assert exc.value.line == line
    assert exc.value.key == key
    assert exc.value.path == path
    assert exc.value.exit_code == 2


def test_run_file_unparsable_statement(tmp_path):
    path = write(tmp_path, "N=10\nthis is not valid\n")
    with pytest.raises(ConfigError) as exc:
        load_run_file(path)
    assert exc.value.line == 2


def test_missing_run_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_file(str(tmp_path / "absent.env"))


def test_run_config_requires_sections():
    params = ChainParams(N=10, J=1.0, gamma=0.1, F1=0.0, F2=0.2)
    with pytest.raises(ValidationError):
        RunConfig(command=Command.LOCALIZATION_MAP, params=params)
    with pytest.raises(ValidationError):
        RunConfig(command=Command.ENTANGLEMENT, params=params)
    with pytest.raises(ValidationError):
        RunConfig(command=Command.SKIN_FACTOR, params=params)
    RunConfig(command=Command.CLASSIFY, params=params)


def test_grid_and_window_validation():
    with pytest.raises(ValidationError):
        GridSpec(gamma=(0.1, 0.5, 0))
    with pytest.raises(ValidationError):
        FitSpec(window=(50, 10))
    with pytest.raises(ValidationError):
        DynamicsSpec(dt=0.0)
    with pytest.raises(ValidationError):
        DynamicsSpec(ratios=())
    with pytest.raises(ValidationError):
        DynamicsSpec(ratios=(1.0, 2.0, 1.0))


def test_run_config_json_round_trip():
    config = figure_recipe("fig2", "out").configs[0]
    restored = RunConfig.model_validate(config.model_dump(mode="json"))
    assert restored == config
    assert restored.output_dir == "out/fig2"


def test_figure_recipes():
    fig1 = figure_recipe("fig1").configs[0]
    assert fig1.command is Command.SKIN_FACTOR
    assert fig1.params == ChainParams(N=100, J=1.0, gamma=0.5, F1=0.0, F2=1.0)

    fig2 = figure_recipe("fig2").configs[0]
    assert fig2.params.N == 100 and fig2.params.J == 1.0 and fig2.params.F2 == 0.2
    assert fig2.grids.cuts == (0.081, 0.219, 0.362, 0.481)

    fig3 = figure_recipe("fig3").configs[0]
    assert fig3.params.N == 120 and fig3.params.J == -1.0 and fig3.params.gamma == 0.0
    assert fig3.params.F2 == 0.08
    assert fig3.dynamics.ratios == (1.0, 2.0, 3.0)
    assert fig3.dynamics.initial == "cdw-even-sites"

    with pytest.raises(ValueError):
        figure_recipe("fig4")
