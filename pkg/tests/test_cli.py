import numpy as np
import pytest
import yaml
from hypothesis import given, strategies as st

from coadapt.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, combo_dirname, expand_axes, main
from coadapt.errors import ConfigError
from coadapt.export import read_trace_csv
from coadapt.scenario import bundled_path


def test_simulate_writes_outputs(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "free_space_1dof", "--out", str(tmp_path), "--periods", "2",
               "--plots", "--seedless"])
    assert rc == EXIT_OK
    _, data = read_trace_csv(tmp_path / "trace.csv")
    assert data.shape[0] == 2 * 2000 + 1
    assert (tmp_path / "periods.csv").read_text().count("\n") == 3
    assert sorted(p.name for p in tmp_path.glob("*.svg")) == ["costs.svg", "eps_norm.svg", "force.svg",
                                                               "positions.svg"]
    assert "period   2" in capsys.readouterr().out


def test_simulate_config_error_exit_code(tmp_path, capsys):
    d = yaml.safe_load(bundled_path("wall_1dof").read_text())
    d["gains"]["beta"] = -0.1
    p = tmp_path / "bad.scenario"
    p.write_text(yaml.safe_dump(d))
    assert main(["simulate", "--scenario", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "gains.beta" in capsys.readouterr().err
    assert main(["simulate", "--scenario", str(tmp_path / "missing.scenario")]) == EXIT_CONFIG


def test_divergence_exit_code(tmp_path):
    rc = main(["simulate", "--scenario", "wall_nodamping_1dof", "--out", str(tmp_path), "--periods", "2"])
    assert rc == EXIT_DIVERGED


def test_variant_override(tmp_path):
    rc = main(["simulate", "--scenario", "free_space_1dof", "--variant", "no-damping", "--periods", "2",
               "--out", str(tmp_path)])
    assert rc == EXIT_OK
    assert "variant: no-damping" in (tmp_path / "scenario.yaml").read_text()


def test_sweep_directories_and_summary(tmp_path):
    manifest = tmp_path / "m.yaml"
    manifest.write_text(yaml.safe_dump({"scenario": "free_space_1dof",
                                        "axes": {"gains.alpha": [2.0, 5.0], "gains.Gamma": [10.0, 20.0]}}))
    rc = main(["sweep", str(manifest), "--out", str(tmp_path / "s"), "--periods", "2", "--jobs", "2"])
    assert rc == EXIT_OK
    dirs = sorted(p.name for p in (tmp_path / "s").iterdir() if p.is_dir())
    assert dirs[0] == "gains.Gamma=10.0,gains.alpha=2.0" and len(dirs) == 4
    assert all((tmp_path / "s" / d / "trace.csv").exists() for d in dirs)
    assert (tmp_path / "s" / "sweep.csv").read_text().count("\n") == 5


def test_sweep_cap():
    with pytest.raises(ConfigError, match="cap"):
        expand_axes({"a": list(range(17)), "b": list(range(16))})
    assert len(expand_axes({"a": list(range(16)), "b": list(range(16))})) == 256


values = st.one_of(st.integers(-5, 5), st.floats(-10, 10, allow_nan=False), st.text("ab/=,_", max_size=3))


@given(st.dictionaries(st.text("xy._=,", min_size=1, max_size=3), values, min_size=1, max_size=3),
       st.dictionaries(st.text("xy._=,", min_size=1, max_size=3), values, min_size=1, max_size=3))
def test_combo_names_injective_and_sorted(a, b):
    if a != b:
        assert combo_dirname(a) != combo_dirname(b)
    assert combo_dirname(a) == combo_dirname(dict(reversed(list(a.items()))))
    assert "/" not in combo_dirname(a)


def test_check_reports_table(capsys):
    rc = main(["check", "--periods", "3"])
    out = capsys.readouterr().out
    for k in range(1, 10):
        assert f"AC-{k}:" in out
    assert "criteria passed" in out
    assert rc in (EXIT_OK, EXIT_CHECK)
    from coadapt import acceptance
    acceptance.set_periods(None)


def test_seedless_guard():
    from coadapt.seedless import RandomnessUsed, no_rng
    with no_rng():
        with pytest.raises(RandomnessUsed):
            np.random.default_rng(0)
    np.random.default_rng(0)
