import copy
import json

import numpy as np
import pytest

from nlscatter.cli import main
from nlscatter.config import parse_experiment, parse_sweep, parse_times
from nlscatter.errors import ConfigError

BASE = {
    "version": 1,
    "name": "tiny",
    "symbol": {"kind": "fractional", "rho": 1.0},
    "grid": {"dim": 1, "points": 4096, "half_length": 1024},
    "packet": {"eps": 1.0, "R": 4.0, "center": [2.5], "smoothness": 0.1},
    "potential": {"family": "short_range", "C": 0.5, "gamma": 1.5},
    "times": {"start": 10, "stop": 50, "num": 12},
    "time_pairs": {"doubling": {"start": 5, "stop": 25, "num": 9}},
    "dt": 0.05,
    "diagnostics": ["unitarity", "cook", "cauchy_gap"],
    "fit_window": [10, 50],
}


def cfg(**changes):
    raw = copy.deepcopy(BASE)
    for k, v in changes.items():
        if v is None:
            raw.pop(k, None)
        else:
            raw[k] = v
    return raw


def write(tmp_path, raw, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def test_parse_times_forms():
    t = parse_times({"start": 1, "stop": 100, "num": 5}, "times", 0.05)
    np.testing.assert_allclose(t, [1, 3.15, 10, 31.6, 100], rtol=0.01)
    assert np.all(np.abs(t / 0.05 - np.round(t / 0.05)) < 1e-9)
    np.testing.assert_array_equal(parse_times([1, 2, 2, 3], "times", 0.5), [1, 2, 3])


def test_valid_config_fills_direction():
    assert parse_experiment(cfg()).direction == "increasing"
    assert parse_experiment(cfg(symbol={"kind": "fractional", "rho": 0.25},
                                diagnostics=["unitarity"])).direction == "decreasing"


@pytest.mark.parametrize("change, field", [
    ({"potential": {"family": "short_range", "C": 0.5, "gamma": 0.9}}, "potential.gamma"),
    ({"potential": {"family": "long_range", "kappa": 0.5, "gamma": 1.2}}, "potential.gamma"),
    ({"potential": {"family": "short_range", "C": [1, 2], "gamma": 1.5}}, "potential"),
    ({"grid": {"dim": 1, "points": 4096, "half_length": 100}}, "grid.half_length"),
    ({"grid": {"dim": 1, "points": 1000, "half_length": 1024}}, "grid"),
    ({"direction": "decreasing"}, "direction"),
    ({"diagnostics": ["pairing"]}, "diagnostics[0]"),
    ({"diagnostics": ["magic"]}, "diagnostics[0]"),
    ({"dt": 1.0}, "dt"),
    ({"times": {"start": 10, "stop": 200, "num": 12}}, "grid.half_length"),
    ({"packet": {"eps": 1.0, "R": 4.0, "center": [0.5]}}, "packet"),
    ({"version": 2}, "version"),
    ({"extra": 1}, "extra"),
    ({"symbol": {"kind": "fractional", "rho": -1.0}}, "symbol"),
])
def test_invalid_configs_name_the_field(change, field):
    with pytest.raises(ConfigError) as ei:
        parse_experiment(cfg(**change))
    assert ei.value.field == field


def test_half_wave_accepts_either_direction():
    for d in ("increasing", "decreasing"):
        c = parse_experiment(cfg(symbol={"kind": "fractional", "rho": 0.5}, direction=d,
                                 diagnostics=["unitarity"]))
        assert c.direction == d


def test_sweep_rejects_base_potential():
    with pytest.raises(ConfigError):
        parse_sweep({"version": 1, "base": cfg(), "gammas": [1.5]})
    parse_sweep({"version": 1, "base": cfg(potential=None), "gammas": [0.5, 1.5]})


def test_exit_codes(tmp_path, capsys):
    assert main(["check-symbol", "--rho", "0.5"]) == 0
    assert "class.envelope_constant = true" in capsys.readouterr().out
    assert main(["check-symbol", "--symbol", "{not json"]) == 2
    assert main(["check-symbol"]) == 2
    bad = write(tmp_path, cfg(potential={"family": "short_range", "C": 0.5, "gamma": 0.9}))
    assert main(["simulate", "--config", bad, "--out", str(tmp_path / "x")]) == 2
    assert "potential.gamma" in capsys.readouterr().err
    assert main(["replay", str(tmp_path / "nothing")]) == 2
    assert main(["bogus-command"]) == 2


def test_spectrum_command(capsys):
    assert main(["spectrum", "--symbol",
                 '{"kind": "flat_band", "sigma_lo": 1, "sigma_hi": 2, "level": 3}',
                 "--sigma-range", "0.1", "10"]) == 0
    out = capsys.readouterr().out
    assert "has_infinite_multiplicity_eigenvalue" in out
    assert main(["spectrum", "--rho", "0.5"]) == 0
    assert "spectrum.upper = inf" in capsys.readouterr().out


def test_simulate_deterministic_and_replay(tmp_path, capsys):
    c = write(tmp_path, cfg())
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", c, "--out", str(a)]) == 0
    assert main(["simulate", "--config", c, "--out", str(b)]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert "cook_integrand.csv" in files and "cauchy_gap.csv" in files and "report.txt" in files
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    capsys.readouterr()
    assert main(["replay", str(a)]) == 0
    out = capsys.readouterr().out
    assert "DIFFERS" not in out and "identical" in out


def test_replay_detects_tampering(tmp_path):
    c = write(tmp_path, cfg())
    out = tmp_path / "run"
    assert main(["cook", "--config", c, "--out", str(out)]) == 0
    f = out / "cook_integrand.csv"
    lines = f.read_text().splitlines()
    t, v = lines[5].split(",")
    lines[5] = f"{t},{float(v) * 3:.17g}"
    f.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(out)]) == 1


def test_sweep_parallel_matches_serial(tmp_path):
    raw = {"version": 1, "name": "mini", "gammas": [0.5, 2.0], "strength": 0.05,
           "base": cfg(potential=None, diagnostics=None)}
    c = write(tmp_path, raw)
    s, p = tmp_path / "s", tmp_path / "p"
    rc1 = main(["threshold-sweep", "--config", c, "--out", str(s), "--workers", "1"])
    rc2 = main(["threshold-sweep", "--config", c, "--out", str(p), "--workers", "2"])
    assert rc1 == rc2 == 0
    for f in sorted(s.rglob("*")):
        if f.is_file():
            assert f.read_bytes() == (p / f.relative_to(s)).read_bytes()


def test_env_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("NLSCATTER_OUT", str(tmp_path / "root"))
    c = write(tmp_path, cfg(diagnostics=["unitarity"]))
    assert main(["simulate", "--config", c]) == 0
    assert (tmp_path / "root" / "tiny" / "report.txt").exists()
