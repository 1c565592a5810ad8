import filecmp

import pytest

from floathil.cli import CONFIG_DIR, main
from floathil.config import OUTPUT_ENV, load_config, validate
from floathil.scenarios import EXIT_CALIBRATION, EXIT_DIVERGENCE, EXIT_INVALID, MOTION_HEADER, parse_summary, run


@pytest.mark.parametrize("name", ["decay-open", "decay-closed", "steady-wind", "identify"])
def test_shipped_configs_validate(name):
    assert validate(load_config(CONFIG_DIR / f"{name}.yaml")) == []


def test_defaults_validate():
    assert validate(load_config()) == []


def test_zero_dt_single_diagnostic():
    diags = validate(load_config(None, {"dt_model": 0}))
    assert len(diags) == 1
    assert diags[0].startswith("config.dt_model") and "> 0" in diags[0]


def test_frequency_ordering_diagnostic():
    diags = validate(load_config(None, {"calibration": {"f_surge": 0.05}}))
    assert any(d.startswith("calibration.f_surge") and "below" in d for d in diags)


def test_seed_required_for_stochastic():
    diags = validate(load_config(CONFIG_DIR / "steady-wind.yaml", {"seed": None}))
    assert diags == ["config.seed: an integer seed is required for stochastic scenarios"]


def test_turbine_field_paths():
    diags = validate(load_config(None, {"turbines": [{"name": "a", "rotor_speed": -1,
                                                      "compensation": {"source": "guess"}}]}))
    assert "turbines[0].rotor_speed: must be > 0 (got -1)" in diags
    assert any(d.startswith("turbines[0].compensation.source") for d in diags)


def test_filter_above_nyquist():
    diags = validate(load_config(None, {"filter": {"cutoff_model": 600.0}}))
    assert any(d.startswith("filter.cutoff_model") for d in diags)


def test_validate_command(capsys, tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario: decay-open\ndt_model: 0\n")
    assert main(["validate", str(bad)]) == EXIT_INVALID
    assert "config.dt_model" in capsys.readouterr().out
    assert main(["validate", "decay-open"]) == 0


def test_scale_command(capsys):
    assert main(["scale", "--from", "model", "--kind", "frequency", "--value", "2.40"]) == 0
    assert capsys.readouterr().out.strip() == "0.04"
    main(["scale", "--from", "full", "--kind", "length", "--value", "178.4"])
    assert capsys.readouterr().out.strip() == "1.18933333333"


def test_run_decay_closed(tmp_path, capsys):
    assert main(["run", "decay-closed", "-o", str(tmp_path)]) == 0
    s = parse_summary((tmp_path / "summary.txt").read_text())
    assert s == parse_summary(capsys.readouterr().out)
    assert float(s["wt1.initial_surge_m"]) == pytest.approx(-12.0, rel=0.05)
    assert float(s["wt1.initial_pitch_deg"]) == pytest.approx(-2.0, rel=0.05)
    assert float(s["wt1.f_surge_hz"]) == pytest.approx(0.005, rel=0.02)
    header = (tmp_path / "wt1_motion.csv").read_text().splitlines()[0]
    assert header == ",".join(MOTION_HEADER)
    for name in ("wt1_forces.csv", "wt1_spectra.csv", "matrices.csv"):
        assert (tmp_path / name).exists()


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    res = run(load_config(CONFIG_DIR / "decay-open.yaml", {"duration": 300.0}))
    assert res.status == 0
    assert (tmp_path / "env" / "summary.txt").exists()


def test_calibration_failure_exit(tmp_path):
    cfg = load_config(CONFIG_DIR / "decay-open.yaml",
                      {"output_dir": str(tmp_path), "platform": {"added_mass": {"pitch": 0.0}}})
    res = run(cfg)
    assert res.status == EXIT_CALIBRATION
    assert "static targets" in res.diagnostics[0]


def test_divergence_exit(tmp_path, capsys):
    cfg = tmp_path / "unstable.yaml"
    cfg.write_text("scenario: decay-open\ndt_model: 0.5\nduration: 20000\n"
                   "filter: {cutoff_model: null}\nturbines: [{name: wt1, rotor_speed: 9.5}]\n")
    with pytest.warns(RuntimeWarning):
        assert main(["run", str(cfg), "-o", str(tmp_path / "o")]) == EXIT_DIVERGENCE
    err = capsys.readouterr().err
    assert "wt1" in err and "t=" in err


def test_invalid_config_exit(tmp_path):
    res = run(load_config(None, {"scenario": "bogus", "output_dir": str(tmp_path)}))
    assert res.status == EXIT_INVALID and res.diagnostics


def test_psd_command(tmp_path):
    main(["run", "decay-open", "-o", str(tmp_path)])
    out = tmp_path / "psd.csv"
    assert main(["psd", str(tmp_path / "wt1_motion.csv"), "--column", "beta_s", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "f (Hz),psd (rad^2/Hz)"
    assert len(lines) > 10


def test_psd_scenario(tmp_path):
    main(["run", "decay-open", "-o", str(tmp_path)])
    cfg = load_config(None, {"scenario": "psd", "output_dir": str(tmp_path),
                             "psd": {"input": str(tmp_path / "wt1_motion.csv"), "column": "x_s (m)"}})
    res = run(cfg)
    assert res.status == 0
    assert (tmp_path / "spectrum.csv").read_text().startswith("f (Hz),psd (m^2/Hz)\n")


def test_steady_wind_reruns_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        res = run(load_config(CONFIG_DIR / "steady-wind.yaml", {"duration": 600.0, "settle_time": 100.0,
                                                                 "output_dir": str(d)}))
        assert res.status == 0
        outs.append(d)
    names = sorted(p.name for p in outs[0].iterdir())
    assert "wt2_inflow.csv" in names and "wt2_rotor.csv" in names
    match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
    assert mismatch == [] and errors == []


def test_identified_compensation_source(tmp_path):
    cfg = load_config(CONFIG_DIR / "decay-closed.yaml", {
        "duration": 600.0, "output_dir": str(tmp_path), "seed": 3,
        "turbines": [{"name": "wt1", "rotor_speed": 9.5, "compensation": {"source": "identified"}}]})
    res = run(cfg)
    assert res.status == 0
    assert res.summary["wt1.open_loop_rms_rel_diff"] < 5e-3


def test_identify_scenario(tmp_path):
    res = run(load_config(CONFIG_DIR / "identify.yaml", {"output_dir": str(tmp_path)}))
    assert res.status == 0
    assert res.summary["wt1.max_entry_error"] < 0.02
    assert (tmp_path / "matrices.csv").exists()
