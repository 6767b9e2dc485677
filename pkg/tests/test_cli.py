import json


from octoarm.cli import main


def write_cfg(tmp_path, **over):
    cfg = {"case": "reach", "N": 8, "dt": 1e-4, "T": 0.01, "iterations": 1}
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path, output_dir=str(tmp_path / "out"))
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "out" / "log.csv").exists()
    assert "tip_dist" in capsys.readouterr().out


def test_out_and_profile_overrides(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "elsewhere"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    assert (out / "config.json").exists()
    written = json.loads((out / "config.json").read_text())
    assert written["output_dir"] == str(out)


def test_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"case": "reach", "nonsense": 5}')
    assert main(["run", str(path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_sweep_and_wavespeed_commands(tmp_path, capsys):
    cfg = write_cfg(tmp_path, output_dir=str(tmp_path / "sw"),
                    sweep={"pairs": [[1e4, 1042.0]]})
    assert main(["sweep", str(cfg), "--workers", "1"]) == 0
    ws = (tmp_path / "sw" / "wavespeed.csv").read_text().splitlines()
    assert ws[0] == "E,rho,c,coeff,r2,direction"
    assert len(ws) == 2

    run_dir = tmp_path / "sw" / "E10000_rho1042"
    assert main(["wavespeed", str(run_dir)]) == 0
    out = (run_dir / "wavespeed.csv").read_text().splitlines()
    assert out[0] == "E,rho,c,coeff,r2,direction"


def test_wavespeed_missing_dir(tmp_path, capsys):
    assert main(["wavespeed", str(tmp_path / "nope")]) == 2
    assert "run directory" in capsys.readouterr().err
