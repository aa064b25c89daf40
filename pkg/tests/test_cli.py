import numpy as np

from bkmf.cli import main


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("fig_intro", "exp_1dlap", "insqrt_2dlap", "petrov_exp", "petrov_insqrt", "timings"):
        assert name in out


def test_run_writes_files(tmp_path, capsys):
    assert main(["run", "fig_intro", "--jmax", "10", "--out", str(tmp_path)]) == 0
    rows = np.loadtxt(tmp_path / "fig_intro.dat")
    assert rows.shape == (10, 4)
    summary = (tmp_path / "summary.txt").read_text()
    assert "max bound/error" in summary and "validity: OK" in summary


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"jmax = 5\nout = {tmp_path / 'x'}\n")
    assert main(["run", "fig_intro", "--config", str(cfg), "--jmax", "7"]) == 0
    assert np.loadtxt(tmp_path / "x" / "fig_intro.dat").shape == (7, 4)


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    assert main(["run", "fig_intro", "--config", str(cfg)]) == 2
    assert main(["run", "petrov_exp", "--n", "50", "--out", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err
