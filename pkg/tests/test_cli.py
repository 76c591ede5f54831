"""Unit tests for the command-line interface."""

import json

import pytest

from visolve.cli import EXIT_CONFIG, EXIT_OK, main


def test_run_subcommand(tmp_path, capsys):
    cfgfile = tmp_path / "exp.toml"
    cfgfile.write_text(
        'name = "cliexp"\n'
        "[operator]\n"
        'family = "example1"\n'
        "p = 2.0\n"
        "sigma_sq = 1.0\n"
        "[methods.popov]\n"
        'kind = "constant"\n'
        "alpha = 0.1\n"
        "[run]\n"
        "K = 40\n"
        "n_seeds = 2\n"
    )
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfgfile), "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "cliexp_runs.csv").exists()
    assert (out / "cliexp_summary.csv").exists()
    assert "popov" in capsys.readouterr().out


def test_run_missing_config(tmp_path, capsys):
    code = main(["run", "--config", str(tmp_path / "nope.toml")])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_run_overrides(tmp_path):
    cfgfile = tmp_path / "exp.toml"
    cfgfile.write_text(
        'name = "ov"\n[operator]\nfamily = "example1"\np = 2.0\n'
        '[methods.popov]\nkind = "constant"\nalpha = 0.1\n[run]\nK = 500\nn_seeds = 9\n'
    )
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfgfile), "--out", str(out),
                 "--seeds", "1", "--iters", "30"]) == EXIT_OK
    lines = (out / "ov_runs.csv").read_text().splitlines()
    assert len(lines) == 1 + 31  # one seed, stride 1, k = 0..30


def test_reproduce_subcommand(tmp_path, capsys):
    out = tmp_path / "rep"
    code = main(["reproduce", "example-p", "--out", str(out),
                 "--seeds", "2", "--iters", "100", "--deterministic-order"])
    assert code == EXIT_OK
    assert (out / "example-p_runs.csv").exists()
    text = capsys.readouterr().out
    assert "noise floor" in text


def test_check_subcommand(capsys):
    assert main(["check", "example1", "--p", "2.0", "--mu", "0.5",
                 "--samples", "300"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "certified-at-samples" in text
    assert "monotonicity: violated" in text


def test_bounds_subcommand(tmp_path, capsys):
    cfile = tmp_path / "c.json"
    cfile.write_text(json.dumps({"mu": 1.0, "L": 1.0, "sigma_sq": 0.0, "r_1": 1.0}))
    assert main(["bounds", "thm4", "--constants", str(cfile), "--k-max", "4"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "theorem,K,bound"
    assert len(lines) == 4  # K = 2, 3, 4
    assert lines[1].startswith("thm4,2,95.952344849245")


def test_bounds_to_file(tmp_path):
    cfile = tmp_path / "c.json"
    cfile.write_text(json.dumps({"mu": 1.0, "L": 1.0, "sigma_sq": 0.0, "r_1": 1.0}))
    out = tmp_path / "curve.csv"
    assert main(["bounds", "thm4", "--constants", str(cfile),
                 "--k-max", "3", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("theorem,K,bound\n")


def test_bounds_bad_constants(tmp_path, capsys):
    cfile = tmp_path / "c.json"
    cfile.write_text(json.dumps({"mu": 1.0}))
    assert main(["bounds", "thm4", "--constants", str(cfile), "--k-max", "3"]) == EXIT_CONFIG
    assert main(["bounds", "thm4", "--constants", str(tmp_path / "x.json"),
                 "--k-max", "3"]) == EXIT_CONFIG
    capsys.readouterr()


def test_unknown_preset_rejected():
    with pytest.raises(SystemExit):
        main(["reproduce", "fig99"])
