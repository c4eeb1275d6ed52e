import json

import pytest

from cli import ECHO_FILE, main
from errors import EXIT_CONTRACT, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_PARSE, EXIT_USAGE


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_matches_the_closed_form(capsys, tmp_path, gauss_l2_box):
    code, out, _ = run(capsys, "norm", "--target", "gauss:d=1", "--domain", "box:-1,1", "--weight", "bracket:0",
                       "--ell", "0", "--p", "2", "--out", str(tmp_path))
    assert code == EXIT_OK
    value, tail = out.strip().split(" +/- ")
    assert float(value) == pytest.approx(gauss_l2_box, rel=1e-6)
    assert float(tail) == 0.0
    assert (tmp_path / ECHO_FILE).exists()


def test_norm_rerun_from_its_echo(capsys, tmp_path):
    code, first, _ = run(capsys, "norm", "--target", "gauss:d=2:scale=0.5", "--domain", "ball:0,0:1",
                         "--weight", "pow:-0.5", "--ell", "1", "--out", str(tmp_path))
    assert code == EXIT_OK
    echo = tmp_path / ECHO_FILE
    before = echo.read_bytes()
    code, second, _ = run(capsys, "norm", "--config", str(echo))
    assert code == EXIT_OK
    assert second == first
    assert echo.read_bytes() == before


def test_apcheck_verdicts(capsys, tmp_path):
    code, out, _ = run(capsys, "apcheck", "--upsilon", "pow:1.5", "--p", "2", "--d", "1", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "verdict: diverging" in out
    code, out, _ = run(capsys, "apcheck", "--upsilon", "pow:0.5", "--out", str(tmp_path))
    assert "verdict: bounded" in out


def test_embed_with_one_target(capsys, tmp_path):
    code, out, _ = run(capsys, "embed", "--case", "lemma-unbounded", "--q", "1", "--u", "2", "--target", "gauss:d=1",
                       "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "max ratio" in out
    lines = (tmp_path / "embed.csv").read_text().splitlines()
    assert lines[0] == "case,function,lhs,rhs,ratio,uncertainty,constant"
    assert len(lines) == 2


def test_approx_is_reproducible(capsys, tmp_path):
    args = ["approx", "--N", "8", "--seed", "1", "--grid", "16", "--out", str(tmp_path)]
    code, first, _ = run(capsys, *args)
    assert code == EXIT_OK
    network = (tmp_path / "network.txt").read_bytes()
    meta = json.loads((tmp_path / "network.json").read_text())
    assert meta["seed"] == 1
    assert "error" in meta
    code, second, _ = run(capsys, *args)
    assert second == first
    assert (tmp_path / "network.txt").read_bytes() == network


def test_approx_takes_one_width(capsys, tmp_path):
    code, _, err = run(capsys, "approx", "--N", "8,16", "--out", str(tmp_path))
    assert code == EXIT_USAGE
    assert "one width" in err


def test_tau_sweep_output(capsys, tmp_path):
    code, out, _ = run(capsys, "tau", "--taus", "0.5,1", "--grid", "16", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert len((tmp_path / "tau.csv").read_text().splitlines()) == 3
    assert out.count("tau=") == 2


def test_rates_are_bytewise_reproducible(capsys, tmp_path):
    first_dir, second_dir = tmp_path / "a", tmp_path / "b"
    args = ["rates", "--N", "4,8", "--seeds", "0,1", "--grid", "16"]
    assert run(capsys, *args, "--out", str(first_dir))[0] == EXIT_OK
    # the echo names the first directory, so --out redirects the rerun
    assert run(capsys, "rates", "--config", str(first_dir / ECHO_FILE), "--out", str(second_dir))[0] == EXIT_OK
    for name in ("report.csv", "report.svg"):
        assert (first_dir / name).read_bytes() == (second_dir / name).read_bytes()


@pytest.mark.parametrize("argv,code", [
    (["norm", "--colour", "red"], EXIT_USAGE),
    ([], EXIT_USAGE),
    (["norm", "--target", "gauss:d=1"], EXIT_USAGE),
    (["norm", "--target", "gauss:d=1", "--domain", "box:-1,1", "--seeds", "0"], EXIT_USAGE),
    (["norm", "--target", "sinc:d=1", "--domain", "box:-1,1"], EXIT_PARSE),
    (["norm", "--target", "gauss:d=1", "--domain", "box:-1,1", "--p", "two"], EXIT_PARSE),
    (["embed", "--case", "cor-barron", "--gamma", "0.4", "--domain", "box:-1,1"], EXIT_CONTRACT),
    (["norm", "--target", "gauss:d=1", "--domain", "box:-1,1", "--weight", "pow:-1"], EXIT_NUMERICAL),
])
def test_exit_codes(capsys, tmp_path, argv, code):
    if argv:
        argv = argv + ["--out", str(tmp_path)]
    assert run(capsys, *argv)[0] == code


def test_unknown_key_exits_like_an_unknown_flag(capsys, tmp_path):
    config = tmp_path / "norm.toml"
    config.write_text('target = "gauss:d=1"\ndomain = "box:-1,1"\nseeds = [1]\n')
    code, _, err = run(capsys, "norm", "--config", str(config), "--out", str(tmp_path))
    assert code == EXIT_USAGE
    assert "seeds" in err
    flagged = run(capsys, "norm", "--target", "gauss:d=1", "--domain", "box:-1,1", "--seeds", "1",
                  "--out", str(tmp_path))
    assert flagged[0] == code


def test_missing_config_file(capsys, tmp_path):
    assert run(capsys, "norm", "--config", str(tmp_path / "absent.toml"))[0] == EXIT_IO
