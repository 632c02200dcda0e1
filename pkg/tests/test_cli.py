import json

from cqec import cli


def test_stdout_table(capsys, monkeypatch):
    monkeypatch.setenv("CQEC_WORKERS", "1")
    assert cli.main(["dd-sweep", "--seed", "3"]) == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("index,config,pulses")
    assert len(out) == 6


def test_files_and_verify(tmp_path, capsys):
    prefix = tmp_path / "run"
    code = cli.main(["threshold", "--seed", "1", "--param", "n=2", "--out", str(prefix),
                     "--format", "structured"])
    assert code == cli.EXIT_OK
    path = tmp_path / "run.json"
    assert json.loads(path.read_text())["config"]["grid"]["n"] == 2
    assert cli.main(["verify", str(path)]) == cli.EXIT_OK
    path.write_text(path.read_text().replace('"seed": 1', '"seed": 2'))
    assert cli.main(["verify", str(path)]) == cli.EXIT_CONFIG
    capsys.readouterr()


def test_config_errors_exit_2(tmp_path, capsys):
    assert cli.main(["threshold", "--param", "bogus=1"]) == cli.EXIT_CONFIG
    assert cli.main(["threshold", "--seed", "-4"]) == cli.EXIT_CONFIG
    assert cli.main(["threshold", "--ansatz-depth", "9"]) == cli.EXIT_CONFIG
    assert cli.main(["unknown"]) == cli.EXIT_CONFIG
    assert cli.main(["verify", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
