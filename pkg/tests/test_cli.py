import json
import math

import numpy as np
import pytest

from spilab import cli


def load(path):
    return json.loads(path.read_text())


def test_spectrum_example(tmp_path, capsys):
    rc = cli.main(["spectrum", "--preset", "gaussian", "--domain=-10:10", "--nodes", "2000", "--k", "6",
                   "--out", str(tmp_path)])
    assert rc == 0
    doc = load(tmp_path / "spectrum.json")
    assert np.allclose(doc["result"]["eigenvalues"], np.arange(6), atol=1e-3)
    assert doc["seed"] == 0 and len(doc["config_hash"]) == 64
    assert doc["result"]["all_passed"]


def test_gauss_lsi_example(tmp_path):
    assert cli.main(["gauss-lsi", "--d", "1,2,5,10", "--trials", "20", "--out", str(tmp_path)]) == 0
    res = load(tmp_path / "gauss_lsi.json")["result"]
    assert 0 < res["chain"]["kappa1"] < 1
    assert [f["d"] for f in res["chain"]["family"]] == [1, 2, 5, 10]
    assert all(r["c_kappa_chain"] == r["log_inv_kappa"] / 32 for r in res["chain"]["rows"])


def test_parse_error_exit_code_and_no_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["analyze", "--expr", "x^^2", "--out", str(out)])
    assert rc == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParseError" and err["position"] == 2
    assert not out.exists()


def test_bad_flag_is_config_error(capsys):
    assert cli.main(["spectrum", "--nodes", "many"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_insufficient_spectrum_exit_code(tmp_path, capsys):
    rc = cli.main(["spectrum", "--preset", "gaussian", "--domain=-10:10", "--nodes", "800", "--k", "3",
                   "--r-grid", "0.1,1", "--out", str(tmp_path)])
    assert rc == 5


def test_exit_codes_are_distinct():
    codes = [c for _, c in cli.EXIT_CODES]
    classes = [k for k, _ in cli.EXIT_CODES]
    assert len(set(codes)) >= 9
    assert len(set(classes)) == len(classes)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\npreset = gaussian\ndomain = -10:10\nnodes = 900\nk = 4  # four pairs\nseed = 17\n")
    c = cli.config_from_args(["spectrum", "--config", str(cfg), "--k", "5"])
    assert c.k == 5 and c.nodes == 900 and c.seed == 17 and c.domain == [-10.0, 10.0]


def test_config_file_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(cli.ConfigError):
        cli.config_from_args(["hermite", "--config", str(cfg)])


def test_grids_must_be_sorted():
    with pytest.raises(cli.ConfigError):
        cli.config_from_args(["analyze", "--kappa-grid", "0.1,0.01"])
    c = cli.config_from_args(["analyze", "--kappa-grid", "geom:1e-6:0.5:7"])
    assert len(c.kappa_grid) == 7 and c.kappa_grid[-1] == pytest.approx(0.5)


def test_json_numbers_have_17_digits():
    text = cli._dumps({"a": 0.1, "b": [1.0, math.inf], "c": 3})
    doc = json.loads(text)
    assert doc["a"] == 0.1 and doc["b"][1] == "inf" and doc["c"] == 3
    assert "0.10000000000000001" in text


def test_config_hash_ignores_output_dir():
    a = cli.config_from_args(["hermite", "--out", "x"])
    b = cli.config_from_args(["hermite", "--out", "y"])
    c = cli.config_from_args(["hermite", "--seed", "1"])
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_atomic_write_leaves_no_temporaries(tmp_path):
    cli.write_atomic(str(tmp_path / "a.txt"), "one\n")
    cli.write_atomic(str(tmp_path / "a.txt"), "two\n")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_text() == "two\n"


def test_transfer_pipelines(tmp_path):
    src = tmp_path / "beta.json"
    src.write_text(json.dumps({"r0": 1.0, "r": [1.5, 2.0, 4.0, 8.0], "beta": [3.0, 2.0, 1.5, 1.2]}))
    out = tmp_path / "p"
    assert cli.main(["transfer", "--pipeline", "spi-to-poincare", "--input", str(src), "--out", str(out)]) == 0
    assert load(out / "transfer.json")["result"]["poincare"] == pytest.approx(4.0 / (1 - 0.75))
    out = tmp_path / "m"
    assert cli.main(["transfer", "--pipeline", "spi-to-mc", "--c-poincare", "0.5", "--input", str(src),
                     "--out", str(out), "--format", "csv"]) == 0
    lines = (out / "transfer.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=") and lines[1] == "kappa,c_kappa"
    assert cli.main(["transfer", "--pipeline", "spi-to-mc", "--input", str(src), "--out", str(out)]) == 2


def test_analyze_then_mc_to_spi(tmp_path):
    a = tmp_path / "a"
    assert cli.main(["analyze", "--preset", "gaussian", "--domain=-10:10", "--kappa-grid", "geom:1e-4:0.25:4",
                     "--out", str(a), "--format", "svg"]) == 0
    res = load(a / "analyze.json")["result"]
    lo, hi = res["poincare_interval"]
    assert lo <= 1.0 <= hi and hi / lo == pytest.approx(4.0)
    assert (a / "analyze_profile.svg").read_text().startswith("<svg")
    b = tmp_path / "b"
    assert cli.main(["transfer", "--pipeline", "mc-to-spi", "--input", str(a / "analyze.json"), "--out", str(b)]) == 0
    beta = load(b / "transfer.json")["result"]["beta"]
    assert all(x > 0 for x in beta["r"])


def test_hermite_subcommand(tmp_path):
    assert cli.main(["hermite", "--n-max", "24", "--p-set", "3,4", "--out", str(tmp_path), "--format", "csv"]) == 0
    res = load(tmp_path / "hermite.json")["result"]
    assert max(abs(v - 1) for v in res["l2_norms"]) < 1e-12
    assert res["c_sup"] >= res["c_sup_10_20"]
