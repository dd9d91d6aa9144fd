"""CLI contract tests: validation messages name the violated constraint,
config files merge under flags, manifests reference every output with a
content hash, and identical configs reproduce identical bytes."""

import json
import math

import numpy as np
import pytest

from loggas import cli, io
from loggas.errors import DomainError


def run_cli(argv):
    args = cli.parse_config(list(argv))
    return cli.run(args)


def read_manifest(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def test_defaults_filled(tmp_path):
    args = cli.parse_config(
        ["evolve", "--model", "dyson", "--beta", "2", "--n", "64",
         "--t-final", "0.1", "--out", str(tmp_path)])
    assert args.dt == 1e-3 and args.replicas == 1 and math.isinf(args.r)


def test_bessel_parameter_constraint_named():
    with pytest.raises(DomainError, match="a >= 1"):
        cli.parse_config(["evolve", "--model", "bessel", "--a", "0.5", "--n", "4",
                          "--t-final", "0.1", "--out", "/tmp/x"])


def test_planar_beta_constraint_named():
    with pytest.raises(DomainError, match="beta = 2"):
        cli.parse_config(["evolve", "--model", "ginibre1", "--beta", "4", "--n", "4",
                          "--t-final", "0.1", "--out", "/tmp/x"])


def test_zero_replicas_rejected():
    with pytest.raises(DomainError, match="replicas"):
        cli.parse_config(["sample", "--family", "gaussian-beta", "--n", "4",
                          "--replicas", "0", "--out", "/tmp/x"])


def test_config_file_merge_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# evolve defaults\n"
        "model = dyson\n"
        "beta = 2\n"
        "n = 8\n"
        "t-final = 0.01\n"
        "record-noise = true\n"
    )
    args = cli.parse_config(
        ["evolve", "--config", str(cfg), "--beta", "4",
         "--out", str(tmp_path / "o")])
    assert args.model == "dyson" and args.n == 8
    assert args.beta == 4.0                      # flag overrides file
    assert args.record_noise is True


def test_config_file_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    with pytest.raises(DomainError, match="frobnicate"):
        cli.parse_config(["sample", "--config", str(cfg), "--family",
                          "gaussian-beta", "--n", "4", "--out", str(tmp_path)])


def test_sample_outputs_and_manifest(tmp_path):
    man = run_cli(["sample", "--family", "gaussian-beta", "--n", "16",
                   "--seed", "5", "--replicas", "3", "--out", str(tmp_path)])
    manifest = read_manifest(man)
    assert manifest["subcommand"] == "sample"
    assert {e["path"] for e in manifest["outputs"]} == {"samples.csv"}
    io.verify_outputs(manifest, tmp_path)
    data = io.read_csv(tmp_path / "samples.csv")
    assert set(np.unique(data["replica"])) == {0.0, 1.0, 2.0}
    x0 = data["x"][data["replica"] == 0]
    assert (np.diff(x0) > 0).all()


def test_identical_config_identical_bytes(tmp_path):
    argv = ["evolve", "--model", "dyson", "--beta", "2", "--n", "6",
            "--t-final", "0.01", "--dt", "1e-3", "--seed", "9",
            "--replicas", "2", "--grid-points", "6", "--record-noise"]
    m1 = run_cli(argv + ["--out", str(tmp_path / "a")])
    m2 = run_cli(argv + ["--out", str(tmp_path / "b")])
    for name in ("trajectory.csv", "noise.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    ma, mb = read_manifest(m1), read_manifest(m2)
    assert ma["config_hash"] == mb["config_hash"]
    assert [e["sha256"] for e in ma["outputs"]] == [e["sha256"] for e in mb["outputs"]]


def test_csv_roundtrip_full_precision(tmp_path):
    run_cli(["sample", "--family", "gaussian-beta", "--n", "32", "--seed", "2",
             "--out", str(tmp_path)])
    from loggas import ensembles as E
    direct = E.sample(E.EnsembleSpec("gaussian-beta", 32, 2.0, seed=2))
    parsed = io.read_csv(tmp_path / "samples.csv")["x"]
    assert (parsed == direct).all()


def test_ifc_check_pipeline(tmp_path):
    run_cli(["evolve", "--model", "dyson", "--beta", "2", "--n", "8",
             "--t-final", "0.02", "--dt", "1e-3", "--seed", "7",
             "--grid-points", "5", "--record-noise", "--out", str(tmp_path / "e")])
    man = run_cli(["ifc-check", "--trajectory", str(tmp_path / "e"),
                   "--ms", "1,4,8", "--out", str(tmp_path / "i")])
    table = io.read_csv(tmp_path / "i" / "ifc.csv")
    assert table["m"].tolist() == [1.0, 4.0, 8.0]
    assert (table["max_dev"] <= 1e-12).all()
    assert read_manifest(man)["diagnostics"]["max_dev"] <= 1e-12


def test_ifc_check_requires_noise(tmp_path):
    run_cli(["evolve", "--model", "dyson", "--beta", "2", "--n", "4",
             "--t-final", "0.01", "--seed", "1", "--grid-points", "3",
             "--out", str(tmp_path / "e")])
    with pytest.raises(DomainError, match="noise"):
        run_cli(["ifc-check", "--trajectory", str(tmp_path / "e"),
                 "--ms", "1", "--out", str(tmp_path / "i")])


def test_kernel_grid_and_det(tmp_path):
    run_cli(["kernel", "--family", "sine", "--mode", "grid", "--x-min", "-1",
             "--x-max", "1", "--x-num", "5", "--out", str(tmp_path / "g")])
    rows = io.read_csv(tmp_path / "g" / "kernel.csv")
    assert rows["value"].size == 25
    diag = rows["value"][(rows["x"] == rows["y"])]
    np.testing.assert_allclose(diag, 1.0)

    run_cli(["kernel", "--family", "sine", "--mode", "det", "--domain-min", "0",
             "--domain-max", "0.01", "--order", "16", "--chi", "-1",
             "--out", str(tmp_path / "d")])
    det = json.loads((tmp_path / "d" / "det.json").read_text())
    assert det["value"] == pytest.approx(0.99, abs=1e-3)
    assert det["refinement_error"] <= 1e-6


def test_measures_ibp_json(tmp_path):
    run_cli(["measures", "ibp", "--n", "2", "--beta", "2", "--replicas", "20000",
             "--seed", "3", "--out", str(tmp_path)])
    payload = json.loads((tmp_path / "ibp.json").read_text())
    assert payload["pass_3sigma"]
    assert payload["replicas"] == 20000


def test_stats_density_verdict(tmp_path):
    run_cli(["sample", "--family", "gaussian-beta", "--n", "500", "--seed", "11",
             "--out", str(tmp_path / "s")])
    run_cli(["stats", "--manifest", str(tmp_path / "s"), "--analysis", "density",
             "--out", str(tmp_path / "d")])
    verdict = json.loads((tmp_path / "d" / "verdict.json").read_text())["verdicts"][0]
    assert verdict["name"] == "semicircle-ks" and verdict["pass"]
    hist = io.read_csv(tmp_path / "d" / "density.csv")
    widths = hist["bin_hi"] - hist["bin_lo"]
    assert abs((hist["density"] * widths).sum() - 1.0) <= 1e-12


def test_stats_radial_verdict(tmp_path):
    run_cli(["sample", "--family", "ginibre", "--n", "300", "--seed", "3",
             "--out", str(tmp_path / "g")])
    run_cli(["stats", "--manifest", str(tmp_path / "g"), "--analysis", "radial",
             "--out", str(tmp_path / "r")])
    verdict = json.loads((tmp_path / "r" / "verdict.json").read_text())["verdicts"][0]
    assert verdict["name"] == "radial-chi2-pvalue" and verdict["pass"]


def test_stats_stationarity_requires_consistent_manifest(tmp_path):
    run_cli(["sample", "--family", "gaussian-beta", "--n", "8", "--seed", "1",
             "--out", str(tmp_path / "s")])
    with pytest.raises(DomainError, match="evolve"):
        run_cli(["stats", "--manifest", str(tmp_path / "s"),
                 "--analysis", "stationarity", "--out", str(tmp_path / "x")])


def test_manifest_detects_tamper(tmp_path):
    run_cli(["sample", "--family", "gaussian-beta", "--n", "8", "--seed", "1",
             "--out", str(tmp_path)])
    (tmp_path / "samples.csv").write_text("tampered\n")
    manifest = read_manifest(tmp_path / "manifest.json")
    with pytest.raises(DomainError, match="hash mismatch"):
        io.verify_outputs(manifest, tmp_path)


def test_main_reports_errors_to_stderr(capsys):
    rc = cli.main(["evolve", "--model", "bessel", "--a", "0.5", "--n", "4",
                   "--t-final", "0.1", "--out", "/tmp/nowhere"])
    assert rc == 2
    assert "a >= 1" in capsys.readouterr().err
