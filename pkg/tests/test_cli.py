import json

import pytest

from zetabound.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, build_config, build_parser, main, read_config_file


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coeffs_medium_prints_published_deltas(capsys):
    code, out, _ = run(capsys, "coeffs", "medium", "--phi", "0.3414", "--eta", "1.8", "--r0", "4", "--t0", "5.5e7")
    assert code == EXIT_OK
    assert "a1 = 0.59288" in out and "published 0.59289" in out


def test_coeffs_large_json(capsys):
    code, out, _ = run(capsys, "coeffs", "large", "--eta", "1.6", "--r0", "4", "--t0", "1e12", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["published"]["b1"] == 0.478013
    assert abs(float(doc["coefficients"]["b1"]) - 0.478013) < 1e-3


def test_coeffs_infeasible_r0(capsys):
    code, _, err = run(capsys, "coeffs", "medium", "--r0", "9")
    assert code == EXIT_USAGE and "exceeds R0" in err


def test_verify_requires_a_suite(capsys):
    code, _, _ = run(capsys, "verify")
    assert code == EXIT_USAGE


def test_verify_theorem_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, err = run(capsys, "verify", "theorem", "--samples", "12", "--tmax", "1e4", "--seed", "7", "--out", str(out))
    assert code == EXIT_OK and "12 passed" in err
    doc = json.loads(out.read_text())
    assert len(doc["records"]) == 12 and doc["config"]["seed"] == 7

    code, replayed, _ = run(capsys, "replay", "theorem/sample/00004", "--report", str(out))
    assert code == EXIT_OK
    assert json.loads(replayed)["margin"] == doc["records"][4]["margin"]

    code, _, _ = run(capsys, "replay", "theorem/sample/99999", "--report", str(out))
    assert code == EXIT_USAGE


def test_replay_regenerates_from_flags(capsys):
    code, out, _ = run(capsys, "replay", "lemmas/weyl/00002", "--seed", "3")
    assert code == EXIT_OK and json.loads(out)["check_id"] == "lemmas/weyl/00002"


def test_replay_detects_tampered_margin(tmp_path, capsys):
    out = tmp_path / "r.json"
    run(capsys, "verify", "theorem", "--samples", "3", "--tmax", "100", "--out", str(out))
    doc = json.loads(out.read_text())
    doc["records"][1]["margin"] += 1.0
    out.write_text(json.dumps(doc))
    code, _, err = run(capsys, "replay", doc["records"][1]["check_id"], "--report", str(out))
    assert code == EXIT_FAIL and "differs" in err


def test_zeta_modes(capsys):
    code, out, _ = run(capsys, "zeta", "100", "--mode", "reference", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["est_error"] < 1e-8 and float(doc["theorem_bound"]) <= 6.14
    code, out, _ = run(capsys, "zeta", "1e7", "--mode", "rs_upper", "--format", "json")
    doc = json.loads(out)
    assert float(doc["rs_upper"]) <= float(doc["rsl_bound"])
    code, out, _ = run(capsys, "zeta", "1e15", "--mode", "theorem")
    assert code == EXIT_OK and "large" in out
    code, _, err = run(capsys, "zeta", "2", "--mode", "rs_upper")
    assert code == EXIT_USAGE and "200" in err


def test_optimize_outputs(capsys):
    code, out, _ = run(capsys, "optimize", "medium", "--phi", "0.3414", "--eta", "1.8", "--r0", "4")
    lines = out.strip().splitlines()
    assert code == EXIT_OK and len(lines) == 2 and lines[1].startswith("1,0.3414,1.8,4,")
    code, _, err = run(capsys, "optimize", "medium", "--phi", "0.34:0.342:0.001", "--eta", "1.8", "--r0", "40")
    assert code == EXIT_USAGE and "no feasible" in err


def test_audit_command(capsys):
    code, out, _ = run(capsys, "audit", "--t", "1e8", "--r", "4", "--K", "400", "--m", "3", "--K0", "100")
    assert code == EXIT_OK and "PASS identity" in out


def test_config_file_and_flag_precedence(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("seed = 5\nprecision_digits = 35\nsamples.weyl = 9  # comment\n")
    assert read_config_file(cfg_file) == {"seed": 5, "precision_digits": 35, "sample_counts": {"weyl": 9}}
    args = build_parser().parse_args(["verify", "lemmas", "--config", str(cfg_file), "--seed", "6"])
    cfg = build_config(args, "lemmas")
    assert cfg.seed == 6 and cfg.precision_digits == 35 and cfg.samples("weyl") == 9


def test_bad_config_key(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("colour = blue\n")
    code, _, err = run(capsys, "verify", "theorem", "--config", str(cfg_file))
    assert code == EXIT_USAGE and "colour" in err


def test_low_precision_is_a_usage_error(capsys):
    code, _, _ = run(capsys, "verify", "theorem", "--precision", "20")
    assert code == EXIT_USAGE


@pytest.mark.parametrize("argv", [["--help"], ["coeffs", "--help"]])
def test_help_exits_cleanly(argv, capsys):
    assert main(argv) == EXIT_OK


def test_verify_lemmas_default_suite(tmp_path, capsys):
    out = tmp_path / "lemmas.json"
    code, _, _ = run(capsys, "verify", "lemmas", "--seed", "1", "--out", str(out))
    records = json.loads(out.read_text())["records"]
    assert code == EXIT_OK and len(records) >= 600
    assert all(r["pass"] and not r["skipped"] for r in records)
