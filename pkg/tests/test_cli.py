import json


from lpembed.cli import main


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_stable_verify_default(tmp_path):
    code, report, out = run(tmp_path, "stable-verify")
    assert code == 0 and report["passed"]
    assert report["config"]["r"] == 2.0 and "timestamp" in report["metadata"]
    assert (out / "cf_grid.csv").read_text().startswith("t,empirical_cf")


def test_stable_verify_rejects_bad_r(tmp_path):
    assert run(tmp_path, "stable-verify", "--r", "3")[0] == 2


def test_stable_verify_zero_scale(tmp_path):
    code, report, _ = run(tmp_path, "stable-verify", "--sigma", "0")
    assert code == 0 and report["results"]["max_cf_error"] == 0


def test_verify_embedding(tmp_path):
    code, report, out = run(tmp_path, "verify-embedding", "--N", "200000")
    assert code == 0 and report["results"]["max_error"] <= 0.05
    assert (out / "isometry.csv").exists()
    assert run(tmp_path, "verify-embedding", "--r", "1", "--p", "1.5")[0] == 2


def test_verify_embedding_complex(tmp_path):
    code, report, _ = run(tmp_path, "verify-embedding", "--field", "complex", "--N", "100000", "--trials", "3")
    assert report["results"]["config"]["field"] == "complex"
    assert code == 0


def test_check_tn_exact(tmp_path):
    code, report, out = run(tmp_path, "check-tn", "--mode", "exact", "--r", "1.5", "--p", "1.5", "--tol", "1e-12")
    assert code == 0 and report["results"]["max_value"] <= 1e-12
    assert (out / "sentences.csv").exists()


def test_check_tn_rejects_negative_n(tmp_path):
    assert run(tmp_path, "check-tn", "--n", "-1")[0] == 2
    assert run(tmp_path, "check-tn", "--mode", "exact", "--r", "2", "--p", "1")[0] == 2


def test_lift_demo(tmp_path):
    code, report, _ = run(tmp_path, "lift-demo")
    assert code == 0 and report["results"]["isometry_residual"] <= 1e-10
    assert report["results"]["node_images_exact"]


def test_complex_check(tmp_path):
    code, report, _ = run(tmp_path, "complex-check")
    assert code == 0
    code, report, _ = run(tmp_path, "complex-check", "--norm", "sum")
    assert code == 1 and report["results"]["failing_conditions"] == ["condition_2"]


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"r": 1.0, "N": 50000}))
    code, report, _ = run(tmp_path, "stable-verify", "--r", "2", "--config", str(cfg))
    assert report["config"]["r"] == 1.0 and report["config"]["N"] == 50000
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(tmp_path, "stable-verify", "--config", str(cfg))[0] == 2


def test_reports_are_reproducible(tmp_path):
    reports = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert main(["lift-demo", "--depth", "2", "--out", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())
        rep.pop("metadata")
        reports.append((json.dumps(rep, sort_keys=True), (out / "lift.csv").read_bytes()))
    assert reports[0] == reports[1]


def test_usage_errors():
    assert main([]) == 2
    assert main(["nope"]) == 2
    assert main(["--help"]) == 0
