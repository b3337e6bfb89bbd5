"""Command-line interface: commands, exit codes, artifacts, determinism, replay."""

import json
import math

import pytest

from rosseig.cli import main


def run_cli(*argv):
    return main(list(argv))


class TestBallCommand:
    def test_basic_run(self, tmp_path, capsys):
        out = tmp_path / "ball.json"
        csv = tmp_path / "g.csv"
        code = run_cli("ball", "--space", "K1_n3_nc", "--radius", "1.0",
                       "--out", str(out), "--csv", str(csv))
        assert code == 0
        data = json.loads(out.read_text())
        assert data["solver"] == "shooting"
        assert data["mu1"] > 0
        assert csv.read_text().startswith("r,value\n")
        assert "mu1" in capsys.readouterr().out

    def test_radius_violation_exit_2(self, capsys):
        code = run_cli("ball", "--space", "K2_n2_c", "--radius", "0.9")
        assert code == 2
        assert "radius constraint violated" in capsys.readouterr().err

    def test_cp1_quarter_radius_bound(self, tmp_path):
        out = tmp_path / "b.json"
        code = run_cli("ball", "--space", "K2_n1_c",
                       "--radius", "0.7853981633974483", "--out", str(out))
        assert code == 0
        assert json.loads(out.read_text())["mu1"] >= 2 * (2 + 2) - 1e-6

    def test_bad_space_exit_2(self, capsys):
        assert run_cli("ball", "--space", "K9_n1_c", "--radius", "0.5") == 2


class TestCheckLemmas:
    def test_single_space_identity_only(self, tmp_path, capsys):
        out = tmp_path / "rep.json"
        code = run_cli("check-lemmas", "--spaces", "K2_n2_c",
                       "--checks", "sphere_gradient_identity",
                       "--grid", "500", "--out", str(out))
        assert code == 0
        data = json.loads(out.read_text())
        (check,) = data["checks"]
        assert check["pass"]
        assert abs(check["lhs"]) < 1e-12  # identity holds to rounding

    def test_worker_pool_flag(self):
        code = run_cli("check-lemmas", "--spaces", "K2_n1_c,K1_n3_nc",
                       "--checks", "sphere_gradient_identity", "--grid", "300",
                       "--jobs", "2")
        assert code == 0


class TestVerifyCommand:
    def test_ellipse_pass_with_artifacts(self, tmp_path):
        out = tmp_path / "rep.json"
        wd = tmp_path / "work"
        code = run_cli("verify", "--space", "K1_n2_nc",
                       "--domain", "ellipse:0.25,0.15", "--h", "0.04",
                       "--out", str(out), "--workdir", str(wd))
        assert code == 0
        data = json.loads(out.read_text())
        assert data["summary"]["failed"] == 0
        ids = [c["id"] for c in data["checks"]]
        assert "eigenvalue_sum_bound" in ids
        for name in ("mesh.txt", "ball_profile.csv", "ball.json", "spectrum.json"):
            assert (wd / name).exists()

    def test_ball_equality_case(self, tmp_path):
        out = tmp_path / "rep.json"
        code = run_cli("verify", "--space", "K1_n2_nc", "--domain", "ball:0.5",
                       "--h", "0.03", "--out", str(out))
        assert code == 0
        data = json.loads(out.read_text())
        eq = [c for c in data["checks"] if c["id"] == "eigenvalue_sum_equality"]
        assert eq and eq[0]["lhs"] < 1e-3

    def test_annulus_conservative_pass(self, tmp_path):
        out = tmp_path / "rep.json"
        code = run_cli("verify", "--space", "K1_n3_nc",
                       "--domain", "annulus:0.5,1.5", "--out", str(out))
        assert code == 0
        data = json.loads(out.read_text())
        (check,) = data["checks"]
        assert check["inputs"]["provenance"] == "annulus-candidate"
        assert check["pass"]

    def test_bad_domain_exit_2(self, capsys):
        assert run_cli("verify", "--space", "K1_n2_nc", "--domain", "blob:1") == 2

    def test_compact_domain_outside_chart_exit_2(self):
        # geodesic radius 0.8 exceeds the pi/4 chart of the compact model
        code = run_cli("verify", "--space", "K1_n2_c", "--domain", "ball:0.8",
                       "--h", "0.05")
        assert code == 2


class TestDeterminismAndReplay:
    def test_identical_configs_identical_reports(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ("verify", "--space", "K1_n2_nc", "--domain", "ellipse:0.25,0.15",
                "--h", "0.05")
        assert run_cli(*args, "--out", str(a)) == 0
        assert run_cli(*args, "--out", str(b)) == 0
        da = json.loads(a.read_text())
        db = json.loads(b.read_text())
        da.pop("timestamp")
        db.pop("timestamp")
        assert da == db

    def test_replay_ok(self, tmp_path):
        rep = tmp_path / "rep.json"
        assert run_cli("verify", "--space", "K1_n2_nc",
                       "--domain", "ellipse:0.25,0.15", "--h", "0.05",
                       "--out", str(rep)) == 0
        assert run_cli("replay", str(rep)) == 0

    def test_replay_detects_tampering(self, tmp_path, capsys):
        rep = tmp_path / "rep.json"
        assert run_cli("check-lemmas", "--spaces", "K2_n1_c",
                       "--checks", "sphere_gradient_identity", "--grid", "300",
                       "--out", str(rep)) == 0
        data = json.loads(rep.read_text())
        data["checks"][0]["margin"] += 1e-6
        rep.write_text(json.dumps(data))
        assert run_cli("replay", str(rep)) == 1
        assert "MISMATCH" in capsys.readouterr().out

    def test_lemma_replay(self, tmp_path):
        rep = tmp_path / "rep.json"
        assert run_cli("check-lemmas", "--spaces", "K2_n1_c,K1_n2_nc",
                       "--checks", "sphere_gradient_identity,ratio_monotonicity",
                       "--grid", "400", "--out", str(rep)) == 0
        assert run_cli("replay", str(rep)) == 0
