import json
import os

import numpy as np
import pytest

from hotspeckle.cli import main
from hotspeckle.imgio import read_pgm, write_pgm
from hotspeckle.restore import TurbulenceParams
from hotspeckle.synth import HazeSpec, SpeckleSpec, degrade_haze, gen_speckle


@pytest.fixture()
def speckle_file(tmp_path):
    img = gen_speckle(SpeckleSpec(width=160, height=160, seed=77))
    path = tmp_path / "speckle.pgm"
    write_pgm(str(path), img)
    return str(path)


def run(args):
    return main(args)


class TestExitCodes:
    def test_usage_error_is_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["fuse"])  # missing required inputs and --out
        assert exc.value.code == 2

    def test_missing_file_is_1(self, tmp_path, capsys):
        rc = run(["fsim", "--ref", str(tmp_path / "a.pgm"), "--target", str(tmp_path / "b.pgm")])
        assert rc == 1

    def test_success_is_0(self, speckle_file, capsys):
        assert run(["mig", speckle_file]) == 0


class TestFsimCommand:
    def test_identical_prints_one(self, speckle_file, capsys):
        rc = run(["fsim", "--ref", speckle_file, "--target", speckle_file])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "1.000000"

    def test_undefined_score_nonzero_exit(self, tmp_path, capsys):
        flat = tmp_path / "flat.pgm"
        write_pgm(str(flat), np.full((64, 64), 0.5))
        rc = run(["fsim", "--ref", str(flat), "--target", str(flat)])
        assert rc == 1


class TestSynthCommand:
    def test_deterministic_rerun(self, tmp_path, capsys):
        out1 = tmp_path / "c1"
        out2 = tmp_path / "c2"
        for out in (out1, out2):
            rc = run(["synth", "--out", str(out), "--count", "2", "--seed", "9",
                      "--width", "96", "--height", "96"])
            assert rc == 0
        for name in ("speckle_0000.pgm", "speckle_0001.pgm", "corpus.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_degraded_corpus(self, tmp_path, capsys):
        out = tmp_path / "under"
        rc = run(["synth", "--out", str(out), "--count", "1", "--seed", "3",
                  "--width", "96", "--height", "96", "--degrade", "under", "--gain", "0.15"])
        assert rc == 0
        img = read_pgm(str(out / "speckle_0000.pgm"))
        assert img.max() <= 0.16


class TestFuseCommand:
    def test_single_image(self, tmp_path, speckle_file, capsys):
        out = tmp_path / "fused"
        rc = run(["fuse", "--out", str(out), speckle_file])
        assert rc == 0
        report = json.loads((out / "fuse_report.json").read_text())
        assert report["n_ok"] == 1
        assert (out / "manifest.json").exists()

    def test_continue_on_error(self, tmp_path, speckle_file, capsys):
        out = tmp_path / "fused"
        rc = run(["fuse", "--out", str(out), speckle_file, str(tmp_path / "missing.pgm")])
        assert rc == 0  # at least one file succeeded
        report = json.loads((out / "fuse_report.json").read_text())
        assert report["n_ok"] == 1
        assert report["n_failed"] == 1

    def test_all_failed_is_failure(self, tmp_path, capsys):
        out = tmp_path / "fused"
        rc = run(["fuse", "--out", str(out), str(tmp_path / "missing.pgm")])
        assert rc == 1

    def test_deterministic_outputs(self, tmp_path, speckle_file, capsys):
        outs = []
        for name in ("f1", "f2"):
            out = tmp_path / name
            assert run(["fuse", "--out", str(out), speckle_file]) == 0
            outs.append(out)
        assert (outs[0] / "speckle_fused.pgm").read_bytes() == (outs[1] / "speckle_fused.pgm").read_bytes()
        assert (outs[0] / "fuse_report.json").read_bytes() == (outs[1] / "fuse_report.json").read_bytes()

    def test_jobs_flag_keeps_order(self, tmp_path, capsys):
        files = []
        for i in range(3):
            img = gen_speckle(SpeckleSpec(width=96, height=96, seed=200 + i))
            path = tmp_path / f"s{i}.pgm"
            write_pgm(str(path), img)
            files.append(str(path))
        out1, out2 = tmp_path / "seq", tmp_path / "par"
        assert run(["fuse", "--out", str(out1), *files]) == 0
        assert run(["fuse", "--out", str(out2), "--jobs", "3", *files]) == 0
        r1 = json.loads((out1 / "fuse_report.json").read_text())
        r2 = json.loads((out2 / "fuse_report.json").read_text())
        assert [f["input"] for f in r1["files"]] == [f["input"] for f in r2["files"]]
        assert (out1 / "s0_fused.pgm").read_bytes() == (out2 / "s0_fused.pgm").read_bytes()


class TestDicCommand:
    def test_identical_images_full_edca(self, tmp_path, capsys):
        img = gen_speckle(SpeckleSpec(width=160, height=160, dot_density=18.0,
                                      dot_radius_mean=2.0, dot_radius_std=0.3, seed=88))
        path = tmp_path / "ref.pgm"
        write_pgm(str(path), img)
        out = tmp_path / "dic"
        rc = run(["dic", "--ref", str(path), "--def", str(path), "--out", str(out)])
        assert rc == 0
        summary = json.loads((out / "dic_summary.json").read_text())
        assert summary["edca"] == 100.0
        csv_lines = (out / "dic_field.csv").read_text().splitlines()
        assert csv_lines[0] == "x,y,u,v,zncc,exx,eyy,gxy,valid"
        assert len(csv_lines) == summary["grid"]["nx"] * summary["grid"]["ny"] + 1


class TestAverageCommand:
    def test_average(self, tmp_path, capsys):
        paths = []
        for i in range(3):
            img = np.full((32, 32), 0.2 + 0.2 * i)
            p = tmp_path / f"f{i}.pgm"
            write_pgm(str(p), img)
            paths.append(str(p))
        out = tmp_path / "mean.pgm"
        rc = run(["average", "--out", str(out), *paths])
        assert rc == 0
        assert np.allclose(read_pgm(str(out)), 0.4, atol=1 / 255)


class TestRestoreCommand:
    def test_restore_report(self, tmp_path, capsys):
        img = gen_speckle(SpeckleSpec(width=128, height=128, seed=90))
        hazed = degrade_haze(img, HazeSpec(params=TurbulenceParams(beta=1e-4, omega=0.9),
                                           warp_amplitude=0.0, noise_sigma=0.0, seed=1))
        ref_p, tgt_p = tmp_path / "ref.pgm", tmp_path / "tgt.pgm"
        write_pgm(str(ref_p), img)
        write_pgm(str(tgt_p), hazed)
        out = tmp_path / "rest"
        rc = run(["restore", "--ref", str(ref_p), "--target", str(tgt_p), "--out", str(out),
                  "--nsr", "0.001"])
        assert rc == 0
        report = json.loads((out / "restore_report.json").read_text())
        assert report["final_fsim"] >= report["initial_fsim"]
        assert report["iterations"] <= 100
        assert (out / "tgt_restored.pgm").exists()


class TestExperimentHaze:
    def test_too_few_frames_is_usage_error(self, tmp_path, speckle_file, capsys):
        out = tmp_path / "exp"
        rc = run(["experiment-haze", "--ref", speckle_file, "--out", str(out), speckle_file])
        assert rc == 2
        err = capsys.readouterr().err
        assert "15" in err
