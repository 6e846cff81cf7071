import json
import subprocess
import sys

import numpy as np
import pytest

from texrand.cli import main
from texrand.imaging import Image, read_image, write_image
from texrand.trainer.benchmark import painting_pool


def run(capsys, *argv):
    code = main(list(map(str, argv)))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    lines = [line for line in out.splitlines() if line.strip()]
    assert len(lines) == 1, out
    obj = json.loads(lines[0])
    assert obj["exit_code"] == code and obj["ok"] == (code == 0)
    return code, obj


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    paintings = root / "paintings"
    paintings.mkdir()
    for i, p in enumerate(painting_pool(3, size=48)):
        write_image(paintings / f"p{i}.png", p)
    write_image(paintings / "flat.png", Image(np.full((48, 48, 3), 0.5)))
    photos = root / "photos"
    photos.mkdir()
    rng = np.random.default_rng(1)
    for name in ("a", "b"):
        write_image(photos / f"{name}.png", Image(rng.random((36, 40, 3))))
    assert main(["--quiet", "tcps", "select", "--dir", str(paintings), "--k", "3", "--out", str(root / "pool.json")]) == 0
    return root


class TestGlobal:
    def test_no_command_is_usage_error(self, capsys):
        code, obj = run_json(capsys)
        assert code == 2 and "error" in obj

    def test_unknown_flag_is_usage_error(self, capsys):
        assert run(capsys, "ltr", "mask", "--bogus")[0] == 2

    def test_global_flags_after_subcommand(self, capsys, tmp_path):
        code, obj = run_json(capsys, "ltr", "mask", "--size", "32x32", "--seed", "3", "--out", tmp_path / "m.png")
        assert code == 0 and obj["seed"] == 3

    def test_console_script_module(self):
        proc = subprocess.run([sys.executable, "-m", "texrand.cli", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("texrand ")


class TestTcps:
    def test_score_four_decimals(self, capsys, workspace):
        code, out, _ = run(capsys, "tcps", "score", workspace / "paintings" / "flat.png")
        assert code == 0 and out.strip() == "0.0000"

    def test_score_missing_file_is_io_error(self, capsys, tmp_path):
        code, obj = run_json(capsys, "tcps", "score", tmp_path / "none.png")
        assert code == 3 and "error" in obj

    def test_select_writes_manifest(self, workspace):
        entries = json.loads((workspace / "pool.json").read_text())
        assert len(entries) == 3
        assert all(0.55 <= e["texture_complexity"] <= 0.65 for e in entries)
        assert "flat" not in json.dumps(entries)

    def test_select_too_few_is_validation_error(self, capsys, workspace, tmp_path):
        code, obj = run_json(capsys, "tcps", "select", "--dir", workspace / "paintings", "--k", "10",
                             "--out", tmp_path / "pool.json")
        assert code == 4 and "short by" in obj["error"]

    def test_bad_band_is_validation_error(self, capsys, workspace, tmp_path):
        code, _ = run_json(capsys, "tcps", "select", "--dir", workspace / "paintings", "--band", "0.5",
                           "--out", tmp_path / "pool.json")
        assert code == 4


class TestGtrLtr:
    def test_gtr_identity(self, capsys, workspace, tmp_path):
        out = tmp_path / "g.png"
        code, obj = run_json(capsys, "gtr", "--content", workspace / "photos" / "a.png",
                             "--style", workspace / "paintings" / "p0.png", "--out", out)
        assert code == 0 and obj["backend"] == "identity"
        assert read_image(out).shape == (36, 40, 3)

    def test_gtr_conv_needs_weights(self, capsys, workspace, tmp_path):
        code, _ = run_json(capsys, "gtr", "--backend", "conv", "--content", workspace / "photos" / "a.png",
                           "--style", workspace / "paintings" / "p0.png", "--out", tmp_path / "g.png")
        assert code == 4

    def test_mask_is_binary_and_deterministic(self, capsys, tmp_path):
        for name in ("a", "b"):
            code, obj = run_json(capsys, "ltr", "mask", "--size", "48x36", "--seed", 9, "--out", tmp_path / f"{name}.png")
            assert code == 0 and 4 <= obj["lambda"] <= 16
        assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()
        data = read_image(tmp_path / "a.png").data
        assert data.shape == (48, 36, 1) and set(np.unique(data)) <= {0.0, 255.0}

    def test_fixed_lambda(self, capsys, tmp_path):
        code, obj = run_json(capsys, "ltr", "mask", "--size", "32x32", "--lambda", 6, "--out", tmp_path / "m.png")
        assert code == 0 and obj["lambda"] == 6

    def test_bad_size_is_validation_error(self, capsys, tmp_path):
        assert run_json(capsys, "ltr", "mask", "--size", "16", "--out", tmp_path / "m.png")[0] == 4

    def test_bad_p_is_validation_error(self, capsys, tmp_path):
        assert run_json(capsys, "ltr", "mask", "--p", "1.5", "--out", tmp_path / "m.png")[0] == 4

    def test_apply_picks_pixels_from_both(self, capsys, tmp_path):
        write_image(tmp_path / "x.png", Image(np.zeros((8, 8, 3))))
        write_image(tmp_path / "g.png", Image(np.ones((8, 8, 3))))
        mask = np.zeros((8, 8, 1))
        mask[:, 4:] = 255.0
        write_image(tmp_path / "m.png", Image(mask, "byte"))
        code, _ = run_json(capsys, "ltr", "apply", "--content", tmp_path / "x.png", "--stylized", tmp_path / "g.png",
                           "--mask", tmp_path / "m.png", "--out", tmp_path / "o.png")
        out = read_image(tmp_path / "o.png").data
        assert code == 0
        assert np.all(out[:, :4] == 0) and np.all(out[:, 4:] == 255)


class TestAugment:
    def test_outputs_and_manifest(self, capsys, workspace, tmp_path):
        code, obj = run_json(capsys, "augment", "--in", workspace / "photos", "--pool", workspace / "pool.json",
                             "--out", tmp_path, "--seed", 4)
        assert code == 0 and obj["augmented"] == 2
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["seed"] == 4 and manifest["failed"] == []
        for item in manifest["items"]:
            assert 4.0 <= item["lambda"] <= 16.0
            for key in ("gtr", "ltr", "mask"):
                assert read_image(item[key]).shape[:2] == (36, 40)
        assert manifest["items"][0]["seed"] != manifest["items"][1]["seed"]

    def test_rerun_is_byte_identical(self, capsys, workspace, tmp_path):
        for d in ("one", "two"):
            assert run(capsys, "augment", "--in", workspace / "photos", "--pool", workspace / "pool.json",
                       "--out", tmp_path / d, "--seed", 11)[0] == 0
        for f in sorted((tmp_path / "one").iterdir()):
            if f.suffix == ".png":
                assert f.read_bytes() == (tmp_path / "two" / f.name).read_bytes()

    def test_empty_dir(self, capsys, workspace, tmp_path):
        (tmp_path / "in").mkdir()
        code, obj = run_json(capsys, "augment", "--in", tmp_path / "in", "--pool", workspace / "pool.json",
                             "--out", tmp_path / "out")
        assert code == 0 and obj["augmented"] == 0
        assert json.loads((tmp_path / "out" / "manifest.json").read_text())["items"] == []

    def test_unreadable_input_listed(self, capsys, workspace, tmp_path):
        src = tmp_path / "in"
        src.mkdir()
        (src / "broken.png").write_bytes(b"garbage")
        write_image(src / "fine.png", Image(np.random.default_rng(0).random((32, 32, 3))))
        code, obj = run_json(capsys, "augment", "--in", src, "--pool", workspace / "pool.json", "--out", tmp_path / "o")
        assert code == 3 and len(obj["failed"]) == 1 and obj["augmented"] == 1


class TestTrainEval:
    def test_dataset(self, capsys, tmp_path):
        code, obj = run_json(capsys, "dataset", "--domain", "target", "--n", 2, "--out", tmp_path)
        assert code == 0 and obj["n"] == 2
        label = read_image(tmp_path / "00001.label.png").data
        assert label.max() <= 3 and label.shape == (64, 64, 1)

    def test_train_then_eval(self, capsys, workspace, tmp_path):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("iterations = 50\nwidths = 4\nlr0 = 0.01\n")
        code, obj = run_json(capsys, "train", "--config", cfg, "--n", 8, "--iterations", 4,
                             "--out", tmp_path / "m.bin", "--log", tmp_path / "log.csv")
        assert code == 0 and obj["iterations"] == 4
        assert (tmp_path / "log.csv").read_text().startswith("iter,lr,l_seg,l_con\n")
        code, out, _ = run(capsys, "eval", "--model", tmp_path / "m.bin", "--n", 3)
        assert code == 0
        lines = out.strip().splitlines()
        assert [line.split()[0] for line in lines] == ["background", "circle", "rectangle", "triangle", "mIoU"]

    def test_train_randomization_needs_pool(self, capsys, tmp_path):
        code, obj = run_json(capsys, "train", "--gtr", "--iterations", 1, "--out", tmp_path / "m.bin")
        assert code == 4

    def test_cgl_alone_is_validation_error(self, capsys, tmp_path):
        assert run_json(capsys, "train", "--cgl", "--iterations", 1, "--out", tmp_path / "m.bin")[0] == 4

    def test_eval_missing_model(self, capsys, tmp_path):
        assert run_json(capsys, "eval", "--model", tmp_path / "none.bin")[0] == 3
