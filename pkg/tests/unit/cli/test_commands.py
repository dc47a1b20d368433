"""
Tests for the command-line interface and its exit codes.
"""

import csv
from pathlib import Path

import pytest

from src.cli.commands import (
    EXIT_CHECKPOINT,
    EXIT_DATASET,
    EXIT_DIVERGED,
    EXIT_FAILED,
    EXIT_IMAGE_IO,
    EXIT_OK,
    EXIT_USAGE,
    exit_code_for,
    parse_scale,
    parse_size,
    run,
)
from src.services.exceptions import ChecksumError, ContractError, TrainingDivergedError
from src.services.harness.checkpoint import save_checkpoint
from src.services.imaging.png_io import load_png, save_png
from src.services.network.model import SuperResolutionModel
from tests.helpers import make_image, make_spec, tiny_config_values, write_config


@pytest.fixture()
def checkpoint(tmp_path: Path) -> Path:
    model = SuperResolutionModel.initialise(make_spec(k=2), seed=0)
    return save_checkpoint(model, tmp_path / "model.ckpt").path


@pytest.fixture()
def lr_png(tmp_path: Path) -> Path:
    return save_png(make_image(10, 10, seed=4), tmp_path / "lr.png")


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------
class TestArgumentHelpers:
    def test_parse_size(self) -> None:
        assert parse_size("120x90") == (120, 90)
        assert parse_size(" 3 X 4 ") == (3, 4)

    @pytest.mark.parametrize("text", ["12", "0x5", "ax3", "3x4x5"])
    def test_parse_size_invalid(self, text: str) -> None:
        with pytest.raises(ContractError):
            parse_size(text)

    @pytest.mark.parametrize("text", ["0", "-1", "inf", "abc"])
    def test_parse_scale_invalid(self, text: str) -> None:
        with pytest.raises(ContractError):
            parse_scale(text)

    def test_exit_code_mapping(self) -> None:
        assert exit_code_for(ChecksumError("bad")) == EXIT_CHECKPOINT
        assert exit_code_for(TrainingDivergedError(0, 0, 0, float("nan"))) == EXIT_DIVERGED
        assert exit_code_for(RuntimeError("other")) == EXIT_FAILED


# ---------------------------------------------------------------------------
# upscale
# ---------------------------------------------------------------------------
class TestUpscaleCommand:
    def test_real_scale(self, checkpoint: Path, lr_png: Path, tmp_path: Path) -> None:
        out = tmp_path / "sr.png"
        assert run(["upscale", str(checkpoint), str(lr_png), str(out), "--scale", "2.5"]) == EXIT_OK
        assert load_png(out).size == (25, 25)

    def test_explicit_size(self, checkpoint: Path, lr_png: Path, tmp_path: Path) -> None:
        out = tmp_path / "sr.png"
        assert run(["upscale", str(checkpoint), str(lr_png), str(out), "--size", "7x13"]) == EXIT_OK
        assert load_png(out).size == (7, 13)

    def test_needs_scale_or_size(self, checkpoint: Path, lr_png: Path, tmp_path: Path) -> None:
        assert run(["upscale", str(checkpoint), str(lr_png), str(tmp_path / "sr.png")]) == EXIT_USAGE

    def test_missing_checkpoint(self, lr_png: Path, tmp_path: Path) -> None:
        args = ["upscale", str(tmp_path / "none.ckpt"), str(lr_png), str(tmp_path / "sr.png"), "--scale", "2"]
        assert run(args) == EXIT_CHECKPOINT

    def test_corrupt_checkpoint(self, checkpoint: Path, lr_png: Path, tmp_path: Path) -> None:
        blob = bytearray(checkpoint.read_bytes())
        blob[40] ^= 0x01
        checkpoint.write_bytes(bytes(blob))
        args = ["upscale", str(checkpoint), str(lr_png), str(tmp_path / "sr.png"), "--scale", "2"]
        assert run(args) == EXIT_CHECKPOINT

    def test_unreadable_input(self, checkpoint: Path, tmp_path: Path) -> None:
        args = ["upscale", str(checkpoint), str(tmp_path / "none.png"), str(tmp_path / "sr.png"), "--scale", "2"]
        assert run(args) == EXIT_IMAGE_IO


# ---------------------------------------------------------------------------
# train / ablate-k
# ---------------------------------------------------------------------------
class TestTrainCommand:
    def test_trains_and_writes_outputs(self, toy_dirs: tuple[Path, Path], tmp_path: Path) -> None:
        out = tmp_path / "out"
        cfg = write_config(tmp_path / "tiny.cfg", **tiny_config_values(toy_dirs[0], out))
        assert run(["train", str(cfg)]) == EXIT_OK
        assert (out / "tiny.ckpt").is_file()
        assert (out / "tiny.ckpt.manifest").is_file()
        with (out / "tiny_loss.csv").open(encoding="utf-8") as handle:
            assert len(list(csv.reader(handle))) == 3

    def test_zero_k_is_a_usage_error(self, toy_dirs: tuple[Path, Path], tmp_path: Path) -> None:
        cfg = write_config(tmp_path / "bad.cfg", **tiny_config_values(toy_dirs[0], tmp_path, k=0))
        assert run(["train", str(cfg)]) == EXIT_USAGE

    def test_unknown_key(self, toy_dirs: tuple[Path, Path], tmp_path: Path) -> None:
        cfg = write_config(tmp_path / "bad.cfg", **tiny_config_values(toy_dirs[0], tmp_path, colour="blue"))
        assert run(["train", str(cfg)]) == EXIT_USAGE

    def test_missing_config_file(self, tmp_path: Path) -> None:
        assert run(["train", str(tmp_path / "none.cfg")]) == EXIT_USAGE

    def test_missing_dataset(self, tmp_path: Path) -> None:
        cfg = write_config(tmp_path / "tiny.cfg", **tiny_config_values(tmp_path / "absent", tmp_path))
        assert run(["train", str(cfg)]) == EXIT_DATASET

    def test_images_too_small(self, tmp_path: Path) -> None:
        data = tmp_path / "small"
        data.mkdir()
        save_png(make_image(5, 5), data / "tiny.png")
        cfg = write_config(tmp_path / "tiny.cfg", **tiny_config_values(data, tmp_path))
        assert run(["train", str(cfg)]) == EXIT_DATASET

    def test_ablate_k_writes_report(self, toy_dirs: tuple[Path, Path], tmp_path: Path) -> None:
        train_dir, val_dir = toy_dirs
        cfg = write_config(tmp_path / "tiny.cfg", **tiny_config_values(train_dir, tmp_path, val_dir=val_dir))
        assert run(["ablate-k", str(cfg), "--k-list", "1,2", "--output-dir", str(tmp_path / "abl")]) == EXIT_OK
        with (tmp_path / "abl" / "ablation_k.csv").open(encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [row["k"] for row in rows] == ["1", "2"]
        assert all(row["status"] == "ok" for row in rows)

    def test_ablate_k_rejects_zero(self, toy_dirs: tuple[Path, Path], tmp_path: Path) -> None:
        cfg = write_config(tmp_path / "tiny.cfg", **tiny_config_values(toy_dirs[0], tmp_path))
        assert run(["ablate-k", str(cfg), "--k-list", "0,2"]) == EXIT_USAGE


# ---------------------------------------------------------------------------
# eval / make-toy-set / parser
# ---------------------------------------------------------------------------
class TestEvalCommand:
    def test_report_and_table(
        self, checkpoint: Path, toy_dirs: tuple[Path, Path], tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        report = tmp_path / "eval.csv"
        args = ["eval", str(checkpoint), str(toy_dirs[1]), "--scales", "2,3", "--ssim", "--output", str(report)]
        assert run(args) == EXIT_OK
        with report.open(encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [(row["method"], row["scale"]) for row in rows] == [
            ("bicubic", "2.0"),
            ("bicubic", "3.0"),
            ("model", "2.0"),
            ("model", "3.0"),
        ]
        assert "PSNR (dB)" in capsys.readouterr().out

    def test_empty_directory(self, checkpoint: Path, tmp_path: Path) -> None:
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run(["eval", str(checkpoint), str(empty), "--output", str(tmp_path / "r.csv")]) == EXIT_DATASET

    def test_all_images_unreadable(self, checkpoint: Path, tmp_path: Path) -> None:
        data = tmp_path / "broken"
        data.mkdir()
        (data / "x.png").write_bytes(b"garbage")
        assert run(["eval", str(checkpoint), str(data), "--output", str(tmp_path / "r.csv")]) == EXIT_FAILED

    def test_bad_scales(self, checkpoint: Path, toy_dirs: tuple[Path, Path], tmp_path: Path) -> None:
        args = ["eval", str(checkpoint), str(toy_dirs[1]), "--scales", "0", "--output", str(tmp_path / "r.csv")]
        assert run(args) == EXIT_USAGE


class TestMiscCommands:
    def test_make_toy_set(self, tmp_path: Path) -> None:
        assert run(["make-toy-set", str(tmp_path / "toy"), "--count", "2", "--val-count", "1"]) == EXIT_OK
        assert len(list((tmp_path / "toy" / "train").glob("*.png"))) == 2
        assert len(list((tmp_path / "toy" / "val").glob("*.png"))) == 1

    def test_missing_subcommand(self) -> None:
        assert run([]) == EXIT_USAGE

    def test_unknown_option(self) -> None:
        assert run(["upscale", "--bogus"]) == EXIT_USAGE
