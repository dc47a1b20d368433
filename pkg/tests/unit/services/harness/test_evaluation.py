"""
Unit tests for the evaluation protocol and its report.
"""

import math
from pathlib import Path

import pytest

from src.services.exceptions import ContractError
from src.services.harness.evaluation import (
    BICUBIC,
    EvalReport,
    EvalRow,
    ModelUpscaler,
    bicubic_upscaler,
    evaluate,
    load_eval_images,
    lr_size,
    method_names,
    parse_scales,
)
from src.services.imaging.models import Image
from src.services.imaging.png_io import save_png
from src.services.network.model import SuperResolutionModel
from tests.helpers import make_image, make_spec


@pytest.fixture()
def images() -> list[tuple[str, Image]]:
    return [("a", make_image(16, 16, seed=1)), ("b", make_image(12, 18, seed=2))]


class TestParseScales:
    def test_numbers(self) -> None:
        assert parse_scales("2, 3.5") == (2.0, 3.5)

    def test_presets(self) -> None:
        assert parse_scales("in") == (2.0, 3.0, 4.0)
        assert parse_scales("in,out")[-1] == 30.0

    @pytest.mark.parametrize("text", ["", "0", "-2", "two", "nan"])
    def test_invalid(self, text: str) -> None:
        with pytest.raises(ContractError):
            parse_scales(text)

    def test_lr_size_rounds_and_floors_at_one(self) -> None:
        assert lr_size(10, 15, 4.0) == (2, 4)
        assert lr_size(3, 3, 30.0) == (1, 1)


class TestEvaluate:
    def test_bicubic_identity_at_scale_one(self, images: list[tuple[str, Image]]) -> None:
        report = evaluate({BICUBIC: bicubic_upscaler}, images, [1.0])
        assert report.row(BICUBIC, 1.0).psnr == math.inf

    def test_one_row_per_method_and_scale(self, images: list[tuple[str, Image]]) -> None:
        model = SuperResolutionModel.initialise(make_spec(k=2), seed=0)
        methods = {BICUBIC: bicubic_upscaler, "aliif": ModelUpscaler(model)}
        report = evaluate(methods, images, [2.0, 3.0], with_ssim=True)
        assert [(row.method, row.scale) for row in report.rows] == [
            (BICUBIC, 2.0),
            (BICUBIC, 3.0),
            ("aliif", 2.0),
            ("aliif", 3.0),
        ]
        for row in report.rows:
            assert row.images == 2 and row.failed == 0 and row.status == "ok"
            assert math.isfinite(row.psnr)
            assert -1.0 <= row.ssim <= 1.0

    def test_failing_method_only_fails_its_rows(self, images: list[tuple[str, Image]]) -> None:
        def broken(lr: Image, out_h: int, out_w: int) -> Image:
            raise ContractError("broken upscaler")

        report = evaluate({BICUBIC: bicubic_upscaler, "broken": broken}, images, [2.0])
        assert report.row("broken", 2.0).status == "failed"
        assert report.row("broken", 2.0).failed == 2
        assert report.row(BICUBIC, 2.0).status == "ok"
        assert not report.all_failed

    def test_unreadable_images_count_against_every_row(self, images: list[tuple[str, Image]]) -> None:
        report = evaluate({BICUBIC: bicubic_upscaler}, images, [2.0, 4.0], unreadable=1)
        assert all(row.failed == 1 and row.images == 2 for row in report.rows)

    def test_no_images_means_all_failed(self) -> None:
        assert evaluate({BICUBIC: bicubic_upscaler}, [], [2.0]).all_failed

    def test_load_eval_images_reports_unreadable(self, tmp_path: Path) -> None:
        save_png(make_image(8, 8), tmp_path / "good.png")
        (tmp_path / "bad.png").write_bytes(b"not a png")
        images, failures = load_eval_images(tmp_path)
        assert [name for name, _ in images] == ["good"]
        assert failures == ["bad"]


class TestEvalReport:
    def test_csv_round_trip(self, tmp_path: Path) -> None:
        report = EvalReport(
            [
                EvalRow("bicubic", 2.0, psnr=30.5, ssim=0.9, images=3),
                EvalRow("m", 4.0, images=0, failed=3),
            ]
        )
        restored = EvalReport.read_csv(report.write_csv(tmp_path / "out" / "eval.csv"))
        assert restored.rows[0] == report.rows[0]
        assert restored.rows[1].status == "failed"
        assert math.isnan(restored.rows[1].psnr)
        assert restored.rows[1].ssim is None

    def test_table_lists_every_row(self) -> None:
        report = EvalReport([EvalRow("bicubic", 2.0, psnr=31.25, images=1), EvalRow("m", 2.0, failed=1)])
        lines = report.format_table().splitlines()
        assert lines[0].startswith("method")
        assert "31.250" in lines[1]
        assert lines[2].split()[-1] == "failed"

    def test_row_lookup_missing(self) -> None:
        with pytest.raises(KeyError):
            EvalReport().row("m", 2.0)

    def test_method_names_are_unique(self) -> None:
        assert method_names(["runs/a.ckpt", "other/a.ckpt", "bicubic.ckpt"]) == ["a", "a_2", "bicubic_2"]
