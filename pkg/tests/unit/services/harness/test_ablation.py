"""
Unit tests for the K ablation.
"""

import math
from pathlib import Path

import pytest

from src.services.exceptions import ConfigError
from src.services.harness.ablation import AblationReport, AblationRow, parse_k_list, run_k_ablation
from src.services.training.dataset import ImageDataset
from tests.helpers import make_image, make_train_config


class TestParseKList:
    def test_values_in_order(self) -> None:
        assert parse_k_list("4, 1,2") == (4, 1, 2)

    @pytest.mark.parametrize("text", ["", "0", "1,-3", "two"])
    def test_invalid(self, text: str) -> None:
        with pytest.raises(ConfigError) as info:
            parse_k_list(text)
        assert info.value.key == "k-list"


class TestRunKAblation:
    def test_failed_k_does_not_stop_the_rest(self, tmp_path: Path) -> None:
        dataset = ImageDataset.from_images([make_image(24, 24, seed=i) for i in range(2)])
        val = [("v", make_image(12, 12, seed=9))]
        report = run_k_ablation(make_train_config(), (0, 2), dataset, val, tmp_path)

        failed, ok = report.rows
        assert failed.k == 0 and failed.status == "failed"
        assert ok.k == 2 and ok.status == "ok"
        assert math.isfinite(ok.psnr) and math.isfinite(ok.final_loss)
        assert (tmp_path / "aliif_k2.ckpt").is_file()
        assert ok.checksum and len(ok.checksum) == 16

    def test_csv_round_trip(self, tmp_path: Path) -> None:
        report = AblationReport(
            [AblationRow(1, 2.0, psnr=25.0, final_loss=0.1, checksum="ab"), AblationRow(3, 2.0, error="x")]
        )
        restored = AblationReport.read_csv(report.write_csv(tmp_path / "ablation_k.csv"))
        assert [row.status for row in restored.rows] == ["ok", "failed"]
        assert restored.rows[0].psnr == 25.0
        assert restored.rows[0].checksum == "ab"
