import json

import pytest
import torch

from main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, _warn_non_monotone, run_cli
from Reconstruction.reconstructor import Reconstruction

SIMULATE_SMALL = ["--size", "16", "--coils", "2", "--records", "3", "--seed", "7", "--af", "2", "--calib", "4"]


@pytest.fixture
def dataset_dir(tmp_path):
    directory = tmp_path / "data"
    assert run_cli(["simulate", "--out", str(directory)] + SIMULATE_SMALL) == EXIT_OK
    return directory


class TestUsage:
    def test_no_arguments(self, capsys):
        assert run_cli([]) == EXIT_USAGE
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self):
        assert run_cli(["simulate", "--out", "x", "--bogus"]) == EXIT_USAGE

    def test_help(self, capsys):
        assert run_cli(["--help"]) == EXIT_OK
        assert "simulate" in capsys.readouterr().out

    def test_eval_needs_a_method(self, dataset_dir):
        assert run_cli(["eval", "--data", str(dataset_dir)]) == EXIT_USAGE

    def test_recon_needs_exactly_one_source(self, dataset_dir, tmp_path):
        assert run_cli(["recon", "--data", str(dataset_dir), "--out", str(tmp_path / "r")]) == EXIT_USAGE


class TestSimulate:
    def test_reproducible_payloads(self, dataset_dir, tmp_path):
        other = tmp_path / "again"
        assert run_cli(["simulate", "--out", str(other)] + SIMULATE_SMALL) == EXIT_OK
        for record_id in ("rec0000", "rec0001", "rec0002"):
            assert (dataset_dir / record_id / "kspace.cplx").read_bytes() == (other / record_id / "kspace.cplx").read_bytes()
            first = json.loads((dataset_dir / record_id / "meta.json").read_text(encoding="utf-8"))
            second = json.loads((other / record_id / "meta.json").read_text(encoding="utf-8"))
            first.pop("created"), second.pop("created")
            assert first == second

    def test_existing_directory_fails(self, dataset_dir, capsys):
        assert run_cli(["simulate", "--out", str(dataset_dir)] + SIMULATE_SMALL) == EXIT_FAILURE
        assert capsys.readouterr().err.startswith("Error:")
        assert run_cli(["simulate", "--out", str(dataset_dir), "--overwrite"] + SIMULATE_SMALL) == EXIT_OK

    def test_calibration_wider_than_frame(self, tmp_path):
        assert run_cli(["simulate", "--out", str(tmp_path / "d"), "--size", "16", "--records", "1"]) == EXIT_FAILURE


class TestReconAndEval:
    def test_full_acquisition_is_perfect(self, dataset_dir, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code = run_cli(["eval", "--data", str(dataset_dir), "--baseline", "zf", "--af", "1", "--calib", "4",
                        "--json", str(report_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "inf" in out and "1.00 ± 0.00" in out
        document = json.loads(report_path.read_text(encoding="utf-8"))
        assert {row['method'] for row in document['rows']} == {"Zero-filled"}
        assert all(row['af']["1"]['psnr']['mean'] == "inf" for row in document['rows'])

    def test_baseline_recon_writes_images(self, dataset_dir, tmp_path):
        out = tmp_path / "recon"
        assert run_cli(["recon", "--baseline", "pocsense", "--data", str(dataset_dir), "--out", str(out),
                        "--calib", "4", "--iters", "3"]) == EXIT_OK
        index = json.loads((out / "recon.json").read_text(encoding="utf-8"))
        assert index['label'] == "POCSENSE" and index['af'] is None
        assert sorted(p.name for p in out.glob("*.pgm")) == ["rec0000.pgm", "rec0001.pgm", "rec0002.pgm"]

    def test_missing_dataset(self, tmp_path):
        assert run_cli(["recon", "--baseline", "zf", "--data", str(tmp_path / "none"),
                        "--out", str(tmp_path / "r")]) == EXIT_FAILURE

    def test_train_then_reconstruct(self, dataset_dir, tmp_path, capsys):
        checkpoint = tmp_path / "model.mrdc"
        code = run_cli(["train", "--data", str(dataset_dir), "--out", str(checkpoint), "--variant", "dccnn",
                        "--af", "2", "--calib", "4", "--nc", "1", "--nd", "2", "--filters", "4",
                        "--epochs", "1", "--batch", "2", "--checkpoint-every", "0"])
        assert code == EXIT_OK and checkpoint.exists()
        assert "Final training loss" in capsys.readouterr().out

        assert run_cli(["recon", "--model", str(checkpoint), "--data", str(dataset_dir),
                        "--out", str(tmp_path / "r"), "--calib", "4"]) == EXIT_OK
        assert run_cli(["eval", "--data", str(dataset_dir), "--model", str(checkpoint), "--baseline", "zf",
                        "--af", "2", "--calib", "4"]) == EXIT_OK
        assert "DC-CNN" in capsys.readouterr().out

        three_coils = tmp_path / "three"
        assert run_cli(["simulate", "--out", str(three_coils), "--size", "16", "--coils", "3", "--records", "1",
                        "--af", "2", "--calib", "4"]) == EXIT_OK
        assert run_cli(["recon", "--model", str(checkpoint), "--data", str(three_coils),
                        "--out", str(tmp_path / "r3"), "--calib", "4"]) == EXIT_FAILURE


class TestMonotoneWarning:
    def test_warns_only_on_flagged_records(self, capsys):
        image = torch.zeros(4, 4, dtype=torch.complex128)
        support = torch.ones(4, 4, dtype=torch.bool)
        flagged = Reconstruction("rec0001", "coronal_pd", image, image, support, [1.0, 2.0], monotone=False)
        clean = Reconstruction("rec0000", "coronal_pd", image, image, support, [2.0, 1.0])
        _warn_non_monotone([clean, flagged])
        out = capsys.readouterr().out
        assert "rec0001" in out and "rec0000" not in out
