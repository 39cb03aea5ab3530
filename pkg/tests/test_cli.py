"""Command-line interface: parsing, exit codes, output files."""

import os

import numpy as np
import pytest

from atompursuit import AtomSet, save_dictionary
from atompursuit.cli import _parse_methods, _parse_seeds, build_parser, main


class TestSeedParsing:
    def test_comma_list(self):
        assert _parse_seeds("0,1,2") == (0, 1, 2)

    def test_inclusive_range(self):
        assert _parse_seeds("0-19") == tuple(range(20))

    def test_mixed(self):
        assert _parse_seeds("5,7-9,12") == (5, 7, 8, 9, 12)

    def test_negative_seed(self):
        assert _parse_seeds("-3") == (-3,)

    def test_trailing_comma_ignored(self):
        assert _parse_seeds("1,2,") == (1, 2)

    def test_empty_rejected(self):
        import argparse

        with pytest.raises(argparse.ArgumentTypeError, match="no seeds"):
            _parse_seeds(",")

    def test_backwards_range_rejected(self):
        import argparse

        with pytest.raises(argparse.ArgumentTypeError, match="empty seed range"):
            _parse_seeds("9-5")


class TestMethodParsing:
    def test_known(self):
        assert _parse_methods("mp,accel_rp") == ("mp", "accel_rp")

    def test_unknown_rejected(self):
        import argparse

        with pytest.raises(argparse.ArgumentTypeError, match="unknown method"):
            _parse_methods("mp,newton")


class TestParser:
    def test_synthetic_defaults(self):
        args = build_parser().parse_args(["synthetic", "--out", "/tmp/x"])
        assert args.methods == ("mp", "rp", "accel_mp", "accel_rp")
        assert args.seeds == (0, 1, 2, 3, 4)
        assert args.iters == 500
        assert args.dim == 100
        assert args.atoms == 200
        assert args.nu_policy == "default"
        assert args.jobs == 1

    def test_missing_out_exits(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["synthetic"])

    def test_unknown_subcommand_exits(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["train"])

    def test_regression_requires_data_paths(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["regression", "--out", "/tmp/x"])


class TestSyntheticCommand:
    def test_small_run(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        code = main([
            "synthetic", "--dim", "6", "--atoms", "16", "--methods", "mp,rp",
            "--seeds", "0-1", "--iters", "20", "--out", out,
        ])
        assert code == 0
        captured = capsys.readouterr()
        assert "4 trace files" in captured.out
        assert os.path.exists(os.path.join(out, "aggregate.csv"))
        assert os.path.exists(os.path.join(out, "constants.txt"))
        assert os.path.exists(os.path.join(out, "traces", "rp_seed1.csv"))

    def test_rerun_byte_identical(self, tmp_path):
        argv = lambda out: [
            "synthetic", "--dim", "5", "--atoms", "12", "--methods", "mp,accel_mp",
            "--seeds", "0", "--iters", "15", "--out", out,
        ]
        assert main(argv(str(tmp_path / "a"))) == 0
        assert main(argv(str(tmp_path / "b"))) == 0
        for name in ("aggregate.csv", "traces/mp_seed0.csv", "traces/accel_mp_seed0.csv"):
            with open(tmp_path / "a" / name, "rb") as fh:
                first = fh.read()
            with open(tmp_path / "b" / name, "rb") as fh:
                assert fh.read() == first

    def test_bad_nu_policy_combination(self, tmp_path, capsys):
        code = main([
            "synthetic", "--dim", "4", "--atoms", "8", "--out", str(tmp_path),
            "--nu-policy", "explicit",
        ])
        assert code == 1
        assert "nu_value" in capsys.readouterr().err


class TestRegressionCommand:
    def test_generate_then_run(self, tmp_path, capsys):
        data = str(tmp_path / "data")
        assert main(["make-regression-data", "--out", data, "--pixels", "6",
                     "--dim", "8", "--materials", "3"]) == 0
        out = str(tmp_path / "out")
        code = main([
            "regression", "--pixels", os.path.join(data, "pixels.csv"),
            "--dict", os.path.join(data, "dict.csv"),
            "--methods", "mp", "--seeds", "0", "--iters", "15", "--out", out,
        ])
        assert code == 0
        assert os.path.exists(os.path.join(out, "aggregate.csv"))

    def test_missing_data_file(self, tmp_path, capsys):
        code = main([
            "regression", "--pixels", str(tmp_path / "nope.csv"),
            "--dict", str(tmp_path / "nope_dict.csv"),
            "--methods", "mp", "--seeds", "0", "--out", str(tmp_path / "out"),
        ])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestConstantsCommand:
    def test_prints_report(self, tmp_path, capsys):
        path = str(tmp_path / "dict.csv")
        save_dictionary(AtomSet.coordinates(4), path)
        code = main(["constants", "--dict", path])
        assert code == 0
        out = capsys.readouterr().out
        assert "l2=1.0" in out
        assert "delta_hat_sq=0.25" in out
        assert "mdw.provenance=analytic" in out

    def test_writes_file(self, tmp_path):
        path = str(tmp_path / "dict.csv")
        save_dictionary(AtomSet.coordinates(3), path)
        out_file = str(tmp_path / "report.txt")
        assert main(["constants", "--dict", path, "--out", out_file]) == 0
        with open(out_file) as fh:
            assert "nu_prime=3.0" in fh.read()

    def test_missing_dict(self, tmp_path, capsys):
        code = main(["constants", "--dict", str(tmp_path / "nope.csv")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestCheckCommand:
    def test_all_checks_pass(self, capsys):
        assert main(["check"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.count("ok - ") >= 5
        assert "all" in out and "checks passed" in out
