"""Config parsing, command orchestration, CSV schemas, and manifests."""

import os

import numpy as np
import pytest

from fama_lab.cli import ConfigError, build_parser, main, parse_config

CURVE_HEADER = "gamma,gamma_db,value,ci_low,ci_high,curve_id"
PAIR_HEADER = "port_k,port_l,value,ci_low,ci_high,curve_id"


def _read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return header, rows


class TestParseConfig:
    def test_empty_is_defaults(self, tmp_path):
        p = tmp_path / "empty.cfg"
        p.write_text("")
        cfg = parse_config(str(p))
        assert (cfg.M, cfg.U, cfg.N) == (8, 4, 8)
        assert cfg.scheme == "MRT"
        assert cfg.W == 0.25

    def test_file_values_and_comments(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text(
            "# scenario\nM = 4\nU = 2\nscheme = ZF\nW = 1.5  # wavelengths\n"
            "beta = 2.0,1.0\ninclude_reference_in_selection = false\n"
        )
        cfg = parse_config(str(p))
        assert (cfg.M, cfg.U, cfg.scheme, cfg.W) == (4, 2, "ZF", 1.5)
        assert cfg.beta == (2.0, 1.0)
        assert cfg.include_reference_in_selection is False

    def test_overrides_beat_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("M = 4\n")
        cfg = parse_config(str(p), {"M": 16, "seed": 9})
        assert cfg.M == 16 and cfg.seed == 9

    def test_unknown_key_named(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("antennas = 8\n")
        with pytest.raises(ConfigError, match="antennas"):
            parse_config(str(p))

    def test_invariant_violation(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("scheme = ZF\nM = 3\nU = 4\n")
        with pytest.raises(ConfigError, match="ZF requires M >= U"):
            parse_config(str(p))

    def test_zf_boundary_accepted(self):
        cfg = parse_config(None, {"scheme": "ZF", "M": 4, "U": 4})
        assert cfg.M == cfg.U == 4


class TestFig2:
    def test_outputs_and_determinism(self, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        args = ["fig2", "--realizations", "4000", "--seed", "3"]
        assert main(args + ["--out", out1]) == 0
        assert main(args + ["--out", out2]) == 0
        for name in ("fig2_mrt.csv", "fig2_zf.csv", "manifest.txt"):
            assert os.path.exists(os.path.join(out1, name))
        for name in ("fig2_mrt.csv", "fig2_zf.csv"):
            with open(os.path.join(out1, name), "rb") as fh:
                blob1 = fh.read()
            with open(os.path.join(out2, name), "rb") as fh:
                blob2 = fh.read()
            assert blob1 == blob2
        header, rows = _read_csv(os.path.join(out1, "fig2_mrt.csv"))
        assert header == CURVE_HEADER
        curves = {r[-1] for r in rows}
        assert curves == {"analytic_cdf", "empirical_marginal",
                          "empirical_physical_reference"}

    def test_manifests_differ_only_in_seed_and_timing(self, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        main(["fig2", "--realizations", "3000", "--seed", "3", "--out", out1])
        main(["fig2", "--realizations", "3000", "--seed", "4", "--out", out2])

        def stable_lines(path):
            with open(path, "r", encoding="utf-8") as fh:
                return [ln for ln in fh.read().splitlines()
                        if not ln.startswith(("seed:", "wall_seconds:"))]

        assert stable_lines(os.path.join(out1, "manifest.txt")) == (
            stable_lines(os.path.join(out2, "manifest.txt"))
        )


class TestFig3:
    def test_pair_schema(self, tmp_path):
        out = str(tmp_path / "f3")
        assert main(["fig3", "--realizations", "4000", "--N", "4",
                     "--W", "2.0", "--out", out]) == 0
        header, rows = _read_csv(os.path.join(out, "fig3_mrt.csv"))
        assert header == PAIR_HEADER
        pairs = {(r[0], r[1]) for r in rows}
        assert pairs == {("2", "3"), ("2", "4"), ("3", "4")}


class TestFig4:
    def test_single_port_envelope_collapses(self, tmp_path):
        out = str(tmp_path / "f4")
        assert main(["fig4", "--realizations", "2000", "--N", "1",
                     "--W", "0.0", "--scheme", "MRT", "--out", out]) == 0
        header, rows = _read_csv(os.path.join(out, "fig4_mrt.csv"))
        assert header == CURVE_HEADER
        by_curve = {}
        for r in rows:
            by_curve.setdefault(r[-1], []).append(float(r[2]))
        for curve in ("upper_bound", "lower_bound", "iid_benchmark"):
            assert np.allclose(by_curve[curve], by_curve["single_port"])

    def test_curve_ids(self, tmp_path):
        out = str(tmp_path / "f4b")
        main(["fig4", "--realizations", "2000", "--N", "2", "--out", out])
        _, rows = _read_csv(os.path.join(out, "fig4_zf.csv"))
        assert {r[-1] for r in rows} == {
            "empirical_correlated", "empirical_iid", "upper_bound",
            "lower_bound", "iid_benchmark", "large_n_approx", "single_port",
        }


class TestFig5:
    def test_tail_asymptote_row_at_hundred(self, tmp_path):
        out = str(tmp_path / "f5")
        assert main(["fig5", "--realizations", "4000", "--out", out]) == 0
        _, rows = _read_csv(os.path.join(out, "fig5_mrt.csv"))
        hits = [float(r[2]) for r in rows
                if r[-1] == "tail_asymptote" and abs(float(r[0]) - 100.0) < 1e-9]
        assert len(hits) == 1
        assert hits[0] == pytest.approx(1.2e-4, rel=1e-9)


class TestSweep:
    def test_grid_files(self, tmp_path):
        out = str(tmp_path / "sw")
        assert main(["sweep", "--realizations", "1000", "--sweep-M", "4,8",
                     "--sweep-N", "2", "--sweep-W", "0.25",
                     "--sweep-scheme", "MRT", "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "sweep_mrt_M4_U4_N2_W0.25.csv"))
        assert os.path.exists(os.path.join(out, "sweep_mrt_M8_U4_N2_W0.25.csv"))

    def test_infeasible_zf_skipped(self, tmp_path):
        out = str(tmp_path / "sw2")
        assert main(["sweep", "--realizations", "1000", "--sweep-M", "2",
                     "--sweep-scheme", "ZF", "--out", out]) == 0
        assert not any(n.startswith("sweep_zf") for n in os.listdir(out))


class TestErrors:
    def test_config_error_exit_code(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("bogus_key = 1\n")
        assert main(["fig2", "--config", str(p), "--out", str(tmp_path)]) == 2

    def test_experiment_error_cleans_partial_outputs(self, tmp_path):
        out = str(tmp_path / "broken")
        # correlation experiments need at least 3 ports
        assert main(["fig3", "--N", "2", "--realizations", "1000",
                     "--out", out]) == 1
        assert not os.path.exists(os.path.join(out, "manifest.txt"))
        assert not any(n.endswith(".csv") for n in os.listdir(out))

    def test_parser_has_all_commands(self):
        parser = build_parser()
        for cmd in ("fig2", "fig3", "fig4", "fig5", "sweep", "validate"):
            args = parser.parse_args([cmd])
            assert args.command == cmd
