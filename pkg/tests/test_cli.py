import io
import json

import pandas as pd
import pytest

from src.cli import verify
from src.cli.main import RunConfig, build_parser, parse_base, run
from src.numtheory.constants import THREADS_ENV
from src.numtheory.modular import RationalBase
from src.numtheory.parallel import resolve_workers


class TestRun:
    def test_order_csv(self, capsys):
        assert run(["order", "--p", "7", "--u", "2"]) == 0
        assert capsys.readouterr().out == "p,u,ord,index\n7,2,3,2\n"

    def test_order_json(self, capsys):
        assert run(["order", "--p", "7", "--u", "2", "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out) == [{"p": 7, "u": "2", "ord": 3, "index": 2}]

    def test_rational_base(self, capsys):
        assert run(["order", "--p", "7", "--u", "1/2"]) == 0
        assert capsys.readouterr().out == "p,u,ord,index\n7,1/2,3,2\n"

    def test_primitive_root(self, capsys):
        assert run(["primitive-root", "--p", "7"]) == 0
        assert capsys.readouterr().out == "p,tau,q,p_minus_one\n7,3,11,2^1*3^1\n"

    def test_admissible(self, capsys):
        assert run(["admissible", "--u", "3", "--u", "5", "--u", "15", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert row["admissible"] is False
        assert row["witness"] == "1;1;-1"
        assert row["witness_product"] == 1

    def test_indicator_batch(self, capsys):
        assert run(["indicator", "--p", "13"]) == 0
        df = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert (df["psi_free_d_rounded"] == df["direct"]).all()
        ones = df[df["d"] == 1]
        assert (ones["psi_divisor_rounded"] == ones["direct"]).all()
        assert len(df) == 12 * 6

    def test_indicator_single(self, capsys):
        assert run(["indicator", "--p", "7", "--u", "2", "--d", "2"]) == 0
        df = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert df.loc[0, "direct"] == 1
        assert df.loc[0, "psi_free_d_rounded"] == 1

    def test_expsum(self, capsys):
        assert run(["expsum", "double", "--p", "7", "--u", "2", "--d", "2", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert row["kind"] == "double"
        assert row["re"] == pytest.approx(5.0, abs=1e-9)

    def test_expsum_periodic(self, capsys):
        assert run(["expsum", "periodic", "--m", "7", "--w", "3", "--a", "1", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert row["re"] == pytest.approx(-1.0, abs=1e-9)
        assert row["term_count"] == 6

    def test_census(self, capsys):
        assert run(["census", "--x", "10", "--spec", "2:1"]) == 0
        df = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert df.loc[0, "R"] == 3
        assert df.loc[0, "primes_total"] == 4
        assert df.loc[0, "specs"] == "2:1"

    def test_census_formats_agree(self, capsys):
        args = ["census", "--x", "1000", "--spec", "3:1", "--spec", "2:2"]
        assert run(args) == 0
        from_csv = pd.read_csv(io.StringIO(capsys.readouterr().out)).to_dict(orient="records")[0]
        assert run(args + ["--format", "json"]) == 0
        from_json = json.loads(capsys.readouterr().out)[0]
        assert from_csv.keys() == from_json.keys()
        for key, value in from_json.items():
            assert from_csv[key] == value

    def test_census_workers_do_not_change_output(self, capsys):
        args = ["census", "--x", "5000", "--spec", "3:1", "--spec", "2:2"]
        assert run(args + ["--workers", "1"]) == 0
        serial = capsys.readouterr().out
        assert run(args + ["--workers", "3"]) == 0
        assert capsys.readouterr().out == serial

    def test_mainterm(self, capsys):
        assert run(["mainterm", "--x", "10", "--d", "1", "--e", "1", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert row["primes"] == 4
        assert row["lcm"] == 1

    def test_audit_passes(self, capsys):
        assert run(["audit", "--x", "100", "--spec", "3:1", "--spec", "2:2", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert row["identity_holds"] is True
        assert row["vanishing_failures"] == 0

    def test_audit_pair_flags_match_specs(self, capsys):
        assert run(["audit", "--x", "100", "--spec", "3:1", "--spec", "2:2"]) == 0
        from_specs = capsys.readouterr().out
        assert run(["audit", "--x", "100", "--u", "3", "--d", "1", "--v", "2", "--e", "2"]) == 0
        assert capsys.readouterr().out == from_specs

    def test_stats(self, capsys):
        assert run(["stats", "--p", "7", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert (row["alpha2_num"], row["alpha2_den"]) == (5, 18)
        assert row["trials"] is None

    def test_stats_sampler_uses_seed(self, capsys):
        args = ["stats", "--p", "13", "--trials", "2000", "--seed", "7"]
        assert run(args) == 0
        first = capsys.readouterr().out
        assert run(args) == 0
        assert capsys.readouterr().out == first

    def test_avg_order(self, capsys):
        assert run(["avg-order", "--x", "10", "--u", "2"]) == 0
        assert capsys.readouterr().out == "x,u,order_sum,T\n10,2,15,1.5\n"

    def test_relation(self, capsys):
        assert run(["relation", "--x", "100", "--u", "2", "--u", "3", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert row["relation"] == "equal"
        assert row["bases"] == "2;3"

    def test_totient_avg(self, capsys):
        assert run(["totient-avg", "--x", "100", "--d", "1", "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)[0]
        assert row["label"] == "conjecture probe"
        assert row["indices"] == "1"

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "order.json"
        assert run(["order", "--p", "7", "--u", "3", "--format", "json", "--output", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text())[0]["ord"] == 6


class TestExitCodes:
    def test_missing_flag_is_usage_error(self):
        assert run(["order", "--p", "7"]) == 2

    def test_unknown_command(self):
        assert run(["frobnicate"]) == 2

    def test_index_not_dividing(self, capsys):
        assert run(["indicator", "--p", "7", "--u", "2", "--d", "4"]) == 2
        assert "d=4" in capsys.readouterr().err

    def test_not_invertible(self, capsys):
        assert run(["order", "--p", "7", "--u", "14"]) == 2
        assert "7" in capsys.readouterr().err

    def test_composite_p(self):
        assert run(["order", "--p", "9", "--u", "2"]) == 2

    def test_expsum_names_missing_flag(self, capsys):
        assert run(["expsum", "kernel", "--p", "7"]) == 2
        assert "--t" in capsys.readouterr().err

    def test_inadmissible_census(self, capsys):
        assert run(["census", "--x", "100", "--spec", "4:1", "--spec", "8:1"]) == 2
        assert "(3, -2)" in capsys.readouterr().err

    def test_audit_needs_both_bases(self, capsys):
        assert run(["audit", "--x", "100", "--u", "3"]) == 2
        assert "--v" in capsys.readouterr().err

    def test_audit_rejects_mixed_forms(self):
        assert run(["audit", "--x", "100", "--spec", "3:1", "--spec", "2:2", "--u", "5"]) == 2

    def test_stats_k_with_sampler(self, capsys):
        assert run(["stats", "--p", "13", "--trials", "100", "--k", "3"]) == 2
        assert "--k" in capsys.readouterr().err

    def test_bad_spec_text(self):
        assert run(["census", "--x", "100", "--spec", "3"]) == 2


class TestConfig:
    def test_parse_base(self):
        assert parse_base("5") == 5
        assert parse_base("-2") == -2
        assert parse_base("1/2") == RationalBase(1, 2)

    def test_workers_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert resolve_workers() == 3
        assert resolve_workers(1) == 1

    def test_workers_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_workers() == 1

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(ValueError):
            resolve_workers()
        assert run(["order", "--p", "7", "--u", "2"]) == 2

    def test_run_config_from_args(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        ns = build_parser().parse_args(["census", "--x", "100", "--spec", "2:1", "--workers", "2", "--seed", "9"])
        cfg = RunConfig.from_args(ns)
        assert (cfg.command, cfg.worker_count, cfg.seed, cfg.format) == ("census", 2, 9, "csv")

    def test_run_config_rejects(self):
        with pytest.raises(ValueError):
            RunConfig(command="order", worker_count=0)
        with pytest.raises(ValueError):
            RunConfig(command="nope")


class TestVerifyCriteria:
    def test_indicator_equivalence(self):
        result = verify.check_indicator_equivalence({"indicator_p": 60})
        assert result.passed
        assert result.worst <= verify.INDICATOR_TOL_PER_TERM

    def test_indicator_residual_over_bound_fails(self, monkeypatch):
        exact = verify.psi_free_d_all

        def inflated(d, ctx):
            frame = exact(d, ctx).copy()
            frame["residual"] = frame["residual"] + 0.01
            return frame

        monkeypatch.setattr(verify, "psi_free_d_all", inflated)
        result = verify.check_indicator_equivalence({"indicator_p": 60})
        assert not result.passed
        assert result.failures > 0

    def test_kernel_closed_form(self):
        assert verify.check_kernel_closed_form({"kernel_primes": 5}).passed

    def test_mobius_agreement(self):
        assert verify.check_mobius_agreement({"kernel_primes": 5}).passed

    def test_double_sum(self):
        assert verify.check_double_sum({"double_p": 60}).passed

    def test_rho_divisor_bound(self):
        assert verify.check_rho_divisor_bound({"rho_p": 120}).passed

    def test_census_oracle(self):
        result = verify.check_census_oracle({"census_x": (100,)})
        assert result.passed
        assert result.checks == len(verify.CENSUS_SPECS)

    def test_decomposition(self):
        assert verify.check_decomposition({"audit_x": (100,)}).passed

    def test_main_term(self):
        assert verify.check_main_term({"main_x": 200}).passed

    def test_avg_order(self):
        assert verify.check_avg_order({"avg_x": 200}).passed

    def test_criterion_result_tracks_failures(self):
        res = verify.CriterionResult("demo")
        res.record(True, 0.5)
        res.record(False, 2.0)
        row = res.as_row()
        assert (row["passed"], row["checks"], row["failures"], row["worst"]) == (False, 2, 1, 2.0)

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            verify.verify_suite("exhaustive")
