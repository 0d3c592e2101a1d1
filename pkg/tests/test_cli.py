"""CLI contract: subcommands, JSON schema, exit codes, cache."""

import cmath
import json
import math

import pytest

from etasums import cli
from etasums.cli import RunConfig, format_qexp, main
from etasums.dedekind_kloosterman import kloosterman


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


# ------------------------------------------------------------ subcommands


def test_qexp_weight_minus2_display(capsys):
    code, out = run_cli(capsys, "qexp", "F_v", "--param", "2", "--terms", "4", "--output", "text")
    assert code == 0
    assert out.strip() == "q^-2 - 50 - 832q - 5693q^2"


def test_qexp_fractional_exponents(capsys):
    code, out = run_cli(capsys, "qexp", "g_m", "--param", "1", "--terms", "3", "--output", "text")
    assert code == 0
    assert out.strip() == "q^(-1/24) + q^(23/24) + 2q^(47/24)"


def test_format_qexp_signs():
    from fractions import Fraction

    pairs = [(Fraction(-1), -1), (Fraction(0), 3), (Fraction(2), -7)]
    assert format_qexp(pairs, 3) == "-q^-1 + 3 - 7q^2"


def test_partition_json(capsys):
    code, out = run_cli(capsys, "partition", "100")
    assert code == 0
    payload = json.loads(out)
    assert payload == {"k": 100, "partition": 190569292}
    assert isinstance(payload["partition"], int)


def test_pmn_json_is_decimal_strings(capsys):
    code, out = run_cli(capsys, "pmn", "1", "-23")
    assert code == 0
    payload = json.loads(out)
    assert set(payload) >= {"value", "tail_estimate", "c_max_used", "precision_bits"}
    assert isinstance(payload["value"], str)
    assert float(payload["value"]) == pytest.approx(math.sqrt(23), abs=1e-4)
    assert isinstance(payload["tail_estimate"], str)


def test_kloosterman_exact_multiset_consistent(capsys):
    code, out = run_cli(capsys, "kloosterman", "0", "-1", "6", "--exact")
    assert code == 0
    payload = json.loads(out)
    total = sum(
        mult * cmath.exp(2j * cmath.pi * k / payload["modulus"])
        for k, mult in payload["counts"]
    )
    assert total.real == pytest.approx(kloosterman(0, -1, 6), abs=1e-12)
    assert total.imag == pytest.approx(0.0, abs=1e-12)


def test_weyl_known_value(capsys):
    code, out = run_cli(capsys, "weyl", "1", "1", "1", "1")
    assert code == 0
    value = float(json.loads(out)["value"])
    assert value == pytest.approx(4 * math.sqrt(3), abs=1e-10)


def test_classes_with_genus_character(capsys):
    code, out = run_cli(capsys, "classes", "-23", "--chi", "1")
    assert code == 0
    payload = json.loads(out)
    assert [(r["a"], r["b"], r["c"]) for r in payload["classes"]] == [
        (6, 1, 1),
        (18, -11, 2),
        (12, -11, 3),
    ]
    assert all(r["chi"] == 1 for r in payload["classes"])


def test_trace_cm_through_cli(capsys):
    code, out = run_cli(capsys, "trace", "1", "1", "-23", "--mode", "cm")
    assert code == 0
    payload = json.loads(out)
    assert float(payload["value"]) == pytest.approx(math.sqrt(23), abs=1e-6)
    assert payload["mode"] == "cm"


def test_bench_smoke(capsys):
    code, out = run_cli(capsys, "bench", "kloosterman", "--cmax", "200")
    assert code == 0
    payload = json.loads(out)
    assert payload["rows"] and all("ratio" in r for r in payload["rows"])


# ------------------------------------------------------------ verify suites


def test_verify_selberg_small_grid(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"c_max": 20, "b_max": 5}))
    code, out = run_cli(capsys, "verify", "selberg", "--grid", str(grid))
    assert code == 0
    reports = json.loads(out)
    assert len(reports) == 20 * 11
    assert all(r["passed"] for r in reports)


def test_verify_fails_with_unattainable_tolerance(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"c_max": 6, "b_max": 1, "tol": 1e-80}))
    code, out = run_cli(capsys, "verify", "selberg", "--grid", str(grid))
    assert code == 1


def test_verify_text_mode_lines(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"c_max": 4, "b_max": 1}))
    code, out = run_cli(capsys, "verify", "selberg", "--grid", str(grid), "--output", "text")
    assert code == 0
    assert out.count("[PASS]") == 4 * 3
    assert "selberg: 12/12 passed" in out


def test_verify_thm12_neg(capsys):
    code, out = run_cli(capsys, "verify", "thm12-neg")
    assert code == 0
    (report,) = json.loads(out)
    assert float(report["abs_diff"]) < 1e-4


# ------------------------------------------------------------ cache


def test_qexp_cache_roundtrip(tmp_path, capsys):
    cache = tmp_path / "gm.json"
    code, first = run_cli(
        capsys, "qexp", "g_m", "--param", "25", "--terms", "5", "--cache", str(cache)
    )
    assert code == 0
    stamp = cache.read_text()
    code, second = run_cli(
        capsys, "qexp", "g_m", "--param", "25", "--terms", "4", "--cache", str(cache)
    )
    assert code == 0
    assert cache.read_text() == stamp  # served from cache, not rewritten
    assert json.loads(first)["coeffs"] == json.loads(second)["coeffs"]


def test_qexp_cache_miss_on_other_object(tmp_path, capsys):
    cache = tmp_path / "c.json"
    run_cli(capsys, "qexp", "g_m", "--param", "1", "--terms", "3", "--cache", str(cache))
    code, out = run_cli(
        capsys, "qexp", "h_m", "--param", "-23", "--terms", "3", "--cache", str(cache)
    )
    assert code == 0
    assert json.loads(out)["object"] == "h_m"
    assert json.loads(cache.read_text())["object"] == "h_m"


# ------------------------------------------------------------ exit codes


def test_usage_error_exits_2(capsys):
    assert main(["partition", "0"]) == 2
    capsys.readouterr()
    assert main(["pmn", "-23", "-47"]) == 2
    capsys.readouterr()
    assert main(["partition", "5", "--prec", "32"]) == 2


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_computation_failure_exits_1(monkeypatch, capsys):
    def boom(k, prec=128):
        raise ArithmeticError("cannot certify")

    monkeypatch.setattr(cli, "partition", boom)
    assert main(["partition", "5"]) == 1


def test_internal_assertion_exits_3(monkeypatch, capsys):
    def boom(k, prec=128):
        raise AssertionError("invariant broken")

    monkeypatch.setattr(cli, "partition", boom)
    assert main(["partition", "5"]) == 3


def test_runconfig_validation():
    with pytest.raises(ValueError):
        RunConfig(precision_bits=32)
    with pytest.raises(ValueError):
        RunConfig(tol=-1.0)
    with pytest.raises(ValueError):
        RunConfig(output="yaml")
