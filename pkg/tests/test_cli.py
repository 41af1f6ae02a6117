from __future__ import annotations

import json

import pytest

from codinggap.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT, EXIT_OK, main, sidecar
from codinggap.gaps.base import base_instance


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fixtures_match_generator(fixtures_dir):
    for k in (5, 8, 16):
        data = json.loads((fixtures_dir / f"base{k}.json").read_text())
        assert data == json.loads(json.dumps(base_instance(k).to_json()))


def test_solve_single_edge(capsys, fixtures_dir, tmp_path):
    out = tmp_path / "sol.json"
    code, text, _ = run(capsys, "solve", "--instance", str(fixtures_dir / "single_edge.json"), "--T", "1", "--out", str(out))
    assert code == EXIT_OK
    assert text.startswith("z=1.000 T=1 status=feasible")
    assert json.loads(out.read_text())["z"] == 1


def test_solve_base_five_mwu(capsys, fixtures_dir):
    code, text, _ = run(capsys, "solve", "--instance", str(fixtures_dir / "base5.json"), "--T", "5", "--eps", "0.1", "--method", "mwu")
    assert code == EXIT_OK
    assert float(text.split()[0].removeprefix("z=")) >= 0.9


def test_solve_hop_infeasible_exits_one(capsys, fixtures_dir):
    code, text, _ = run(capsys, "solve", "--instance", str(fixtures_dir / "base5.json"), "--T", "2")
    assert code == EXIT_INFEASIBLE
    assert "status=hop-infeasible" in text


def test_malformed_json_exits_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    code, _, err = run(capsys, "solve", "--instance", str(bad), "--T", "1")
    assert code == EXIT_INPUT
    assert "invalid JSON" in err


def test_missing_file_and_bad_flags_exit_two(capsys, tmp_path):
    assert run(capsys, "solve", "--instance", str(tmp_path / "none.json"), "--T", "1")[0] == EXIT_INPUT
    assert run(capsys, "solve", "--T", "0")[0] == EXIT_INPUT
    assert run(capsys, "bogus")[0] == EXIT_INPUT


def test_path_limit_exits_three(capsys, fixtures_dir):
    code, _, _ = run(
        capsys, "solve", "--instance", str(fixtures_dir / "base16.json"), "--T", "6", "--method", "exact", "--limit-paths", "10"
    )
    assert code == EXIT_LIMIT


def test_route_permutation(capsys, fixtures_dir, tmp_path):
    out = tmp_path / "s.json"
    code, text, _ = run(capsys, "route", "--instance", str(fixtures_dir / "base8.json"), "--permutation", "--out", str(out))
    assert code == EXIT_OK and text.startswith("makespan=5")
    code, text, _ = run(capsys, "simulate", "--instance", str(fixtures_dir / "base8.json"), "--schedule", str(out))
    assert code == EXIT_OK and "kind=routing makespan=5" in text


def test_simulate_xor(capsys, fixtures_dir):
    code, text, _ = run(capsys, "simulate", "--instance", str(fixtures_dir / "base16.json"), "--trace", str(fixtures_dir / "base16.xor.json"))
    assert code == EXIT_OK
    assert text.startswith("kind=coding makespan=3")


def test_certify_and_verify(capsys, fixtures_dir, tmp_path):
    cut = tmp_path / "cut.json"
    code, text, _ = run(capsys, "certify", "--instance", str(fixtures_dir / "base5.json"), "--out", str(cut))
    assert code == EXIT_OK and "bound=3" in text
    code, text, _ = run(capsys, "certify", "--instance", str(fixtures_dir / "base5.json"), "--cut", str(cut))
    assert code == EXIT_OK and "valid=true" in text
    code, text, _ = run(capsys, "certify", "--instance", str(fixtures_dir / "base5.json"), "--T", "4")
    assert code == EXIT_INFEASIBLE and "status=no-certificate" in text


def test_gap_report_base_five(capsys, fixtures_dir, tmp_path):
    out = tmp_path / "gap.csv"
    args = [
        "gap-report",
        "--instance", str(fixtures_dir / "base5.json"),
        "--trace", str(fixtures_dir / "base5.xor.json"),
        "--schedule", str(fixtures_dir / "base5.schedule.json"),
        "--out", str(out),
    ]
    code, text, _ = run(capsys, *args)
    assert code == EXIT_OK
    lines = text.splitlines()
    assert lines[0] == "instance,route_makespan,cut_lb,coding_ub,gap_lo,gap_hi"
    assert lines[1] == "base5,5,3,3,5/3,5/3"
    assert out.read_bytes() == text.encode()
    assert b"\r" not in out.read_bytes()


def test_gap_report_single_edge(capsys, fixtures_dir, tmp_path):
    code, text, _ = run(capsys, "gap-report", "--instance", str(fixtures_dir / "single_edge.json"))
    assert code == EXIT_OK
    assert text.splitlines()[1] == "single_edge,1,1,,,1"


def test_forge_product_and_report(capsys, fixtures_dir, tmp_path):
    out = tmp_path / "prod.json"
    code, text, _ = run(
        capsys,
        "forge", "product",
        "--outer", str(fixtures_dir / "base2.json"),
        "--inner", str(fixtures_dir / "base2.json"),
        "--outer-trace", str(fixtures_dir / "base2.xor.json"),
        "--inner-trace", str(fixtures_dir / "base2.xor.json"),
        "--girth", "4",
        "--out", str(out),
    )
    assert code == EXIT_OK and "composed_rounds=9" in text
    assert (tmp_path / "prod.wiring.json").exists()
    trace = sidecar(str(out), "trace")
    code, text, _ = run(capsys, "simulate", "--instance", str(out), "--trace", trace)
    assert code == EXIT_OK and "makespan=9" in text


def test_forge_limit_exits_three(capsys, fixtures_dir, tmp_path):
    code, _, err = run(
        capsys, "forge", "product", "--outer", str(fixtures_dir / "base5.json"), "--inner", str(fixtures_dir / "base5.json"),
        "--girth", "8", "--out", str(tmp_path / "p.json"),
    )
    assert code == EXIT_LIMIT
    assert "limit" in err


def test_recurrences_csv(capsys, tmp_path):
    out = tmp_path / "rec.csv"
    code, text, _ = run(capsys, "recurrences", "--levels", "3", "--out", str(out))
    assert code == EXIT_OK
    assert text.splitlines()[0] == "i,r,a,b,gap,log_u_bound,log_m_bound"
    assert len(text.splitlines()) == 5
    assert out.read_text() == text


@pytest.mark.parametrize("cmd", ["route", "certify"])
def test_outputs_are_byte_identical(capsys, fixtures_dir, tmp_path, cmd):
    outs = []
    for n in range(2):
        path = tmp_path / f"{cmd}{n}.json"
        run(capsys, cmd, "--instance", str(fixtures_dir / "base5.json"), "--seed", "7", "--T-max", "8", "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
