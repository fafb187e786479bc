import json
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

from pcoh import kleisli, pcs
from pcoh.algebra import EMPTY, Multiset
from pcoh.cli import main

EX = Path(__file__).resolve().parent.parent / "ex"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out) if out.strip() else None, err


def write_morphism(tmp_path, f, name="f.json"):
    p = tmp_path / name
    p.write_text(json.dumps(f.to_json()))
    return p


EXAMPLE_M = kleisli.Morphism(pcs.nat(4), pcs.nat(4), 2, {
    (EMPTY, 0): F(1, 2), (Multiset.of(0), 1): F(1, 2), (Multiset.of(0, 1), 0): F(1, 2),
    (Multiset.of(0, 2), 0): F(1, 2), (Multiset.of(0, 3), 0): F(1, 2)})


class TestDist:
    def test_coin(self, capsys):
        code, obj, _ = run_json(capsys, "dist", EX / "coin.pcf")
        assert code == 0 and obj == {"probs": {"0": "1/2", "1": "1/2"}, "residual": "0"}

    def test_omega(self, capsys):
        code, obj, _ = run_json(capsys, "dist", EX / "omega.pcf")
        assert code == 0 and obj == {"probs": {}, "residual": "1"}

    def test_geometric(self, capsys):
        code, obj, _ = run_json(capsys, "dist", EX / "geom.pcf", "--fuel", 40)
        assert code == 0
        assert [obj["probs"][str(n)] for n in range(6)] == ["1/2", "1/4", "1/8", "1/16", "1/32", "1/64"]

    def test_table(self, capsys):
        code, out, _ = run(capsys, "dist", EX / "coin.pcf")
        assert code == 0 and out.splitlines() == ["0\t1/2", "1\t1/2", "residual\t0"]


class TestDenote:
    def test_example_m(self, capsys):
        code, obj, _ = run_json(capsys, "denote", EX / "m_example.pcf", "--W", 4, "--D", 2)
        assert code == 0 and not obj.pop("truncated")
        assert kleisli.Morphism.from_json(obj) == EXAMPLE_M

    def test_coin(self, capsys):
        code, obj, _ = run_json(capsys, "denote", EX / "coin.pcf", "--W", 3)
        assert code == 0 and obj == {"vector": ["1/2", "1/2", "0"]}

    def test_geometric(self, capsys):
        code, obj, _ = run_json(capsys, "denote", EX / "geom.pcf", "--K", 8, "--W", 6)
        assert obj["vector"] == ["1/2", "1/4", "1/8", "1/16", "1/32", "1/64"]


class TestOtherCommands:
    def test_run_is_seeded(self, capsys):
        outs = {run(capsys, "run", EX / "geom.pcf", "--seed", s)[1] for s in (5, 5, 5)}
        assert len(outs) == 1

    def test_adequacy(self, capsys):
        code, obj, _ = run_json(capsys, "adequacy", EX / "geom.pcf")
        assert code == 0 and obj["passed"] and obj["final_gap"] == "0"
        gaps = [F(r["gap"]) for r in obj["rows"]]
        assert gaps == sorted(gaps, reverse=True)

    def test_pcs_check(self, capsys):
        for name in ("bool.pcs", "nat4.pcs", "square.pcs"):
            code, obj, _ = run_json(capsys, "pcs-check", EX / name)
            assert code == 0 and obj["passed"]

    def test_morphism_and_prestable(self, capsys, tmp_path):
        p = write_morphism(tmp_path, EXAMPLE_M)
        assert run(capsys, "morphism-check", p)[0] == 0
        code, obj, _ = run_json(capsys, "prestable", p, "--trials", 20)
        assert code == 0 and obj["passed"]

    def test_extract_from_denote_round_trip(self, capsys):
        _, den, _ = run_json(capsys, "denote", EX / "m_example.pcf", "--W", 4, "--D", 2)
        den.pop("truncated")
        code, ext, _ = run_json(capsys, "extract", "--from-denote", EX / "m_example.pcf", "--W", 4, "--D", 2)
        assert code == 0 and ext == den

    def test_extract_scaling_limit(self, capsys, tmp_path):
        p = write_morphism(tmp_path, EXAMPLE_M)
        code, ext, _ = run_json(capsys, "extract", p, "--D", 2, "--mode", "scaling-limit", "--j-max", 48,
                                "--tol", "1e-10")
        assert code == 0 and kleisli.Morphism.from_json(ext) == EXAMPLE_M

    def test_bernstein(self, capsys, tmp_path):
        p = write_morphism(tmp_path, EXAMPLE_M)
        code, obj, _ = run_json(capsys, "bernstein", p, "--x", "1/4,1/8,0,1/8")
        assert code == 0 and obj["remainders"][-1] == ["0"] * 4

    def test_refine(self, capsys):
        code, obj, _ = run_json(capsys, "refine", EX / "partitions.json")
        assert code == 0 and obj["grouping_p1"] is not None and obj["grouping_p2"] is not None
        assert obj["target"] == ["3/4", "1", "3/4"]


class TestExitCodes:
    def test_usage(self, capsys):
        assert run(capsys)[0] == 1
        assert run(capsys, "dist")[0] == 1
        assert run(capsys, "dist", EX / "coin.pcf", "--fuel", "many")[0] == 1
        assert run(capsys, "adequacy", EX / "geom.pcf", "--fuels", "1,2", "--iters", "1")[0] == 1

    def test_front_end(self, capsys, tmp_path):
        bad = tmp_path / "bad.pcf"
        bad.write_text("0 (+)\n")
        code, _, err = run(capsys, "dist", bad)
        assert code == 2 and "2:1" in err
        ill = tmp_path / "ill.pcf"
        ill.write_text("(\\x:N.x) (\\y:N.y)")
        assert run(capsys, "dist", ill)[0] == 2
        assert run(capsys, "dist", EX / "m_example.pcf")[0] == 2
        assert run(capsys, "dist", tmp_path / "missing.pcf")[0] == 2

    def test_capability(self, capsys, tmp_path):
        p = write_morphism(tmp_path, EXAMPLE_M)
        code, _, err = run(capsys, "bernstein", p, "--x", "1/2,1/2,0,0")
        assert code == 3 and "ball" in err
        sq = kleisli.Morphism(pcs.ONE, pcs.ONE, 2, {(Multiset.of("*"), "*"): F(1, 4),
                                                   (Multiset.of("*", "*"), "*"): F(1, 2)})
        q = write_morphism(tmp_path, sq, "sq.json")
        code, _, _ = run(capsys, "extract", q, "--D", 2, "--mode", "scaling-limit", "--j-max", 1, "--tol", "1e-30")
        assert code == 3

    def test_property_violation_with_witness(self, capsys, tmp_path):
        bad = kleisli.Morphism(pcs.BOOL, pcs.BOOL, 1, {(Multiset.of("t"), "t"): F(3, 4),
                                                        (Multiset.of("t"), "f"): F(1, 2)})
        code, _, err = run(capsys, "morphism-check", write_morphism(tmp_path, bad))
        assert code == 4
        witness = json.loads(err.splitlines()[-1])
        assert witness["witness"] == {"web": ["t", "f"], "entries": [["t", "1"]]}

    def test_truncated_taylor_is_a_violation(self, capsys, tmp_path):
        p = write_morphism(tmp_path, EXAMPLE_M)
        assert run(capsys, "bernstein", p, "--x", "1/4,1/8,0,1/8", "--N", 1)[0] == 4


@pytest.mark.parametrize("argv", [
    ["dist", EX / "geom.pcf", "--fuel", "40"],
    ["denote", EX / "m_example.pcf", "--W", "4", "--D", "2"],
    ["adequacy", EX / "geom.pcf"],
    ["pcs-check", EX / "square.pcs", "--seed", "3"],
    ["refine", EX / "partitions.json"],
])
def test_byte_identical_json(capsys, argv):
    first = run(capsys, *argv, "--json")[1]
    second = run(capsys, *argv, "--json")[1]
    assert first == second and first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pcoh.cli", "dist", str(EX / "coin.pcf"), "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["probs"] == {"0": "1/2", "1": "1/2"}
