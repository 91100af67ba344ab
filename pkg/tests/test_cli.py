import io
import json

import pytest

from nanophrase.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_borromean(capsys):
    code, out, _ = run(capsys, "compute", "examples:borromean", "--indices", "2,3,1")
    assert code == 0
    assert out.startswith("mu=-1 delta=0 mubar=-1 (mod 0)")


def test_compute_ex4_json(capsys):
    code, out, _ = run(capsys, "--json", "compute", "examples:ex4", "--indices", "2,3,1")
    assert code == 0
    assert json.loads(out) == {"sequence": [2, 3, 1], "mu": -1, "delta": 1,
                               "mubar": {"value": 0, "modulus": 1}, "q_used": 3}


def test_json_flag_after_subcommand(capsys):
    code, out, _ = run(capsys, "compute", "examples:ex4", "--indices", "2,1", "--json")
    assert code == 0 and json.loads(out)["mu"] == 2


def test_compute_empty_phrase_from_file(capsys, tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("letters:\nphrase: . | .\n")
    code, out, _ = run(capsys, "compute", str(f), "--indices", "1,2")
    assert code == 0 and out.startswith("mu=0 delta=0 mubar=0 (mod 0)")


def test_compute_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("letters: A:b+\nphrase: A|A\n"))
    code, out, _ = run(capsys, "compute", "-", "--indices", "2,1")
    assert code == 0 and out.startswith("mu=1 ")


def test_compute_repeated_warns(capsys):
    code, _, err = run(capsys, "compute", "examples:ex4", "--indices", "1,1,2")
    assert code == 0 and "repeat" in err


def test_compute_out_of_range(capsys):
    code, out, err = run(capsys, "--json", "compute", "examples:borromean", "--indices", "2,5")
    assert code == 1
    assert json.loads(out)["type"] == "DomainError" and "out of range" in err


def test_compute_bad_phrase(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("letters: A:a+\nphrase: A\n")
    assert run(capsys, "compute", str(f), "--indices", "1,1")[0] == 1


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["compute", "examples:ex4", "--indices", "x,y"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_stage_cap_is_domain_error(capsys):
    code, _, err = run(capsys, "compute", "examples:borromean", "--indices", "2,3,1", "--q", "2", "--extra-stages", "0")
    assert code == 1 and "did not stabilize" in err


def test_expand_words(capsys):
    code, out, _ = run(capsys, "expand", "examples:ex32", "-i", "3", "-q", "3")
    assert code == 0
    assert "rho^3: C^-1 D^-1 C E^-1" in out
    code, out, _ = run(capsys, "--json", "expand", "examples:ex32", "-i", "1", "-q", "4")
    payload = json.loads(out)
    assert payload["rho"] == "E C^-1 D C A C^-1 D^-1 C E^-1 C^-1 B C"
    assert {"monomial": [2, 3], "coefficient": 1} in payload["series"]


def test_expand_q2_prints_signed_word(capsys):
    _, out, _ = run(capsys, "--json", "expand", "examples:ex32", "-i", "3", "-q", "2")
    payload = json.loads(out)
    assert payload["rho"] == payload["signed"] == "D^-1 E^-1"


def test_expand_forest(capsys):
    _, out, _ = run(capsys, "expand", "examples:ex32", "-i", "3", "-q", "3", "--forest")
    assert "g=2 D^-1 k=2 d=0" in out


def test_examples(capsys):
    _, out, _ = run(capsys, "examples")
    assert "borromean" in out and "torus:n" in out
    _, out, _ = run(capsys, "examples", "torus:1")
    assert "phrase: A_1 B_1 | A_1 B_1" in out
    _, out, _ = run(capsys, "--json", "examples", "ex5")
    assert json.loads(out)["components"][3] == []
    assert run(capsys, "examples", "nope")[0] == 1


def test_validate(capsys, tmp_path):
    good = tmp_path / "g.txt"
    good.write_text("letters: A:a+\nphrase: A|A\n")
    code, out, _ = run(capsys, "--json", "validate", str(good))
    assert code == 0 and json.loads(out)["linking_matrix"]["entries"][0][1] == [1, 0]
    bad = tmp_path / "b.txt"
    bad.write_text("letters: A:zz\nphrase: AA\n")
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1 and "not in alpha" in out


def test_moves_list_apply(capsys):
    _, out, _ = run(capsys, "--json", "moves", "list", "examples:ex32")
    sites = json.loads(out)["sites"]
    h1 = next(s for s in sites if s["kind"] == "H1_remove")
    code, out, _ = run(capsys, "moves", "apply", "examples:ex32", "--site", str(h1["id"]))
    assert code == 0 and "F" not in out.split("phrase:")[1]


def test_moves_apply_insert(capsys):
    code, out, _ = run(capsys, "moves", "apply", "examples:ex32", "--kinds", "H1_insert", "--site", "0",
                       "--projection", "a-", "--names", "Z")
    assert code == 0 and "Z:a-" in out and "phrase: Z Z A B" in out


def test_moves_stale_id(capsys):
    code, _, err = run(capsys, "moves", "apply", "examples:ex32", "--site", "999")
    assert code == 1 and "stale" in err


def test_moves_walk(capsys, tmp_path):
    trace = tmp_path / "t.json"
    code, out, _ = run(capsys, "--seed", "4", "moves", "walk", "examples:ex5", "--steps", "6", "--trace-out", str(trace))
    assert code == 0 and len(json.loads(trace.read_text())["steps"]) == 6
    _, again, _ = run(capsys, "--seed", "4", "moves", "walk", "examples:ex5", "--steps", "6")
    assert again == out
    _, zero, _ = run(capsys, "moves", "walk", "examples:ex5", "--steps", "0")
    assert zero.strip().endswith("phrase: A B C D | D A E F B C | E F | .")


def test_fuzz_command(capsys, tmp_path):
    code, out, _ = run(capsys, "--json", "--seed", "7", "fuzz", "--trials", "5", "--steps", "5",
                       "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["failures"] == 0


def test_fuzz_counterexample_replay(capsys, tmp_path):
    from itertools import product
    from nanophrase.core import HomotopyData, render_homotopy_data
    from nanophrase.homotopy import builtin_virtual

    V = builtin_virtual()
    data = tmp_path / "loose.txt"
    data.write_text(render_homotopy_data(HomotopyData(
        V.alpha, V.tau, V.nu, V.sigma, frozenset(product(sorted(V.alpha), repeat=3)))))
    code, _, _ = run(capsys, "--seed", "5", "--data", str(data), "fuzz", "--variant", "open_M",
                     "--trials", "40", "--steps", "20", "--out", str(tmp_path / "cx"))
    assert code == 1
    bundle = sorted((tmp_path / "cx").glob("*.json"))[0]
    code, out, _ = run(capsys, "fuzz", "--replay", str(bundle))
    assert code == 1 and out.startswith("reproduced")
