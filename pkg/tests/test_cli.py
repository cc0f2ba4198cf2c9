import json
import subprocess
import sys

import pytest

from formlang.cli import main

SUBCOMMANDS = [
    ("regex", "compile"), ("regex", "min"), ("regex", "equiv"), ("regex", "to-regex"),
    ("automaton", "run"), ("dautomaton", "run"), ("dautomaton", "builtin"), ("corpus", "gen"),
    ("wfa", "score"), ("wfa", "builtin"), ("hankel", "build"), ("hankel", "rank"),
    ("learn", "lstar"), ("learn", "spectral"), ("saturate", "step"), ("saturate", "probe"),
    ("saturate", "attention"), ("rfa", "check"),
]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path, capsys):
    paths = {name: str(tmp_path / f"{name}.json") for name in ("binary2", "ab", "abstar", "anbn", "astar")}
    assert run(capsys, "wfa", "builtin", "--name", "binary", "--out", paths["binary2"])[0] == 0
    assert run(capsys, "regex", "compile", "--regex", "ab", "--alphabet", "a,b", "--out", paths["ab"])[0] == 0
    assert run(capsys, "regex", "compile", "--regex", "ab*", "--alphabet", "a,b", "--minimize",
               "--out", paths["abstar"])[0] == 0
    assert run(capsys, "regex", "compile", "--regex", "a*", "--alphabet", "a,b", "--nfa",
               "--out", paths["astar"])[0] == 0
    assert run(capsys, "dautomaton", "builtin", "--name", "anbn-counter", "--out", paths["anbn"])[0] == 0
    return paths


@pytest.mark.parametrize("noun,verb", SUBCOMMANDS, ids=["-".join(p) for p in SUBCOMMANDS])
def test_help_for_every_subcommand(noun, verb, capsys):
    with pytest.raises(SystemExit) as info:
        main([noun, verb, "--help"])
    assert info.value.code == 0
    assert "usage:" in capsys.readouterr().out


def test_wfa_score_binary(files, capsys):
    assert run(capsys, "wfa", "score", "--wfa", files["binary2"], "--input", "101") == (0, "5\n", "")
    assert run(capsys, "wfa", "score", "--wfa", files["binary2"], "--input", "101", "--bruteforce")[1] == "5\n"


def test_regex_equiv(files, capsys):
    assert run(capsys, "regex", "equiv", "--a", files["ab"], "--b", files["ab"]) == (0, "equal\n", "")
    code, out, _ = run(capsys, "regex", "equiv", "--a", files["ab"], "--b", files["abstar"])
    assert code == 0 and out == "counterexample a\n"


def test_lstar_abstar(files, capsys, tmp_path):
    code, out, err = run(capsys, "learn", "lstar", "--target", files["abstar"])
    assert code == 0
    dfa = json.loads(out)
    assert dfa["type"] == "dfa" and len(dfa["states"]) == 2
    assert err.startswith("membership=") and "equivalence=" in err
    learned = str(tmp_path / "learned.json")
    code, out, _ = run(capsys, "learn", "lstar", "--target", files["abstar"], "--out", learned)
    assert out.startswith("membership=")
    assert run(capsys, "regex", "equiv", "--a", learned, "--b", files["abstar"])[1] == "equal\n"


def test_automaton_and_dautomaton_run(files, capsys):
    assert run(capsys, "automaton", "run", "--automaton", files["abstar"], "--input", "abb")[1] == "accept\n"
    assert run(capsys, "automaton", "run", "--automaton", files["astar"], "--input", "ab")[1] == "reject\n"
    assert run(capsys, "dautomaton", "run", "--machine", files["anbn"], "--input", "aabb")[1] == "accept\n"
    code, out, _ = run(capsys, "dautomaton", "run", "--machine", files["anbn"], "--input", "aabb", "--trace")
    lines = out.splitlines()
    assert [json.loads(l)["config"] for l in lines[:-1]] == [[1], [2], [1], [0]]
    assert lines[-1] == "accept"


def test_regex_min_and_to_regex(files, capsys):
    code, out, _ = run(capsys, "regex", "min", "--automaton", files["astar"])
    assert code == 0 and len(json.loads(out)["states"]) == 1
    code, out, _ = run(capsys, "regex", "to-regex", "--automaton", files["abstar"])
    assert code == 0 and out.strip()
    assert run(capsys, "regex", "compile", "--regex", "ab*", "--alphabet", "a,b", "--dot")[1].startswith("digraph")


def test_hankel_and_spectral(files, capsys, tmp_path):
    block = str(tmp_path / "block.json")
    assert run(capsys, "hankel", "build", "--wfa", files["binary2"], "--out", block)[0] == 0
    assert run(capsys, "hankel", "rank", "--block", block) == (0, "2\n", "")
    learned = str(tmp_path / "learned.json")
    assert run(capsys, "learn", "spectral", "--block", block, "--out", learned)[0] == 0
    assert run(capsys, "wfa", "score", "--wfa", learned, "--input", "1101")[1] == "13\n"
    values = tmp_path / "values.tsv"
    values.write_text("0\t\n1\ta\n0\tb\n")
    assert run(capsys, "hankel", "rank", "--values", str(values), "--alphabet", "a,b", "--default-zero",
               "--prefix-len", "1", "--suffix-len", "1")[1] == "2\n"


def test_saturate_commands(capsys):
    assert run(capsys, "saturate", "step", "--cell", "builtin:counting-lstm", "--input", "a")[1] == \
        '{"c": [1], "h": [1]}\n'
    assert run(capsys, "saturate", "step", "--cell", "builtin:counting-lstm", "--state",
               '{"c": [1], "h": [1]}', "--input", "b")[1] == '{"c": [0], "h": [0]}\n'
    code, out, _ = run(capsys, "saturate", "probe", "--cell", "builtin:counting-lstm", "--n", "1..3")
    assert [l.split("\t")[:2] for l in out.splitlines()] == [["1", "2"], ["2", "3"], ["3", "4"]]
    instance = '{"query": [1], "keys": [[1], [1]], "values": [[1], [2]]}'
    assert run(capsys, "saturate", "attention", "--instance", instance)[1] == "3/2\n"


def test_corpus_and_rfa(capsys, tmp_path):
    out_path = tmp_path / "d.tsv"
    assert run(capsys, "corpus", "gen", "--language", "dyck:1", "--max-len", "4", "--count", "5",
               "--seed", "3", "--out", str(out_path))[0] == 0
    rows = [l for l in out_path.read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 5
    code, out, _ = run(capsys, "rfa", "check", "--seed", "0")
    assert code == 0 and out.startswith("mean=")
    assert float(out.split()[0].split("=")[1]) <= 0.05


def test_domain_errors_exit_one(files, capsys):
    code, out, err = run(capsys, "automaton", "run", "--automaton", files["abstar"], "--input", "abc")
    assert code == 1 and out == ""
    assert err.startswith("error: ") and len(err.splitlines()) == 1
    assert run(capsys, "regex", "equiv", "--a", files["ab"], "--b", files["binary2"])[0] == 1
    assert run(capsys, "wfa", "score", "--wfa", "/nonexistent.json", "--input", "1")[0] == 1
    assert run(capsys, "saturate", "step", "--cell", "builtin:nope", "--input", "a")[0] == 1


@pytest.mark.parametrize("argv", [
    [],
    ["regex"],
    ["regex", "compile", "--regex", "a"],
    ["wfa", "score", "--wfa", "x.json", "--input", "1", "--bogus"],
    ["rfa", "check"],
    ["corpus", "gen", "--language", "anbn", "--max-len", "4", "--count", "3"],
    ["saturate", "probe", "--cell", "builtin:parity", "--n", "x..y"],
])
def test_usage_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
    assert "usage:" in capsys.readouterr().err


def test_outputs_are_deterministic(files, capsys):
    commands = [
        ["corpus", "gen", "--language", "anbn", "--max-len", "6", "--count", "4", "--seed", "9"],
        ["rfa", "check", "--seed", "5", "--pairs", "20"],
        ["learn", "lstar", "--target", files["abstar"]],
        ["hankel", "build", "--wfa", files["binary2"]],
        ["regex", "compile", "--regex", "(a|b)*a", "--alphabet", "a,b", "--minimize"],
    ]
    for argv in commands:
        assert run(capsys, *argv) == run(capsys, *argv)


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "formlang", "wfa", "score", "--wfa", files["binary2"],
                           "--input", "11"], capture_output=True, text=True)
    assert (proc.returncode, proc.stdout) == (0, "3\n")
    proc = subprocess.run([sys.executable, "-m", "formlang", "nope"], capture_output=True, text=True)
    assert proc.returncode == 2
