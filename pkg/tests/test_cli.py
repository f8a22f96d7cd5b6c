import json

import pytest

from alcself import serialize as ser
from alcself.atm import m_acc, m_rej
from alcself.cli import main


@pytest.fixture
def files(tmp_path):
    acc = tmp_path / "m_acc.atm.json"
    rej = tmp_path / "m_rej.atm.json"
    acc.write_text(ser.emit_atm(m_acc()))
    rej.write_text(ser.emit_atm(m_rej()))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_oracle(files, capsys):
    assert run(capsys, "oracle", "--atm", files / "m_acc.atm.json")[:2] == (0, "accepting\n")
    assert run(capsys, "oracle", "--atm", files / "m_rej.atm.json")[:2] == (1, "rejecting\n")


def test_compile_then_check_qct(files, capsys):
    kb, q, w = files / "k.kb.dl", files / "q_m.cq", files / "qct.interp.json"
    code, out, _ = run(capsys, "compile", "--atm", files / "m_acc.atm.json", "--out-kb", kb, "--out-query", q)
    assert code == 0
    stats = dict(line.split("=", 1) for line in out.splitlines())
    assert stats["axioms"] == "141" and stats["query_atoms"] == "57"
    assert run(capsys, "witness", "--atm", files / "m_acc.atm.json", "--kind", "qct", "--out", w)[0] == 0
    code, out, _ = run(capsys, "check", "--interp", w, "--kb", kb)
    assert code == 0
    assert out.splitlines()[-1] == "failed=0"
    assert sum(line.endswith("=holds") for line in out.splitlines()) == 141
    assert run(capsys, "eval", "--interp", w, "--query", q, "--exists")[:2] == (1, "false\n")


def test_faulty_qct_has_a_match(files, capsys):
    q, w = files / "q_m.cq", files / "faulty_qct.interp.json"
    run(capsys, "compile", "--atm", files / "m_acc.atm.json", "--out-kb", files / "k.kb.dl", "--out-query", q)
    code, _, _ = run(capsys, "witness", "--atm", files / "m_acc.atm.json", "--kind", "qct",
                     "--fault", "0,1", "--out", w)
    assert code == 0
    assert run(capsys, "eval", "--interp", w, "--query", q, "--exists")[:2] == (0, "true\n")
    assert run(capsys, "eval", "--interp", w, "--query", q)[:2] == (0, "#10 0#10\n")


def test_check_reports_failures(files, capsys):
    kb = files / "k.kb.dl"
    run(capsys, "compile", "--atm", files / "m_acc.atm.json", "--out-kb", kb, "--out-query", files / "q.cq")
    w = files / "unit.interp.json"
    run(capsys, "witness", "--atm", files / "m_acc.atm.json", "--kind", "unit", "--out", w)
    code, out, _ = run(capsys, "check", "--interp", w, "--kb", kb)
    assert code == 1
    assert "InitIndividual=error" in out
    assert any("=fails witness=" in line for line in out.splitlines())


@pytest.mark.parametrize("kind", ["unit", "conf", "enr"])
def test_witness_kinds(files, capsys, kind):
    out = files / f"{kind}.interp.json"
    code, text, _ = run(capsys, "witness", "--atm", files / "m_acc.atm.json", "--kind", kind, "--out", out)
    assert code == 0 and text.startswith(f"kind={kind}\n")
    assert json.loads(out.read_text())["domain"]


def test_witness_needs_accepting_machine(files, capsys):
    code, out, err = run(capsys, "witness", "--atm", files / "m_rej.atm.json", "--kind", "qct",
                         "--out", files / "x.json")
    assert code == 1 and out == "" and "not accepting" in err


def test_usage_errors(files, capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "oracle")[0] == 2
    code, out, err = run(capsys, "oracle", "--atm", files / "missing.json")
    assert code == 2 and out == "" and "cannot read" in err
    (files / "bad.json").write_text("{")
    assert run(capsys, "oracle", "--atm", files / "bad.json")[0] == 2
    code, _, err = run(capsys, "witness", "--atm", files / "m_acc.atm.json", "--kind", "qct",
                       "--fault", "0,0", "--out", files / "x.json")
    assert code == 2 and "untouched" in err


def test_owl_kb_cannot_be_checked(files, capsys):
    kb = files / "k.kb.ofn"
    run(capsys, "compile", "--atm", files / "m_acc.atm.json", "--out-kb", kb, "--out-query", files / "q.cq",
        "--format", "owlfs")
    assert kb.read_text().startswith("Prefix(")
    w = files / "u.json"
    run(capsys, "witness", "--atm", files / "m_acc.atm.json", "--kind", "unit", "--out", w)
    code, _, err = run(capsys, "check", "--interp", w, "--kb", kb)
    assert code == 2 and "export-only" in err


def test_budget_exit_code(files, capsys):
    big = files / "big.atm.json"
    big.write_text(ser.emit_atm(m_acc(4)))
    code, out, err = run(capsys, "oracle", "--atm", big)
    assert code == 3 and out == "" and "budget" in err


def test_stdout_is_stable(files, capsys):
    args = ("compile", "--atm", files / "m_acc.atm.json", "--out-kb", files / "k.kb.dl",
            "--out-query", files / "q.cq", "--tbox-only")
    first = run(capsys, *args)
    assert first == run(capsys, *args)
    assert "tbox_only=1" in first[1]


def test_verify_lemmas(files, capsys):
    code, out, _ = run(capsys, "verify-lemmas", "--n", "2", "--atm", files / "m_acc.atm.json")
    assert code == 0
    assert out.splitlines()[-1].endswith("failed=0")
    assert {line.split()[0] for line in out.splitlines()[:-1]} == {f"C{k}" for k in range(1, 9)}
