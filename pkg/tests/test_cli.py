import json

import pytest

import cli
from fairdiv.core import Kind, allocation_to_doc, instance_to_doc, parse_allocation, parse_instance
from fairdiv.fixtures import (EF1_FAILURE, EF1_FAILURE_ALLOCATION, GREEDY_ROW, PBV_ROWS, WOLEX_ROWS,
                              table_instance)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def ef1_case(write_json):
    return (write_json("inst.json", instance_to_doc(EF1_FAILURE)),
            write_json("alloc.json", allocation_to_doc(EF1_FAILURE, EF1_FAILURE_ALLOCATION)))


# ── solve ───────────────────────────────────────────────────────────────
def test_solve_ef1po_emits_certified_allocation(capsys, ef1_case, tmp_path):
    inst_path, _ = ef1_case
    trace = tmp_path / "run.jsonl"
    code, doc = run(capsys, "solve", "--method", "ef1po", "-f", inst_path, "--trace", str(trace))
    assert code == 0
    assert doc["certificates"]["ef1"]["holds"]
    assert doc["certificates"]["po"] == {"property": "po", "holds": True, "via": "oracle"}
    assert doc["market"]["price_drops"] == 0
    alloc = parse_allocation(doc, EF1_FAILURE)
    assert alloc.bundles[0] == frozenset({3, 4, 5})
    events = [json.loads(line) for line in trace.read_text().splitlines()]
    assert events[0]["event"] == "phase"
    assert events[-1]["phase"] == "done"


def test_bare_trace_name_lands_in_trace_dir(capsys, ef1_case, tmp_path):
    inst_path, _ = ef1_case
    code, _ = run(capsys, "solve", "--method", "ef1po", "-f", inst_path, "--trace", "t.jsonl")
    assert code == 0
    assert (tmp_path / "traces" / "t.jsonl").exists()


def test_solve_ef1po_on_goods_is_a_mismatch(capsys, write_json):
    path = write_json("goods.json", {"valuations": [[1, 2], [2, 1]]})
    code, doc = run(capsys, "solve", "--method", "ef1po", "-f", path)
    assert code == 3
    assert doc is None


@pytest.mark.parametrize("method", ["mms", "mmspo"])
@pytest.mark.parametrize("kind", [Kind.GOODS, Kind.CHORES])
def test_solve_mms_methods(capsys, write_json, method, kind):
    path = write_json("wolex.json", instance_to_doc(table_instance(WOLEX_ROWS, kind)))
    code, doc = run(capsys, "solve", "--method", method, "-f", path)
    assert code == 0
    assert doc["certificates"]["mms"]["holds"]
    if method == "mmspo":
        assert doc["certificates"]["po"]["holds"]
    assert sorted(c for items in doc["bundles"].values() for c in items) == sorted(
        f"c{j}" for j in range(1, 10))


def test_solve_mms_rejects_general(capsys, write_json):
    path = write_json("general.json", {"valuations": [[3, 2, 1, 1], [1, 2, 3, 3]]})
    assert run(capsys, "solve", "--method", "mms", "-f", path)[0] == 3


def test_bad_documents_exit_2(capsys, write_json, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve", "--method", "mms", "-f", str(bad))[0] == 2
    mixed = write_json("mixed.json", {"valuations": [[1, -1]]})
    assert run(capsys, "solve", "--method", "mms", "-f", mixed)[0] == 2
    assert run(capsys, "solve", "--method", "mms", "-f", str(tmp_path / "missing.json"))[0] == 2


def test_method_is_required():
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve"])
    assert exc.value.code == 2


# ── check ───────────────────────────────────────────────────────────────
def test_check_ef1_failure(capsys, ef1_case):
    inst_path, alloc_path = ef1_case
    code, doc = run(capsys, "check", "--property", "ef1", "-f", inst_path, "--allocation", alloc_path)
    assert code == 1
    assert doc["witness"] == [1, 2]


@pytest.mark.parametrize("extra", [[], ["--oracle"]])
def test_check_po(capsys, ef1_case, extra):
    inst_path, alloc_path = ef1_case
    code, doc = run(capsys, "check", "--property", "po", "-f", inst_path, "--allocation", alloc_path,
                    *extra)
    assert doc["via"] == ("oracle" if extra else "exchange-cycles")
    assert code == (0 if doc["holds"] else 1)


def test_check_po_verdicts_agree(capsys, ef1_case):
    inst_path, alloc_path = ef1_case
    by_cycles = run(capsys, "check", "--property", "po", "-f", inst_path, "--allocation", alloc_path)
    by_oracle = run(capsys, "check", "--property", "po", "-f", inst_path, "--allocation", alloc_path,
                    "--oracle")
    assert by_cycles[0] == by_oracle[0]


def test_check_mms_with_oracle(capsys, write_json):
    inst = table_instance(WOLEX_ROWS, Kind.GOODS)
    inst_path = write_json("inst.json", instance_to_doc(inst))
    alloc_path = write_json("alloc.json", {"bundles": {"i1": ["c1", "c2", "c3", "c4", "c5", "c6",
                                                             "c7", "c8", "c9"], "i2": [], "i3": []}})
    code, doc = run(capsys, "check", "--property", "mms", "-f", inst_path, "--allocation", alloc_path,
                    "--oracle")
    assert code == 1
    assert doc["witness"] == [2]


def test_bad_budget_setting(capsys, ef1_case, monkeypatch):
    monkeypatch.setenv("FAIRDIV_ORACLE_BUDGET", "-5")
    inst_path, alloc_path = ef1_case
    code, _ = run(capsys, "check", "--property", "po", "--oracle", "-f", inst_path,
                  "--allocation", alloc_path)
    assert code == 2


def test_oracle_budget_exceeded(capsys, ef1_case, monkeypatch):
    monkeypatch.setenv("FAIRDIV_ORACLE_BUDGET", "100")
    inst_path, alloc_path = ef1_case
    code, _ = run(capsys, "check", "--property", "po", "--oracle", "-f", inst_path,
                  "--allocation", alloc_path)
    assert code == 2


# ── mms-value / gen / fixtures ──────────────────────────────────────────
def test_mms_value_greedy_row(capsys, write_json):
    path = write_json("row.json", {"valuations": [list(GREEDY_ROW)] * 4})
    code, doc = run(capsys, "mms-value", "--agent", "1", "-f", path)
    assert code == 0
    assert doc["value"] == 8
    assert len(doc["partition"]) == 4


def test_mms_value_by_name_with_bundles(capsys, write_json):
    path = write_json("row.json", {"agents": ["solo"], "valuations": [list(GREEDY_ROW)]})
    code, doc = run(capsys, "mms-value", "--agent", "solo", "--bundles", "4", "--oracle", "-f", path)
    assert (code, doc["value"], doc["via"]) == (0, 8, "oracle")


def test_mms_value_non_factored(capsys, write_json):
    path = write_json("row.json", {"valuations": [[3, 3, 2, 2, 2], [1, 1, 1, 1, 1]]})
    assert run(capsys, "mms-value", "--agent", "1", "-f", path)[0] == 3
    code, doc = run(capsys, "mms-value", "--agent", "1", "--oracle", "-f", path)
    assert doc["value"] == 6
    assert run(capsys, "mms-value", "--agent", "7", "-f", path)[0] == 2


def test_gen_then_solve(capsys, tmp_path):
    code, doc = run(capsys, "gen", "--class", "bivalued", "--kind", "chores",
                    "-n", "3", "-m", "6", "--seed", "7", "--p", "3")
    assert code == 0
    inst = parse_instance(doc)
    assert {x for row in inst.valuations for x in row} <= {-1, -3}
    path = tmp_path / "gen.json"
    path.write_text(json.dumps(doc))
    first = run(capsys, "solve", "--method", "ef1po", "-f", str(path))
    second = run(capsys, "solve", "--method", "ef1po", "-f", str(path))
    assert first == second
    assert first[0] == 0


def test_fixtures_command(capsys):
    code, doc = run(capsys, "fixtures")
    assert code == 0
    assert [f["name"] for f in doc["fixtures"]] == ["greedy_trace", "non_factored_counterexample",
                                                   "wolex_bad_cuts", "pbv_idle_times", "ef1_failure"]


# ── PO witnesses and zero-valued chores ─────────────────────────────────
def test_check_po_by_cycles_reports_witness(capsys, write_json):
    inst_path = write_json("inst.json", {"valuations": [[2, 1], [1, 2]]})
    alloc_path = write_json("alloc.json", {"bundles": {"a1": ["c2"], "a2": ["c1"]}})
    code, doc = run(capsys, "check", "--property", "po", "-f", inst_path, "--allocation", alloc_path)
    assert code == 1
    assert doc["via"] == "exchange-cycles"
    assert doc["witness"] == [1, 2]
    assert doc["detail"]["dominating"] == [[0], [1]]


def test_solve_mms_adds_informational_po(capsys, write_json):
    path = write_json("wolex.json", instance_to_doc(table_instance(WOLEX_ROWS, Kind.GOODS)))
    code, doc = run(capsys, "solve", "--method", "mms", "-f", path)
    assert code == 0
    assert doc["certificates"]["po"]["via"] == "oracle"


def test_informational_po_without_a_cycle_test(capsys, write_json, monkeypatch):
    monkeypatch.setenv("FAIRDIV_ORACLE_BUDGET", "100")
    path = write_json("pbv.json", instance_to_doc(table_instance(PBV_ROWS, Kind.GOODS)))
    code, doc = run(capsys, "solve", "--method", "mms", "-f", path)
    assert code == 0
    assert doc["certificates"]["mms"]["holds"]
    assert doc["certificates"]["po"]["holds"] is None
    assert doc["certificates"]["po"]["via"] == "unavailable"


def test_solve_binary_chores(capsys, write_json):
    path = write_json("binary.json", {"kind": "chores",
                                      "valuations": [[0, -1, -1, -1], [-1, -1, 0, -1],
                                                     [-1, -1, -1, -1]]})
    assert run(capsys, "solve", "--method", "ef1po", "-f", path)[0] == 2
    code, doc = run(capsys, "solve", "--method", "ef1po-zeros", "-f", path)
    assert code == 0
    assert doc["bundles"] == {"a1": ["c1", "c4"], "a2": ["c2", "c3"], "a3": []}
    assert doc["certificates"]["po"] == {"property": "po", "holds": True, "via": "oracle"}
    assert doc["market"]["prices"][0] == 0


def test_binary_chores_beyond_the_oracle(capsys, write_json, monkeypatch):
    monkeypatch.setenv("FAIRDIV_ORACLE_BUDGET", "10")
    path = write_json("binary.json", {"kind": "chores",
                                      "valuations": [[0, -1, -1, -1], [-1, -1, 0, -1],
                                                     [-1, -1, -1, -1]]})
    code, doc = run(capsys, "solve", "--method", "ef1po-zeros", "-f", path)
    assert code == 0
    assert doc["certificates"]["po"]["via"] == "exchange-cycles"
