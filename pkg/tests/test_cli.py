import json
import shlex

import pytest

import fixtures
from capplan.cli import main

SOLVER = " ".join(shlex.quote(part) for part in fixtures.REFSOLVER_CMD)


@pytest.fixture
def docs(tmp_path):
    paths = {}
    for name, doc in (
        ("domain", fixtures.transport_domain()),
        ("problem", fixtures.transport_problem()),
        ("chain_domain", fixtures.drive_transport_domain()),
        ("single", fixtures.transport_single_doc()),
    ):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(doc))
        paths[name] = str(path)
    paths["dir"] = tmp_path
    return paths


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_plan_round_trip(docs, capsys, tmp_path):
    out_path = tmp_path / "plan.json"
    code, out, _ = run(
        [
            "plan",
            "--domain", docs["domain"],
            "--problem", docs["problem"],
            "--max-happenings", "3",
            "--solver-cmd", SOLVER,
            "--output", str(out_path),
        ],
        capsys,
    )
    assert code == 0
    document = json.loads(out_path.read_text())
    assert document["boundHappenings"] == 1
    assert document["happenings"][0]["applied"] == ["Transport"]
    assert document["parameters"]["TargetPosition"] == "10"
    # The emitted plan document passes the oracle check subcommand.
    code, out, _ = run(
        ["check", "--plan", str(out_path), "--domain", docs["domain"],
         "--problem", docs["problem"]],
        capsys,
    )
    assert code == 0
    assert json.loads(out)["ok"] is True


def test_plan_single_document_via_model_flag(docs, capsys):
    code, out, _ = run(
        ["plan", "--model", docs["single"], "--max-happenings", "2",
         "--solver-cmd", SOLVER],
        capsys,
    )
    assert code == 0
    assert json.loads(out)["boundHappenings"] == 1


def test_plan_no_plan_exit_code_and_explanation(docs, capsys, tmp_path):
    inert_domain = tmp_path / "inert_domain.json"
    # Keep only DriveTo so nothing can move the product position.
    domain = fixtures.drive_transport_domain(product_at=5)
    domain["capabilities"] = [c for c in domain["capabilities"] if c["id"] == "DriveTo"]
    domain["information"] = [e for e in domain["information"] if e["id"] == "DriveOrder"]
    domain["products"] = [p for p in domain["products"] if p["id"] == "Input_Product"]
    inert_domain.write_text(json.dumps(domain))
    problem = fixtures.transport_problem(goal=10)
    problem["products"][0]["properties"] = problem["products"][0]["properties"][1:]
    problem["capabilities"][0]["inputs"] = []
    problem_path = tmp_path / "inert_problem.json"
    problem_path.write_text(json.dumps(problem))

    code, out, _ = run(
        ["plan", "--domain", str(inert_domain), "--problem", str(problem_path),
         "--max-happenings", "2", "--solver-cmd", SOLVER, "--minimize-core"],
        capsys,
    )
    assert code == 2
    document = json.loads(out)
    assert document["noPlan"] is True
    assert document["allBoundsUnsat"] is True
    names = {e["name"] for e in document["explanation"]["elements"]}
    assert any(n.startswith(("init.", "goal.")) for n in names)
    assert any(n.startswith(("frame.", "pre.")) for n in names)


def test_dump_smt_deterministic(docs, capsys):
    argv = ["dump-smt", "--domain", docs["domain"], "--problem", docs["problem"],
            "--bound", "1"]
    code, first, _ = run(argv, capsys)
    assert code == 0
    assert "(declare-const |Transport#t1| Bool)" in first
    code, second, _ = run(argv, capsys)
    assert first == second


def test_dump_smt_empty_model(capsys, tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(json.dumps({"capabilities": [{"id": "req", "kind": "required"}]}))
    code, out, _ = run(["dump-smt", "--model", str(path), "--bound", "0"], capsys)
    assert code == 0
    assert "(set-logic QF_LRA)" in out
    assert "(check-sat)" in out
    assert "declare-const" not in out


def test_validate_clean_and_diagnostics(docs, capsys, tmp_path):
    code, out, _ = run(
        ["validate", "--domain", docs["domain"], "--problem", docs["problem"]],
        capsys,
    )
    assert code == 0
    assert json.loads(out)["diagnostics"] == []

    broken = fixtures.transport_single_doc()
    broken["capabilities"][0]["inputs"] = broken["capabilities"][0]["inputs"][:2]
    broken_path = tmp_path / "broken.json"
    broken_path.write_text(json.dumps(broken))
    code, out, _ = run(["validate", "--model", str(broken_path)], capsys)
    assert code == 1
    assert json.loads(out)["diagnostics"][0]["code"] == "ConstraintReference"


def test_validate_explain_synonymy(docs, capsys):
    code, out, _ = run(
        ["validate", "--domain", docs["domain"], "--problem", docs["problem"],
         "--explain-synonymy"],
        capsys,
    )
    assert code == 0
    document = json.loads(out)
    classes = {c["classId"]: c["members"] for c in document["classes"]}
    assert classes["CurrentProductPosition"] == [
        "CurrentProductPosition",
        "ProductPositionAfter",
        "RequestedPositionAfter",
        "RequestedPositionBefore",
    ]


def test_explain_synonymy_subcommand(docs, capsys):
    code, out, _ = run(["explain-synonymy", "--model", docs["single"]], capsys)
    assert code == 0
    assert "classes" in json.loads(out)


def test_check_reports_violations(docs, capsys, tmp_path):
    bad_plan = {
        "boundHappenings": 1,
        "happenings": [
            {
                "applied": ["Transport"],
                "layer0": {"CurrentProductPosition": "5", "TargetPosition": "10",
                           "AGVPosition": "7"},
                "layer1": {"CurrentProductPosition": "10", "TargetPosition": "10",
                           "AGVPosition": "7"},
            }
        ],
    }
    plan_path = tmp_path / "bad_plan.json"
    plan_path.write_text(json.dumps(bad_plan))
    code, out, _ = run(
        ["check", "--plan", str(plan_path), "--domain", docs["domain"],
         "--problem", docs["problem"]],
        capsys,
    )
    assert code == 1
    kinds = {v["kind"] for v in json.loads(out)["violations"]}
    assert "PreconditionFailed" in kinds or "InitMismatch" in kinds


def test_usage_error_missing_solver(docs, capsys):
    code, _, _ = run(
        ["plan", "--domain", docs["domain"], "--max-happenings", "1"], capsys
    )
    assert code == 64


def test_usage_error_negative_bound(docs, capsys):
    code, _, _ = run(
        ["plan", "--domain", docs["domain"], "--problem", docs["problem"],
         "--max-happenings", "-1", "--solver-cmd", SOLVER],
        capsys,
    )
    assert code == 64


def test_boolean_plan_document_round_trip(capsys, tmp_path):
    doc = {
        "typeDescriptions": [{"id": "td.on", "datatype": "Boolean"}],
        "products": [
            {"id": "Lamp", "productTypeId": "L", "properties": [
                {"id": "lamp.on", "typeDescription": "td.on",
                 "instanceDescriptions": [
                     {"expressionGoal": "actualValue", "value": False}]},
                {"id": "lamp.on.after", "typeDescription": "td.on",
                 "instanceDescriptions": [
                     {"expressionGoal": "assurance", "value": True}]}]}
        ],
        "capabilities": [
            {"id": "SwitchOn", "kind": "provided", "inputs": [],
             "outputs": [{"entity": "Lamp", "properties": ["lamp.on.after"]}]},
            {"id": "req", "kind": "required", "inputs": [],
             "outputs": [{"entity": "Lamp", "properties": ["lamp.on"]}]},
        ],
    }
    # Goal: the lamp is on.
    doc["products"][0]["properties"][0]["instanceDescriptions"].append(
        {"expressionGoal": "requirement", "value": True}
    )
    model_path = tmp_path / "lamp.json"
    model_path.write_text(json.dumps(doc))
    plan_path = tmp_path / "lamp_plan.json"
    code, out, _ = run(
        ["plan", "--model", str(model_path), "--max-happenings", "2",
         "--solver-cmd", SOLVER, "--output", str(plan_path)],
        capsys,
    )
    assert code == 0
    document = json.loads(plan_path.read_text())
    assert document["happenings"][0]["applied"] == ["SwitchOn"]
    assert document["happenings"][0]["layer1"]["lamp.on"] is True
    code, out, _ = run(
        ["check", "--plan", str(plan_path), "--model", str(model_path)], capsys
    )
    assert code == 0


def test_missing_input_file(capsys):
    code, _, err = run(
        ["validate", "--model", "/nonexistent/model.json"], capsys
    )
    assert code == 66


def test_malformed_model_document(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"capabilities": "not-a-list"}')
    code, _, err = run(["validate", "--model", str(path)], capsys)
    assert code == 65


def test_text_format_output(docs, capsys):
    code, out, _ = run(
        ["validate", "--domain", docs["domain"], "--problem", docs["problem"],
         "--format", "text"],
        capsys,
    )
    assert code == 0
    assert "diagnostics" in out
