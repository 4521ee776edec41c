import pytest
from fractions import Fraction

import fixtures
from capplan.errors import DanglingReference, DuplicateId, SchemaError
from capplan.model import (
    Datatype,
    merge_documents,
    parse_model,
    partition_properties,
    serialize_model,
    validate,
)


def test_parse_transport_single_document():
    model = parse_model(fixtures.transport_single_doc())
    assert len(model.provided) == 1
    assert model.provided[0].id == "Transport"
    assert model.required.id == "TransportRequest"
    assert len(model.properties) == 4
    assert all(p.datatype is Datatype.REAL for p in model.all_properties())


def test_parse_two_document_merge():
    model = fixtures.transport_model()
    assert {c.id for c in model.provided} == {"Transport"}
    assert len(model.properties) == 6
    assert model.properties["TargetPosition"].carrier_id == "TransportOrder"


def test_zero_provided_capabilities_is_schema_legal():
    doc = {
        "typeDescriptions": [{"id": "td.x", "datatype": "Real"}],
        "products": [
            {
                "id": "P",
                "productTypeId": "T",
                "properties": [
                    {
                        "id": "p.x",
                        "typeDescription": "td.x",
                        "instanceDescriptions": [
                            {"expressionGoal": "requirement", "value": "1"}
                        ],
                    }
                ],
            }
        ],
        "capabilities": [
            {
                "id": "req",
                "kind": "required",
                "inputs": [],
                "outputs": [{"entity": "P", "properties": ["p.x"]}],
            }
        ],
    }
    model = parse_model(doc)
    assert model.provided == ()
    assert validate(model) == []


def test_dangling_type_description():
    doc = fixtures.transport_single_doc()
    doc["products"][0]["properties"][0]["typeDescription"] = "td.position.missing"
    with pytest.raises(DanglingReference):
        parse_model(doc)


def test_unknown_port_entity():
    doc = fixtures.transport_single_doc()
    doc["capabilities"][0]["inputs"][0]["entity"] = "NoSuchProduct"
    with pytest.raises(DanglingReference):
        parse_model(doc)


def test_required_capability_count_is_enforced():
    doc = fixtures.transport_domain()
    with pytest.raises(SchemaError):
        parse_model(doc)  # zero required
    both = merge_documents(
        fixtures.transport_single_doc(), fixtures.transport_problem()
    )
    with pytest.raises(SchemaError):
        parse_model(both)  # two required


def test_duplicate_ids_rejected_on_merge():
    merged = merge_documents(fixtures.transport_domain(), fixtures.transport_domain())
    with pytest.raises(DuplicateId):
        parse_model(merged)


def test_constraint_must_reference_attached_properties():
    doc = fixtures.transport_single_doc()
    doc["capabilities"][0]["inputs"] = doc["capabilities"][0]["inputs"][:2]
    model = parse_model(doc)  # AGVPosition no longer attached to Transport
    codes = {d.code for d in validate(model)}
    assert "ConstraintReference" in codes


def test_validate_clean_transport():
    assert validate(fixtures.transport_model()) == []


def _tiny_doc(instance_descriptions, datatype="Boolean"):
    return {
        "typeDescriptions": [{"id": "td.flag", "datatype": datatype}],
        "products": [
            {
                "id": "P",
                "productTypeId": "T",
                "properties": [
                    {
                        "id": "p.flag",
                        "typeDescription": "td.flag",
                        "instanceDescriptions": instance_descriptions,
                    }
                ],
            }
        ],
        "capabilities": [{"id": "req", "kind": "required", "inputs": [],
                          "outputs": [{"entity": "P", "properties": ["p.flag"]}]}],
    }


def test_validate_datatype_mismatch():
    doc = _tiny_doc([{"expressionGoal": "actualValue", "value": "3.5"}])
    diagnostics = validate(parse_model(doc))
    assert [d.code for d in diagnostics] == ["DatatypeMismatch"]
    assert diagnostics[0].element_id == "p.flag"


def test_validate_multiple_actual_values():
    doc = _tiny_doc(
        [
            {"expressionGoal": "actualValue", "value": True},
            {"expressionGoal": "actualValue", "value": False},
        ]
    )
    codes = [d.code for d in validate(parse_model(doc))]
    assert "MultipleActualValues" in codes


def test_validate_actual_value_shape():
    doc = _tiny_doc([{"expressionGoal": "actualValue"}])
    codes = [d.code for d in validate(parse_model(doc))]
    assert "ActualValueShape" in codes


def test_partition_transport():
    model = parse_model(fixtures.transport_single_doc())
    booleans, reals = partition_properties(model)
    assert booleans == frozenset()
    assert {p.id for p in reals} == {
        "CurrentProductPosition",
        "AGVPosition",
        "TargetPosition",
        "ProductPositionAfter",
    }


def test_partition_mixed_datatypes():
    doc = {
        "typeDescriptions": [
            {"id": "td.closed", "datatype": "Boolean"},
            {"id": "td.width", "datatype": "Real"},
        ],
        "resources": [
            {
                "id": "Gripper",
                "properties": [
                    {"id": "gripperClosed", "typeDescription": "td.closed"},
                    {"id": "jawWidth", "typeDescription": "td.width"},
                ],
            }
        ],
        "capabilities": [{"id": "req", "kind": "required", "inputs": [],
                          "outputs": []}],
    }
    booleans, reals = partition_properties(parse_model(doc))
    assert {p.id for p in booleans} == {"gripperClosed"}
    assert {p.id for p in reals} == {"jawWidth"}


def test_partition_empty_model():
    doc = {"capabilities": [{"id": "req", "kind": "required"}]}
    booleans, reals = partition_properties(parse_model(doc))
    assert booleans == frozenset() and reals == frozenset()


def test_partition_is_disjoint_cover():
    for seed in range(12):
        model = fixtures.random_model(seed)
        booleans, reals = partition_properties(model)
        assert booleans | reals == frozenset(model.all_properties())
        assert not booleans & reals


def test_serialize_round_trip():
    for build in (
        fixtures.transport_model,
        fixtures.drive_transport_model,
        lambda: parse_model(fixtures.transport_single_doc()),
    ):
        model = build()
        assert parse_model(serialize_model(model)) == model
    for seed in range(8):
        model = fixtures.random_model(seed)
        assert parse_model(serialize_model(model)) == model


def test_instance_values_are_exact():
    model = fixtures.transport_model(product_at="2.5")
    prop = model.properties["CurrentProductPosition"]
    assert prop.actual_values()[0].value == Fraction(5, 2)
