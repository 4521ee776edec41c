"""Capability data model: typed properties, carriers, capabilities.

Parses the canonical JSON-shaped document format, resolves every
reference, validates the type invariants and partitions properties into
boolean and real variables.  Models are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

from . import expr as ex
from .errors import DanglingReference, DuplicateId, SchemaError


class Datatype(Enum):
    BOOLEAN = "Boolean"
    REAL = "Real"


class ExpressionGoal(Enum):
    REQUIREMENT = "requirement"
    ASSURANCE = "assurance"
    ACTUAL_VALUE = "actualValue"


class Relation(Enum):
    EQ = "eq"
    NEQ = "neq"
    LT = "lt"
    GT = "gt"
    LEQ = "leq"
    GEQ = "geq"


class CapabilityKind(Enum):
    PROVIDED = "provided"
    REQUIRED = "required"


@dataclass(frozen=True)
class TypeDescription:
    id: str
    datatype: Datatype
    unit: Optional[str] = None
    label: Optional[str] = None


@dataclass(frozen=True)
class InstanceDescription:
    goal: ExpressionGoal
    relation: Relation = Relation.EQ
    value: Union[bool, Fraction, None] = None


@dataclass(frozen=True)
class Property:
    id: str
    type_description: TypeDescription
    carrier_id: str
    instance_descriptions: tuple = ()

    @property
    def datatype(self) -> Datatype:
        return self.type_description.datatype

    def with_goal(self, goal: ExpressionGoal) -> tuple:
        return tuple(d for d in self.instance_descriptions if d.goal is goal)

    def requirements(self) -> tuple:
        return self.with_goal(ExpressionGoal.REQUIREMENT)

    def assurances(self) -> tuple:
        return self.with_goal(ExpressionGoal.ASSURANCE)

    def actual_values(self) -> tuple:
        return self.with_goal(ExpressionGoal.ACTUAL_VALUE)


@dataclass(frozen=True)
class Product:
    id: str
    product_type_id: str
    properties: tuple = ()


@dataclass(frozen=True)
class Resource:
    id: str
    properties: tuple = ()


@dataclass(frozen=True)
class InformationEntity:
    id: str
    type_id: str
    properties: tuple = ()


@dataclass(frozen=True)
class CapabilityPort:
    """One input or output entry: an entity and the properties used there."""

    entity_id: str
    property_ids: tuple = ()


@dataclass(frozen=True)
class Capability:
    id: str
    kind: CapabilityKind
    inputs: tuple = ()
    outputs: tuple = ()
    constraints: tuple = ()

    def input_property_ids(self) -> frozenset:
        return frozenset(p for port in self.inputs for p in port.property_ids)

    def output_property_ids(self) -> frozenset:
        return frozenset(p for port in self.outputs for p in port.property_ids)

    def attached_property_ids(self) -> frozenset:
        return self.input_property_ids() | self.output_property_ids()


@dataclass(frozen=True)
class CapabilityModel:
    type_descriptions: dict
    products: dict
    resources: dict
    information: dict
    provided: tuple
    required: Capability
    properties: dict = field(default_factory=dict)

    def all_properties(self) -> tuple:
        return tuple(self.properties.values())

    def property(self, property_id: str) -> Property:
        return self.properties[property_id]

    def entity(self, entity_id: str):
        for registry in (self.products, self.resources, self.information):
            if entity_id in registry:
                return registry[entity_id]
        raise KeyError(entity_id)

    def carrier_of(self, property_id: str):
        return self.entity(self.properties[property_id].carrier_id)

    def capabilities(self) -> tuple:
        return self.provided + (self.required,)

    def capability(self, capability_id: str) -> Capability:
        for cap in self.capabilities():
            if cap.id == capability_id:
                return cap
        raise KeyError(capability_id)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    element_id: str
    message: str


_TOP_LEVEL_KEYS = ("typeDescriptions", "products", "resources", "information", "capabilities")

# Characters that would break quoted SMT-LIB symbols.
_FORBIDDEN_ID_CHARS = ("|", "\\")


def merge_documents(domain, problem) -> dict:
    """Combine a domain and a problem document; duplicate ids are rejected
    later by parse_model."""
    merged = {key: [] for key in _TOP_LEVEL_KEYS}
    for doc in (domain, problem):
        if doc is None:
            continue
        for key in _TOP_LEVEL_KEYS:
            merged[key] = merged[key] + list(doc.get(key, []))
    return merged


def parse_model(document) -> CapabilityModel:
    """Parse the canonical model document into a fully resolved model.

    Accepts a JSON string or an already-decoded dict.  Raises SchemaError,
    DuplicateId or DanglingReference on malformed input.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError("model document must be an object")
    unknown = [k for k in document if k not in _TOP_LEVEL_KEYS and not k.startswith("$")]
    if unknown:
        raise SchemaError(f"unknown top-level keys: {sorted(unknown)}")

    type_descriptions: dict = {}
    for doc in _as_list(document, "typeDescriptions"):
        td = _parse_type_description(doc)
        if td.id in type_descriptions:
            raise DuplicateId(f"type description {td.id!r} declared twice")
        type_descriptions[td.id] = td

    properties: dict = {}
    entity_ids: set = set()

    def parse_entity_properties(entity_doc, entity_id):
        out = []
        for pdoc in _as_list(entity_doc, "properties"):
            prop = _parse_property(pdoc, entity_id, type_descriptions)
            if prop.id in properties:
                raise DuplicateId(f"property {prop.id!r} declared twice")
            properties[prop.id] = prop
            out.append(prop)
        return tuple(out)

    def claim_entity_id(entity_id):
        if entity_id in entity_ids:
            raise DuplicateId(f"entity {entity_id!r} declared twice")
        entity_ids.add(entity_id)

    products: dict = {}
    for doc in _as_list(document, "products"):
        pid = _require_id(doc, "product")
        claim_entity_id(pid)
        products[pid] = Product(
            id=pid,
            product_type_id=_require_str(doc, "productTypeId", f"product {pid}"),
            properties=parse_entity_properties(doc, pid),
        )

    resources: dict = {}
    for doc in _as_list(document, "resources"):
        rid = _require_id(doc, "resource")
        claim_entity_id(rid)
        resources[rid] = Resource(id=rid, properties=parse_entity_properties(doc, rid))

    information: dict = {}
    for doc in _as_list(document, "information"):
        iid = _require_id(doc, "information entity")
        claim_entity_id(iid)
        information[iid] = InformationEntity(
            id=iid,
            type_id=_require_str(doc, "typeId", f"information entity {iid}"),
            properties=parse_entity_properties(doc, iid),
        )

    provided = []
    required = []
    cap_ids: set = set()
    for doc in _as_list(document, "capabilities"):
        cap = _parse_capability(doc, entity_ids, properties)
        if cap.id in cap_ids:
            raise DuplicateId(f"capability {cap.id!r} declared twice")
        cap_ids.add(cap.id)
        (provided if cap.kind is CapabilityKind.PROVIDED else required).append(cap)

    if len(required) != 1:
        raise SchemaError(
            f"exactly one required capability expected, found {len(required)}"
        )

    return CapabilityModel(
        type_descriptions=type_descriptions,
        products=products,
        resources=resources,
        information=information,
        provided=tuple(provided),
        required=required[0],
        properties=properties,
    )


def _as_list(doc, key):
    value = doc.get(key, [])
    if not isinstance(value, list):
        raise SchemaError(f"{key} must be a list")
    return value


def _require_id(doc, what) -> str:
    return _require_str(doc, "id", what)


def _require_str(doc, key, what) -> str:
    if not isinstance(doc, dict) or not isinstance(doc.get(key), str) or not doc[key]:
        raise SchemaError(f"{what} needs a non-empty string {key!r}")
    return doc[key]


def _parse_type_description(doc) -> TypeDescription:
    tid = _require_id(doc, "type description")
    raw = doc.get("datatype")
    try:
        datatype = Datatype(raw)
    except ValueError:
        raise SchemaError(f"type description {tid}: datatype must be Boolean or Real")
    return TypeDescription(
        id=tid, datatype=datatype, unit=doc.get("unit"), label=doc.get("label")
    )


def _parse_property(doc, carrier_id, type_descriptions) -> Property:
    pid = _require_id(doc, "property")
    td_id = _require_str(doc, "typeDescription", f"property {pid}")
    if td_id not in type_descriptions:
        raise DanglingReference(f"property {pid}: unknown type description {td_id!r}")
    descriptions = []
    for idoc in _as_list(doc, "instanceDescriptions"):
        descriptions.append(_parse_instance_description(idoc, pid))
    return Property(
        id=pid,
        type_description=type_descriptions[td_id],
        carrier_id=carrier_id,
        instance_descriptions=tuple(descriptions),
    )


def _parse_instance_description(doc, pid) -> InstanceDescription:
    if not isinstance(doc, dict):
        raise SchemaError(f"property {pid}: instance description must be an object")
    try:
        goal = ExpressionGoal(doc.get("expressionGoal"))
    except ValueError:
        raise SchemaError(
            f"property {pid}: expressionGoal must be requirement/assurance/actualValue"
        )
    try:
        relation = Relation(doc.get("relation", "eq"))
    except ValueError:
        raise SchemaError(f"property {pid}: unknown relation {doc.get('relation')!r}")
    value = doc.get("value")
    if value is not None and not isinstance(value, bool):
        value = ex.parse_number(value)
    return InstanceDescription(goal=goal, relation=relation, value=value)


def _parse_capability(doc, entity_ids, properties) -> Capability:
    cid = _require_id(doc, "capability")
    try:
        kind = CapabilityKind(doc.get("kind"))
    except ValueError:
        raise SchemaError(f"capability {cid}: kind must be provided or required")

    def parse_ports(key):
        ports = []
        for pdoc in _as_list(doc, key):
            eid = _require_str(pdoc, "entity", f"capability {cid} {key} entry")
            if eid not in entity_ids:
                raise DanglingReference(f"capability {cid}: unknown entity {eid!r}")
            prop_ids = pdoc.get("properties", [])
            if not isinstance(prop_ids, list):
                raise SchemaError(f"capability {cid}: port properties must be a list")
            for prop_id in prop_ids:
                if prop_id not in properties:
                    raise DanglingReference(
                        f"capability {cid}: unknown property {prop_id!r}"
                    )
                if properties[prop_id].carrier_id != eid:
                    raise SchemaError(
                        f"capability {cid}: property {prop_id!r} is not carried by {eid!r}"
                    )
            ports.append(CapabilityPort(entity_id=eid, property_ids=tuple(prop_ids)))
        return tuple(ports)

    constraints = tuple(
        ex.parse_expression(cdoc) for cdoc in _as_list(doc, "constraints")
    )
    return Capability(
        id=cid,
        kind=kind,
        inputs=parse_ports("inputs"),
        outputs=parse_ports("outputs"),
        constraints=constraints,
    )


def serialize_model(model: CapabilityModel) -> dict:
    """Inverse of parse_model (parse_model(serialize_model(m)) == m)."""

    def instance_doc(desc: InstanceDescription) -> dict:
        doc = {"expressionGoal": desc.goal.value, "relation": desc.relation.value}
        if desc.value is not None:
            doc["value"] = (
                desc.value if isinstance(desc.value, bool) else ex.number_to_text(desc.value)
            )
        return doc

    def property_doc(prop: Property) -> dict:
        return {
            "id": prop.id,
            "typeDescription": prop.type_description.id,
            "instanceDescriptions": [instance_doc(d) for d in prop.instance_descriptions],
        }

    def port_doc(port: CapabilityPort) -> dict:
        return {"entity": port.entity_id, "properties": list(port.property_ids)}

    def capability_doc(cap: Capability) -> dict:
        return {
            "id": cap.id,
            "kind": cap.kind.value,
            "inputs": [port_doc(p) for p in cap.inputs],
            "outputs": [port_doc(p) for p in cap.outputs],
            "constraints": [ex.serialize_expression(c) for c in cap.constraints],
        }

    return {
        "typeDescriptions": [
            {
                "id": td.id,
                "datatype": td.datatype.value,
                **({"unit": td.unit} if td.unit else {}),
                **({"label": td.label} if td.label else {}),
            }
            for td in model.type_descriptions.values()
        ],
        "products": [
            {
                "id": p.id,
                "productTypeId": p.product_type_id,
                "properties": [property_doc(q) for q in p.properties],
            }
            for p in model.products.values()
        ],
        "resources": [
            {"id": r.id, "properties": [property_doc(q) for q in r.properties]}
            for r in model.resources.values()
        ],
        "information": [
            {
                "id": i.id,
                "typeId": i.type_id,
                "properties": [property_doc(q) for q in i.properties],
            }
            for i in model.information.values()
        ],
        "capabilities": [capability_doc(c) for c in model.capabilities()],
    }


def validate(model: CapabilityModel) -> list:
    """Check every type invariant; an empty list means the model is sound."""
    diagnostics: list = []

    def flag(code, element, message):
        diagnostics.append(Diagnostic(code=code, element_id=element, message=message))

    for prop in model.all_properties():
        if prop.type_description.id not in model.type_descriptions:
            flag(
                "UnknownTypeDescription",
                prop.id,
                f"type description {prop.type_description.id!r} is not declared",
            )
        for ch in _FORBIDDEN_ID_CHARS:
            if ch in prop.id:
                flag("IdCharset", prop.id, f"property id contains forbidden {ch!r}")
        actuals = prop.actual_values()
        if len(actuals) > 1:
            flag("MultipleActualValues", prop.id, "more than one actual value")
        for desc in actuals:
            if desc.value is None or desc.relation is not Relation.EQ:
                flag(
                    "ActualValueShape",
                    prop.id,
                    "actual values must carry a value and use relation eq",
                )
        for desc in prop.instance_descriptions:
            if desc.value is None:
                continue
            is_bool = isinstance(desc.value, bool)
            if is_bool != (prop.datatype is Datatype.BOOLEAN):
                flag(
                    "DatatypeMismatch",
                    prop.id,
                    f"{desc.goal.value} value {desc.value!r} does not match "
                    f"datatype {prop.datatype.value}",
                )
            if is_bool and desc.relation not in (Relation.EQ, Relation.NEQ):
                flag(
                    "DatatypeMismatch",
                    prop.id,
                    f"ordering relation {desc.relation.value} on a boolean property",
                )

    for product in model.products.values():
        if not product.product_type_id:
            flag("EmptyProductType", product.id, "productTypeId must be non-empty")
    for info in model.information.values():
        if not info.type_id:
            flag("EmptyProductType", info.id, "typeId must be non-empty")

    for cap in model.capabilities():
        attached = cap.attached_property_ids()
        for ch in _FORBIDDEN_ID_CHARS:
            if ch in cap.id:
                flag("IdCharset", cap.id, f"capability id contains forbidden {ch!r}")
        for port in cap.inputs + cap.outputs:
            if port.entity_id not in {
                *model.products, *model.resources, *model.information
            }:
                flag(
                    "DanglingReference",
                    cap.id,
                    f"port references unknown entity {port.entity_id!r}",
                )
        for i, constraint in enumerate(cap.constraints):
            refs = ex.references(constraint)
            outside = refs - attached
            if outside:
                flag(
                    "ConstraintReference",
                    cap.id,
                    f"constraint {i} references properties not attached to the "
                    f"capability: {sorted(outside)}",
                )
                continue
            for pid, used_as in ex.infer_ref_types(constraint).items():
                declared = model.properties[pid].datatype
                if (used_as == "bool") != (declared is Datatype.BOOLEAN):
                    flag(
                        "ExpressionDatatype",
                        cap.id,
                        f"constraint {i} uses {pid} as {used_as} but it is "
                        f"{declared.value}",
                    )

    return diagnostics


def partition_properties(model: CapabilityModel):
    """Split all properties by datatype: (boolean set P, real set R)."""
    booleans = frozenset(
        p for p in model.all_properties() if p.datatype is Datatype.BOOLEAN
    )
    reals = frozenset(
        p for p in model.all_properties() if p.datatype is Datatype.REAL
    )
    return booleans, reals


def load_model(*paths) -> CapabilityModel:
    """Read one (single-file) or two (domain + problem) documents."""
    docs = []
    for path in paths:
        if path is None:
            continue
        with open(path, "r", encoding="utf-8") as handle:
            docs.append(json.load(handle))
    if not docs:
        raise SchemaError("no model documents given")
    if len(docs) == 1:
        return parse_model(docs[0])
    merged = docs[0]
    for extra in docs[1:]:
        merged = merge_documents(merged, extra)
    return parse_model(merged)
