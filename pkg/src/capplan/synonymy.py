"""Synonym alignment: the identity machinery that replaces global variables.

Capabilities modeled by different vendors refer to the same physical object
under different identifiers.  Products (and information entities) of the
same type are synonymous; their same-typed properties are synonymous and
are closed transitively into classes.  The encoder creates one state
variable per class, so a capability writing one member is visible to every
capability reading another.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Capability,
    CapabilityModel,
    Datatype,
    InformationEntity,
    Product,
    Relation,
)
from . import expr as ex


@dataclass(frozen=True)
class PropertyClass:
    """One equivalence class of synonymous properties.

    class_id is the lexicographically smallest member id and doubles as the
    SMT state-variable name in the class-collapsed encoding.
    """

    class_id: str
    member_ids: tuple
    type_description_id: str
    datatype: Datatype


@dataclass(frozen=True)
class EffectSets:
    """Directly affected output properties of one capability."""

    eff: frozenset
    positive: frozenset
    negative: frozenset
    numeric: frozenset
    # Boolean outputs whose assurance just restates the previous value.
    remain_same: frozenset


@dataclass
class SynonymyIndex:
    classes: tuple
    class_of: dict
    syn_props: dict
    syn_caps: dict
    effects: dict

    def class_id(self, property_id: str) -> str:
        return self.class_of[property_id].class_id

    def members(self, class_id: str) -> tuple:
        for cls in self.classes:
            if cls.class_id == class_id:
                return cls.member_ids
        raise KeyError(class_id)


def synonymous_products(model: CapabilityModel) -> list:
    """Partition product and information ids by their type identifier."""
    blocks: dict = {}
    for product in model.products.values():
        blocks.setdefault(("product", product.product_type_id), set()).add(product.id)
    for info in model.information.values():
        blocks.setdefault(("information", info.type_id), set()).add(info.id)
    return [frozenset(ids) for _, ids in sorted(blocks.items())]


def _entity_block_key(model: CapabilityModel, carrier) -> tuple:
    if isinstance(carrier, Product):
        return ("product", carrier.product_type_id)
    if isinstance(carrier, InformationEntity):
        return ("information", carrier.type_id)
    # Resource-carried state never merges across resources; the property id
    # itself is the identity.
    return ("resource-property",)


def synonymous_properties(model: CapabilityModel) -> SynonymyIndex:
    """Group properties into classes: same carrier block and same type
    description, or the identical resource property."""
    groups: dict = {}
    for prop in model.all_properties():
        carrier = model.entity(prop.carrier_id)
        key = _entity_block_key(model, carrier)
        if key == ("resource-property",):
            key = ("resource-property", prop.id)
        else:
            key = key + (prop.type_description.id,)
        groups.setdefault(key, []).append(prop)

    classes = []
    class_of: dict = {}
    syn_props: dict = {}
    for _, members in sorted(groups.items(), key=lambda kv: min(p.id for p in kv[1])):
        member_ids = tuple(sorted(p.id for p in members))
        cls = PropertyClass(
            class_id=member_ids[0],
            member_ids=member_ids,
            type_description_id=members[0].type_description.id,
            datatype=members[0].datatype,
        )
        classes.append(cls)
        for pid in member_ids:
            class_of[pid] = cls
            syn_props[pid] = frozenset(m for m in member_ids if m != pid)

    index = SynonymyIndex(
        classes=tuple(classes),
        class_of=class_of,
        syn_props=syn_props,
        syn_caps={},
        effects={},
    )
    for cap in model.provided:
        index.effects[cap.id] = effect_sets(model, cap)
    index.syn_caps = synonymous_capabilities(index, model)
    return index


def synonymous_capabilities(index: SynonymyIndex, model: CapabilityModel) -> dict:
    """For each property, the provided capabilities it is not directly
    attached to but that touch one of its synonyms."""
    syn_caps: dict = {}
    for prop in model.all_properties():
        related = set()
        for cap in model.provided:
            attached = cap.attached_property_ids()
            if prop.id in attached:
                continue
            if index.syn_props[prop.id] & attached:
                related.add(cap.id)
        syn_caps[prop.id] = frozenset(related)
    return syn_caps


def effect_sets(model: CapabilityModel, cap: Capability) -> EffectSets:
    """Split the outputs of a provided capability into effect categories.

    An output is an effect when it carries an assurance or occurs in a
    constraint that touches outputs.  Boolean effects are signed by their
    assured constant; a valueless assurance means the value is kept and the
    capability stays out of the frame-axiom sets for that property.  Real
    effects are always numeric, even if the assured value happens to equal
    the previous one.
    """
    outputs = cap.output_property_ids()
    touched_by_constraint: set = set()
    for constraint in cap.constraints:
        refs = ex.references(constraint)
        if refs & outputs:
            touched_by_constraint |= refs & outputs

    eff: set = set()
    positive: set = set()
    negative: set = set()
    numeric: set = set()
    remain_same: set = set()
    for pid in outputs:
        prop = model.properties[pid]
        assurances = prop.assurances()
        if not assurances and pid not in touched_by_constraint:
            continue
        eff.add(pid)
        if prop.datatype is Datatype.REAL:
            numeric.add(pid)
            continue
        for desc in assurances:
            if desc.value is None:
                remain_same.add(pid)
            elif desc.relation in (Relation.EQ, Relation.NEQ):
                asserted_true = bool(desc.value) == (desc.relation is Relation.EQ)
                (positive if asserted_true else negative).add(pid)

    return EffectSets(
        eff=frozenset(eff),
        positive=frozenset(positive),
        negative=frozenset(negative),
        numeric=frozenset(numeric),
        remain_same=frozenset(remain_same),
    )


def build_index(model: CapabilityModel) -> SynonymyIndex:
    """Convenience entry point used by the encoder, planner and oracle."""
    return synonymous_properties(model)


def affecting_capabilities(index: SynonymyIndex, class_id: str, kind: str) -> tuple:
    """Provided capabilities with an effect of the given sign on any member
    of the class ('positive', 'negative' or 'numeric').

    This is the per-class union of the direct and synonymous-capability
    sets: reading "directly related" as "directly affected" keeps a
    capability that only writes the synonym of its own input inside the
    frame disjunction, which the transport pattern requires.
    """
    members = set(index.members(class_id))
    out = []
    for cap_id in sorted(index.effects):
        sets = index.effects[cap_id]
        pool = getattr(sets, kind)
        if pool & members:
            out.append(cap_id)
    return tuple(out)


def mutex_pairs(model: CapabilityModel, index: SynonymyIndex) -> tuple:
    """Unordered provided-capability pairs whose input/output property sets,
    mapped to classes, intersect."""
    caps = sorted(model.provided, key=lambda c: c.id)
    pairs = []
    for i, first in enumerate(caps):
        first_classes = {index.class_id(p) for p in first.attached_property_ids()}
        for second in caps[i + 1 :]:
            second_classes = {
                index.class_id(p) for p in second.attached_property_ids()
            }
            if first_classes & second_classes:
                pairs.append((first.id, second.id))
    return tuple(pairs)
