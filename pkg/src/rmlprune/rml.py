"""RML mapping documents: parsing, normalization, translation, serialization.

Both RML generations are accepted: the current namespace
(``http://w3id.org/rml/``) and the legacy pair of ``rr:``
(``http://www.w3.org/ns/r2rml#``) with the old ``rml:``
(``http://semweb.mmlab.be/ns/rml#``).  Only CSV logical sources are in
scope; other reference formulations, graph maps, language maps, logical
tables and functions are rejected with messages naming the offending node.
Unknown properties on mapping nodes are likewise rejected rather than
dropped; triples whose subject is unreachable from every triples map only
produce a logged warning.

A document is *normal* when every triples map has an explicit subject map,
no class shortcuts, and each predicate-object map carries exactly one
predicate map and one object map.  :func:`normalize` rewrites any parsed
document into that form (idempotently); :func:`translate` requires it and
emits one triples-map expression per (triples map, predicate-object map)
pair, tagging each with a provenance id that :func:`serialize_pruned` uses
to write the surviving subset back out as a standalone mapping document.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .algebra import (
    AttrRef,
    BuildBlank,
    BuildIri,
    BuildLiteral,
    ConstantBlank,
    ConstantTerm,
    ExtendExpr,
    ExtractSpec,
    RmlMappingExpr,
    TemplateConcat,
    TextPart,
    TriplesMapExpr,
)
from .csvsource import CSV_KIND, ROWS_QUERY
from .errors import MappingModelError
from .rdf import RDF_TYPE, XSD_STRING, BlankNode, Iri, Literal, RdfTerm, Triple
from .turtle import parse_turtle

logger = logging.getLogger("rmlprune.rml")

RML_NEW = "http://w3id.org/rml/"
RR = "http://www.w3.org/ns/r2rml#"
RML_OLD = "http://semweb.mmlab.be/ns/rml#"
QL = "http://semweb.mmlab.be/ns/ql#"

DEFAULT_BASE_IRI = "http://example.com/base/"

IRI_TYPE = "iri"
LITERAL_TYPE = "literal"
BNODE_TYPE = "bnode"

_VOCAB: dict[str, str] = {}


def _vocab(token: str, *iris: str):
    for iri in iris:
        _VOCAB[iri] = token


_vocab("logicalSource", RML_NEW + "logicalSource", RML_OLD + "logicalSource")
_vocab("source", RML_NEW + "source", RML_OLD + "source")
_vocab("referenceFormulation", RML_NEW + "referenceFormulation", RML_OLD + "referenceFormulation")
_vocab("iterator", RML_NEW + "iterator", RML_OLD + "iterator")
_vocab("subjectMap", RML_NEW + "subjectMap", RR + "subjectMap")
_vocab("subject", RML_NEW + "subject", RR + "subject")
_vocab("predicateObjectMap", RML_NEW + "predicateObjectMap", RR + "predicateObjectMap")
_vocab("predicateMap", RML_NEW + "predicateMap", RR + "predicateMap")
_vocab("predicate", RML_NEW + "predicate", RR + "predicate")
_vocab("objectMap", RML_NEW + "objectMap", RR + "objectMap")
_vocab("object", RML_NEW + "object", RR + "object")
_vocab("constant", RML_NEW + "constant", RR + "constant")
_vocab("reference", RML_NEW + "reference", RML_OLD + "reference", RR + "column")
_vocab("template", RML_NEW + "template", RR + "template")
_vocab("termType", RML_NEW + "termType", RR + "termType")
# "datatType" is accepted as a datatype alias: it appears in the wild
_vocab(
    "datatype",
    RML_NEW + "datatype",
    RR + "datatype",
    RML_NEW + "datatType",
    RML_OLD + "datatType",
    RR + "datatType",
)
_vocab("class", RML_NEW + "class", RR + "class")
_vocab("parentTriplesMap", RML_NEW + "parentTriplesMap", RR + "parentTriplesMap")
_vocab("joinCondition", RML_NEW + "joinCondition", RR + "joinCondition")
_vocab("child", RML_NEW + "child", RR + "child")
_vocab("parent", RML_NEW + "parent", RR + "parent")

_REJECTED_PROPS: dict[str, str] = {}
for _ns in (RML_NEW, RR):
    _REJECTED_PROPS[_ns + "graphMap"] = "graph maps are not supported"
    _REJECTED_PROPS[_ns + "graph"] = "graph maps are not supported"
    _REJECTED_PROPS[_ns + "language"] = "language tags are not supported"
    _REJECTED_PROPS[_ns + "languageMap"] = "language tags are not supported"
_REJECTED_PROPS[RR + "logicalTable"] = "R2RML logical tables are not supported (use a CSV logical source)"
_REJECTED_PROPS[RR + "sqlQuery"] = "SQL-backed sources are not supported"
_REJECTED_PROPS[RML_OLD + "query"] = "query-backed sources are not supported"
_REJECTED_PROPS["http://semweb.mmlab.be/ns/fnml#functionValue"] = "function maps are not supported"
_REJECTED_PROPS[RML_NEW + "logicalTarget"] = "logical targets are not supported"

_TERM_TYPES = {
    RML_NEW + "IRI": IRI_TYPE,
    RR + "IRI": IRI_TYPE,
    RML_NEW + "Literal": LITERAL_TYPE,
    RR + "Literal": LITERAL_TYPE,
    RML_NEW + "BlankNode": BNODE_TYPE,
    RR + "BlankNode": BNODE_TYPE,
}

_FORMULATIONS = {
    QL + "CSV": CSV_KIND,
    RML_NEW + "CSV": CSV_KIND,
}
_KNOWN_OTHER_FORMULATIONS = {
    QL + "JSONPath": "JSON",
    QL + "XPath": "XML",
    RML_NEW + "JSONPath": "JSON",
    RML_NEW + "XPath": "XML",
}


# ---------------------------------------------------------------------------
# document model
# ---------------------------------------------------------------------------


@dataclass
class TermMapModel:
    kind: str  # "constant" | "reference" | "template"
    value: RdfTerm | str
    term_type: str | None = None
    datatype: str | None = None


@dataclass
class RefObjectMapModel:
    parent: str
    joins: tuple[tuple[str, str], ...]


@dataclass
class PredicateObjectMapModel:
    predicate_maps: tuple[TermMapModel, ...] = ()
    predicate_shortcuts: tuple[Iri, ...] = ()
    object_maps: tuple[TermMapModel | RefObjectMapModel, ...] = ()
    object_shortcuts: tuple[RdfTerm, ...] = ()


@dataclass
class LogicalSourceModel:
    source: str
    formulation: str = CSV_KIND


@dataclass
class TriplesMapModel:
    id: str
    logical_source: LogicalSourceModel
    subject_map: TermMapModel | None = None
    subject_shortcut: RdfTerm | None = None
    classes: tuple[str, ...] = ()
    poms: tuple[PredicateObjectMapModel, ...] = ()


@dataclass
class RmlDocument:
    triples_maps: tuple[TriplesMapModel, ...]
    base_iri: str = DEFAULT_BASE_IRI


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _node_key(term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return "_:" + term.label
    raise MappingModelError(f"expected an IRI or blank node, found {term!r}")


def _fmt_node(key: str) -> str:
    return key if key.startswith("_:") else f"<{key}>"


class _Graph:
    def __init__(self, triples: list[Triple]):
        self._props: dict[str, list[tuple[Iri, RdfTerm]]] = {}
        for t in triples:
            self._props.setdefault(_node_key(t.s), []).append((t.p, t.o))

    def subjects(self) -> list[str]:
        return list(self._props)

    def props(self, key: str) -> list[tuple[Iri, RdfTerm]]:
        return self._props.get(key, [])


def _prop_token(pred: Iri, node: str) -> str:
    token = _VOCAB.get(pred.value)
    if token is not None:
        return token
    if pred.value == RDF_TYPE:
        return "type"
    message = _REJECTED_PROPS.get(pred.value)
    if message is not None:
        raise MappingModelError(f"{message} (property <{pred.value}> on {_fmt_node(node)})")
    raise MappingModelError(
        f"unknown property <{pred.value}> on {_fmt_node(node)}; refusing to drop it silently"
    )


def _as_string_literal(obj: RdfTerm, what: str, node: str) -> str:
    if isinstance(obj, Literal) and obj.datatype == XSD_STRING:
        return obj.lex
    raise MappingModelError(f"{what} on {_fmt_node(node)} must be a plain string, found {obj!r}")


def _parse_logical_source(g: _Graph, key: str) -> LogicalSourceModel:
    source = None
    formulation = None
    for pred, obj in g.props(key):
        token = _prop_token(pred, key)
        if token == "source":
            source = _as_string_literal(obj, "source", key)
        elif token == "referenceFormulation":
            if not isinstance(obj, Iri):
                raise MappingModelError(
                    f"reference formulation on {_fmt_node(key)} must be an IRI"
                )
            formulation = _FORMULATIONS.get(obj.value)
            if formulation is None:
                kind = _KNOWN_OTHER_FORMULATIONS.get(obj.value, obj.value)
                raise MappingModelError(
                    f"unsupported reference formulation {kind!r} on {_fmt_node(key)}; "
                    f"only CSV sources are supported"
                )
        elif token == "iterator":
            raise MappingModelError(
                f"iterator on {_fmt_node(key)} is not supported: CSV sources are "
                f"always iterated row by row"
            )
        elif token == "type":
            continue
        else:
            raise MappingModelError(
                f"property {token!r} does not belong on a logical source ({_fmt_node(key)})"
            )
    if source is None:
        raise MappingModelError(f"logical source {_fmt_node(key)} has no source")
    return LogicalSourceModel(source=source, formulation=formulation or CSV_KIND)


def _parse_term_map(
    g: _Graph, key: str, *, allow_classes: bool = False
) -> tuple[TermMapModel, tuple[str, ...]]:
    kind = None
    value: RdfTerm | str | None = None
    term_type = None
    datatype = None
    classes: list[str] = []
    for pred, obj in g.props(key):
        token = _prop_token(pred, key)
        if token == "constant":
            _set_kind(key, kind, "constant")
            kind, value = "constant", obj
        elif token == "reference":
            _set_kind(key, kind, "reference")
            kind, value = "reference", _as_string_literal(obj, "reference", key)
        elif token == "template":
            _set_kind(key, kind, "template")
            kind, value = "template", _as_string_literal(obj, "template", key)
        elif token == "termType":
            if not isinstance(obj, Iri) or obj.value not in _TERM_TYPES:
                raise MappingModelError(f"unknown term type {obj!r} on {_fmt_node(key)}")
            term_type = _TERM_TYPES[obj.value]
        elif token == "datatype":
            if not isinstance(obj, Iri):
                raise MappingModelError(f"datatype on {_fmt_node(key)} must be an IRI")
            datatype = obj.value
        elif token == "class":
            if not allow_classes:
                raise MappingModelError(
                    f"class is only allowed on subject maps ({_fmt_node(key)})"
                )
            if not isinstance(obj, Iri):
                raise MappingModelError(f"class on {_fmt_node(key)} must be an IRI")
            classes.append(obj.value)
        elif token == "type":
            continue
        else:
            raise MappingModelError(
                f"property {token!r} does not belong on a term map ({_fmt_node(key)})"
            )
    if kind is None:
        raise MappingModelError(
            f"term map {_fmt_node(key)} needs exactly one of constant, reference, template"
        )
    return TermMapModel(kind=kind, value=value, term_type=term_type, datatype=datatype), tuple(classes)


def _set_kind(key: str, current: str | None, new: str):
    if current is not None:
        raise MappingModelError(
            f"term map {_fmt_node(key)} mixes {current} with {new}; exactly one of "
            f"constant, reference, template is allowed"
        )


def _parse_ref_object_map(g: _Graph, key: str) -> RefObjectMapModel:
    parent = None
    joins: list[tuple[str, str]] = []
    for pred, obj in g.props(key):
        token = _prop_token(pred, key)
        if token == "parentTriplesMap":
            parent = _node_key(obj)
        elif token == "joinCondition":
            child_ref = None
            parent_ref = None
            jkey = _node_key(obj)
            for jpred, jobj in g.props(jkey):
                jtoken = _prop_token(jpred, jkey)
                if jtoken == "child":
                    child_ref = _as_string_literal(jobj, "child", jkey)
                elif jtoken == "parent":
                    parent_ref = _as_string_literal(jobj, "parent", jkey)
                elif jtoken == "type":
                    continue
                else:
                    raise MappingModelError(
                        f"property {jtoken!r} does not belong on a join condition "
                        f"({_fmt_node(jkey)})"
                    )
            if child_ref is None or parent_ref is None:
                raise MappingModelError(
                    f"join condition {_fmt_node(jkey)} needs both child and parent"
                )
            joins.append((child_ref, parent_ref))
        elif token in ("constant", "reference", "template", "termType", "datatype"):
            raise MappingModelError(
                f"object map {_fmt_node(key)} mixes parentTriplesMap with {token}"
            )
        elif token == "type":
            continue
        else:
            raise MappingModelError(
                f"property {token!r} does not belong on a referencing object map "
                f"({_fmt_node(key)})"
            )
    if parent is None:
        raise MappingModelError(f"referencing object map {_fmt_node(key)} has no parent triples map")
    if not joins:
        raise MappingModelError(
            f"referencing object map {_fmt_node(key)} has no join conditions; an "
            f"unconditioned join is not supported"
        )
    return RefObjectMapModel(parent=parent, joins=tuple(joins))


def _has_parent(g: _Graph, key: str) -> bool:
    for pred, _ in g.props(key):
        if _VOCAB.get(pred.value) == "parentTriplesMap":
            return True
    return False


def _parse_pom(g: _Graph, key: str, visited: set[str]) -> PredicateObjectMapModel:
    visited.add(key)
    predicate_maps: list[TermMapModel] = []
    predicate_shortcuts: list[Iri] = []
    object_maps: list[TermMapModel | RefObjectMapModel] = []
    object_shortcuts: list[RdfTerm] = []
    for pred, obj in g.props(key):
        token = _prop_token(pred, key)
        if token == "predicateMap":
            pkey = _node_key(obj)
            visited.add(pkey)
            model, _ = _parse_term_map(g, pkey)
            predicate_maps.append(model)
        elif token == "predicate":
            if not isinstance(obj, Iri):
                raise MappingModelError(
                    f"predicate shortcut on {_fmt_node(key)} must be an IRI, found {obj!r}"
                )
            predicate_shortcuts.append(obj)
        elif token == "objectMap":
            okey = _node_key(obj)
            visited.add(okey)
            if _has_parent(g, okey):
                for _, jobj in g.props(okey):
                    if isinstance(jobj, (Iri, BlankNode)):
                        visited.add(_node_key(jobj))
                object_maps.append(_parse_ref_object_map(g, okey))
            else:
                model, _ = _parse_term_map(g, okey)
                object_maps.append(model)
        elif token == "object":
            object_shortcuts.append(obj)
        elif token == "type":
            continue
        else:
            raise MappingModelError(
                f"property {token!r} does not belong on a predicate-object map "
                f"({_fmt_node(key)})"
            )
    if not predicate_maps and not predicate_shortcuts:
        raise MappingModelError(f"predicate-object map {_fmt_node(key)} has no predicate")
    if not object_maps and not object_shortcuts:
        raise MappingModelError(f"predicate-object map {_fmt_node(key)} has no object")
    return PredicateObjectMapModel(
        predicate_maps=tuple(predicate_maps),
        predicate_shortcuts=tuple(predicate_shortcuts),
        object_maps=tuple(object_maps),
        object_shortcuts=tuple(object_shortcuts),
    )


def parse_rml(data: bytes | str) -> RmlDocument:
    """Parse an RML mapping document from Turtle bytes or text."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    tdoc = parse_turtle(text)
    g = _Graph(tdoc.triples)

    tm_keys = [
        key
        for key in g.subjects()
        if any(_VOCAB.get(p.value) == "logicalSource" for p, _ in g.props(key))
    ]
    if not tm_keys:
        raise MappingModelError("no triples maps found (no subject carries a logical source)")

    visited: set[str] = set()
    triples_maps: list[TriplesMapModel] = []
    for key in tm_keys:
        visited.add(key)
        logical_source = None
        subject_map = None
        subject_shortcut = None
        classes: tuple[str, ...] = ()
        poms: list[PredicateObjectMapModel] = []
        for pred, obj in g.props(key):
            token = _prop_token(pred, key)
            if token == "logicalSource":
                if logical_source is not None:
                    raise MappingModelError(
                        f"triples map {_fmt_node(key)} has more than one logical source"
                    )
                ls_key = _node_key(obj)
                visited.add(ls_key)
                logical_source = _parse_logical_source(g, ls_key)
            elif token == "subjectMap":
                if subject_map is not None:
                    raise MappingModelError(
                        f"triples map {_fmt_node(key)} has more than one subject map"
                    )
                skey = _node_key(obj)
                visited.add(skey)
                subject_map, classes = _parse_term_map(g, skey, allow_classes=True)
            elif token == "subject":
                subject_shortcut = obj
            elif token == "predicateObjectMap":
                poms.append(_parse_pom(g, _node_key(obj), visited))
            elif token == "type":
                continue
            else:
                raise MappingModelError(
                    f"property {token!r} does not belong on a triples map ({_fmt_node(key)})"
                )
        if subject_map is not None and subject_shortcut is not None:
            raise MappingModelError(
                f"triples map {_fmt_node(key)} has both a subject map and a subject shortcut"
            )
        if subject_map is None and subject_shortcut is None:
            raise MappingModelError(f"triples map {_fmt_node(key)} lacks a subject map")
        triples_maps.append(
            TriplesMapModel(
                id=key,
                logical_source=logical_source,
                subject_map=subject_map,
                subject_shortcut=subject_shortcut,
                classes=classes,
                poms=tuple(poms),
            )
        )

    unreachable = [k for k in g.subjects() if k not in visited]
    for key in unreachable:
        significant = [p for p, _ in g.props(key) if p.value != RDF_TYPE]
        if significant:
            logger.warning(
                "subject %s is not reachable from any triples map; ignoring it",
                _fmt_node(key),
            )

    base = tdoc.base or DEFAULT_BASE_IRI
    return RmlDocument(triples_maps=tuple(triples_maps), base_iri=base)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def _shortcut_to_map(term: RdfTerm) -> TermMapModel:
    return TermMapModel(kind="constant", value=term)


def is_normal(doc: RmlDocument) -> bool:
    for tm in doc.triples_maps:
        if tm.subject_map is None or tm.subject_shortcut is not None or tm.classes:
            return False
        for pom in tm.poms:
            if pom.predicate_shortcuts or pom.object_shortcuts:
                return False
            if len(pom.predicate_maps) != 1 or len(pom.object_maps) != 1:
                return False
    return True


def normalize(doc: RmlDocument) -> RmlDocument:
    """Rewrite shortcuts, class assertions and multi-maps into singleton
    predicate-object maps.  Idempotent; already-normal documents come back
    structurally identical."""
    new_tms = []
    for tm in doc.triples_maps:
        subject_map = tm.subject_map
        if subject_map is None:
            subject_map = _shortcut_to_map(tm.subject_shortcut)
        poms: list[PredicateObjectMapModel] = []
        for cls in tm.classes:
            poms.append(
                PredicateObjectMapModel(
                    predicate_maps=(TermMapModel(kind="constant", value=Iri(RDF_TYPE)),),
                    object_maps=(TermMapModel(kind="constant", value=Iri(cls)),),
                )
            )
        for pom in tm.poms:
            predicates = list(pom.predicate_maps) + [
                _shortcut_to_map(p) for p in pom.predicate_shortcuts
            ]
            objects = list(pom.object_maps) + [
                _shortcut_to_map(o) for o in pom.object_shortcuts
            ]
            for pm in predicates:
                for om in objects:
                    poms.append(
                        PredicateObjectMapModel(predicate_maps=(pm,), object_maps=(om,))
                    )
        new_tms.append(
            replace(
                tm,
                subject_map=subject_map,
                subject_shortcut=None,
                classes=(),
                poms=tuple(poms),
            )
        )
    return RmlDocument(triples_maps=tuple(new_tms), base_iri=doc.base_iri)


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------


def parse_template(template: str) -> list[tuple[str, str]]:
    """Split a template into ("text", s) and ("ref", name) parts.

    Backslash escapes the next character (so ``\\{`` is a literal brace);
    placeholders may not nest and may not be empty.
    """
    parts: list[tuple[str, str]] = []
    buf: list[str] = []
    i = 0
    n = len(template)
    while i < n:
        ch = template[i]
        if ch == "\\":
            if i + 1 >= n:
                raise MappingModelError(f"dangling escape at end of template {template!r}")
            buf.append(template[i + 1])
            i += 2
        elif ch == "{":
            j = i + 1
            name: list[str] = []
            while j < n and template[j] != "}":
                if template[j] in "{\\":
                    raise MappingModelError(
                        f"invalid character {template[j]!r} inside placeholder of "
                        f"template {template!r}"
                    )
                name.append(template[j])
                j += 1
            if j >= n:
                raise MappingModelError(f"unbalanced '{{' in template {template!r}")
            if not name:
                raise MappingModelError(f"empty placeholder in template {template!r}")
            if buf:
                parts.append(("text", "".join(buf)))
                buf = []
            parts.append(("ref", "".join(name)))
            i = j + 1
        elif ch == "}":
            raise MappingModelError(f"unbalanced '}}' in template {template!r}")
        else:
            buf.append(ch)
            i += 1
    if buf or not parts:
        parts.append(("text", "".join(buf)))
    return parts


def _term_map_refs(model: TermMapModel) -> list[str]:
    if model.kind == "reference":
        return [model.value]
    if model.kind == "template":
        return [name for kind, name in parse_template(model.value) if kind == "ref"]
    return []


# ---------------------------------------------------------------------------
# translation
# ---------------------------------------------------------------------------


def effective_term_type(model: TermMapModel, position: str) -> str:
    """The term type a map produces, after defaulting rules.

    Subject and predicate maps default to IRIs.  Object maps default to
    literals when reference-valued or datatyped, and to IRIs otherwise.
    Constants carry their own kind.
    """
    if model.term_type is not None:
        return model.term_type
    if model.kind == "constant":
        if isinstance(model.value, Iri):
            return IRI_TYPE
        if isinstance(model.value, BlankNode):
            return BNODE_TYPE
        return LITERAL_TYPE
    if position == "object" and (model.kind == "reference" or model.datatype is not None):
        return LITERAL_TYPE
    return IRI_TYPE


def _check_term_map(model: TermMapModel, position: str, where: str) -> str:
    ttype = effective_term_type(model, position)
    if model.kind == "constant":
        value_type = effective_term_type(TermMapModel(kind="constant", value=model.value), position)
        if ttype != value_type:
            raise MappingModelError(
                f"{where}: constant {model.value!r} conflicts with term type {ttype!r}"
            )
    if position in ("subject", "parent-subject") and ttype == LITERAL_TYPE:
        raise MappingModelError(f"{where}: subject maps cannot produce literals")
    if position == "predicate" and ttype != IRI_TYPE:
        raise MappingModelError(f"{where}: predicate maps must produce IRIs")
    if model.datatype is not None and ttype != LITERAL_TYPE:
        raise MappingModelError(
            f"{where}: datatype is only allowed on literal-producing maps"
        )
    return ttype


def _to_extend(
    model: TermMapModel, attr_of: dict[str, str], base: str, position: str, where: str
) -> ExtendExpr:
    ttype = _check_term_map(model, position, where)
    if model.kind == "constant":
        if isinstance(model.value, BlankNode):
            return ConstantBlank(model.value)
        return ConstantTerm(model.value)
    if model.kind == "reference":
        body: TextPart | AttrRef | TemplateConcat = AttrRef(attr_of[model.value])
    else:
        mapped = [
            TextPart(text) if kind == "text" else AttrRef(attr_of[text])
            for kind, text in parse_template(model.value)
        ]
        body = mapped[0] if len(mapped) == 1 else TemplateConcat(tuple(mapped))
    if ttype == LITERAL_TYPE:
        return BuildLiteral(body, model.datatype or XSD_STRING)
    if ttype == BNODE_TYPE:
        return BuildBlank(body)
    return BuildIri(body, base)


def _parent_attr_name(ref: str, taken: set[str]) -> str:
    candidate = f"{ref}@parent"
    while candidate in taken:
        candidate += "'"
    return candidate


def translate(doc: RmlDocument) -> RmlMappingExpr:
    """One triples-map expression per (triples map, predicate-object map).

    The document must be normal (see :func:`normalize`).
    """
    if not is_normal(doc):
        raise MappingModelError("translate requires a normalized document")
    by_id = {tm.id: tm for tm in doc.triples_maps}
    base = doc.base_iri
    exprs: list[TriplesMapExpr] = []
    for tm in doc.triples_maps:
        if tm.logical_source.formulation != CSV_KIND:
            raise MappingModelError(
                f"triples map {_fmt_node(tm.id)} uses a non-CSV source"
            )
        subject_where = f"subject map of {_fmt_node(tm.id)}"
        for j, pom in enumerate(tm.poms):
            pm = pom.predicate_maps[0]
            om = pom.object_maps[0]
            where = f"predicate-object map {j} of {_fmt_node(tm.id)}"

            child_refs: list[str] = []
            for refs in (
                _term_map_refs(tm.subject_map),
                _term_map_refs(pm),
                _term_map_refs(om) if isinstance(om, TermMapModel) else [],
                [c for c, _ in om.joins] if isinstance(om, RefObjectMapModel) else [],
            ):
                for r in refs:
                    if r not in child_refs:
                        child_refs.append(r)
            child_attr_of = {r: r for r in child_refs}
            extract = ExtractSpec(
                source_ref=tm.logical_source.source,
                source_type=CSV_KIND,
                query=ROWS_QUERY,
                selectors=dict(child_attr_of),
            )
            subject_expr = _to_extend(tm.subject_map, child_attr_of, base, "subject", subject_where)
            predicate_expr = _to_extend(pm, child_attr_of, base, "predicate", where)

            if isinstance(om, RefObjectMapModel):
                parent_tm = by_id.get(om.parent)
                if parent_tm is None:
                    raise MappingModelError(
                        f"{where}: parent triples map {_fmt_node(om.parent)} does not exist"
                    )
                if parent_tm.logical_source.formulation != CSV_KIND:
                    raise MappingModelError(
                        f"{where}: parent triples map {_fmt_node(om.parent)} uses a non-CSV source"
                    )
                parent_refs: list[str] = []
                for r in _term_map_refs(parent_tm.subject_map) + [p for _, p in om.joins]:
                    if r not in parent_refs:
                        parent_refs.append(r)
                taken = set(child_refs)
                parent_attr_of: dict[str, str] = {}
                for r in parent_refs:
                    name = _parent_attr_name(r, taken)
                    taken.add(name)
                    parent_attr_of[r] = name
                parent_extract = ExtractSpec(
                    source_ref=parent_tm.logical_source.source,
                    source_type=CSV_KIND,
                    query=ROWS_QUERY,
                    selectors={attr: r for r, attr in parent_attr_of.items()},
                )
                object_expr = _to_extend(
                    parent_tm.subject_map,
                    parent_attr_of,
                    base,
                    "parent-subject",
                    f"subject map of {_fmt_node(parent_tm.id)}",
                )
                join_conditions = tuple(
                    (c, parent_attr_of[p]) for c, p in om.joins
                )
                exprs.append(
                    TriplesMapExpr(
                        subject_expr=subject_expr,
                        predicate_expr=predicate_expr,
                        object_expr=object_expr,
                        extract=extract,
                        parent_extract=parent_extract,
                        join_conditions=join_conditions,
                        provenance=f"{tm.id}#pom{j}",
                    )
                )
            else:
                object_expr = _to_extend(om, child_attr_of, base, "object", where)
                exprs.append(
                    TriplesMapExpr(
                        subject_expr=subject_expr,
                        predicate_expr=predicate_expr,
                        object_expr=object_expr,
                        extract=extract,
                        provenance=f"{tm.id}#pom{j}",
                    )
                )
    if not exprs:
        raise MappingModelError(
            "the document has no predicate-object maps, so it produces no triples"
        )
    return RmlMappingExpr(tuple(exprs))


# ---------------------------------------------------------------------------
# serialization of pruned documents
# ---------------------------------------------------------------------------


def _turtle_escape(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    return out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")


def _render_constant(term: RdfTerm) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if term.datatype == XSD_STRING:
        return f'"{_turtle_escape(term.lex)}"'
    return f'"{_turtle_escape(term.lex)}"^^<{term.datatype}>'


_TYPE_KEYWORD = {IRI_TYPE: "rml:IRI", LITERAL_TYPE: "rml:Literal", BNODE_TYPE: "rml:BlankNode"}


def _render_term_map(model: TermMapModel, position: str, indent: str) -> list[str]:
    lines = []
    if model.kind == "constant":
        lines.append(f"{indent}rml:constant {_render_constant(model.value)} ;")
    elif model.kind == "reference":
        lines.append(f'{indent}rml:reference "{_turtle_escape(model.value)}" ;')
    else:
        lines.append(f'{indent}rml:template "{_turtle_escape(model.value)}" ;')
    if model.kind != "constant":
        ttype = effective_term_type(model, position)
        lines.append(f"{indent}rml:termType {_TYPE_KEYWORD[ttype]} ;")
    if model.datatype is not None and model.datatype != XSD_STRING:
        lines.append(f"{indent}rml:datatype <{model.datatype}> ;")
    lines[-1] = lines[-1].rstrip(" ;")
    return lines


def _render_tm_ref(key: str, pom_index: int | None = None) -> str:
    if key.startswith("_:"):
        label = key[2:]
        return f"_:{label}" if pom_index is None else f"_:{label}_pom{pom_index}"
    return f"<{key}>" if pom_index is None else f"<{key}-pom{pom_index}>"


def _render_logical_source(ls: LogicalSourceModel) -> str:
    return (
        f'rml:logicalSource [ rml:source "{_turtle_escape(ls.source)}" ; '
        f"rml:referenceFormulation rml:CSV ]"
    )


def serialize_pruned(retained, doc: RmlDocument) -> str:
    """An RML document containing the retained triples-map expressions.

    *retained* is an iterable of expressions produced by translating
    (a normalization of) *doc*; each becomes one triples map with a single
    predicate-object map.  Joined expressions additionally pull in one
    pom-less helper triples map per referenced parent, so join targets
    resolve.  With nothing retained, the output is an empty mapping with a
    marker comment.
    """
    if isinstance(retained, RmlMappingExpr):
        retained = retained.trmaps
    ndoc = normalize(doc)
    index: dict[str, tuple[TriplesMapModel, int, PredicateObjectMapModel]] = {}
    for tm in ndoc.triples_maps:
        for j, pom in enumerate(tm.poms):
            index[f"{tm.id}#pom{j}"] = (tm, j, pom)
    by_id = {tm.id: tm for tm in ndoc.triples_maps}

    blocks: list[str] = []
    parents_needed: dict[str, TriplesMapModel] = {}
    seen: set[str] = set()
    for expr in retained:
        if expr.provenance in seen:
            continue
        seen.add(expr.provenance)
        entry = index.get(expr.provenance)
        if entry is None:
            raise MappingModelError(
                f"retained expression {expr.provenance!r} does not come from this document"
            )
        tm, j, pom = entry
        pm = pom.predicate_maps[0]
        om = pom.object_maps[0]
        lines = [f"{_render_tm_ref(tm.id, j)} {_render_logical_source(tm.logical_source)} ;"]
        lines.append("  rml:subjectMap [")
        lines.extend(_render_term_map(tm.subject_map, "subject", "    "))
        lines.append("  ] ;")
        lines.append("  rml:predicateObjectMap [")
        lines.append("    rml:predicateMap [")
        lines.extend(_render_term_map(pm, "predicate", "      "))
        lines.append("    ] ;")
        if isinstance(om, RefObjectMapModel):
            parent_tm = by_id.get(om.parent)
            if parent_tm is None:
                raise MappingModelError(
                    f"parent triples map {_fmt_node(om.parent)} does not exist"
                )
            parents_needed.setdefault(om.parent, parent_tm)
            lines.append("    rml:objectMap [")
            lines.append(f"      rml:parentTriplesMap {_render_tm_ref(om.parent)} ;")
            for k, (child_ref, parent_ref) in enumerate(om.joins):
                tail = " ;" if k + 1 < len(om.joins) else ""
                lines.append(
                    f'      rml:joinCondition [ rml:child "{_turtle_escape(child_ref)}" ; '
                    f'rml:parent "{_turtle_escape(parent_ref)}" ]{tail}'
                )
            lines.append("    ]")
        else:
            lines.append("    rml:objectMap [")
            lines.extend(_render_term_map(om, "object", "      "))
            lines.append("    ]")
        lines.append("  ] .")
        blocks.append("\n".join(lines))

    for parent_id, parent_tm in parents_needed.items():
        lines = [
            f"{_render_tm_ref(parent_id)} {_render_logical_source(parent_tm.logical_source)} ;"
        ]
        lines.append("  rml:subjectMap [")
        lines.extend(_render_term_map(parent_tm.subject_map, "subject", "    "))
        lines.append("  ] .")
        blocks.append("\n".join(lines))

    header = "@prefix rml: <http://w3id.org/rml/> .\n"
    if not blocks:
        return header + "\n# fully pruned: no triples map is compatible with the query\n"
    return header + "\n" + "\n\n".join(blocks) + "\n"
