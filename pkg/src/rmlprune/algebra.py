"""Mapping expressions and their evaluation semantics.

The expression language mirrors how RML builds terms from tabular data:

* *template expressions* (:class:`TextPart`, :class:`AttrRef`,
  :class:`TemplateConcat`) evaluate to strings, with the error value
  :data:`EPSILON` propagating through concatenation;
* *term constructors* (:class:`ConstantTerm`, :class:`ConstantBlank`,
  :class:`BuildLiteral`, :class:`BuildIri`, :class:`BuildBlank`) turn those
  strings into RDF terms, again yielding :data:`EPSILON` on failure;
* a :class:`TriplesMapExpr` glues an extraction from one source (or a join
  of two) to one constructor per triple position; and
* an :class:`RmlMappingExpr` is the union of its triples-map expressions,
  each projected to the three reserved output attributes.

Evaluation takes a *source assignment* binding each source reference to a
parsed data object and produces a mapping relation; feeding the top-level
relation to :func:`~rmlprune.relations.graph_from_relation` materializes the
RDF graph.
"""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import product
from typing import Union

from .csvsource import CsvSource
from .errors import SourceInputError, StructuralError
from .rdf import BlankNode, Iri, Literal, RdfGraph, RdfTerm, is_absolute_iri, is_term, is_valid_iri
from .relations import (
    EPSILON,
    OBJECT_ATTR,
    OUTPUT_ATTRS,
    PREDICATE_ATTR,
    SUBJECT_ATTR,
    Attribute,
    Epsilon,
    MappingRelation,
    MappingTuple,
    Value,
    graph_from_relation,
)

logger = logging.getLogger("rmlprune.algebra")

# ---------------------------------------------------------------------------
# template expressions (string-valued)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TextPart:
    """A fixed string segment."""

    text: str


@dataclass(frozen=True)
class AttrRef:
    """A reference to an attribute; evaluates to the lexical form of its
    value when that value is a literal, and to EPSILON otherwise."""

    attr: Attribute


@dataclass(frozen=True)
class TemplateConcat:
    """Concatenation of two or more fixed segments and attribute references."""

    parts: tuple[Union[TextPart, AttrRef], ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise StructuralError("a concatenation needs at least two parts")
        for part in self.parts:
            if not isinstance(part, (TextPart, AttrRef)):
                raise StructuralError(f"concatenation parts must be atomic: {part!r}")


TemplateExpr = Union[TextPart, AttrRef, TemplateConcat]


def template_attrs(expr: TemplateExpr) -> frozenset[Attribute]:
    if isinstance(expr, TextPart):
        return frozenset()
    if isinstance(expr, AttrRef):
        return frozenset((expr.attr,))
    if isinstance(expr, TemplateConcat):
        return frozenset(p.attr for p in expr.parts if isinstance(p, AttrRef))
    raise TypeError(f"not a template expression: {expr!r}")


def evaluate_template(expr: TemplateExpr, tup: MappingTuple) -> str | Epsilon:
    """The string value of a template expression over one tuple."""
    if isinstance(expr, TextPart):
        return expr.text
    if isinstance(expr, AttrRef):
        if expr.attr not in tup:
            raise StructuralError(f"tuple lacks attribute {expr.attr!r}")
        value = tup[expr.attr]
        if isinstance(value, Literal):
            return value.lex
        return EPSILON
    if isinstance(expr, TemplateConcat):
        pieces = []
        for part in expr.parts:
            piece = evaluate_template(part, tup)
            if piece is EPSILON:
                return EPSILON
            pieces.append(piece)
        return "".join(pieces)
    raise TypeError(f"not a template expression: {expr!r}")


# ---------------------------------------------------------------------------
# term constructors (term-valued)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantTerm:
    """A fixed RDF term."""

    term: RdfTerm

    def __post_init__(self):
        if not is_term(self.term):
            raise StructuralError(f"not an RDF term: {self.term!r}")


@dataclass(frozen=True)
class ConstantBlank:
    """A fixed blank node."""

    node: BlankNode

    def __post_init__(self):
        if not isinstance(self.node, BlankNode):
            raise StructuralError(f"not a blank node: {self.node!r}")


@dataclass(frozen=True)
class BuildLiteral:
    """Make a literal with a fixed datatype from a template expression."""

    body: TemplateExpr
    datatype: str

    def __post_init__(self):
        if not is_valid_iri(self.datatype):
            raise StructuralError(f"datatype is not a valid IRI: {self.datatype!r}")


@dataclass(frozen=True)
class BuildIri:
    """Make an IRI from a template expression.

    An absolute result is used as-is; anything else is prefixed with the
    base, verbatim.  A result that is no syntactically valid IRI becomes
    EPSILON.
    """

    body: TemplateExpr
    base: str

    def __post_init__(self):
        if not is_valid_iri(self.base):
            raise StructuralError(f"base is not a valid IRI: {self.base!r}")


@dataclass(frozen=True)
class BuildBlank:
    """Make a blank node whose label is a stable hash of the body string."""

    body: TemplateExpr


ExtendExpr = Union[ConstantTerm, ConstantBlank, BuildLiteral, BuildIri, BuildBlank]


def extend_attrs(expr: ExtendExpr) -> frozenset[Attribute]:
    if isinstance(expr, (ConstantTerm, ConstantBlank)):
        return frozenset()
    if isinstance(expr, (BuildLiteral, BuildIri, BuildBlank)):
        return template_attrs(expr.body)
    raise TypeError(f"not a term constructor: {expr!r}")


def string_to_bnode(s: str) -> BlankNode:
    """An injective, run-stable mapping from strings to blank nodes."""
    digest = hashlib.blake2b(s.encode("utf-8"), digest_size=16).hexdigest()
    return BlankNode("b" + digest)


def resolve_iri(body: str, base: str) -> Iri | Epsilon:
    """IRI construction: absolute as-is, otherwise base-prefixed; EPSILON
    when the outcome is not a valid IRI."""
    candidate = body if is_absolute_iri(body) else base + body
    if not is_valid_iri(candidate):
        return EPSILON
    return Iri(candidate)


def evaluate_extend(expr: ExtendExpr, tup: MappingTuple) -> Value:
    """The term value of a constructor over one tuple (EPSILON on failure)."""
    if isinstance(expr, ConstantTerm):
        return expr.term
    if isinstance(expr, ConstantBlank):
        return expr.node
    if isinstance(expr, BuildLiteral):
        body = evaluate_template(expr.body, tup)
        if body is EPSILON:
            return EPSILON
        return Literal(body, expr.datatype)
    if isinstance(expr, BuildIri):
        body = evaluate_template(expr.body, tup)
        if body is EPSILON:
            return EPSILON
        return resolve_iri(body, expr.base)
    if isinstance(expr, BuildBlank):
        body = evaluate_template(expr.body, tup)
        if body is EPSILON:
            return EPSILON
        return string_to_bnode(body)
    raise TypeError(f"not a term constructor: {expr!r}")


# ---------------------------------------------------------------------------
# sources and extraction
# ---------------------------------------------------------------------------

SOURCE_TYPES = {CsvSource.kind: CsvSource}


@dataclass
class DataObject:
    """A parsed source: its source-type kind plus the parsed payload."""

    kind: str
    payload: object


SourceAssignment = Mapping[str, DataObject]


@dataclass
class ExtractSpec:
    """What to pull out of one source: which source reference, which
    source type, which iterator query, and one selector per attribute."""

    source_ref: str
    source_type: str
    query: str
    selectors: dict[Attribute, str]

    def __post_init__(self):
        bad = OUTPUT_ATTRS & set(self.selectors)
        if bad:
            raise StructuralError(f"selectors may not use reserved attributes: {sorted(bad)}")
        if self.source_type not in SOURCE_TYPES:
            raise StructuralError(f"unknown source type: {self.source_type!r}")

    @property
    def attrs(self) -> frozenset[Attribute]:
        return frozenset(self.selectors)


# ---------------------------------------------------------------------------
# triples-map expressions
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class TriplesMapExpr:
    """One subject/predicate/object constructor triple over an extraction.

    The simple form uses a single extraction; the joined form adds a second
    extraction plus join conditions, and its object constructor describes
    the *joined* side (it must build an IRI or a blank node, never a
    literal, and may only reference the second extraction's attributes).
    """

    subject_expr: ExtendExpr
    predicate_expr: ExtendExpr
    object_expr: ExtendExpr
    extract: ExtractSpec
    parent_extract: ExtractSpec | None = None
    join_conditions: tuple[tuple[Attribute, Attribute], ...] = ()
    provenance: str = ""

    def __post_init__(self):
        self.join_conditions = tuple((a, b) for a, b in self.join_conditions)
        child = self.extract.attrs
        for name, expr in (("subject", self.subject_expr), ("predicate", self.predicate_expr)):
            missing = extend_attrs(expr) - child
            if missing:
                raise StructuralError(
                    f"{name} constructor references attributes outside the "
                    f"extraction: {sorted(missing)}"
                )
        if self.parent_extract is None:
            if self.join_conditions:
                raise StructuralError("join conditions require a second extraction")
            missing = extend_attrs(self.object_expr) - child
            if missing:
                raise StructuralError(
                    f"object constructor references attributes outside the "
                    f"extraction: {sorted(missing)}"
                )
        else:
            parent = self.parent_extract.attrs
            overlap = child & parent
            if overlap:
                raise StructuralError(
                    f"the two extractions share attributes: {sorted(overlap)}"
                )
            for a, b in self.join_conditions:
                if a not in child or b not in parent:
                    raise StructuralError(
                        f"join condition ({a!r}, {b!r}) is not a (child, parent) attribute pair"
                    )
            if isinstance(self.object_expr, BuildLiteral) or (
                isinstance(self.object_expr, ConstantTerm)
                and isinstance(self.object_expr.term, Literal)
            ):
                raise StructuralError(
                    "the joined object constructor cannot produce literals"
                )
            missing = extend_attrs(self.object_expr) - (child | parent)
            if missing:
                raise StructuralError(
                    f"object constructor references attributes outside both "
                    f"extractions: {sorted(missing)}"
                )

    @property
    def is_joined(self) -> bool:
        return self.parent_extract is not None

    def plan(self) -> "PlanNode":
        """The operator tree this expression denotes."""
        inner: PlanNode = ExtractNode(self.extract)
        inner = ExtendNode(inner, SUBJECT_ATTR, self.subject_expr)
        inner = ExtendNode(inner, PREDICATE_ATTR, self.predicate_expr)
        if self.parent_extract is not None:
            inner = JoinNode(inner, ExtractNode(self.parent_extract), self.join_conditions)
        return ExtendNode(inner, OBJECT_ATTR, self.object_expr)

    def source_refs(self) -> tuple[str, ...]:
        refs = [self.extract.source_ref]
        if self.parent_extract is not None:
            refs.append(self.parent_extract.source_ref)
        return tuple(refs)


@dataclass(eq=False)
class RmlMappingExpr:
    """The union of projected triples-map expressions, in document order."""

    trmaps: tuple[TriplesMapExpr, ...]

    def __post_init__(self):
        self.trmaps = tuple(self.trmaps)
        if not self.trmaps:
            raise StructuralError("a mapping expression needs at least one triples-map expression")

    def plan(self) -> "PlanNode":
        node: PlanNode = ProjectNode(self.trmaps[0].plan())
        for tm in self.trmaps[1:]:
            node = UnionNode(node, ProjectNode(tm.plan()))
        return node


def unique_trmaps(m: RmlMappingExpr) -> list[TriplesMapExpr]:
    """The triples-map expressions of *m*, de-duplicated by provenance id,
    in first-occurrence order."""
    seen: dict[str, TriplesMapExpr] = {}
    for tm in m.trmaps:
        seen.setdefault(tm.provenance, tm)
    return list(seen.values())


# ---------------------------------------------------------------------------
# operator tree and evaluation
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ExtractNode:
    spec: ExtractSpec


@dataclass(eq=False)
class ExtendNode:
    child: "PlanNode"
    attr: Attribute
    expr: ExtendExpr


@dataclass(eq=False)
class ProjectNode:
    child: "PlanNode"


@dataclass(eq=False)
class JoinNode:
    left: "PlanNode"
    right: "PlanNode"
    conditions: tuple[tuple[Attribute, Attribute], ...]


@dataclass(eq=False)
class UnionNode:
    left: "PlanNode"
    right: "PlanNode"


PlanNode = Union[ExtractNode, ExtendNode, ProjectNode, JoinNode, UnionNode]

_warned_selectors: set[tuple[str, str]] = set()


def check_valid_input(sigma: SourceAssignment, m: RmlMappingExpr) -> None:
    """Raise :class:`SourceInputError` unless *sigma* covers every source
    reference of *m* with a data object of the declared source type."""
    for tm in m.trmaps:
        for spec in (tm.extract, tm.parent_extract):
            if spec is None:
                continue
            data = sigma.get(spec.source_ref)
            if data is None:
                raise SourceInputError(
                    f"source assignment lacks source reference {spec.source_ref!r}"
                )
            if data.kind != spec.source_type:
                raise SourceInputError(
                    f"source reference {spec.source_ref!r} is bound to a "
                    f"{data.kind!r} object but the mapping needs {spec.source_type!r}"
                )


def valid_input(sigma: SourceAssignment, m: RmlMappingExpr) -> bool:
    """True when *sigma* satisfies every extraction of *m*."""
    try:
        check_valid_input(sigma, m)
    except SourceInputError:
        return False
    return True


def _evaluate_extract(spec: ExtractSpec, sigma: SourceAssignment) -> MappingRelation:
    source = SOURCE_TYPES[spec.source_type]
    data = sigma.get(spec.source_ref)
    if data is None:
        raise SourceInputError(f"source assignment lacks source reference {spec.source_ref!r}")
    if data.kind != spec.source_type:
        raise SourceInputError(
            f"source reference {spec.source_ref!r} is bound to a {data.kind!r} "
            f"object but the extraction needs {spec.source_type!r}"
        )
    selectors = sorted(spec.selectors.items())
    tuples: set[MappingTuple] = set()
    for component in source.enumerate(data.payload, spec.query):
        columns: list[tuple[Attribute, list[str]]] = []
        empty = False
        for attr, selector in selectors:
            values = source.select(data.payload, component, selector)
            if not values:
                key = (spec.source_ref, selector)
                if key not in _warned_selectors:
                    _warned_selectors.add(key)
                    logger.warning(
                        "selector %r matches nothing in source %r; rows are dropped",
                        selector,
                        spec.source_ref,
                    )
                empty = True
                break
            columns.append((attr, values))
        if empty:
            continue
        for combo in product(*[[(attr, v) for v in values] for attr, values in columns]):
            tuples.add(MappingTuple({attr: source.cast(v) for attr, v in combo}))
    return MappingRelation(spec.attrs, frozenset(tuples))


def evaluate_plan(node: PlanNode, sigma: SourceAssignment) -> MappingRelation:
    """Evaluate an operator tree under a source assignment."""
    if isinstance(node, ExtractNode):
        return _evaluate_extract(node.spec, sigma)

    if isinstance(node, ExtendNode):
        rel = evaluate_plan(node.child, sigma)
        if node.attr in rel.attributes:
            raise StructuralError(f"extend would overwrite attribute {node.attr!r}")
        tuples = frozenset(
            t.extended(node.attr, evaluate_extend(node.expr, t)) for t in rel.tuples
        )
        return MappingRelation(rel.attributes | {node.attr}, tuples)

    if isinstance(node, ProjectNode):
        rel = evaluate_plan(node.child, sigma)
        keep = rel.attributes & OUTPUT_ATTRS
        tuples = frozenset(t.restricted(keep) for t in rel.tuples)
        return MappingRelation(keep, tuples)

    if isinstance(node, JoinNode):
        left = evaluate_plan(node.left, sigma)
        right = evaluate_plan(node.right, sigma)
        overlap = left.attributes & right.attributes
        if overlap:
            raise StructuralError(f"join sides share attributes: {sorted(overlap)}")
        # Hash join on the condition columns; with no conditions this is a
        # plain cross product.  EPSILON on both sides counts as a match.
        buckets: dict[tuple[Value, ...], list[MappingTuple]] = {}
        for rt in right.tuples:
            key = tuple(rt[b] for _, b in node.conditions)
            buckets.setdefault(key, []).append(rt)
        tuples = set()
        for lt in left.tuples:
            key = tuple(lt[a] for a, _ in node.conditions)
            for rt in buckets.get(key, ()):
                tuples.add(lt.merged(rt))
        return MappingRelation(left.attributes | right.attributes, frozenset(tuples))

    if isinstance(node, UnionNode):
        left = evaluate_plan(node.left, sigma)
        right = evaluate_plan(node.right, sigma)
        if left.attributes != right.attributes:
            raise StructuralError(
                f"union sides have different attributes: {sorted(left.attributes)} "
                f"vs {sorted(right.attributes)}"
            )
        return MappingRelation(left.attributes, left.tuples | right.tuples)

    raise TypeError(f"not a plan node: {node!r}")


def materialize(m: RmlMappingExpr, sigma: SourceAssignment) -> RdfGraph:
    """Evaluate the whole mapping and keep the well-formed triples."""
    check_valid_input(sigma, m)
    return graph_from_relation(evaluate_plan(m.plan(), sigma))


def materialize_trmap(tm: TriplesMapExpr, sigma: SourceAssignment) -> RdfGraph:
    """The graph produced by a single triples-map expression."""
    return graph_from_relation(
        evaluate_plan(ProjectNode(tm.plan()), sigma)
    )


# ---------------------------------------------------------------------------
# debug rendering
# ---------------------------------------------------------------------------


def _format_template(expr: TemplateExpr) -> str:
    if isinstance(expr, TextPart):
        return f'(text "{expr.text}")'
    if isinstance(expr, AttrRef):
        return f'(attr "{expr.attr}")'
    parts = " ".join(_format_template(p) for p in expr.parts)
    return f"(concat {parts})"


def _format_extend(expr: ExtendExpr) -> str:
    if isinstance(expr, ConstantTerm):
        return f"(const {expr.term!r})"
    if isinstance(expr, ConstantBlank):
        return f"(const {expr.node!r})"
    if isinstance(expr, BuildLiteral):
        return f"(to-literal {_format_template(expr.body)} <{expr.datatype}>)"
    if isinstance(expr, BuildIri):
        return f"(to-iri {_format_template(expr.body)} base=<{expr.base}>)"
    return f"(to-bnode {_format_template(expr.body)})"


def dump_plan(node: PlanNode, indent: int = 0) -> str:
    """A one-operator-per-line rendering of an operator tree."""
    pad = "  " * indent
    if isinstance(node, ExtractNode):
        spec = node.spec
        sel = ", ".join(f"{a}<-{q}" for a, q in sorted(spec.selectors.items()))
        return (
            f"{pad}(extract source={spec.source_ref!r} type={spec.source_type} "
            f"query={spec.query!r} [{sel}])"
        )
    if isinstance(node, ExtendNode):
        return (
            f"{pad}(extend {node.attr} {_format_extend(node.expr)}\n"
            f"{dump_plan(node.child, indent + 1)})"
        )
    if isinstance(node, ProjectNode):
        return f"{pad}(project [@s @p @o]\n{dump_plan(node.child, indent + 1)})"
    if isinstance(node, JoinNode):
        conds = ", ".join(f"{a}={b}" for a, b in node.conditions)
        return (
            f"{pad}(join [{conds}]\n"
            f"{dump_plan(node.left, indent + 1)}\n"
            f"{dump_plan(node.right, indent + 1)})"
        )
    if isinstance(node, UnionNode):
        return (
            f"{pad}(union\n"
            f"{dump_plan(node.left, indent + 1)}\n"
            f"{dump_plan(node.right, indent + 1)})"
        )
    raise TypeError(f"not a plan node: {node!r}")
