"""RML documents: parsing, normalization, translation, serialization."""

import logging

import pytest

from rmlprune.algebra import (
    AttrRef,
    BuildBlank,
    BuildIri,
    BuildLiteral,
    ConstantTerm,
    DataObject,
    TemplateConcat,
    TextPart,
    materialize,
)
from rmlprune.csvsource import CSV_KIND, parse_csv
from rmlprune.errors import MappingModelError
from rmlprune.rdf import RDF_TYPE, XSD_DOUBLE, XSD_STRING, Iri, Literal, Triple
from rmlprune.rml import (
    DEFAULT_BASE_IRI,
    RmlDocument,
    effective_term_type,
    is_normal,
    normalize,
    parse_rml,
    parse_template,
    serialize_pruned,
    translate,
)

EX = "http://example.com/ns#"
GTFS = "http://vocab.gtfs.org/terms#"

LEGACY_HEADER = (
    "@prefix rr: <http://www.w3.org/ns/r2rml#> .\n"
    "@prefix rml: <http://semweb.mmlab.be/ns/rml#> .\n"
    "@prefix ql: <http://semweb.mmlab.be/ns/ql#> .\n"
    "@prefix ex: <http://example.com/ns#> .\n"
)
NEW_HEADER = (
    "@prefix rml: <http://w3id.org/rml/> .\n"
    "@prefix ex: <http://example.com/ns#> .\n"
    "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"
)


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------


def test_parse_template_text_and_refs():
    assert parse_template("http://e/{id}/x") == [
        ("text", "http://e/"),
        ("ref", "id"),
        ("text", "/x"),
    ]
    assert parse_template("{only}") == [("ref", "only")]
    assert parse_template("plain") == [("text", "plain")]
    assert parse_template("") == [("text", "")]


def test_parse_template_escapes():
    assert parse_template(r"a\{b\}c") == [("text", "a{b}c")]
    assert parse_template(r"a\\{r}") == [("text", "a\\"), ("ref", "r")]


@pytest.mark.parametrize("bad", ["{unclosed", "closed}", "{}", "{a{b}}", "end\\"])
def test_parse_template_errors(bad):
    with pytest.raises(MappingModelError):
        parse_template(bad)


# ---------------------------------------------------------------------------
# parsing documents
# ---------------------------------------------------------------------------


def test_parse_airports_document(airports_doc):
    assert isinstance(airports_doc, RmlDocument)
    (tm,) = airports_doc.triples_maps
    assert tm.id == "http://example.com/tm/airports"
    assert tm.logical_source.source == "airports.csv"
    assert tm.logical_source.formulation == CSV_KIND
    assert tm.subject_map.kind == "reference"
    assert tm.subject_map.value == "aiport_id"
    assert tm.subject_map.term_type == "iri"
    assert len(tm.poms) == 2


def test_datatype_alias_spelling_is_accepted(airports_doc):
    (tm,) = airports_doc.triples_maps
    long_pom = tm.poms[1]
    assert long_pom.object_maps[0].datatype == XSD_DOUBLE


def test_parse_requires_a_triples_map():
    with pytest.raises(MappingModelError, match="triples map"):
        parse_rml("@prefix ex: <http://e/> .\nex:s ex:p ex:o .")


def test_parse_rejects_unknown_property():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] ;\n"
        "  ex:bogus ex:x .\n"
    )
    with pytest.raises(MappingModelError, match="unknown property"):
        parse_rml(text)


def test_parse_rejects_graph_maps():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ; rml:graphMap [ rml:constant ex:g ] ] .\n"
    )
    with pytest.raises(MappingModelError, match="graph maps"):
        parse_rml(text)


def test_parse_rejects_non_csv_formulation():
    text = LEGACY_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.json\" ;\n"
        "    rml:referenceFormulation ql:JSONPath ] ;\n"
        "  rr:subjectMap [ rml:reference \"a\" ] .\n"
    )
    with pytest.raises(MappingModelError, match="CSV"):
        parse_rml(text)


def test_parse_rejects_iterator():
    text = LEGACY_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ;\n"
        "    rml:iterator \"$.rows\" ] ;\n"
        "  rr:subjectMap [ rml:reference \"a\" ] .\n"
    )
    with pytest.raises(MappingModelError, match="iterator"):
        parse_rml(text)


def test_parse_rejects_language():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] ;\n"
        "  rml:predicateObjectMap [ rml:predicate ex:p ;\n"
        "    rml:objectMap [ rml:reference \"b\" ; rml:language \"en\" ] ] .\n"
    )
    with pytest.raises(MappingModelError, match="[Ll]anguage"):
        parse_rml(text)


def test_parse_rejects_mixed_term_map_kinds():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ; rml:template \"{a}\" ] .\n"
    )
    with pytest.raises(MappingModelError, match="exactly one"):
        parse_rml(text)


def test_parse_rejects_missing_subject_map():
    text = NEW_HEADER + "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] .\n"
    with pytest.raises(MappingModelError, match="subject map"):
        parse_rml(text)


def test_parse_rejects_join_without_conditions():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] ;\n"
        "  rml:predicateObjectMap [ rml:predicate ex:p ;\n"
        "    rml:objectMap [ rml:parentTriplesMap <http://e/tm> ] ] .\n"
    )
    with pytest.raises(MappingModelError, match="join"):
        parse_rml(text)


def test_parse_warns_on_unreachable_subjects(caplog):
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] .\n"
        "<http://e/orphan> ex:anything ex:else .\n"
    )
    with caplog.at_level(logging.WARNING, logger="rmlprune.rml"):
        parse_rml(text)
    assert any("orphan" in r.getMessage() for r in caplog.records)


def test_parse_column_alias():
    text = LEGACY_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ;\n"
        "    rml:referenceFormulation ql:CSV ] ;\n"
        "  rr:subjectMap [ rr:column \"a\" ; rr:termType rr:IRI ] .\n"
    )
    (tm,) = parse_rml(text).triples_maps
    assert tm.subject_map.kind == "reference"
    assert tm.subject_map.value == "a"


def test_document_base_defaults_when_absent(airports_doc):
    assert airports_doc.base_iri == DEFAULT_BASE_IRI
    text = "@base <http://doc.example/> .\n" + NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] .\n"
    )
    assert parse_rml(text).base_iri == "http://doc.example/"


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


SHORTCUT_DOC = NEW_HEADER + (
    "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
    "  rml:subjectMap [ rml:template \"http://e/{a}\" ; rml:class ex:T ] ;\n"
    "  rml:predicateObjectMap [\n"
    "    rml:predicate ex:p , ex:q ;\n"
    "    rml:object ex:o1 , \"v\" ;\n"
    "  ] .\n"
)


def test_normalize_expands_shortcuts_classes_and_products():
    doc = parse_rml(SHORTCUT_DOC)
    assert not is_normal(doc)
    ndoc = normalize(doc)
    assert is_normal(ndoc)
    (tm,) = ndoc.triples_maps
    assert tm.classes == ()
    # 1 class pom + 2 predicates x 2 objects
    assert len(tm.poms) == 5
    class_pom = tm.poms[0]
    assert class_pom.predicate_maps[0].value == Iri(RDF_TYPE)
    assert class_pom.object_maps[0].value == Iri(EX + "T")
    pairs = {
        (pom.predicate_maps[0].value, pom.object_maps[0].value)
        for pom in tm.poms[1:]
    }
    assert pairs == {
        (Iri(EX + "p"), Iri(EX + "o1")),
        (Iri(EX + "p"), Literal("v")),
        (Iri(EX + "q"), Iri(EX + "o1")),
        (Iri(EX + "q"), Literal("v")),
    }


def test_normalize_is_idempotent():
    ndoc = normalize(parse_rml(SHORTCUT_DOC))
    assert normalize(ndoc) == ndoc


def test_subject_shortcut_becomes_constant_map():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subject ex:thing ;\n"
        "  rml:predicateObjectMap [ rml:predicate ex:p ; rml:object \"v\" ] .\n"
    )
    ndoc = normalize(parse_rml(text))
    (tm,) = ndoc.triples_maps
    assert tm.subject_map.kind == "constant"
    assert tm.subject_map.value == Iri(EX + "thing")


# ---------------------------------------------------------------------------
# term type defaulting
# ---------------------------------------------------------------------------


def test_effective_term_type_defaults():
    from rmlprune.rml import TermMapModel

    ref = TermMapModel(kind="reference", value="a")
    tpl = TermMapModel(kind="template", value="http://e/{a}")
    typed = TermMapModel(kind="reference", value="a", datatype=XSD_DOUBLE)
    assert effective_term_type(ref, "subject") == "iri"
    assert effective_term_type(ref, "predicate") == "iri"
    assert effective_term_type(ref, "object") == "literal"
    assert effective_term_type(tpl, "object") == "iri"
    assert effective_term_type(typed, "object") == "literal"
    const_lit = TermMapModel(kind="constant", value=Literal("v"))
    assert effective_term_type(const_lit, "object") == "literal"
    explicit = TermMapModel(kind="reference", value="a", term_type="bnode")
    assert effective_term_type(explicit, "object") == "bnode"


# ---------------------------------------------------------------------------
# translation
# ---------------------------------------------------------------------------


def test_translate_requires_normal_documents():
    doc = parse_rml(SHORTCUT_DOC)
    with pytest.raises(MappingModelError, match="normal"):
        translate(doc)


def test_translate_airports(airports_mapping):
    tms = airports_mapping.trmaps
    assert [tm.provenance for tm in tms] == [
        "http://example.com/tm/airports#pom0",
        "http://example.com/tm/airports#pom1",
    ]
    route, long_ = tms
    assert route.subject_expr == BuildIri(AttrRef("aiport_id"), DEFAULT_BASE_IRI)
    assert route.predicate_expr == ConstantTerm(Iri(EX + "route"))
    assert route.object_expr == BuildIri(
        TemplateConcat((TextPart("http://example.com/route/"), AttrRef("transitRoute"))),
        DEFAULT_BASE_IRI,
    )
    assert long_.predicate_expr == ConstantTerm(Iri(GTFS + "long"))
    assert long_.object_expr == BuildLiteral(AttrRef("long"), XSD_DOUBLE)
    assert not route.is_joined and not long_.is_joined
    assert route.extract.source_ref == "airports.csv"
    assert set(route.extract.selectors) == {"aiport_id", "transitRoute"}


def test_materialize_airports_golden(airports_mapping, airports_sigma):
    g = materialize(airports_mapping, airports_sigma)
    a1 = Iri("http://transit.example.org/airport/1")
    a2 = Iri("http://transit.example.org/airport/2")
    assert g.triples == frozenset(
        {
            Triple(a1, Iri(EX + "route"), Iri("http://example.com/route/43")),
            Triple(a1, Iri(GTFS + "long"), Literal("23.0", XSD_DOUBLE)),
            Triple(a2, Iri(EX + "route"), Iri("http://example.com/route/57")),
            Triple(a2, Iri(GTFS + "long"), Literal("-8.5", XSD_DOUBLE)),
        }
    )


JOIN_DOC = NEW_HEADER + (
    "<http://e/child> rml:logicalSource [ rml:source \"c.csv\" ] ;\n"
    "  rml:subjectMap [ rml:template \"http://e/c/{id}\" ] ;\n"
    "  rml:predicateObjectMap [ rml:predicate ex:link ;\n"
    "    rml:objectMap [ rml:parentTriplesMap <http://e/parent> ;\n"
    "      rml:joinCondition [ rml:child \"pid\" ; rml:parent \"id\" ] ] ] .\n"
    "<http://e/parent> rml:logicalSource [ rml:source \"p.csv\" ] ;\n"
    "  rml:subjectMap [ rml:template \"http://e/p/{id}\" ] ;\n"
    "  rml:predicateObjectMap [ rml:predicate ex:name ;\n"
    "    rml:objectMap [ rml:reference \"name\" ] ] .\n"
)


def test_translate_joined_renames_parent_attributes():
    m = translate(normalize(parse_rml(JOIN_DOC)))
    joined = m.trmaps[0]
    assert joined.is_joined
    assert joined.extract.selectors == {"id": "id", "pid": "pid"}
    # the parent also selects "id"; its attribute must not clash
    assert joined.parent_extract.selectors == {"id@parent": "id"}
    assert joined.join_conditions == (("pid", "id@parent"),)
    assert joined.object_expr == BuildIri(
        TemplateConcat((TextPart("http://e/p/"), AttrRef("id@parent"))),
        DEFAULT_BASE_IRI,
    )


def test_translate_joined_materializes(tmp_path):
    m = translate(normalize(parse_rml(JOIN_DOC)))
    sigma = {
        "c.csv": DataObject(CSV_KIND, parse_csv("id,pid\n1,9\n2,404\n")),
        "p.csv": DataObject(CSV_KIND, parse_csv("id,name\n9,Nine\n")),
    }
    g = materialize(m, sigma)
    assert Triple(Iri("http://e/c/1"), Iri(EX + "link"), Iri("http://e/p/9")) in g.triples
    assert Triple(Iri("http://e/p/9"), Iri(EX + "name"), Literal("Nine")) in g.triples
    assert len(g.triples) == 2  # c/2 finds no parent row


def test_translate_blank_node_term_type():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ; rml:termType rml:BlankNode ] ;\n"
        "  rml:predicateObjectMap [ rml:predicate ex:p ; rml:object \"v\" ] .\n"
    )
    m = translate(normalize(parse_rml(text)))
    assert m.trmaps[0].subject_expr == BuildBlank(AttrRef("a"))


def test_translate_rejects_literal_subjects_and_predicates():
    bad_subject = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ; rml:termType rml:Literal ] ;\n"
        "  rml:predicateObjectMap [ rml:predicate ex:p ; rml:object \"v\" ] .\n"
    )
    with pytest.raises(MappingModelError, match="literal"):
        translate(normalize(parse_rml(bad_subject)))
    bad_predicate = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] ;\n"
        "  rml:predicateObjectMap [\n"
        "    rml:predicateMap [ rml:reference \"p\" ; rml:termType rml:Literal ] ;\n"
        "    rml:object \"v\" ] .\n"
    )
    with pytest.raises(MappingModelError, match="predicate"):
        translate(normalize(parse_rml(bad_predicate)))


def test_translate_rejects_datatype_on_non_literal():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] ;\n"
        "  rml:predicateObjectMap [ rml:predicate ex:p ;\n"
        "    rml:objectMap [ rml:template \"http://e/{a}\" ; rml:datatype xsd:double ] ] .\n"
    )
    # template + datatype defaults the term type to literal, which is fine;
    # force IRI to trigger the conflict
    text = text.replace('rml:datatype xsd:double', 'rml:datatype xsd:double ; rml:termType rml:IRI')
    with pytest.raises(MappingModelError, match="datatype"):
        translate(normalize(parse_rml(text)))


def test_translate_rejects_missing_parent():
    text = NEW_HEADER + (
        "<http://e/tm> rml:logicalSource [ rml:source \"f.csv\" ] ;\n"
        "  rml:subjectMap [ rml:reference \"a\" ] ;\n"
        "  rml:predicateObjectMap [ rml:predicate ex:p ;\n"
        "    rml:objectMap [ rml:parentTriplesMap <http://e/nowhere> ;\n"
        "      rml:joinCondition [ rml:child \"a\" ; rml:parent \"b\" ] ] ] .\n"
    )
    with pytest.raises(MappingModelError, match="does not exist"):
        translate(normalize(parse_rml(text)))


# ---------------------------------------------------------------------------
# serialization of pruned documents
# ---------------------------------------------------------------------------


def _shape(m):
    """Structure of a mapping up to attribute renaming and trmap identity."""

    def tshape(expr, renaming):
        if isinstance(expr, (TextPart,)):
            return ("text", expr.text)
        if isinstance(expr, AttrRef):
            return ("attr", renaming[expr.attr])
        return ("concat", tuple(tshape(p, renaming) for p in expr.parts))

    def eshape(expr, renaming):
        if isinstance(expr, ConstantTerm):
            return ("const", expr.term)
        if isinstance(expr, BuildLiteral):
            return ("lit", tshape(expr.body, renaming), expr.datatype)
        if isinstance(expr, BuildIri):
            return ("iri", tshape(expr.body, renaming), expr.base)
        if isinstance(expr, BuildBlank):
            return ("bnode", tshape(expr.body, renaming))
        return ("cblank",)

    shapes = []
    for tm in m.trmaps:
        renaming = {}
        for spec in (tm.extract, tm.parent_extract):
            if spec is None:
                continue
            for attr in sorted(spec.selectors):
                renaming[attr] = (spec.source_ref, spec.selectors[attr])
        entry = (
            eshape(tm.subject_expr, renaming),
            eshape(tm.predicate_expr, renaming),
            eshape(tm.object_expr, renaming),
            tm.extract.source_ref,
            None if tm.parent_extract is None else tm.parent_extract.source_ref,
            tuple(sorted((renaming[a], renaming[b]) for a, b in tm.join_conditions)),
        )
        shapes.append(entry)
    return sorted(map(repr, shapes))


def test_serialize_pruned_round_trips(airports_doc, airports_mapping):
    text = serialize_pruned(airports_mapping, airports_doc)
    reparsed = translate(normalize(parse_rml(text)))
    assert _shape(reparsed) == _shape(airports_mapping)


def test_serialize_subset_keeps_only_named_expressions(airports_doc, airports_mapping):
    keep = airports_mapping.trmaps[1:]
    text = serialize_pruned(keep, airports_doc)
    reparsed = translate(normalize(parse_rml(text)))
    assert len(reparsed.trmaps) == 1
    assert _shape(reparsed) == _shape(type(airports_mapping)(tuple(keep)))
    assert GTFS + "long" in text


def test_serialize_fully_pruned_is_marked(airports_doc):
    text = serialize_pruned((), airports_doc)
    assert "fully pruned" in text
    with pytest.raises(MappingModelError):
        parse_rml(text)  # no triples maps left, by design


def test_serialize_joined_round_trips():
    doc = normalize(parse_rml(JOIN_DOC))
    m = translate(doc)
    text = serialize_pruned((m.trmaps[0],), doc)
    reparsed = translate(normalize(parse_rml(text)))
    (joined,) = reparsed.trmaps
    assert joined.is_joined
    assert _shape(reparsed) == _shape(type(m)((m.trmaps[0],)))


def test_serialize_rejects_foreign_expressions(airports_doc):
    other = translate(normalize(parse_rml(JOIN_DOC)))
    with pytest.raises(MappingModelError, match="document"):
        serialize_pruned((other.trmaps[0],), airports_doc)
