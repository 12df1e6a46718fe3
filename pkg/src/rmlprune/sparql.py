"""A SPARQL SELECT parser for the query shapes the pruner consumes.

Supported: prologue (PREFIX/BASE), SELECT with ``*``, plain variables or
raw ``(expr AS ?var)`` projections, basic graph patterns with predicate
and object lists, nested groups, OPTIONAL, FILTER (kept as an opaque
expression string), DISTINCT/REDUCED, and GROUP BY / HAVING / ORDER BY /
LIMIT / OFFSET recorded verbatim.  Integer, decimal, double and boolean
literals receive their XSD datatypes; ``^^`` annotations are honored.

Everything else is rejected with a positioned error naming the feature:
UNION, MINUS, GRAPH, SERVICE, BIND, VALUES, subqueries, property paths,
FILTER EXISTS, bracketed blank-node property lists, language tags, and
non-SELECT query forms.  A bare ``[]`` becomes a fresh variable, so
patterns never contain blank nodes.

Pattern extraction (:func:`collect_triple_patterns`) walks the entire
tree, including OPTIONAL bodies and FILTER-wrapped groups: a pattern that
occurs anywhere in the query matters for pruning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SparqlError, UnsupportedSparqlError
from .rdf import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    Bgp,
    Iri,
    Literal,
    TriplePattern,
    Variable,
    is_absolute_iri,
    is_valid_iri,
)

_DOUBLE_RE = re.compile(r"[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+)")
_DECIMAL_RE = re.compile(r"[+-]?\d*\.\d+")
_INTEGER_RE = re.compile(r"[+-]?\d+")
_VAR_RE = re.compile(r"[?$]([A-Za-z0-9_]+)")

_ECHAR = {
    't': '\t',
    'b': '\b',
    'n': '\n',
    'r': '\r',
    'f': '\f',
    '"': '"',
    "'": "'",
    '\\': '\\',
}


@dataclass(frozen=True)
class GroupNode:
    """A conjunction of child patterns."""

    children: tuple["PatternNode", ...]


@dataclass(frozen=True)
class OptionalNode:
    """An OPTIONAL part; its patterns still count for pruning."""

    inner: "PatternNode"


@dataclass(frozen=True)
class FilterNode:
    """A FILTER kept as raw text around the group it constrains.

    Filters never influence pruning; they are preserved so the tree can be
    re-serialized faithfully.
    """

    expression: str
    inner: "PatternNode"


PatternNode = Bgp | GroupNode | OptionalNode | FilterNode


@dataclass
class Modifiers:
    distinct: bool = False
    reduced: bool = False
    group_by: str | None = None
    having: str | None = None
    order_by: str | None = None
    limit: int | None = None
    offset: int | None = None

    def beyond_distinct(self) -> list[str]:
        """The modifier names (other than DISTINCT) present on this query."""
        out = []
        if self.reduced:
            out.append("REDUCED")
        if self.group_by is not None:
            out.append("GROUP BY")
        if self.having is not None:
            out.append("HAVING")
        if self.order_by is not None:
            out.append("ORDER BY")
        if self.limit is not None:
            out.append("LIMIT")
        if self.offset is not None:
            out.append("OFFSET")
        return out


@dataclass
class SelectQuery:
    """A parsed SELECT query.

    ``variables`` is None for ``SELECT *``; ``select_expressions`` holds raw
    ``(expr AS ?var)`` projections verbatim.
    """

    variables: tuple[Variable, ...] | None
    where: PatternNode
    modifiers: Modifiers = field(default_factory=Modifiers)
    select_expressions: tuple[str, ...] = ()
    prefixes: dict[str, str] = field(default_factory=dict)
    base: str | None = None


class _QueryParser:
    _STOP_KEYWORDS = ("GROUP", "HAVING", "ORDER", "LIMIT", "OFFSET")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.base: str | None = None
        self._anon = 0

    # -- plumbing ----------------------------------------------------------

    def error(self, message: str, unsupported: bool = False) -> SparqlError:
        upto = self.text[: self.pos]
        line = upto.count("\n") + 1
        column = self.pos - (upto.rfind("\n") + 1) + 1
        cls = UnsupportedSparqlError if unsupported else SparqlError
        return cls(message, line=line, column=column)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self):
        while not self.at_end():
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl == -1 else nl
            else:
                break

    def keyword_ahead(self, word: str) -> bool:
        end = self.pos + len(word)
        if self.text[self.pos : end].upper() != word.upper():
            return False
        return end >= len(self.text) or not (self.text[end].isalnum() or self.text[end] == "_")

    def try_keyword(self, word: str) -> bool:
        if self.keyword_ahead(word):
            self.pos += len(word)
            return True
        return False

    def expect(self, token: str):
        if not self.text.startswith(token, self.pos):
            raise self.error(f"expected {token!r}")
        self.pos += len(token)

    # -- terms -------------------------------------------------------------

    def fresh_variable(self) -> Variable:
        # stands in for an anonymous blank node; the prefix makes a clash
        # with user variables unlikely and harmless for pruning
        self._anon += 1
        return Variable(f"_bnode{self._anon}")

    def resolve(self, iri: str) -> Iri:
        if not is_absolute_iri(iri):
            if self.base is None:
                raise self.error(f"relative IRI {iri!r} without a BASE")
            iri = self.base + iri
        if not is_valid_iri(iri):
            raise self.error(f"not a valid IRI: {iri!r}")
        return Iri(iri)

    def read_iriref(self) -> Iri:
        self.expect("<")
        end = self.text.find(">", self.pos)
        if end == -1:
            raise self.error("unterminated IRI")
        raw = self.text[self.pos : end]
        self.pos = end + 1
        return self.resolve(raw)

    def _read_prefix_name(self) -> str:
        start = self.pos
        while not self.at_end():
            ch = self.text[self.pos]
            if ch.isalnum() or ch in "_-.":
                self.pos += 1
            else:
                break
        return self.text[start : self.pos]

    def _read_local_name(self) -> str:
        out = []
        while not self.at_end():
            ch = self.text[self.pos]
            if ch == "\\":
                nxt = self.text[self.pos + 1 : self.pos + 2]
                if nxt and nxt in "_~.-!$&'()*+,;=/?#@%":
                    out.append(nxt)
                    self.pos += 2
                    continue
                raise self.error(f"invalid local name escape: \\{nxt}")
            if ch.isalnum() or ch in "_-.:%":
                out.append(ch)
                self.pos += 1
            else:
                break
        while out and out[-1] == ".":
            out.pop()
            self.pos -= 1
        return "".join(out)

    def read_prefixed_name(self) -> Iri:
        prefix = self._read_prefix_name()
        self.expect(":")
        local = self._read_local_name()
        ns = self.prefixes.get(prefix)
        if ns is None:
            raise self.error(f"undeclared prefix: {prefix!r}")
        return self.resolve(ns + local)

    def read_iri(self) -> Iri:
        if self.peek() == "<":
            return self.read_iriref()
        return self.read_prefixed_name()

    def read_variable(self) -> Variable:
        match = _VAR_RE.match(self.text, self.pos)
        if not match:
            raise self.error("expected a variable")
        self.pos = match.end()
        return Variable(match.group(1))

    def _read_hex(self, width: int) -> str:
        digits = self.text[self.pos : self.pos + width]
        if len(digits) != width:
            raise self.error("truncated hex escape")
        try:
            code = int(digits, 16)
        except ValueError:
            raise self.error(f"bad hex escape: {digits!r}") from None
        self.pos += width
        return chr(code)

    def read_string(self) -> str:
        for quote in ('"""', "'''", '"', "'"):
            if self.text.startswith(quote, self.pos):
                self.pos += len(quote)
                break
        else:
            raise self.error("expected a string")
        long = len(quote) == 3
        out = []
        while True:
            if self.at_end():
                raise self.error("unterminated string")
            if self.text.startswith(quote, self.pos):
                self.pos += len(quote)
                break
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "\\":
                kind = self.peek()
                self.pos += 1
                if kind == "u":
                    out.append(self._read_hex(4))
                elif kind == "U":
                    out.append(self._read_hex(8))
                elif kind in _ECHAR:
                    out.append(_ECHAR[kind])
                else:
                    raise self.error(f"invalid string escape: \\{kind}")
            elif not long and ch in "\r\n":
                raise self.error("newline in single-line string")
            else:
                out.append(ch)
        return "".join(out)

    def read_literal(self) -> Literal:
        lex = self.read_string()
        if self.peek() == "@":
            raise self.error("language-tagged literals are not supported", unsupported=True)
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            dt = self.read_iri()
            return Literal(lex, dt.value)
        return Literal(lex)

    def read_numeric_or_boolean(self) -> Literal | None:
        if self.try_keyword("true"):
            return Literal("true", XSD_BOOLEAN)
        if self.try_keyword("false"):
            return Literal("false", XSD_BOOLEAN)
        for regex, datatype in (
            (_DOUBLE_RE, XSD_DOUBLE),
            (_DECIMAL_RE, XSD_DECIMAL),
            (_INTEGER_RE, XSD_INTEGER),
        ):
            match = regex.match(self.text, self.pos)
            if match:
                self.pos = match.end()
                return Literal(match.group(), datatype)
        return None

    # -- query structure ---------------------------------------------------

    def parse(self) -> SelectQuery:
        self._parse_prologue()
        self.skip_ws()
        for form in ("CONSTRUCT", "ASK", "DESCRIBE"):
            if self.keyword_ahead(form):
                raise self.error(f"{form} queries are not supported", unsupported=True)
        if not self.try_keyword("SELECT"):
            raise self.error("expected SELECT")
        modifiers = Modifiers()
        self.skip_ws()
        if self.try_keyword("DISTINCT"):
            modifiers.distinct = True
        elif self.try_keyword("REDUCED"):
            modifiers.reduced = True
        variables, expressions = self._parse_projection()
        self.skip_ws()
        self.try_keyword("WHERE")
        self.skip_ws()
        where = self._parse_group()
        self._parse_solution_modifiers(modifiers)
        self.skip_ws()
        if not self.at_end():
            raise self.error("unexpected content after the query")
        return SelectQuery(
            variables=variables,
            where=where,
            modifiers=modifiers,
            select_expressions=expressions,
            prefixes=dict(self.prefixes),
            base=self.base,
        )

    def _parse_prologue(self):
        while True:
            self.skip_ws()
            if self.try_keyword("PREFIX"):
                self.skip_ws()
                prefix = self._read_prefix_name()
                self.expect(":")
                self.skip_ws()
                iri = self.read_iriref()
                self.prefixes[prefix] = iri.value
            elif self.try_keyword("BASE"):
                self.skip_ws()
                iri = self.read_iriref()
                self.base = iri.value
            else:
                break

    def _parse_projection(self):
        variables: list[Variable] = []
        expressions: list[str] = []
        star = False
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                star = True
            elif ch in "?$":
                variables.append(self.read_variable())
            elif ch == "(":
                expressions.append(self._read_balanced_parens())
            else:
                break
        if star:
            if variables or expressions:
                raise self.error("SELECT * cannot be combined with named projections")
            return None, ()
        if not variables and not expressions:
            raise self.error("SELECT needs * or at least one projection")
        return tuple(variables), tuple(expressions)

    def _read_balanced_parens(self) -> str:
        start = self.pos
        depth = 0
        in_string: str | None = None
        while not self.at_end():
            ch = self.text[self.pos]
            if in_string is not None:
                if ch == "\\":
                    self.pos += 1
                elif ch == in_string:
                    in_string = None
            elif ch in "\"'":
                in_string = ch
            elif ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return self.text[start : self.pos]
            self.pos += 1
        raise self.error("unbalanced parentheses")

    def _parse_group(self) -> PatternNode:
        self.expect("{")
        children: list[PatternNode] = []
        filters: list[str] = []
        current: list[TriplePattern] = []

        def flush():
            if current:
                children.append(Bgp(tuple(current)))
                current.clear()

        while True:
            self.skip_ws()
            if self.at_end():
                raise self.error("unterminated group (missing '}')")
            ch = self.peek()
            if ch == "}":
                self.pos += 1
                break
            if ch == "{":
                save = self.pos
                self.pos += 1
                self.skip_ws()
                if self.keyword_ahead("SELECT"):
                    raise self.error("subqueries are not supported", unsupported=True)
                self.pos = save
                flush()
                nested = self._parse_group()
                self.skip_ws()
                if self.keyword_ahead("UNION"):
                    raise self.error("UNION is not supported", unsupported=True)
                children.append(nested)
                self.try_consume_dot()
                continue
            if self.try_keyword("OPTIONAL"):
                flush()
                self.skip_ws()
                children.append(OptionalNode(self._parse_group()))
                self.try_consume_dot()
                continue
            if self.try_keyword("FILTER"):
                self.skip_ws()
                if self.keyword_ahead("EXISTS") or self.keyword_ahead("NOT"):
                    raise self.error("FILTER EXISTS is not supported", unsupported=True)
                filters.append(self._read_filter_constraint())
                self.try_consume_dot()
                continue
            for feature in ("MINUS", "GRAPH", "SERVICE", "BIND", "VALUES", "UNION"):
                if self.keyword_ahead(feature):
                    raise self.error(f"{feature} is not supported", unsupported=True)
            self._parse_triples_same_subject(current)
            self.skip_ws()
            self.try_consume_dot()

        flush()
        node: PatternNode
        if len(children) == 1 and not filters:
            node = children[0]
        else:
            node = GroupNode(tuple(children))
        for expression in filters:
            node = FilterNode(expression, node)
        return node

    def try_consume_dot(self) -> bool:
        self.skip_ws()
        if self.peek() == ".":
            self.pos += 1
            return True
        return False

    def _read_filter_constraint(self) -> str:
        self.skip_ws()
        start = self.pos
        if self.peek() != "(":
            # builtin or function call: name, then its argument list
            while not self.at_end() and (self.text[self.pos].isalnum() or self.text[self.pos] in "_:<>/#.-"):
                self.pos += 1
            self.skip_ws()
            if self.peek() != "(":
                raise self.error("unsupported FILTER constraint form")
        name = self.text[start : self.pos]
        args = self._read_balanced_parens()
        return name + args

    def _parse_triples_same_subject(self, out: list[TriplePattern]):
        subject = self._parse_subject_position()
        while True:
            self.skip_ws()
            predicate = self._parse_verb()
            while True:
                self.skip_ws()
                obj = self._parse_object_position()
                out.append(TriplePattern(subject, predicate, obj))
                self.skip_ws()
                if self.peek() == ",":
                    self.pos += 1
                    continue
                break
            if self.peek() == ";":
                self.pos += 1
                self.skip_ws()
                while self.peek() == ";":
                    self.pos += 1
                    self.skip_ws()
                if self.peek() in ".}":
                    break
                continue
            break

    def _parse_subject_position(self):
        ch = self.peek()
        if ch in "?$":
            return self.read_variable()
        if ch == "[":
            return self._parse_anon()
        if ch in "\"'" or ch.isdigit():
            raise self.error("literal subjects are not supported", unsupported=True)
        if ch == "(":
            raise self.error("collections in patterns are not supported", unsupported=True)
        return self.read_iri()

    def _parse_anon(self) -> Variable:
        self.expect("[")
        self.skip_ws()
        if self.peek() == "]":
            self.pos += 1
            return self.fresh_variable()
        raise self.error(
            "blank node property lists in patterns are not supported", unsupported=True
        )

    def _parse_verb(self):
        ch = self.peek()
        if ch == "^":
            raise self.error("property paths are not supported (inverse '^')", unsupported=True)
        if ch == "!":
            raise self.error("property paths are not supported (negated set '!')", unsupported=True)
        if ch == "(":
            raise self.error("property paths are not supported (grouped path)", unsupported=True)
        nxt = self.text[self.pos + 1 : self.pos + 2]
        if ch in "?$":
            verb = self.read_variable()
        elif self.text.startswith("a", self.pos) and (
            nxt == "" or not (nxt.isalnum() or nxt in "_-.:")
        ):
            self.pos += 1
            verb = Iri(RDF_TYPE)
        else:
            verb = self.read_iri()
        # a path operator directly after the verb makes this a property path
        save = self.pos
        self.skip_ws()
        nxt = self.peek()
        if nxt in "/|*+":
            raise self.error(f"property paths are not supported ({nxt!r})", unsupported=True)
        if nxt == "?" and not re.match(r"[?$][A-Za-z0-9_]", self.text[self.pos : self.pos + 2]):
            raise self.error("property paths are not supported ('?')", unsupported=True)
        self.pos = save
        return verb

    def _parse_object_position(self):
        ch = self.peek()
        if ch in "?$":
            return self.read_variable()
        if ch == "[":
            return self._parse_anon()
        if ch == "(":
            raise self.error("collections in patterns are not supported", unsupported=True)
        if ch in "\"'":
            return self.read_literal()
        if ch.isdigit() or ch in "+-" or ((ch == ".") and self.text[self.pos + 1 : self.pos + 2].isdigit()):
            lit = self.read_numeric_or_boolean()
            if lit is not None:
                return lit
        if self.keyword_ahead("true") or self.keyword_ahead("false"):
            return self.read_numeric_or_boolean()
        return self.read_iri()

    def _parse_solution_modifiers(self, modifiers: Modifiers):
        while True:
            self.skip_ws()
            if self.try_keyword("GROUP"):
                self.skip_ws()
                if not self.try_keyword("BY"):
                    raise self.error("expected BY after GROUP")
                modifiers.group_by = self._capture_until_stop()
            elif self.try_keyword("HAVING"):
                modifiers.having = self._capture_until_stop()
            elif self.try_keyword("ORDER"):
                self.skip_ws()
                if not self.try_keyword("BY"):
                    raise self.error("expected BY after ORDER")
                modifiers.order_by = self._capture_until_stop()
            elif self.try_keyword("LIMIT"):
                modifiers.limit = self._read_int()
            elif self.try_keyword("OFFSET"):
                modifiers.offset = self._read_int()
            else:
                break

    def _read_int(self) -> int:
        self.skip_ws()
        match = _INTEGER_RE.match(self.text, self.pos)
        if not match:
            raise self.error("expected an integer")
        self.pos = match.end()
        return int(match.group())

    def _capture_until_stop(self) -> str:
        self.skip_ws()
        start = self.pos
        depth = 0
        in_string: str | None = None
        while not self.at_end():
            ch = self.text[self.pos]
            prev = self.text[self.pos - 1] if self.pos > start else " "
            at_boundary = not (prev.isalnum() or prev in "_?$")
            if in_string is not None:
                if ch == "\\":
                    self.pos += 1
                elif ch == in_string:
                    in_string = None
            elif ch in "\"'":
                in_string = ch
            elif ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0 and at_boundary and any(
                self.keyword_ahead(k) for k in self._STOP_KEYWORDS
            ):
                break
            self.pos += 1
        return self.text[start : self.pos].strip()


def parse_query(text: str) -> SelectQuery:
    """Parse a SELECT query; raises :class:`SparqlError` (or its
    :class:`UnsupportedSparqlError` subclass) with a position on failure."""
    return _QueryParser(text).parse()


def collect_triple_patterns(node: SelectQuery | PatternNode) -> set[TriplePattern]:
    """Every triple pattern of the query, wherever it occurs."""
    if isinstance(node, SelectQuery):
        return collect_triple_patterns(node.where)
    if isinstance(node, Bgp):
        return set(node.patterns)
    if isinstance(node, GroupNode):
        out: set[TriplePattern] = set()
        for child in node.children:
            out |= collect_triple_patterns(child)
        return out
    if isinstance(node, (OptionalNode, FilterNode)):
        return collect_triple_patterns(node.inner)
    raise TypeError(f"not a pattern node: {node!r}")


def flatten_bgp(query: SelectQuery) -> list[TriplePattern] | None:
    """The query's patterns as one conjunction, or None when the query uses
    OPTIONAL or FILTER and therefore is not a plain basic graph pattern."""

    def walk(node: PatternNode) -> list[TriplePattern] | None:
        if isinstance(node, Bgp):
            return list(node.patterns)
        if isinstance(node, GroupNode):
            out: list[TriplePattern] = []
            for child in node.children:
                part = walk(child)
                if part is None:
                    return None
                out.extend(part)
            return out
        return None

    return walk(query.where)


def _format_pattern_term(x) -> str:
    if isinstance(x, Variable):
        return f"?{x.name}"
    if isinstance(x, Iri):
        return f"<{x.value}>"
    if isinstance(x, Literal):
        escaped = x.lex.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r")
        body = f'"{escaped}"'
        from .rdf import XSD_STRING

        if x.datatype == XSD_STRING:
            return body
        return f"{body}^^<{x.datatype}>"
    raise TypeError(f"not a pattern term: {x!r}")


def _render(node: PatternNode) -> list[str]:
    if isinstance(node, Bgp):
        return [
            f"{_format_pattern_term(tp.s)} {_format_pattern_term(tp.p)} "
            f"{_format_pattern_term(tp.o)} ."
            for tp in node.patterns
        ]
    if isinstance(node, GroupNode):
        lines: list[str] = []
        for child in node.children:
            if isinstance(child, (GroupNode, Bgp)) and len(node.children) > 1:
                lines.append("{")
                lines.extend("  " + line for line in _render(child))
                lines.append("}")
            else:
                lines.extend(_render(child))
        return lines
    if isinstance(node, OptionalNode):
        return ["OPTIONAL {"] + ["  " + line for line in _render(node.inner)] + ["}"]
    if isinstance(node, FilterNode):
        return _render(node.inner) + [f"FILTER {node.expression}"]
    raise TypeError(f"not a pattern node: {node!r}")


def format_query(query: SelectQuery) -> str:
    """Serialize a parsed query back to SPARQL text.

    The output uses full IRIs (the prologue has already been applied), so
    re-parsing yields the same triple patterns.
    """
    head = ["SELECT"]
    if query.modifiers.distinct:
        head.append("DISTINCT")
    if query.modifiers.reduced:
        head.append("REDUCED")
    if query.variables is None and not query.select_expressions:
        head.append("*")
    else:
        for var in query.variables or ():
            head.append(f"?{var.name}")
        head.extend(query.select_expressions)
    lines = [" ".join(head), "WHERE {"]
    lines.extend("  " + line for line in _render(query.where))
    lines.append("}")
    mods = query.modifiers
    if mods.group_by is not None:
        lines.append(f"GROUP BY {mods.group_by}")
    if mods.having is not None:
        lines.append(f"HAVING {mods.having}")
    if mods.order_by is not None:
        lines.append(f"ORDER BY {mods.order_by}")
    if mods.limit is not None:
        lines.append(f"LIMIT {mods.limit}")
    if mods.offset is not None:
        lines.append(f"OFFSET {mods.offset}")
    return "\n".join(lines) + "\n"
