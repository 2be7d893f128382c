"""Recursive-descent parser for QML.

Parsing happens in two passes.  The syntax pass turns tokens into
declarations and recovers from errors by skipping to the next top-level
keyword that starts a line.  The resolution pass builds the
:class:`~qproc.model.QualityModel`; it creates every declared entity
first, so references may point forward.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import PurePath

from qproc.catalog import CATALOG
from qproc.diagnostics import Diagnostic, SourceSpan, has_errors
from qproc.errors import DecompositionCycle, KindMismatch
from qproc.model import QualityModel
from qproc.qml.lexer import Token, tokenize

REQUIREMENT_TYPES = {
    "product": "ProductRequirement",
    "shape": "ShapeRequirement",
    "space": "SpaceRequirement",
    "time": "TimeRequirement",
    "process": "ProcessRequirement",
}
CAUSE_TYPES = {
    "machine": "MachineCause",
    "method": "MethodCause",
    "material": "MaterialCause",
    "manpower": "ManpowerCause",
    "environment": "EnvironmentCause",
}
ACTION_TYPES = {
    "corrective": "CorrectiveAction",
    "preventive": "PreventiveAction",
    "scheduled": "ScheduledPreventiveAction",
    "conditional": "ConditionalPreventiveAction",
    "predictive": "PredictivePreventiveAction",
}
CHECK_KEYWORDS = {
    "observation": "Observation",
    "measurement": "Measurement",
    "test": "Test",
    "control": "Control",
    "validation": "Validation",
    "checking": "Checking",
}
QUALIFIERS = {
    "product": "Product",
    "process": "Process",
    "conformity": "Conformity",
    "nonconformity": "Nonconformity",
    "cause": "Cause",
    **CHECK_KEYWORDS,
}
TOP_LEVEL = frozenset(
    ["model", "product", "proof", "characteristic", "process", "customer", "supplier",
     "requirement", "conformity", "nonconformity", "cause", "action", *CHECK_KEYWORDS]
)
# Keywords that may legally start a line inside a block.
BLOCK_ITEMS = frozenset(["characteristic", "input", "output", "part"])


class ParseError(Exception):
    def __init__(self, message: str, token: Token):
        super().__init__(message)
        self.token = token


@dataclass
class Ref:
    name: str
    token: Token
    qualifier: str | None = None  # kind named by a qualifier keyword


@dataclass
class Mention:
    """A name that declares an entity on first use (product, proof, characteristic)."""

    name: str
    token: Token
    attrs: dict = field(default_factory=dict)


@dataclass
class Decl:
    keyword: str
    kind: str
    name: str
    token: Token
    attrs: dict = field(default_factory=dict)
    clauses: dict[str, list] = field(default_factory=dict)
    items: list[tuple[str, object]] = field(default_factory=list)


@dataclass
class ParseResult:
    model: QualityModel
    diagnostics: list[Diagnostic]
    spans: dict[str, SourceSpan] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return has_errors(self.diagnostics)

    @property
    def ok(self) -> bool:
        return not self.failed


class _Parser:
    def __init__(self, tokens: list[Token], file: str, diagnostics: list[Diagnostic]):
        self.tokens = tokens
        self.pos = 0
        self.file = file
        self.diagnostics = diagnostics

    # -- token helpers --------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, text: str) -> Token | None:
        if self.tok.is_(text):
            return self.advance()
        return None

    def clause(self, text: str) -> Token | None:
        """Accept a clause keyword; one that also opens a declaration must stay on the line."""
        if text in TOP_LEVEL and self.tok.first_on_line:
            return None
        return self.accept(text)

    def expect(self, text: str, what: str | None = None) -> Token:
        if self.tok.is_(text):
            return self.advance()
        raise ParseError(f"expected {what or repr(text)}, found {self._describe(self.tok)}", self.tok)

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of file" if tok.kind == "eof" else repr(tok.text)

    def name(self, what: str = "a name") -> Token:
        tok = self.tok
        if tok.kind == "string" or (tok.kind == "word" and not tok.is_keyword):
            if tok.kind == "string" and not tok.value():
                raise ParseError("names must be nonempty", tok)
            return self.advance()
        raise ParseError(f"expected {what}, found {self._describe(tok)}", tok)

    @staticmethod
    def text_of(tok: Token) -> str:
        return tok.value() if tok.kind == "string" else tok.text

    def type_word(self, table: dict[str, str]) -> str | None:
        if self.tok.kind == "word" and self.tok.text in table:
            return table[self.advance().text]
        return None

    def value(self):
        tok = self.tok
        if tok.kind in ("string", "number") or tok.is_("true") or tok.is_("false"):
            return self.advance().value()
        raise ParseError(f"expected a value, found {self._describe(tok)}", tok)

    def attrs(self) -> dict:
        attrs: dict = {}
        if not self.accept("["):
            return attrs
        if self.accept("]"):
            return attrs
        while True:
            key = self.tok
            if key.kind != "word":
                raise ParseError(f"expected an attribute key, found {self._describe(key)}", key)
            self.advance()
            self.expect("=")
            val = self.value()
            if key.text in attrs:
                raise ParseError(f"attribute {key.text!r} given twice", key)
            attrs[key.text] = val
            if self.accept("]"):
                return attrs
            self.expect(",", "',' or ']'")

    def ref(self, qualifiers: tuple[str, ...]) -> Ref:
        qualifier = None
        if self.tok.kind == "word" and self.tok.text in qualifiers:
            word = self.advance().text
            qualifier = QUALIFIERS[word]
            if word == "cause":
                qualifier = self.type_word(CAUSE_TYPES) or qualifier
        tok = self.name()
        return Ref(self.text_of(tok), tok, qualifier)

    def refs(self, qualifiers: tuple[str, ...] = ()) -> list[Ref]:
        out = [self.ref(qualifiers)]
        while self.accept(","):
            out.append(self.ref(qualifiers))
        return out

    # -- declarations ---------------------------------------------------

    def parse(self) -> list[Decl]:
        decls: list[Decl] = []
        while self.tok.kind != "eof":
            start = self.pos
            try:
                tok = self.tok
                if tok.kind == "word" and tok.text in TOP_LEVEL:
                    decls.append(self.declaration())
                else:
                    raise ParseError(f"expected a declaration, found {self._describe(tok)}", tok)
            except ParseError as err:
                self.error(str(err), err.token)
                self.recover(start)
        return decls

    def error(self, message: str, token: Token) -> None:
        self.diagnostics.append(Diagnostic.of("QML-001", message, self.span(token)))

    def span(self, token: Token) -> SourceSpan:
        if token.kind == "eof" and self.pos > 0:
            token = self.tokens[self.pos - 1]
        return SourceSpan(self.file, token.line, token.column, len(token.text))

    def recover(self, start: int) -> None:
        """Skip to the next line-initial top-level keyword."""
        if self.pos == start:
            self.advance()
        depth = sum(
            1 if t.is_("{") else -1 if t.is_("}") else 0 for t in self.tokens[start:self.pos]
        )
        while self.tok.kind != "eof":
            tok = self.tok
            if tok.first_on_line and tok.kind == "word" and tok.text in TOP_LEVEL:
                if depth <= 0 or tok.text not in BLOCK_ITEMS:
                    return
            if tok.is_("{"):
                depth += 1
            elif tok.is_("}"):
                depth -= 1
            self.advance()

    def declaration(self) -> Decl:
        kw = self.advance()
        word = kw.text
        if word == "model":
            tok = self.name("a model name")
            return Decl("model", "", self.text_of(tok), tok)
        if word in ("product", "proof"):
            kind = "Product" if word == "product" else "TangibleProof"
            tok = self.name()
            return Decl(word, kind, self.text_of(tok), tok, self.attrs())
        if word == "characteristic":
            return self.characteristic_decl()
        if word == "process":
            return self.process_decl()
        if word in ("customer", "supplier"):
            tok = self.name()
            decl = Decl(word, word.capitalize(), self.text_of(tok), tok, self.attrs())
            verb = "receives" if word == "customer" else "supplies"
            if self.accept(verb):
                decl.clauses[verb] = self.refs()
            return decl
        if word == "requirement":
            return self.requirement_decl()
        if word in CHECK_KEYWORDS:
            tok = self.name()
            decl = Decl(word, CHECK_KEYWORDS[word], self.text_of(tok), tok, self.attrs())
            if self.accept("checks"):
                decl.clauses["checks"] = self.refs()
            if self.clause("proof"):
                decl.clauses["proof"] = self.mentions()
            return decl
        if word in ("conformity", "nonconformity"):
            tok = self.name()
            decl = Decl(word, QUALIFIERS[word], self.text_of(tok), tok, self.attrs())
            if self.accept("on"):
                decl.clauses["on"] = self.refs(("product", "process"))
            if self.accept("detected"):
                self.expect("by")
                decl.clauses["detected"] = self.refs(tuple(CHECK_KEYWORDS))
            return decl
        if word == "cause":
            kind = self.type_word(CAUSE_TYPES) or "Cause"
            tok = self.name()
            decl = Decl(word, kind, self.text_of(tok), tok, self.attrs())
            if self.accept("of"):
                decl.clauses["of"] = self.refs()
            return decl
        if word == "action":
            kind = self.type_word(ACTION_TYPES) or "Action"
            tok = self.name()
            decl = Decl(word, kind, self.text_of(tok), tok, self.attrs())
            if self.accept("treats"):
                decl.clauses["treats"] = self.refs(("nonconformity", "cause"))
            return decl
        raise ParseError(f"unexpected keyword {word!r}", kw)  # pragma: no cover

    def mentions(self) -> list[Mention]:
        out = []
        while True:
            tok = self.name()
            out.append(Mention(self.text_of(tok), tok))
            if not self.accept(","):
                return out

    def characteristic_decl(self) -> Decl:
        tok = self.name()
        attrs = {}
        if self.accept("="):
            attrs["value"] = self.value()
        extra = self.attrs()
        if "value" in extra and "value" in attrs:
            raise ParseError("characteristic value given twice", tok)
        attrs.update(extra)
        return Decl("characteristic", "QualityCharacteristic", self.text_of(tok), tok, attrs)

    def block_end(self, items: frozenset[str]) -> bool:
        """True at '}'; a top-level keyword on a new line closes an unterminated block."""
        if self.accept("}"):
            return True
        tok = self.tok
        if tok.kind == "eof" or (
            tok.first_on_line and tok.text in TOP_LEVEL and tok.text not in items
        ):
            self.error(f"missing '}}' before {self._describe(tok)}", tok)
            return True
        return False

    def process_decl(self) -> Decl:
        tok = self.name()
        decl = Decl("process", "Process", self.text_of(tok), tok, self.attrs())
        if not self.accept("{"):
            return decl
        while not self.block_end(frozenset(["input", "output", "part"])):
            item = self.tok
            if item.is_("input") or item.is_("output"):
                self.advance()
                self.expect("product")
                name = self.name("a product name")
                decl.items.append((item.text, Mention(self.text_of(name), name)))
            elif item.is_("part"):
                self.advance()
                decl.items.append(("part", self.ref(("process",))))
            else:
                raise ParseError(
                    f"expected 'input', 'output', 'part' or '}}', found {self._describe(item)}",
                    item,
                )
        return decl

    def requirement_decl(self) -> Decl:
        kind = self.type_word(REQUIREMENT_TYPES) or "Requirement"
        tok = self.name()
        decl = Decl("requirement", kind, self.text_of(tok), tok, self.attrs())
        if self.accept("on"):
            decl.clauses["on"] = self.refs(("product", "process"))
        if not self.accept("{"):
            return decl
        while not self.block_end(frozenset(["characteristic"])):
            self.expect("characteristic", "'characteristic' or '}'")
            inner = self.characteristic_decl()
            decl.items.append(("characteristic", Mention(inner.name, inner.token, inner.attrs)))
        return decl


# -- resolution -------------------------------------------------------------


class _Resolver:
    def __init__(self, decls: list[Decl], file: str, diagnostics: list[Diagnostic]):
        self.decls = decls
        self.file = file
        self.diagnostics = diagnostics
        self.spans: dict[str, SourceSpan] = {}
        self.declared: set[str] = set()

    def span(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.file, tok.line, tok.column, len(tok.text))

    def report(self, code: str, message: str, tok: Token) -> None:
        self.diagnostics.append(Diagnostic.of(code, message, self.span(tok)))

    def build(self) -> QualityModel:
        headers = [d for d in self.decls if d.keyword == "model"]
        stem = PurePath(self.file).stem
        name = headers[0].name if headers else (stem if stem and not stem.startswith("<") else "untitled")
        for extra in headers[1:]:
            self.report("QML-003", "model name declared more than once", extra.token)
        model = QualityModel(name)
        self.model = model

        explicit = {(d.kind, d.name) for d in self.decls if d.keyword != "model"}
        self.ids: dict[int, str] = {}  # id(decl) -> entity id, for accepted declarations
        for decl in self.decls:
            if decl.keyword == "model":
                continue
            existing = model.find(decl.kind, decl.name)
            if existing in self.declared:
                self.report("QML-003", f"{decl.kind} {decl.name!r} is already declared", decl.token)
                continue
            if existing is None:
                existing = model.add_entity(decl.kind, decl.name)
                self.spans[existing] = self.span(decl.token)
            self.declared.add(existing)
            self.ids[id(decl)] = existing
            self.merge(existing, decl.attrs, decl.token)
            for mention_kind, mention in self._mentions(decl):
                if (mention_kind, mention.name) not in explicit:
                    self.implicit(mention_kind, mention)

        # values given at a mention of an explicitly declared entity
        for decl in self.decls:
            if id(decl) not in self.ids:
                continue
            for mention_kind, mention in self._mentions(decl):
                eid = model.find(mention_kind, mention.name)
                if (mention_kind, mention.name) in explicit and eid is not None:
                    self.merge(eid, mention.attrs, mention.token)

        for decl in self.decls:
            if id(decl) in self.ids:
                self.links(decl, self.ids[id(decl)])
        return model

    @staticmethod
    def _mentions(decl: Decl):
        if decl.keyword == "process":
            for role, item in decl.items:
                if role in ("input", "output"):
                    yield "Product", item
        elif decl.keyword == "requirement":
            for _, item in decl.items:
                yield "QualityCharacteristic", item
        for item in decl.clauses.get("proof", ()):
            yield "TangibleProof", item

    def implicit(self, kind: str, mention: Mention) -> str:
        eid = self.model.find(kind, mention.name)
        if eid is None:
            eid = self.model.add_entity(kind, mention.name)
            self.spans[eid] = self.span(mention.token)
        self.merge(eid, mention.attrs, mention.token)
        return eid

    def merge(self, eid: str, attrs: dict, tok: Token) -> None:
        current = self.model.entity(eid).attributes
        fresh = {}
        for key, value in attrs.items():
            if key in current and (current[key] != value or type(current[key]) is not type(value)):
                self.report(
                    "QML-007",
                    f"{key} = {value!r} conflicts with earlier {current[key]!r}; keeping the earlier value",
                    tok,
                )
            elif key not in current:
                fresh[key] = value
        if fresh:
            self.model.set_attributes(eid, fresh)

    def resolve(self, ref: Ref, accepted: tuple[str, ...]) -> str | None:
        catalog = CATALOG
        if ref.qualifier is not None:
            if not catalog.conforms(ref.qualifier, accepted):
                self.report(
                    "QML-004",
                    f"{ref.qualifier} {ref.name!r} cannot be used here (expected {' or '.join(accepted)})",
                    ref.token,
                )
                return None
            exact = self.model.find(ref.qualifier, ref.name)
            if exact is not None:
                return exact
            roots = (ref.qualifier,)
        else:
            roots = accepted
        found = [eid for kind in roots for eid in self.model.lookup(kind, ref.name)]
        if not found:
            wrong = [
                self.model.entities[eid].kind
                for kind in catalog.kinds
                if catalog.kinds[kind].parent is None
                for eid in self.model.lookup(kind, ref.name)
            ]
            if wrong and ref.qualifier is None:
                self.report(
                    "QML-004",
                    f"{ref.name!r} is a {wrong[0]}, expected {' or '.join(accepted)}",
                    ref.token,
                )
            else:
                self.report("QML-002", f"unresolved reference {ref.name!r}", ref.token)
            return None
        if len(found) > 1:
            kinds = sorted(self.model.entities[e].kind for e in found)
            self.report(
                "QML-006",
                f"{ref.name!r} could be any of {', '.join(kinds)}; qualify it",
                ref.token,
            )
            return None
        return found[0]

    def link(self, relation: str, source: str | None, target: str | None, tok: Token) -> None:
        if source is None or target is None:
            return
        try:
            self.model.add_link(relation, source, target)
        except DecompositionCycle as err:
            self.report("QML-005", str(err), tok)
        except KindMismatch as err:
            self.report("QML-004", str(err), tok)

    def links(self, decl: Decl, eid: str) -> None:
        model = self.model
        if decl.keyword == "process":
            for role, item in decl.items:
                if role == "part":
                    self.link("composed_of", eid, self.resolve(item, ("Process",)), item.token)
                else:
                    product = model.find("Product", item.name)
                    if role == "input":
                        self.link("consumes", eid, product, item.token)
                    else:
                        self.link("results_from", product, eid, item.token)
        for ref in decl.clauses.get("receives", ()):
            self.link("receives", eid, self.resolve(ref, ("Product",)), ref.token)
        for ref in decl.clauses.get("supplies", ()):
            self.link("supplies", eid, self.resolve(ref, ("Product",)), ref.token)
        if decl.keyword == "requirement":
            for ref in decl.clauses.get("on", ()):
                owner = self.resolve(ref, ("Product", "Process"))
                self.link("has_requirement", owner, eid, ref.token)
            for _, item in decl.items:
                char = model.find("QualityCharacteristic", item.name)
                self.link("specifies", eid, char, item.token)
        for ref in decl.clauses.get("checks", ()):
            char = self.resolve(ref, ("QualityCharacteristic",))
            self.link("checked_by", char, eid, ref.token)
        for item in decl.clauses.get("proof", ()):
            self.link("attached_proof", eid, model.find("TangibleProof", item.name), item.token)
        if decl.keyword in ("conformity", "nonconformity"):
            for ref in decl.clauses.get("on", ()):
                self.link("concerns", eid, self.resolve(ref, ("Product", "Process")), ref.token)
        for ref in decl.clauses.get("detected", ()):
            check = self.resolve(ref, tuple(CHECK_KEYWORDS.values()))
            self.link("detects", check, eid, ref.token)
        for ref in decl.clauses.get("of", ()):
            self.link("caused_by", self.resolve(ref, ("Nonconformity",)), eid, ref.token)
        for ref in decl.clauses.get("treats", ()):
            self.link("treats", eid, self.resolve(ref, ("Nonconformity", "Cause")), ref.token)


def parse(text: str, file_name: str = "<input>") -> ParseResult:
    """Parse QML source into a model plus located diagnostics."""
    file = str(file_name)
    diagnostics: list[Diagnostic] = []
    tokens = tokenize(text, file, diagnostics)
    decls = _Parser(tokens, file, diagnostics).parse()
    resolver = _Resolver(decls, file, diagnostics)
    model = resolver.build()
    diagnostics.sort(key=_diag_order)
    return ParseResult(model, diagnostics, resolver.spans)


def _diag_order(d: Diagnostic):
    s = d.subject
    return (s.line, s.column, d.code) if isinstance(s, SourceSpan) else (0, 0, d.code)


def parse_file(path) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), str(path))
