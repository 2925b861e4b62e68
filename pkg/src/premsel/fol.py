"""First-order formula ASTs with a parser and a canonical printer.

The surface syntax is a pragmatic FOF-style subset: items of the form
``fof(name, role, formula).`` built from the quantifiers ``!``/``?``
over bracketed variable lists, the connectives ``~ & | => <=>``,
equality ``=``/``!=``, and applied terms.  ``%`` starts a comment that
runs to end of line.  GRAMMAR.md in the repository root lists the exact
token set and grammar.

Bound variables are replaced by de Bruijn indices during parsing (the
innermost binder is index 0), so alpha-equivalent inputs produce equal
ASTs and term equality is plain structural equality.  The printer
renders indices as generated names ``V0, V1, ...`` counted from the
outermost binder; ``parse_item(print_item(x)) == x`` for every
well-formed item.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FofSyntaxError

ROLES = ("axiom", "definition", "theorem", "conjecture")

# Parser recursion guard; inputs nested deeper than this are rejected
# with a positioned error instead of blowing the Python stack (each
# nesting level costs several interpreter frames).
_MAX_NESTING = 120


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Var:
    """Bound variable as a de Bruijn index (0 = innermost binder)."""

    index: int


@dataclass(frozen=True, slots=True)
class App:
    """Function application; constants are applications of arity 0."""

    name: str
    args: tuple["Term", ...] = ()


Term = Var | App


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True, slots=True)
class Equals:
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Not:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Forall:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Exists:
    body: "Formula"


Formula = Atom | Equals | Not | And | Or | Implies | Iff | Forall | Exists


@dataclass(frozen=True, slots=True)
class NamedItem:
    """One named, role-tagged formula."""

    name: str
    role: str
    formula: Formula


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ",": "COMMA",
    ".": "DOT",
    ":": "COLON",
    "~": "TILDE",
    "&": "AMP",
    "|": "PIPE",
    "?": "QUESTION",
}

_LOWER_RE = re.compile(r"[a-z][a-zA-Z0-9_]*")
_UPPER_RE = re.compile(r"[A-Z][a-zA-Z0-9_]*")


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    line, col = 1, 1
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "!":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(_Token("NEQ", "!=", line, col))
                i += 2
                col += 2
            else:
                tokens.append(_Token("BANG", "!", line, col))
                i += 1
                col += 1
            continue
        if ch == "=":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(_Token("IMPLIES", "=>", line, col))
                i += 2
                col += 2
            else:
                tokens.append(_Token("EQ", "=", line, col))
                i += 1
                col += 1
            continue
        if ch == "<":
            if text[i : i + 3] == "<=>":
                tokens.append(_Token("IFF", "<=>", line, col))
                i += 3
                col += 3
                continue
            raise FofSyntaxError("expected '<=>'", line, col)
        if ch == "'":
            j = i + 1
            while j < n and text[j] not in "'\\\n":
                j += 1
            if j >= n or text[j] != "'":
                raise FofSyntaxError("unterminated quoted name", line, col)
            if j == i + 1:
                raise FofSyntaxError("empty quoted name", line, col)
            tokens.append(_Token("LOWER", text[i + 1 : j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        m = _LOWER_RE.match(text, i)
        if m:
            tokens.append(_Token("LOWER", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _UPPER_RE.match(text, i)
        if m:
            tokens.append(_Token("UPPER", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        raise FofSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._i = 0
        self._binders: list[str] = []
        self._depth = 0

    def _peek(self) -> _Token:
        return self._tokens[self._i]

    def _advance(self) -> _Token:
        tok = self._tokens[self._i]
        self._i += 1
        return tok

    def _expect(self, kind: str, what: str) -> _Token:
        tok = self._peek()
        if tok.kind != kind:
            self._error(f"expected {what}", tok)
        return self._advance()

    def _error(self, message: str, tok: _Token):
        shown = f"{message}, found {tok.text!r}" if tok.text else f"{message}, found end of input"
        raise FofSyntaxError(shown, tok.line, tok.col)

    def at_eof(self) -> bool:
        return self._peek().kind == "EOF"

    def item(self) -> NamedItem:
        kw = self._expect("LOWER", "'fof'")
        if kw.text != "fof":
            self._error("expected 'fof'", kw)
        self._expect("LPAREN", "'('")
        name = self._expect("LOWER", "item name")
        self._expect("COMMA", "','")
        role = self._expect("LOWER", "item role")
        if role.text not in ROLES:
            self._error(f"role must be one of {', '.join(ROLES)}", role)
        self._expect("COMMA", "','")
        formula = self.formula()
        self._expect("RPAREN", "')'")
        self._expect("DOT", "'.'")
        return NamedItem(name.text, role.text, formula)

    def formula(self) -> Formula:
        left = self._disjunction()
        tok = self._peek()
        if tok.kind in ("IMPLIES", "IFF"):
            self._advance()
            right = self._disjunction()
            after = self._peek()
            if after.kind in ("IMPLIES", "IFF"):
                self._error("'=>' and '<=>' are non-associative; add parentheses", after)
            return Implies(left, right) if tok.kind == "IMPLIES" else Iff(left, right)
        return left

    def _disjunction(self) -> Formula:
        f = self._conjunction()
        while self._peek().kind == "PIPE":
            self._advance()
            f = Or(f, self._conjunction())
        return f

    def _conjunction(self) -> Formula:
        f = self._unit()
        while self._peek().kind == "AMP":
            self._advance()
            f = And(f, self._unit())
        return f

    def _unit(self) -> Formula:
        tok = self._peek()
        self._depth += 1
        try:
            if self._depth > _MAX_NESTING:
                self._error("formula is nested too deeply", tok)
            if tok.kind == "TILDE":
                self._advance()
                return Not(self._unit())
            if tok.kind in ("BANG", "QUESTION"):
                return self._quantified()
            if tok.kind == "LPAREN":
                self._advance()
                f = self.formula()
                self._expect("RPAREN", "')'")
                return f
            if tok.kind in ("LOWER", "UPPER"):
                term = self.term()
                nxt = self._peek()
                if nxt.kind == "EQ":
                    self._advance()
                    return Equals(term, self.term())
                if nxt.kind == "NEQ":
                    self._advance()
                    return Not(Equals(term, self.term()))
                if isinstance(term, App):
                    return Atom(term.name, term.args)
                self._error("a bare variable is not a formula", tok)
            self._error("expected a formula", tok)
        finally:
            self._depth -= 1

    def _quantified(self) -> Formula:
        tok = self._advance()
        cls = Forall if tok.kind == "BANG" else Exists
        self._expect("LBRACKET", "'['")
        names = [self._expect("UPPER", "variable name").text]
        while self._peek().kind == "COMMA":
            self._advance()
            names.append(self._expect("UPPER", "variable name").text)
        self._expect("RBRACKET", "']'")
        self._expect("COLON", "':'")
        self._binders.extend(names)
        body = self._unit()
        del self._binders[-len(names) :]
        for _ in names:
            body = cls(body)
        return body

    def term(self) -> Term:
        tok = self._peek()
        self._depth += 1
        try:
            if self._depth > _MAX_NESTING:
                self._error("term is nested too deeply", tok)
            if tok.kind == "UPPER":
                self._advance()
                for distance, name in enumerate(reversed(self._binders)):
                    if name == tok.text:
                        return Var(distance)
                self._error(f"unbound variable {tok.text}", tok)
            if tok.kind == "LOWER":
                self._advance()
                if self._peek().kind != "LPAREN":
                    return App(tok.text)
                self._advance()
                args = [self.term()]
                while self._peek().kind == "COMMA":
                    self._advance()
                    args.append(self.term())
                self._expect("RPAREN", "')'")
                return App(tok.text, tuple(args))
            self._error("expected a term", tok)
        finally:
            self._depth -= 1


def parse_item(text: str) -> NamedItem:
    """Parse exactly one ``fof(...)`` item."""
    parser = _Parser(_tokenize(text))
    item = parser.item()
    if not parser.at_eof():
        parser._error("unexpected text after item", parser._peek())
    return item


def parse_items(text: str) -> list[NamedItem]:
    """Parse a whole file worth of items; item names must be unique."""
    parser = _Parser(_tokenize(text))
    items: list[NamedItem] = []
    seen: set[str] = set()
    while not parser.at_eof():
        tok = parser._peek()
        item = parser.item()
        if item.name in seen:
            raise FofSyntaxError(f"duplicate item name {item.name!r}", tok.line, tok.col)
        seen.add(item.name)
        items.append(item)
    return items


def parse_file(path) -> list[NamedItem]:
    with open(path, encoding="utf-8") as handle:
        return parse_items(handle.read())


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_IMPL, _OR, _AND, _UNIT = 0, 1, 2, 3

_BARE_NAME_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


def _name_text(name: str) -> str:
    if _BARE_NAME_RE.match(name):
        return name
    if not name or any(c in "'\\\n" for c in name):
        raise ValueError(f"name {name!r} cannot be printed")
    return f"'{name}'"


def _term_text(term: Term, depth: int) -> str:
    if isinstance(term, Var):
        if not 0 <= term.index < depth:
            raise ValueError(f"variable index {term.index} unbound at depth {depth}")
        return f"V{depth - 1 - term.index}"
    if not term.args:
        return _name_text(term.name)
    args = ", ".join(_term_text(a, depth) for a in term.args)
    return f"{_name_text(term.name)}({args})"


def _wrap(text: str, parenthesize: bool) -> str:
    return f"({text})" if parenthesize else text


def _formula_text(f: Formula, depth: int, level: int) -> str:
    match f:
        case Forall() | Exists():
            cls = type(f)
            mark = "!" if cls is Forall else "?"
            names = []
            inner: Formula = f
            while type(inner) is cls:
                names.append(f"V{depth + len(names)}")
                inner = inner.body
            body = _formula_text(inner, depth + len(names), _UNIT)
            return f"{mark}[{', '.join(names)}]: {body}"
        case Not(body=Equals(left=left, right=right)):
            return f"{_term_text(left, depth)} != {_term_text(right, depth)}"
        case Not(body=body):
            return f"~{_formula_text(body, depth, _UNIT)}"
        case And(left=left, right=right):
            text = f"{_formula_text(left, depth, _AND)} & {_formula_text(right, depth, _UNIT)}"
            return _wrap(text, level > _AND)
        case Or(left=left, right=right):
            text = f"{_formula_text(left, depth, _OR)} | {_formula_text(right, depth, _AND)}"
            return _wrap(text, level > _OR)
        case Implies(left=left, right=right):
            text = f"{_formula_text(left, depth, _OR)} => {_formula_text(right, depth, _OR)}"
            return _wrap(text, level > _IMPL)
        case Iff(left=left, right=right):
            text = f"{_formula_text(left, depth, _OR)} <=> {_formula_text(right, depth, _OR)}"
            return _wrap(text, level > _IMPL)
        case Atom(pred=pred, args=args):
            if not args:
                return _name_text(pred)
            return f"{_name_text(pred)}({', '.join(_term_text(a, depth) for a in args)})"
        case Equals(left=left, right=right):
            return f"{_term_text(left, depth)} = {_term_text(right, depth)}"
    raise ValueError(f"not a formula node: {f!r}")


def print_item(item: NamedItem) -> str:
    """Canonical text of an item; re-parsing yields a structurally equal AST."""
    if item.role not in ROLES:
        raise ValueError(f"unknown role {item.role!r}")
    body = _formula_text(item.formula, 0, _IMPL)
    return f"fof({_name_text(item.name)}, {item.role}, {body})."
