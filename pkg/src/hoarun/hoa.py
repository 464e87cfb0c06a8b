"""Reader and writer for the HOA v1 interchange format.

Supported subset: `HOA: v1`, `States:`, repeated `Start:` lines, `AP:`,
`Acceptance:`, `Alias:`, plus `name:`, `tool:`, `acc-name:` and
`properties:` (stored for round-tripping, never trusted). Bodies may use
explicit bracketed labels, implicit valuation-ordered edge lists, or
state labels shared by all outgoing edges. Acceptance marks must sit on
states; marks on edges, negated set references `Fin(!k)`/`Inf(!k)`, and
universal branching are rejected with positioned diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automata import (
    AccAnd,
    AccOr,
    AcceptanceCond,
    Automaton,
    Bot,
    Fin,
    Inf,
    Top,
    Transition,
    acc_set_refs,
)
from .labels import (
    FALSE,
    TRUE,
    And,
    Ap,
    FalseLabel,
    LabelExpr,
    Not,
    Or,
    TrueLabel,
    minterm,
)

_MAX_NESTING = 200


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class HoaParseError(Exception):
    """Carries the diagnostics produced while reading a document."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True, slots=True)
class HoaDocument:
    """Parsed automata in source order, plus non-fatal diagnostics."""

    automata: tuple[Automaton, ...]
    warnings: tuple[ParseDiagnostic, ...] = field(default=(), compare=False)


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(slots=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_DIGITS = set("0123456789")
_IDENT_CONT = _IDENT_START | _DIGITS | {"-"}
_PUNCT = set("[]{}()!&|")


class _Abort(Exception):
    def __init__(self, diagnostic: ParseDiagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _fail(self, message: str, line: int | None = None, col: int | None = None):
        raise _Abort(
            ParseDiagnostic(
                line if line is not None else self.line,
                col if col is not None else self.col,
                message,
            )
        )

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _skip_trivia(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif text.startswith("/*", self.pos):
                start_line, start_col = self.line, self.col
                depth = 0
                while self.pos < len(text):
                    if text.startswith("/*", self.pos):
                        depth += 1
                        self._advance(2)
                    elif text.startswith("*/", self.pos):
                        depth -= 1
                        self._advance(2)
                        if depth == 0:
                            break
                    else:
                        self._advance()
                else:
                    self._fail("unterminated comment", start_line, start_col)
            else:
                return

    def next_token(self) -> _Token:
        self._skip_trivia()
        text = self.text
        if self.pos >= len(text):
            return _Token("eof", "", self.line, self.col)
        line, col = self.line, self.col
        ch = text[self.pos]
        if text.startswith("--BODY--", self.pos):
            self._advance(8)
            return _Token("body", "--BODY--", line, col)
        if text.startswith("--END--", self.pos):
            self._advance(7)
            return _Token("end", "--END--", line, col)
        if text.startswith("--ABORT--", self.pos):
            self._advance(9)
            return _Token("abort", "--ABORT--", line, col)
        if ch in _DIGITS:
            start = self.pos
            while self.pos < len(text) and text[self.pos] in _DIGITS:
                self._advance()
            return _Token("int", text[start : self.pos], line, col)
        if ch in _PUNCT:
            self._advance()
            return _Token(ch, ch, line, col)
        if ch == '"':
            self._advance()
            chars: list[str] = []
            while True:
                if self.pos >= len(text):
                    self._fail("unterminated string", line, col)
                c = text[self.pos]
                if c == "\\":
                    if self.pos + 1 >= len(text):
                        self._fail("unterminated string", line, col)
                    nxt = text[self.pos + 1]
                    chars.append(nxt if nxt in ('"', "\\") else "\\" + nxt)
                    self._advance(2)
                elif c == '"':
                    self._advance()
                    break
                else:
                    chars.append(c)
                    self._advance()
            return _Token("string", "".join(chars), line, col)
        if ch == "@":
            self._advance()
            start = self.pos
            while self.pos < len(text) and text[self.pos] in _IDENT_CONT:
                self._advance()
            if start == self.pos:
                self._fail("malformed alias name", line, col)
            return _Token("aname", text[start : self.pos], line, col)
        if ch in _IDENT_START:
            start = self.pos
            while self.pos < len(text) and text[self.pos] in _IDENT_CONT:
                self._advance()
            word = text[start : self.pos]
            if self.pos < len(text) and text[self.pos] == ":":
                self._advance()
                return _Token("header", word, line, col)
            return _Token("ident", word, line, col)
        self._fail(f"unexpected character {ch!r}")
        raise AssertionError  # unreachable


# ---------------------------------------------------------------------------
# Parser

_KNOWN_HEADERS = {
    "HOA",
    "States",
    "Start",
    "AP",
    "Acceptance",
    "Alias",
    "name",
    "tool",
    "acc-name",
    "properties",
    "State",
}


class _Parser:
    def __init__(self, text: str, allow_empty_acc_sets: bool):
        self._tz = _Tokenizer(text)
        self.tok = self._tz.next_token()
        self.allow_empty_acc_sets = allow_empty_acc_sets
        self.warnings: list[ParseDiagnostic] = []

    def _advance(self) -> _Token:
        tok = self.tok
        self.tok = self._tz.next_token()
        return tok

    def _fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        raise _Abort(ParseDiagnostic(tok.line, tok.col, message))

    def _warn(self, message: str, tok: _Token) -> None:
        self.warnings.append(ParseDiagnostic(tok.line, tok.col, message, "warning"))

    def _expect(self, kind: str, what: str) -> _Token:
        if self.tok.kind != kind:
            self._fail(f"expected {what}, found {self.tok.value!r}")
        return self._advance()

    def _expect_int(self, what: str) -> tuple[int, _Token]:
        tok = self._expect("int", what)
        return int(tok.value), tok

    def parse_document(self) -> tuple[list[Automaton], list[ParseDiagnostic]]:
        automata = []
        while self.tok.kind != "eof":
            automata.append(self._parse_automaton())
        return automata, self.warnings

    # -- headers

    def _parse_automaton(self) -> Automaton:
        head = self.tok
        if self.tok.kind != "header" or self.tok.value != "HOA":
            self._fail("expected 'HOA: v1' at start of automaton")
        self._advance()
        version = self._expect("ident", "format version")
        if version.value != "v1":
            self._fail(f"unsupported format version {version.value!r}", version)

        num_states: int | None = None
        starts: list[tuple[int, _Token]] = []
        aps: list[str] | None = None
        acc_count: int | None = None
        condition: AcceptanceCond | None = None
        acc_tok: _Token | None = None
        aliases: dict[str, LabelExpr] = {}
        name: str | None = None
        acc_name: str | None = None
        tool: tuple[str, ...] | None = None
        properties: list[str] = []
        seen: set[str] = set()

        while self.tok.kind != "body":
            if self.tok.kind == "eof":
                self._fail("missing --BODY--", head)
            if self.tok.kind == "abort":
                self._fail("automaton aborted by --ABORT--")
            if self.tok.kind != "header":
                self._fail(f"expected header item, found {self.tok.value!r}")
            htok = self._advance()
            hname = htok.value
            if hname in ("States", "AP", "Acceptance", "name", "acc-name", "tool"):
                if hname in seen:
                    self._fail(f"duplicate header {hname}:", htok)
                seen.add(hname)
            if hname == "States":
                num_states, _ = self._expect_int("state count")
            elif hname == "Start":
                value, vtok = self._expect_int("initial state")
                if self.tok.kind == "&":
                    self._fail("universal branching is not supported")
                if self.tok.kind == "int":
                    self._fail("malformed Start: header (one state per line)")
                starts.append((value, vtok))
            elif hname == "AP":
                count, _ = self._expect_int("proposition count")
                aps = []
                for _ in range(count):
                    stok = self._expect("string", "proposition name")
                    if stok.value in aps:
                        self._fail(f"duplicate proposition name {stok.value!r}", stok)
                    aps.append(stok.value)
            elif hname == "Acceptance":
                acc_count, _ = self._expect_int("acceptance set count")
                acc_tok = htok
                condition = self._parse_acceptance(acc_count)
            elif hname == "Alias":
                atok = self._expect("aname", "alias name")
                if atok.value in aliases:
                    self._fail(f"duplicate alias @{atok.value}", atok)
                aliases[atok.value] = self._parse_label(aliases)
            elif hname == "name":
                name = self._expect("string", "automaton name").value
            elif hname == "tool":
                first = self._expect("string", "tool name")
                if self.tok.kind == "string":
                    tool = (first.value, self._advance().value)
                else:
                    tool = (first.value,)
            elif hname == "acc-name":
                parts = []
                while self.tok.kind in ("ident", "int"):
                    parts.append(self._advance().value)
                acc_name = " ".join(parts)
            elif hname == "properties":
                while self.tok.kind == "ident":
                    properties.append(self._advance().value)
            elif hname == "HOA":
                self._fail("duplicate HOA: header (missing --END--?)", htok)
            elif hname[0].isupper():
                self._fail(f"unsupported header {hname}:", htok)
            else:
                self._warn(f"ignoring unknown header {hname}:", htok)
                while self.tok.kind in ("ident", "int", "string", "aname", "!", "&", "|", "(", ")"):
                    self._advance()
        body_tok = self._advance()

        if condition is None or acc_count is None:
            self._fail("missing Acceptance: header", head)
            raise AssertionError
        ap_count = len(aps) if aps is not None else 0

        states, marks = self._parse_body(aliases, ap_count, acc_count)
        return self._build(
            head,
            body_tok,
            num_states,
            starts,
            tuple(aps or ()),
            acc_count,
            condition,
            acc_tok,
            states,
            marks,
            name,
            acc_name,
            tool,
            tuple(properties),
        )

    # -- body

    def _parse_body(self, aliases, ap_count, acc_count):
        states: list[tuple[int, LabelExpr | None, _Token]] = []
        defined: set[int] = set()
        # edges: source id -> list of (label or None, target, token)
        edges: dict[int, list[tuple[LabelExpr | None, int, _Token]]] = {}
        marks: dict[int, frozenset[int]] = {}
        current: int | None = None
        while self.tok.kind != "end":
            if self.tok.kind in ("eof", "header") and not (
                self.tok.kind == "header" and self.tok.value == "State"
            ):
                self._fail("missing --END--")
            if self.tok.kind == "abort":
                self._fail("automaton aborted by --ABORT--")
            if self.tok.kind == "header":  # State:
                stok = self._advance()
                label = None
                if self.tok.kind == "[":
                    self._advance()
                    label = self._parse_label(aliases)
                    self._expect("]", "']'")
                sid, _ = self._expect_int("state id")
                if sid in defined:
                    self._fail(f"state {sid} defined twice", stok)
                defined.add(sid)
                if self.tok.kind == "string":
                    ntok = self._advance()
                    self._warn("state display names are ignored", ntok)
                if self.tok.kind == "{":
                    marks[sid] = frozenset(self._parse_acc_sig(acc_count))
                states.append((sid, label, stok))
                current = sid
                edges.setdefault(sid, [])
            elif self.tok.kind in ("[", "int"):
                if current is None:
                    self._fail("edge before any State: definition")
                etok = self.tok
                label = None
                if self.tok.kind == "[":
                    self._advance()
                    label = self._parse_label(aliases)
                    self._expect("]", "']'")
                target, _ = self._expect_int("target state")
                if self.tok.kind == "&":
                    self._fail("universal branching is not supported")
                if self.tok.kind == "{":
                    self._fail(
                        f"transition-based acceptance unsupported "
                        f"(edge of state {current} to {target})"
                    )
                edges[current].append((label, target, etok))
            else:
                self._fail(f"unexpected token {self.tok.value!r} in body")
        self._advance()  # --END--

        resolved: dict[int, list[tuple[LabelExpr, int]]] = {}
        for sid, state_label, stok in states:
            out = edges[sid]
            if state_label is not None:
                if any(lbl is not None for lbl, _, _ in out):
                    self._fail(
                        f"state {sid} mixes a state label with edge labels", stok
                    )
                resolved[sid] = [(state_label, tgt) for _, tgt, _ in out]
            elif all(lbl is not None for lbl, _, _ in out):
                resolved[sid] = [(lbl, tgt) for lbl, tgt, _ in out]
            elif any(lbl is not None for lbl, _, _ in out):
                self._fail(f"state {sid} mixes labeled and unlabeled edges", stok)
            else:  # implicit labels, one edge per valuation
                if len(out) != 1 << ap_count:
                    self._fail(
                        f"state {sid} lists {len(out)} implicit edges, "
                        f"expected {1 << ap_count}",
                        stok,
                    )
                resolved[sid] = [
                    (minterm(i, ap_count), tgt) for i, (_, tgt, _) in enumerate(out)
                ]
        return resolved, marks

    def _parse_acc_sig(self, acc_count: int) -> list[int]:
        self._expect("{", "'{'")
        indices = []
        while self.tok.kind == "int":
            value, tok = self._expect_int("acceptance set index")
            if value >= acc_count:
                self._fail(f"acceptance set {value} not declared", tok)
            indices.append(value)
        self._expect("}", "'}'")
        return indices

    # -- expressions

    def _parse_label(self, aliases: dict[str, LabelExpr], depth: int = 0) -> LabelExpr:
        return self._parse_label_or(aliases, depth)

    # operator chains become one n-ary node; parenthesized or aliased
    # subtrees stay distinct nodes so that serialized text reparses to a
    # structurally equal tree
    def _parse_label_or(self, aliases, depth) -> LabelExpr:
        terms = [self._parse_label_and(aliases, depth)]
        while self.tok.kind == "|":
            self._advance()
            terms.append(self._parse_label_and(aliases, depth))
        return terms[0] if len(terms) == 1 else Or(tuple(terms))

    def _parse_label_and(self, aliases, depth) -> LabelExpr:
        terms = [self._parse_label_atom(aliases, depth)]
        while self.tok.kind == "&":
            self._advance()
            terms.append(self._parse_label_atom(aliases, depth))
        return terms[0] if len(terms) == 1 else And(tuple(terms))

    def _parse_label_atom(self, aliases, depth) -> LabelExpr:
        if depth > _MAX_NESTING:
            self._fail("label expression nested too deeply")
        tok = self.tok
        if tok.kind == "!":
            self._advance()
            return Not(self._parse_label_atom(aliases, depth + 1))
        if tok.kind == "(":
            self._advance()
            inner = self._parse_label_or(aliases, depth + 1)
            self._expect(")", "')'")
            return inner
        if tok.kind == "int":
            self._advance()
            return Ap(int(tok.value))
        if tok.kind == "aname":
            self._advance()
            expr = aliases.get(tok.value)
            if expr is None:
                self._fail(f"undefined alias @{tok.value}", tok)
            return expr
        if tok.kind == "ident" and tok.value == "t":
            self._advance()
            return TRUE
        if tok.kind == "ident" and tok.value == "f":
            self._advance()
            return FALSE
        self._fail(f"expected label expression, found {tok.value!r}")
        raise AssertionError

    def _parse_acceptance(self, set_count: int, depth: int = 0) -> AcceptanceCond:
        terms = [self._parse_acceptance_and(set_count, depth)]
        while self.tok.kind == "|":
            self._advance()
            terms.append(self._parse_acceptance_and(set_count, depth))
        return terms[0] if len(terms) == 1 else AccOr(tuple(terms))

    def _parse_acceptance_and(self, set_count, depth) -> AcceptanceCond:
        terms = [self._parse_acceptance_atom(set_count, depth)]
        while self.tok.kind == "&":
            self._advance()
            terms.append(self._parse_acceptance_atom(set_count, depth))
        return terms[0] if len(terms) == 1 else AccAnd(tuple(terms))

    def _parse_acceptance_atom(self, set_count, depth) -> AcceptanceCond:
        if depth > _MAX_NESTING:
            self._fail("acceptance condition nested too deeply")
        tok = self.tok
        if tok.kind == "(":
            self._advance()
            inner = self._parse_acceptance(set_count, depth + 1)
            self._expect(")", "')'")
            return inner
        if tok.kind == "ident" and tok.value == "t":
            self._advance()
            return Top()
        if tok.kind == "ident" and tok.value == "f":
            self._advance()
            return Bot()
        if tok.kind == "ident" and tok.value in ("Fin", "Inf"):
            self._advance()
            self._expect("(", "'('")
            if self.tok.kind == "!":
                self._fail("negated acceptance-set references are not supported")
            index, itok = self._expect_int("acceptance set index")
            if index >= set_count:
                self._fail(f"acceptance set {index} not declared", itok)
            self._expect(")", "')'")
            return Fin(index) if tok.value == "Fin" else Inf(index)
        self._fail(f"expected acceptance condition, found {tok.value!r}")
        raise AssertionError

    # -- construction

    def _build(
        self,
        head,
        body_tok,
        num_states,
        starts,
        aps,
        acc_count,
        condition,
        acc_tok,
        states,
        marks,
        name,
        acc_name,
        tool,
        properties,
    ) -> Automaton:
        mentioned: list[int] = []
        seen_ids: set[int] = set()
        for sid in states:
            if sid not in seen_ids:
                seen_ids.add(sid)
                mentioned.append(sid)
        for sid in states:
            for _, tgt in states[sid]:
                if tgt not in seen_ids:
                    seen_ids.add(tgt)
                    mentioned.append(tgt)
        for value, _ in starts:
            if value not in seen_ids:
                seen_ids.add(value)
                mentioned.append(value)

        if num_states is not None:
            for sid in mentioned:
                if sid >= num_states:
                    self._fail(
                        f"state id {sid} out of declared range 0..{num_states - 1}",
                        body_tok,
                    )
            count = num_states
            renumber = {i: i for i in range(count)}
            display = None
        else:
            count = len(mentioned)
            if count == 0:
                self._fail("automaton has no states", body_tok)
            if sorted(mentioned) == list(range(count)):
                renumber = {i: i for i in range(count)}
                display = None
            else:
                renumber = {orig: i for i, orig in enumerate(mentioned)}
                display = tuple(mentioned)

        if not starts:
            self._fail("at least one initial state is required (Start: missing)", head)
        initial = frozenset(renumber[value] for value, _ in starts)

        transitions = []
        for sid in sorted(states, key=lambda s: renumber[s]):
            for label, tgt in states[sid]:
                transitions.append(Transition(renumber[sid], label, renumber[tgt]))

        acc_sets: list[set[int]] = [set() for _ in range(acc_count)]
        for sid, indices in marks.items():
            for k in indices:
                acc_sets[k].add(renumber[sid])

        refs = acc_set_refs(condition)
        empty_refs = sorted(k for k in refs if not acc_sets[k])
        if empty_refs:
            if not self.allow_empty_acc_sets:
                self._fail(
                    f"acceptance set {empty_refs[0]} is referenced but empty "
                    "(no state belongs to it)",
                    acc_tok or head,
                )
            condition = _drop_empty_sets(condition, frozenset(empty_refs))

        try:
            return Automaton(
                aps=aps,
                num_states=count,
                initial=initial,
                transitions=tuple(transitions),
                acc_sets=tuple(frozenset(s) for s in acc_sets),
                condition=condition,
                name=name,
                acc_name=acc_name,
                tool=tool,
                properties=properties,
                display_ids=display,
            )
        except ValueError as exc:
            raise _Abort(ParseDiagnostic(head.line, head.col, str(exc))) from exc


def _drop_empty_sets(cond: AcceptanceCond, empty: frozenset[int]) -> AcceptanceCond:
    # Fin over an empty set always holds; Inf over one never does.
    if isinstance(cond, Fin):
        return Top() if cond.set_index in empty else cond
    if isinstance(cond, Inf):
        return Bot() if cond.set_index in empty else cond
    if isinstance(cond, AccAnd):
        return AccAnd(tuple(_drop_empty_sets(c, empty) for c in cond.children))
    if isinstance(cond, AccOr):
        return AccOr(tuple(_drop_empty_sets(c, empty) for c in cond.children))
    return cond


def parse(text: str, *, allow_empty_acc_sets: bool = False) -> HoaDocument:
    """Parse one or more automata; raises :class:`HoaParseError` on failure."""
    parser = None
    try:
        parser = _Parser(text, allow_empty_acc_sets)
        automata, warnings = parser.parse_document()
    except _Abort as abort:
        earlier = list(parser.warnings) if parser is not None else []
        raise HoaParseError(earlier + [abort.diagnostic]) from None
    return HoaDocument(tuple(automata), tuple(warnings))


# ---------------------------------------------------------------------------
# Serialization


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_label(expr: LabelExpr) -> str:
    """Concrete label syntax; `&` binds tighter than `|`."""
    if isinstance(expr, TrueLabel):
        return "t"
    if isinstance(expr, FalseLabel):
        return "f"
    if isinstance(expr, Ap):
        return str(expr.index)
    if isinstance(expr, Not):
        child = format_label(expr.child)
        if isinstance(expr.child, (And, Or)):
            return f"!({child})"
        return f"!{child}"
    if isinstance(expr, And):
        if not expr.children:
            return "t"
        parts = [
            f"({format_label(c)})" if isinstance(c, (And, Or)) else format_label(c)
            for c in expr.children
        ]
        return " & ".join(parts)
    if isinstance(expr, Or):
        if not expr.children:
            return "f"
        parts = [
            f"({format_label(c)})" if isinstance(c, Or) else format_label(c)
            for c in expr.children
        ]
        return " | ".join(parts)
    raise TypeError(f"not a label expression: {expr!r}")


def format_acceptance(cond: AcceptanceCond) -> str:
    if isinstance(cond, Top):
        return "t"
    if isinstance(cond, Bot):
        return "f"
    if isinstance(cond, Fin):
        return f"Fin({cond.set_index})"
    if isinstance(cond, Inf):
        return f"Inf({cond.set_index})"
    if isinstance(cond, AccAnd):
        parts = [
            f"({format_acceptance(c)})"
            if isinstance(c, (AccAnd, AccOr))
            else format_acceptance(c)
            for c in cond.children
        ]
        return " & ".join(parts) if parts else "t"
    if isinstance(cond, AccOr):
        parts = [
            f"({format_acceptance(c)})" if isinstance(c, AccOr) else format_acceptance(c)
            for c in cond.children
        ]
        return " | ".join(parts) if parts else "f"
    raise TypeError(f"not an acceptance condition: {cond!r}")


def serialize_automaton(automaton: Automaton) -> str:
    """Emit normalized HOA v1 text for one automaton.

    Labels are always explicit and state ids are the dense internal ones,
    so reparsing yields a structurally equal automaton.
    """
    lines = ["HOA: v1"]
    if automaton.name is not None:
        lines.append(f"name: {_quote(automaton.name)}")
    if automaton.tool is not None:
        lines.append("tool: " + " ".join(_quote(t) for t in automaton.tool))
    lines.append(f"States: {automaton.num_states}")
    for q in sorted(automaton.initial):
        lines.append(f"Start: {q}")
    lines.append(
        f"AP: {len(automaton.aps)}"
        + "".join(" " + _quote(name) for name in automaton.aps)
    )
    if automaton.acc_name is not None:
        lines.append(f"acc-name: {automaton.acc_name}")
    lines.append(
        f"Acceptance: {len(automaton.acc_sets)} {format_acceptance(automaton.condition)}"
    )
    if automaton.properties:
        lines.append("properties: " + " ".join(automaton.properties))
    lines.append("--BODY--")
    by_state: dict[int, list[Transition]] = {q: [] for q in range(automaton.num_states)}
    for t in automaton.transitions:
        by_state[t.src].append(t)
    for q in range(automaton.num_states):
        sets = [k for k, members in enumerate(automaton.acc_sets) if q in members]
        sig = " {" + " ".join(str(k) for k in sets) + "}" if sets else ""
        lines.append(f"State: {q}{sig}")
        for t in by_state[q]:
            lines.append(f"[{format_label(t.label)}] {t.dst}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


def serialize(doc: HoaDocument) -> str:
    """Emit a whole document; inverse of :func:`parse` up to normalization."""
    return "".join(serialize_automaton(a) for a in doc.automata)
