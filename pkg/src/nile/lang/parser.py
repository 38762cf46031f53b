"""Recursive-descent parser for Nile intent programs.

The concrete syntax is line-oriented in canonical form, but every clause
starts with a distinct keyword and ids are single-quoted, so newlines are
not needed for disambiguation.  The lexer therefore treats newlines as
plain whitespace; this lets the parser accept canonical programs,
hand-written listings with continuation lines, and the space-separated
token form produced by the translator, all with one code path.

Clauses may appear in any order; the parser normalizes the command list
into canonical clause order (stable sort), so parse(render(p)) == p.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    CONSTRAINTS,
    DATETIME_KINDS,
    FIVE_TUPLE_KEYS,
    INTENT_NAME_RE,
    METRIC_IDS,
    NO_CONSTRAINT,
    ClientTarget,
    DateTimeSpec,
    EndpointRef,
    FiveTupleField,
    FlowTraffic,
    Interval,
    Locations,
    Metric,
    Middleboxes,
    MiddleboxRef,
    NamedTraffic,
    NileIntent,
    Qos,
    Rule,
    Targets,
    canonical_command_order,
)

WORD = "word"
QUOTED = "quoted"
LPAREN = "("
RPAREN = ")"
COMMA = ","
COLON = ":"
EOF = "eof"

COMMAND_KEYWORDS = ("from", "for", "add", "with", "allow", "block", "start")


class ParseError(Exception):
    """Syntax or structure error, with source location and expectations."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = expected
        detail = f"line {line}, col {col}: {message}"
        if expected:
            detail += " (expected " + " | ".join(expected) + ")"
        super().__init__(detail)


@dataclass
class Token:
    kind: str
    value: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "'":
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while i < n and source[i] != "'":
                if source[i] == "\n":
                    line += 1
                    col = 0
                buf.append(source[i])
                i += 1
                col += 1
            if i >= n:
                raise ParseError("unterminated quoted id", start_line, start_col)
            i += 1
            col += 1
            # Leading/trailing whitespace inside quotes is not significant;
            # the token-stream form spaces out quote marks.
            tokens.append(Token(QUOTED, " ".join("".join(buf).split()), start_line, start_col))
            continue
        if ch in "(),:":
            kind = {"(": LPAREN, ")": RPAREN, ",": COMMA, ":": COLON}[ch]
            tokens.append(Token(kind, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha() or ch == "_":
            start_col = col
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
                col += 1
            tokens.append(Token(WORD, source[start:i], line, start_col))
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token(EOF, "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, expected: tuple[str, ...] = ()) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            what = expected or (kind,)
            raise ParseError(
                f"found {tok.kind} {tok.value!r}", tok.line, tok.col, expected=what
            )
        return self.advance()

    def expect_word(self, *words: str) -> Token:
        tok = self.peek()
        if tok.kind != WORD or (words and tok.value not in words):
            raise ParseError(
                f"found {tok.kind} {tok.value!r}", tok.line, tok.col,
                expected=words or ("identifier",),
            )
        return self.advance()

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == WORD and tok.value in words

    # -- top level -----------------------------------------------------

    def parse_intent(self) -> NileIntent:
        self.expect_word("define")
        self.expect_word("intent")
        name_tok = self.expect_word()
        if not INTENT_NAME_RE.match(name_tok.value):
            raise ParseError(
                f"bad intent name {name_tok.value!r}", name_tok.line, name_tok.col
            )
        self.expect(COLON, expected=("':'",))

        commands = []
        seen_once: dict[str, Token] = {}
        while True:
            tok = self.peek()
            if tok.kind == EOF:
                break
            if tok.kind != WORD or tok.value not in COMMAND_KEYWORDS + ("end",):
                raise ParseError(
                    f"found {tok.kind} {tok.value!r}", tok.line, tok.col,
                    expected=COMMAND_KEYWORDS,
                )
            if tok.value == "end":
                raise ParseError("'end' without matching 'start'", tok.line, tok.col)
            if tok.value in ("from", "for", "start"):
                if tok.value in seen_once:
                    raise ParseError(
                        f"duplicate '{tok.value}' clause", tok.line, tok.col
                    )
                seen_once[tok.value] = tok
            commands.append(self.parse_command())

        if not commands:
            tok = self.peek()
            raise ParseError(
                "intent has no commands", tok.line, tok.col, expected=COMMAND_KEYWORDS
            )
        return NileIntent(name_tok.value, canonical_command_order(commands))

    def parse_command(self):
        tok = self.peek()
        if tok.value == "from":
            return self.parse_locations()
        if tok.value == "for":
            return self.parse_targets()
        if tok.value == "add":
            return self.parse_middleboxes()
        if tok.value == "with":
            return self.parse_qos()
        if tok.value in ("allow", "block"):
            return self.parse_rule()
        if tok.value == "start":
            return self.parse_interval()
        raise AssertionError(tok)

    # -- clauses -------------------------------------------------------

    def parse_locations(self) -> Locations:
        self.expect_word("from")
        origin = self.parse_endpoint()
        self.expect_word("to")
        destination = self.parse_endpoint()
        return Locations(origin, destination)

    def parse_endpoint(self) -> EndpointRef:
        self.expect_word("endpoint")
        value = self.parse_quoted_arg("endpoint id")
        return EndpointRef(value)

    def parse_targets(self) -> Targets:
        self.expect_word("for")
        targets = [self.parse_target()]
        while self.peek().kind == COMMA:
            self.advance()
            targets.append(self.parse_target())
        return Targets(tuple(targets))

    def parse_target(self):
        tok = self.peek()
        if self.at_word("client"):
            self.advance()
            return ClientTarget(self.parse_quoted_arg("client id"))
        if self.at_word("traffic", "flow"):
            return self.parse_traffic()
        raise ParseError(
            f"found {tok.kind} {tok.value!r}", tok.line, tok.col,
            expected=("client", "traffic", "flow"),
        )

    def parse_middleboxes(self) -> Middleboxes:
        self.expect_word("add")
        boxes = [self.parse_middlebox()]
        while self.peek().kind == COMMA:
            self.advance()
            boxes.append(self.parse_middlebox())
        return Middleboxes(tuple(boxes))

    def parse_middlebox(self) -> MiddleboxRef:
        self.expect_word("middlebox")
        return MiddleboxRef(self.parse_quoted_arg("middlebox id"))

    def parse_qos(self) -> Qos:
        self.expect_word("with")
        metrics = [self.parse_metric()]
        while self.peek().kind == COMMA:
            self.advance()
            metrics.append(self.parse_metric())
        return Qos(tuple(metrics))

    def parse_metric(self) -> Metric:
        mid = self.expect_word(*METRIC_IDS)
        self.expect(LPAREN, expected=("'('",))
        tok = self.peek()
        if tok.kind == WORD and tok.value == NO_CONSTRAINT:
            self.advance()
            self.expect(RPAREN, expected=("')'",))
            return Metric(mid.value, NO_CONSTRAINT)
        constraint = self.expect(QUOTED, expected=("quoted constraint", NO_CONSTRAINT))
        if constraint.value not in CONSTRAINTS:
            raise ParseError(
                f"unknown constraint {constraint.value!r}",
                constraint.line, constraint.col, expected=CONSTRAINTS,
            )
        self.expect(COMMA, expected=("','",))
        value = self.expect(QUOTED, expected=("quoted value",))
        if not value.value:
            raise ParseError("empty metric value", value.line, value.col)
        self.expect(RPAREN, expected=("')'",))
        return Metric(mid.value, constraint.value, value.value)

    def parse_rule(self) -> Rule:
        action = self.expect_word("allow", "block")
        return Rule(action.value, self.parse_traffic())

    def parse_traffic(self):
        tok = self.peek()
        if self.at_word("traffic"):
            self.advance()
            return NamedTraffic(self.parse_quoted_arg("traffic id"))
        if self.at_word("flow"):
            self.advance()
            self.expect(LPAREN, expected=("'('",))
            fields = [self.parse_five_tuple()]
            while self.peek().kind == COMMA:
                self.advance()
                fields.append(self.parse_five_tuple())
            self.expect(RPAREN, expected=("')'",))
            try:
                return FlowTraffic(tuple(fields))
            except ValueError as exc:
                raise ParseError(str(exc), tok.line, tok.col) from exc
        raise ParseError(
            f"found {tok.kind} {tok.value!r}", tok.line, tok.col,
            expected=("traffic", "flow"),
        )

    def parse_five_tuple(self) -> FiveTupleField:
        key = self.expect_word(*FIVE_TUPLE_KEYS)
        self.expect(COLON, expected=("':'",))
        value = self.expect(QUOTED, expected=("quoted value",))
        try:
            return FiveTupleField(key.value, value.value)
        except ValueError as exc:
            raise ParseError(str(exc), value.line, value.col) from exc

    def parse_interval(self) -> Interval:
        self.expect_word("start")
        start = self.parse_date_time()
        self.expect_word("end")
        end = self.parse_date_time()
        return Interval(start, end)

    def parse_date_time(self) -> DateTimeSpec:
        kind = self.expect_word(*DATETIME_KINDS)
        value = self.parse_quoted_arg("date/time value", keep_raw=True)
        try:
            return DateTimeSpec(kind.value, value)
        except ValueError as exc:
            tok = self.tokens[self.pos - 2]
            raise ParseError(str(exc), tok.line, tok.col) from exc

    def parse_quoted_arg(self, what: str, keep_raw: bool = False) -> str:
        self.expect(LPAREN, expected=("'('",))
        tok = self.expect(QUOTED, expected=(f"quoted {what}",))
        if not tok.value:
            raise ParseError(f"empty {what}", tok.line, tok.col)
        self.expect(RPAREN, expected=("')'",))
        return tok.value


def parse_nile(source: str) -> NileIntent:
    """Parse Nile source text into a NileIntent.

    Raises ParseError (never anything else) for any input that is not
    derivable from the grammar.
    """
    try:
        parser = _Parser(tokenize(source))
        return parser.parse_intent()
    except ParseError:
        raise
    except ValueError as exc:
        # AST invariant tripped without a more precise location.
        raise ParseError(str(exc), 1, 1) from exc
