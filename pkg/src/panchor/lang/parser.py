"""Parser for the clause language.

Surface syntax follows standard logic-programming conventions: lowercase
constants, uppercase variables, `%` line comments, `.`-terminated clauses.
Distributional clauses are written `head ~ dist <- body`, valued facts
`head ~= value`, time indices `:0`, `:t`, `:t+1` attach to atoms.
The arrow may be written `<-` or the unicode arrow.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    Atom,
    AtomGoal,
    Body,
    BuiltinGoal,
    Clause,
    Compound,
    Constant,
    DistExpr,
    Finite,
    Gaussian,
    Lit,
    Num,
    PoissonDist,
    Program,
    Query,
    Term,
    UniformList,
    UniformRange,
    ValueGoal,
    Var,
    goal_vars,
    list_items,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# tokenizer

_SYMBOLS = ("~=", "=<", ">=", "<-", "\\+", "~", ":", ",", "|", "(", ")",
            "[", "]", "+", "-", "*", "/", "^", "<", ">", ".")
_ARROW = "←"  # accepted alias for <-
_DIGITS = frozenset("0123456789")


@dataclass(slots=True)
class Token:
    kind: str  # ATOM, VAR, NUM, SYM, EOF
    text: str
    value: object
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str):
        raise ParseError(msg, line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c in _DIGITS:
            j = i
            while j < n and text[j] in _DIGITS:
                j += 1
            is_float = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1] in _DIGITS:
                is_float = True
                j += 1
                while j < n and text[j] in _DIGITS:
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k] in _DIGITS:
                    is_float = True
                    j = k
                    while j < n and text[j] in _DIGITS:
                        j += 1
            lexeme = text[i:j]
            value = float(lexeme) if is_float else int(lexeme)
            tokens.append(Token("NUM", lexeme, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            kind = "VAR" if (c == "_" or c.isupper()) else "ATOM"
            tokens.append(Token(kind, name, name, start_line, start_col))
            col += j - i
            i = j
            continue
        if c == "'":
            j = i + 1
            while j < n and text[j] != "'":
                if text[j] == "\n":
                    err("unterminated quoted atom")
                j += 1
            if j >= n:
                err("unterminated quoted atom")
            name = text[i + 1:j]
            tokens.append(Token("ATOM", name, name, start_line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        if c == _ARROW:
            tokens.append(Token("SYM", "<-", "<-", start_line, start_col))
            i += 1
            col += 1
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYM", sym, sym, start_line, start_col))
                i += len(sym)
                col += len(sym)
                break
        else:
            err(f"unexpected character {c!r}")
    tokens.append(Token("EOF", "", None, line, col))
    return tokens


# ---------------------------------------------------------------------------
# operator table: binding power, higher binds tighter

_INFIX = {
    "<-": (10, "xfx"),
    ",": (20, "xfy"),
    "~": (40, "xfx"),
    "~=": (50, "xfx"),
    "is": (50, "xfx"),
    "<": (50, "xfx"),
    ">": (50, "xfx"),
    "=<": (50, "xfx"),
    ">=": (50, "xfx"),
    "+": (60, "yfx"),
    "-": (60, "yfx"),
    "*": (70, "yfx"),
    "/": (70, "yfx"),
    "^": (80, "xfy"),
    ":": (90, "xfx"),
}
_ARG_BP = 25  # argument positions sit between "," and "~"
_OPERATOR_FUNCTORS = frozenset(_INFIX) | {"\\+", "."}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.anon = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def err(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.kind == "EOF":
            self.err("unexpected end of input", tok)
        if tok.text != text:
            self.err(f"expected {text!r}, found {tok.text!r}", tok)
        return tok

    # -- terms --------------------------------------------------------------

    def parse_term(self, min_bp: int) -> Term:
        left = self.parse_primary()
        while True:
            tok = self.peek()
            op = None
            if tok.kind == "SYM" and tok.text in _INFIX:
                op = tok.text
            elif tok.kind == "ATOM" and tok.text == "is":
                op = "is"
            if op is None:
                return left
            bp, assoc = _INFIX[op]
            if bp < min_bp:
                return left
            self.next()
            rhs = self.parse_term(bp if assoc == "xfy" else bp + 1)
            left = Compound(op, (left, rhs))

    def parse_primary(self) -> Term:
        tok = self.next()
        if tok.kind == "NUM":
            return Num(tok.value)
        if tok.kind == "VAR":
            if tok.text == "_":
                self.anon += 1
                return Var(f"_G{self.anon}")
            return Var(tok.text)
        if tok.kind == "ATOM":
            if self.peek().text == "(" and self.peek().kind == "SYM":
                self.next()
                args = self.parse_seq(")")
                return Compound(tok.text, tuple(args))
            return Constant(tok.text)
        if tok.kind == "SYM":
            if tok.text == "(":
                items = self.parse_seq(")")
                if len(items) == 1:
                    return items[0]
                return Compound(",", tuple(items))
            if tok.text == "[":
                if self.peek().text == "]":
                    self.next()
                    return Constant("[]")
                items = [self.parse_term(_ARG_BP)]
                while self.peek().text == ",":
                    self.next()
                    items.append(self.parse_term(_ARG_BP))
                tail: Term = Constant("[]")
                if self.peek().text == "|":
                    self.next()
                    tail = self.parse_term(_ARG_BP)
                self.expect("]")
                out = tail
                for item in reversed(items):
                    out = Compound(".", (item, out))
                return out
            if tok.text == "-":
                operand = self.parse_term(85)
                if isinstance(operand, Num):
                    return Num(-operand.value)
                return Compound("-", (operand,))
            if tok.text == "\\+":
                operand = self.parse_term(21)
                return Compound("\\+", (operand,))
        if tok.kind == "EOF":
            self.err("unexpected end of input", tok)
        self.err(f"unexpected token {tok.text!r}", tok)

    def parse_seq(self, closing: str) -> list[Term]:
        items = [self.parse_term(_ARG_BP)]
        while self.peek().text == ",":
            self.next()
            items.append(self.parse_term(_ARG_BP))
        self.expect(closing)
        return items

    # -- lowering -----------------------------------------------------------

    def term_to_atom(self, term: Term) -> Atom:
        time = None
        if (
            isinstance(term, Compound)
            and term.functor == "+"
            and len(term.args) == 2
            and isinstance(term.args[0], Compound)
            and term.args[0].functor == ":"
            and term.args[1] == Num(1)
            and term.args[0].args[1] == Constant("t")
        ):
            time = "t1"
            term = term.args[0].args[0]
        elif isinstance(term, Compound) and term.functor == ":" and len(term.args) == 2:
            ttime = term.args[1]
            if ttime == Constant("t"):
                time = "t"
            elif isinstance(ttime, Num) and ttime.value == 0:
                time = 0
            elif isinstance(ttime, Num):
                self.err(f"unsupported literal time index {ttime.value}; only :0 is allowed")
            else:
                self.err(f"malformed time index on atom")
            term = term.args[0]
        if isinstance(term, Constant):
            return Atom(term.name, (), time)
        if isinstance(term, Compound) and term.functor not in _OPERATOR_FUNCTORS:
            return Atom(term.functor, term.args, time)
        self.err(f"expected a predicate, found {term!r}")

    def lower_goal(self, term: Term):
        if isinstance(term, Compound):
            f, args = term.functor, term.args
            if f == "~=" and len(args) == 2:
                return ValueGoal(self.term_to_atom(args[0]), args[1])
            if f in ("<", ">", "=<", ">=", "is") and len(args) == 2:
                return BuiltinGoal(f, args)
            if f == "findall" and len(args) == 3:
                return BuiltinGoal("findall", (args[0], self.lower_body(args[1]), args[2]))
            if f == "between" and len(args) == 3:
                return BuiltinGoal("between", args)
            if f == "logistic" and len(args) == 3:
                return BuiltinGoal("logistic", args)
            if f == ",":
                self.err("unexpected conjunction; use findall/3 for nested goals")
        if term == Constant("true"):
            return BuiltinGoal("true", ())
        return AtomGoal(self.term_to_atom(term))

    def lower_body(self, term: Term) -> Body:
        lits: list[Lit] = []
        for part in _flatten_conj(term):
            if isinstance(part, Compound) and part.functor == "\\+" and len(part.args) == 1:
                lits.append(Lit(self.lower_goal(part.args[0]), negated=True))
            else:
                lits.append(Lit(self.lower_goal(part)))
        return tuple(lits)

    def lower_dist(self, term: Term) -> DistExpr:
        if isinstance(term, Compound):
            f, args = term.functor, term.args
            if f == "gaussian" and len(args) == 2:
                return Gaussian(args[0], args[1])
            if f == "uniform" and len(args) == 2:
                return UniformRange(args[0], args[1])
            if f == "uniform" and len(args) == 1:
                return UniformList(args[0])
            if f == "poisson" and len(args) == 1:
                return PoissonDist(args[0])
            if f == "finite":
                if len(args) == 1 and (items := list_items(args[0])) is not None:
                    pair_terms = items
                else:
                    pair_terms = list(args)
                pairs = []
                for pt in pair_terms:
                    if isinstance(pt, Compound) and pt.functor == ":" and len(pt.args) == 2:
                        pairs.append((pt.args[0], pt.args[1]))
                    else:
                        self.err(f"malformed finite pair {pt!r}")
                _check_finite_mass(pairs, self)
                return Finite(tuple(pairs))
        self.err(f"unknown distribution {term!r}")

    def lower_clause(self, term: Term) -> Clause:
        body: Body = ()
        if isinstance(term, Compound) and term.functor == "<-" and len(term.args) == 2:
            body = self.lower_body(term.args[1])
            term = term.args[0]
        if isinstance(term, Compound) and term.functor == "~" and len(term.args) == 2:
            head = self.term_to_atom(term.args[0])
            dist = self.lower_dist(term.args[1])
            return Clause(head, dist, body)
        if isinstance(term, Compound) and term.functor == "~=" and len(term.args) == 2:
            # valued fact: normalized to a deterministic finite distribution
            head = self.term_to_atom(term.args[0])
            return Clause(head, Finite(((Num(1.0), term.args[1]),)), body)
        return Clause(self.term_to_atom(term), None, body)


def _flatten_conj(term: Term) -> list[Term]:
    if isinstance(term, Compound) and term.functor == ",":
        out: list[Term] = []
        for a in term.args:
            out.extend(_flatten_conj(a))
        return out
    return [term]


def _check_finite_mass(pairs, parser: _Parser) -> None:
    total = 0.0
    for prob, _ in pairs:
        if isinstance(prob, Num):
            if not 0.0 <= prob.value <= 1.0 + 1e-9:
                parser.err(f"finite probability {prob.value} outside [0, 1]")
            total += prob.value
        else:
            return  # symbolic probabilities are checked at sampling time
    if total > 1.0 + 1e-9:
        parser.err(f"finite probabilities sum to {total} > 1")


# ---------------------------------------------------------------------------
# public entry points

def parse_program(text: str) -> Program:
    parser = _Parser(tokenize(text))
    clauses: list[Clause] = []
    while parser.peek().kind != "EOF":
        term = parser.parse_term(0)
        tok = parser.next()
        if tok.text != ".":
            parser.err("expected '.' to end the clause", tok)
        clauses.append(parser.lower_clause(term))
    return Program(tuple(clauses))


def parse_query(text: str) -> Query:
    parser = _Parser(tokenize(text))
    term = parser.parse_term(0)
    tok = parser.next()
    if tok.text == ".":
        tok = parser.next()
    if tok.kind != "EOF":
        parser.err(f"unexpected input after query: {tok.text!r}", tok)
    body = parser.lower_body(term)
    free: set[str] = set()
    for lit in body:
        goal_vars(lit.goal, free)
    named = tuple(sorted(v for v in free if not v.startswith("_G")))
    return Query(body, named)
