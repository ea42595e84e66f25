"""Reader for textual terms: tokenizer plus a precedence-climbing parser.

Supported syntax: quoted/unquoted atoms, 64-bit integers, floats, variables,
lists with optional '|' tails, compounds written functor(args), and the fixed
operator subset :- , = < > =< >= is + - * / mod with standard priorities
(1200/1000/700/500/400, unary minus at 200). '%' starts a line comment.
"""

from __future__ import annotations

from .errors import TermLimitError, TermSyntaxError
from .terms import INT_MAX, INT_MIN, NIL, Atom, Compound, Float, Int, Term, Var, mklist

_SYMBOLIC = frozenset("+-*/\\^<>=~:.?@#&$")
_PUNCT = frozenset("()[],|")

INFIX_OPS = {
    ":-": (1200, "xfx"),
    ",": (1000, "xfy"),
    ":": (200, "xfy"),  # module qualification in goals
    "=": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "is": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "mod": (400, "yfx"),
}

PREFIX_OPS = {
    ":-": (1200, "fx"),
    "table": (1150, "fx"),  # allows the ':- table name/arity.' directive form
    "-": (200, "fy"),
}

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'"}
_DIGITS = frozenset("0123456789")


class _Token:
    __slots__ = ("kind", "value", "pos", "call", "quoted")

    def __init__(self, kind, value, pos, call=False, quoted=False):
        self.kind = kind  # atom | var | int | float | punct | end | eof
        self.value = value
        self.pos = pos  # 0-based offset into the source
        self.call = call  # '(' follows with no whitespace
        self.quoted = quoted

    def __repr__(self):
        return f"<{self.kind} {self.value!r}@{self.pos}>"


def _err(reason: str, pos: int) -> TermSyntaxError:
    return TermSyntaxError(reason, pos + 1)


def tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        if c == "'":
            i += 1
            buf: list[str] = []
            while True:
                if i >= n:
                    raise _err("unterminated quoted atom", start)
                ch = text[i]
                if ch == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        buf.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                if ch == "\\":
                    if i + 1 >= n:
                        raise _err("unterminated escape", i)
                    esc = text[i + 1]
                    if esc not in _ESCAPES:
                        raise _err(f"unknown escape \\{esc}", i)
                    buf.append(_ESCAPES[esc])
                    i += 2
                    continue
                buf.append(ch)
                i += 1
            call = i < n and text[i] == "("
            toks.append(_Token("atom", "".join(buf), start, call=call, quoted=True))
            continue
        if c in _DIGITS:
            while i < n and text[i] in _DIGITS:
                i += 1
            isfloat = False
            if i + 1 < n and text[i] == "." and text[i + 1] in _DIGITS:
                isfloat = True
                i += 1
                while i < n and text[i] in _DIGITS:
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j] in _DIGITS:
                    isfloat = True
                    i = j
                    while i < n and text[i] in _DIGITS:
                        i += 1
            lit = text[start:i]
            if isfloat:
                value = float(lit)
                if value != value or value in (float("inf"), float("-inf")):
                    raise _err(f"float literal out of range: {lit}", start)
                toks.append(_Token("float", value, start))
            else:
                toks.append(_Token("int", int(lit), start))
            continue
        if c.isalpha() or c == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            name = text[start:i]
            call = i < n and text[i] == "("
            if c == "_" or c.isupper():
                toks.append(_Token("var", name, start))
            else:
                toks.append(_Token("atom", name, start, call=call))
            continue
        if c in _PUNCT:
            toks.append(_Token("punct", c, start))
            i += 1
            continue
        if c in _SYMBOLIC:
            while i < n and text[i] in _SYMBOLIC:
                i += 1
            name = text[start:i]
            if name == ".":
                # solo dot followed by layout or EOF terminates a clause
                if i >= n or text[i].isspace() or text[i] == "%":
                    toks.append(_Token("end", ".", start))
                    continue
            call = i < n and text[i] == "("
            toks.append(_Token("atom", name, start, call=call))
            continue
        raise _err(f"unexpected character {c!r}", i)
    toks.append(_Token("eof", None, n))
    return toks


class _Parser:
    def __init__(self, tokens: list[_Token], max_depth: int = 200):
        self.toks = tokens
        self.i = 0
        self.vars: dict[str, Var] = {}
        self.depth = 0
        self.max_depth = max_depth

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_punct(self, ch: str) -> None:
        t = self.next()
        if t.kind != "punct" or t.value != ch:
            raise _err(f"expected {ch!r}", t.pos)

    def parse(self, maxp: int) -> Term:
        self.depth += 1
        if self.depth > self.max_depth:
            raise _err("nesting too deep", self.peek().pos)
        try:
            left, lp = self._primary(maxp)
            while True:
                t = self.peek()
                name = None
                if t.kind == "atom" and not t.quoted:
                    name = t.value
                elif t.kind == "punct" and t.value == ",":
                    name = ","
                if name is None or name not in INFIX_OPS:
                    break
                p, typ = INFIX_OPS[name]
                if p > maxp:
                    break
                left_max = p if typ == "yfx" else p - 1
                if lp > left_max:
                    break
                self.next()
                right_max = p if typ == "xfy" else p - 1
                right = self.parse(right_max)
                left = Compound(name, (left, right))
                lp = p
            return left
        finally:
            self.depth -= 1

    def _primary(self, maxp: int) -> tuple[Term, int]:
        t = self.next()
        if t.kind == "int":
            return self._int_term(t.value, t.pos), 0
        if t.kind == "float":
            return Float(t.value), 0
        if t.kind == "var":
            if t.value == "_":
                return Var(), 0
            v = self.vars.get(t.value)
            if v is None:
                v = Var(name=t.value)
                self.vars[t.value] = v
            return v, 0
        if t.kind == "atom":
            if t.call:
                self.next()  # consume '('
                args = [self.parse(999)]
                while self.peek().kind == "punct" and self.peek().value == ",":
                    self.next()
                    args.append(self.parse(999))
                self.expect_punct(")")
                try:
                    return Compound(t.value, args), 0
                except TermLimitError as e:
                    raise _err(str(e), t.pos)
            if not t.quoted and t.value in PREFIX_OPS and self._operand_follows():
                if t.value == "-":
                    nxt = self.peek()
                    if nxt.kind == "int":
                        self.next()
                        return self._int_term(-nxt.value, t.pos), 0
                    if nxt.kind == "float":
                        self.next()
                        return Float(-nxt.value), 0
                p, _typ = PREFIX_OPS[t.value]
                arg = self.parse(p if _typ == "fy" else p - 1)
                return Compound(t.value, (arg,)), p
            return Atom(t.value), 0
        if t.kind == "punct":
            if t.value == "(":
                inner = self.parse(1200)
                self.expect_punct(")")
                return inner, 0
            if t.value == "[":
                nxt = self.peek()
                if nxt.kind == "punct" and nxt.value == "]":
                    self.next()
                    return NIL, 0
                items = [self.parse(999)]
                tail: Term = NIL
                while True:
                    nxt = self.peek()
                    if nxt.kind == "punct" and nxt.value == ",":
                        self.next()
                        items.append(self.parse(999))
                        continue
                    if nxt.kind == "punct" and nxt.value == "|":
                        self.next()
                        tail = self.parse(999)
                    break
                self.expect_punct("]")
                return mklist(items, tail), 0
        raise _err(f"unexpected {t.kind} token", t.pos)

    def _operand_follows(self) -> bool:
        t = self.peek()
        if t.kind in ("int", "float", "var"):
            return True
        if t.kind == "atom":
            # a bare infix operator name cannot start an operand
            return t.quoted or t.call or t.value not in INFIX_OPS
        if t.kind == "punct":
            return t.value in "(["
        return False

    def _int_term(self, value: int, pos: int) -> Int:
        if not (INT_MIN <= value <= INT_MAX):
            raise _err(f"integer out of 64-bit range: {value}", pos)
        return Int(value)


def parse_term(text: str, max_depth: int = 200) -> Term:
    """Parse one complete term; trailing non-whitespace input is an error."""
    p = _Parser(tokenize(text), max_depth=max_depth)
    term = p.parse(1200)
    t = p.peek()
    if t.kind != "eof":
        raise _err("trailing input after term", t.pos)
    return term


def parse_program(text: str, max_depth: int = 200) -> list[Term]:
    """Parse a sequence of '.'-terminated clauses and directives."""
    toks = tokenize(text)
    out: list[Term] = []
    i = 0
    while toks[i].kind != "eof":
        p = _Parser(toks, max_depth=max_depth)
        p.i = i
        try:
            term = p.parse(1200)
            t = p.next()
            if t.kind != "end":
                raise _err("expected '.' at end of clause", t.pos)
        except TermSyntaxError as e:
            raise TermSyntaxError(f"clause {len(out) + 1}: {e.reason}", e.offset) from None
        out.append(term)
        i = p.i
    return out
