"""Reader: examples, an independent recursive-descent oracle, round trips,
the golden corpus, and byte-string fuzz."""

import os
import random

import pytest

from termbridge.errors import TermSyntaxError
from termbridge.reader import parse_program, parse_term
from termbridge.terms import (
    NIL,
    Atom,
    Compound,
    Float,
    Int,
    Var,
    list_parts,
    write_term,
)

from conftest import random_term, variant

DATA = os.path.join(os.path.dirname(__file__), "data")


# --- a tiny independent parser used as an oracle on 50 fixed strings --------
#
# Handles: unquoted/quoted atoms, integers, floats, variables, lists with
# optional tails, and functor(args) compounds. No operators; the oracle
# corpus uses functional notation only.

class _Oracle:
    def __init__(self, s):
        self.s = s
        self.i = 0

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""

    def term(self, vars_):
        self.ws()
        c = self.peek()
        if c == "[":
            self.i += 1
            self.ws()
            if self.peek() == "]":
                self.i += 1
                return NIL
            items = [self.term(vars_)]
            self.ws()
            while self.peek() == ",":
                self.i += 1
                items.append(self.term(vars_))
                self.ws()
            tail = NIL
            if self.peek() == "|":
                self.i += 1
                tail = self.term(vars_)
                self.ws()
            assert self.peek() == "]"
            self.i += 1
            out = tail
            for item in reversed(items):
                out = Compound(".", (item, out))
            return out
        if c == "'":
            self.i += 1
            buf = []
            while True:
                ch = self.s[self.i]
                if ch == "\\":
                    buf.append({"n": "\n", "t": "\t", "'": "'", "\\": "\\"}[self.s[self.i + 1]])
                    self.i += 2
                    continue
                if ch == "'":
                    self.i += 1
                    break
                buf.append(ch)
                self.i += 1
            name = "".join(buf)
            if self.peek() == "(":
                return self.compound(name, vars_)
            return Atom(name)
        if c.isdigit() or (c == "-" and self.s[self.i + 1].isdigit()):
            j = self.i + (1 if c == "-" else 0)
            while j < len(self.s) and (self.s[j].isdigit() or self.s[j] in ".eE+-"):
                if self.s[j] in "+-" and self.s[j - 1] not in "eE":
                    break
                j += 1
            lit = self.s[self.i : j]
            self.i = j
            if any(ch in lit for ch in ".eE"):
                return Float(float(lit))
            return Int(int(lit))
        if c.isalpha() or c == "_":
            j = self.i
            while j < len(self.s) and (self.s[j].isalnum() or self.s[j] == "_"):
                j += 1
            name = self.s[self.i : j]
            self.i = j
            if name[0].isupper() or name[0] == "_":
                if name == "_":
                    return Var()
                if name not in vars_:
                    vars_[name] = Var(name=name)
                return vars_[name]
            if self.peek() == "(":
                return self.compound(name, vars_)
            return Atom(name)
        raise AssertionError(f"oracle stuck at {self.i}: {self.s!r}")

    def compound(self, name, vars_):
        assert self.peek() == "("
        self.i += 1
        args = [self.term(vars_)]
        self.ws()
        while self.peek() == ",":
            self.i += 1
            args.append(self.term(vars_))
            self.ws()
        assert self.peek() == ")"
        self.i += 1
        return Compound(name, args)


ORACLE_STRINGS = [
    "f(a, g(1.5, B), [1,2|T])",
    "foo", "''", "'hello world'", "x", "[]", "[a]", "[a,b,c]", "[a|T]",
    "[[1,2],[3,4]]", "f(X, X)", "g(_, _)", "point(1, 2)", "wrap(wrap(wrap(a)))",
    "42", "-7", "3.5", "-2.25", "1.5e3", "2e10", "f('Bob')", "'mixed Case'(1)",
    "pyDict([''(name,'Bob')])", "pySet([1,2,3])", "pyObj(o1)",
    "f(a,b,c,d,e)", "[f(X),g(Y)]", "h([a|[b|[c|[]]]])", "t1(a,b,1)",
    "nested([deep([deeper([deepest(x)])])])", "'it\\'s'", "'tab\\there'",
    "'line\\nbreak'", "f(-1)", "g(-2.5)", "list([1,-2,3.5,'a b'])",
    "pair(k1, [v1, v2])", "q(A, B, A, B)", "zero(0)", "f(1000000)",
    "atom_with_underscores", "f(_G99)", "m(n(o(p(q(r)))))",
    "[ spaced , items ]", "f( spaced , args )", "[_|_]",
    "holds(rel, 'GERMAN', 3)", "edge(a, b)", "edge(b, c)", "win(a)",
]


def test_oracle_corpus_agrees():
    assert len(ORACLE_STRINGS) >= 50
    for s in ORACLE_STRINGS:
        expected = _Oracle(s).term({})
        got = parse_term(s)
        assert variant(got, expected), f"mismatch for {s!r}"


def test_paper_constraint_string():
    t = parse_term("[[X  > 3*Y + 2,Y>0],[X > Y]]")
    items, tail = list_parts(t)
    assert tail is NIL and len(items) == 2
    first, tail1 = list_parts(items[0])
    assert len(first) == 2
    gt = first[0]
    assert gt.functor.name == ">" and len(gt.args) == 2
    plus = gt.args[1]
    assert plus.functor.name == "+"
    times = plus.args[0]
    assert times.functor.name == "*"
    assert times.args[0] == Int(3)
    # X and Y shared across the inner constraint
    x1 = gt.args[0]
    second, _ = list_parts(items[1])
    assert second[0].args[0] is x1


def test_empty_list_atom():
    assert parse_term("[]") is NIL


def test_partial_list_tail():
    t = parse_term("f(a, g(1.5, B), [1,2|T])")
    lst = t.args[2]
    items, tail = list_parts(lst)
    assert [items[0], items[1]] == [Int(1), Int(2)]
    assert type(tail) is Var


def test_shared_variables_by_name():
    t = parse_term("f(X, Y, X)")
    assert t.args[0] is t.args[2]
    assert t.args[0] is not t.args[1]


def test_anonymous_vars_are_fresh():
    t = parse_term("f(_, _)")
    assert t.args[0] is not t.args[1]


def test_operator_precedence_structure():
    t = parse_term("1 + 2 * 3")
    assert t.functor.name == "+"
    assert t.args[1].functor.name == "*"
    t2 = parse_term("(1 + 2) * 3")
    assert t2.functor.name == "*"
    t3 = parse_term("1 - 2 - 3")  # left assoc
    assert t3.args[0].functor.name == "-"
    t4 = parse_term("a , b , c")  # right assoc
    assert t4.args[1].functor.name == ","


def test_negative_literals_fold():
    assert parse_term("-1") == Int(-1)
    assert parse_term("- 1") == Int(-1)
    assert parse_term("-1.5") == Float(-1.5)
    t = parse_term("-(1)")
    assert t.functor.name == "-" and t.args[0] == Int(1)
    t2 = parse_term("- a")
    assert t2.functor.name == "-" and t2.args[0] is Atom("a")


def test_min_int_literal():
    assert parse_term("-9223372036854775808") == Int(-(2**63))
    with pytest.raises(TermSyntaxError):
        parse_term("9223372036854775808")


def test_syntax_errors_have_offsets():
    with pytest.raises(TermSyntaxError) as e:
        parse_term("f(a,")
    assert e.value.offset >= 1
    with pytest.raises(TermSyntaxError):
        parse_term("f(a) extra")
    with pytest.raises(TermSyntaxError):
        parse_term("")
    with pytest.raises(TermSyntaxError):
        parse_term("'unterminated")
    with pytest.raises(TermSyntaxError):
        parse_term("{curly}")
    with pytest.raises(TermSyntaxError):
        parse_term("1e")


def test_quoted_atom_escapes():
    assert parse_term("'it''s'") is Atom("it's")
    assert parse_term("'a\\nb'") is Atom("a\nb")
    with pytest.raises(TermSyntaxError):
        parse_term("'bad\\qesc'")


def test_parse_program_clauses_and_directive():
    terms = parse_program(":- table unk/1. p(a). q(X) :- p(X).")
    assert len(terms) == 3
    with pytest.raises(TermSyntaxError) as e:
        parse_program("p(a). q(b) :- . r(c).")
    assert "clause 2" in str(e.value)


def test_comments_are_skipped():
    terms = parse_program("% a comment\np(a). % trailing\np(b).")
    assert len(terms) == 2


def test_roundtrip_property(rng):
    for _ in range(3000):
        pool = []
        t = random_term(rng, 6, pool)
        s = write_term(t)
        back = parse_term(s)
        assert variant(back, t), f"{s!r}"


def test_golden_corpus_reprints_parse_equivalent():
    with open(os.path.join(DATA, "parser_corpus.txt"), encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    assert len(lines) >= 200
    for line in lines:
        t = parse_term(line)
        s = write_term(t)
        assert variant(parse_term(s), t), f"corpus line {line!r} reprinted as {s!r}"


def test_fuzz_random_bytes_terminate(rng):
    for i in range(1000):
        n = rng.randrange(1, 4096)
        data = bytes(rng.randrange(256) for _ in range(n))
        text = data.decode("latin-1")
        try:
            parse_term(text)
        except TermSyntaxError:
            pass


def test_fuzz_structured_noise(rng):
    bits = ["f(", ")", "[", "]", ",", "|", "'", "1", "a", "X", " ", "+", "-",
            ".", ":-", "is", "*", "0.5", "e", "%"]
    for _ in range(1000):
        text = "".join(rng.choice(bits) for _ in range(rng.randrange(1, 60)))
        try:
            parse_term(text)
        except TermSyntaxError:
            pass


def test_deep_nesting_is_clean_error():
    with pytest.raises(TermSyntaxError):
        parse_term("[" * 5000 + "]" * 5000)
