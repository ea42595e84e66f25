"""Shared fixtures: term/value generators and independent oracles."""

from __future__ import annotations

import math
import random
import string

import pytest

from termbridge.terms import Atom, Compound, Float, Int, Term, Var, mklist, ordering_key

JNS_TEST_PROGRAM = """
:- table unk/1.
test1(a,b,1).                      test1(a,c,2).
test1(a,d,5):- unk(something).     unk(X):- tnot(unk(X)).
"""

BASICS_PROGRAM = """
reverse(L, R) :- rev_(L, [], R).
rev_([], A, A).
rev_([H|T], A, R) :- rev_(T, [H|A], R).
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
"""

_ATOM_NAMES = ["a", "b", "foo", "bar_1", "Bob", "", "hello world", "[]", "it's",
               "line\nbreak", "tab\there", "x", "pyNone"]
_SAFE_ATOMS = ["a", "b", "c", "foo", "bar", "baz", "qux", "k1", "k2", "name"]
_FUNCTORS = ["f", "g", "h", "point", "pair", "wrap"]
_VAR_NAMES = ["X", "Y", "Z", "Acc", "_hidden", "V1"]


def random_term(rng: random.Random, depth: int = 6, vars_pool: list | None = None) -> Term:
    """General term generator for parser/ordering tests; finite floats only."""
    if depth <= 0 or rng.random() < 0.35:
        k = rng.randrange(8)
        if k == 0:
            return Int(rng.randint(-(2**40), 2**40))
        if k == 1:
            return Float(round(rng.uniform(-1e6, 1e6), 6))
        if k == 2:
            return Atom(rng.choice(_ATOM_NAMES))
        if k == 3 and vars_pool is not None:
            if not vars_pool or rng.random() < 0.4:
                vars_pool.append(Var(name=rng.choice(_VAR_NAMES) + str(len(vars_pool))))
            return rng.choice(vars_pool)
        return Atom(rng.choice(_SAFE_ATOMS))
    if rng.random() < 0.4:
        n = rng.randrange(0, 4)
        items = [random_term(rng, depth - 1, vars_pool) for _ in range(n)]
        if vars_pool is not None and rng.random() < 0.15 and items:
            return mklist(items, rng.choice(vars_pool) if vars_pool else Var())
        return mklist(items)
    n = rng.randrange(1, 4)
    return Compound(
        rng.choice(_FUNCTORS),
        [random_term(rng, depth - 1, vars_pool) for _ in range(n)],
    )


def random_hashable_value(rng: random.Random, depth: int = 2):
    k = rng.randrange(6)
    if k == 0:
        return None
    if k == 1:
        return rng.randint(-(2**40), 2**40)
    if k == 2:
        return round(rng.uniform(-1e6, 1e6), 6)
    if k in (3, 4) or depth <= 0:
        return rng.choice(_SAFE_ATOMS) + str(rng.randrange(100))
    return tuple(
        random_hashable_value(rng, depth - 1) for _ in range(rng.randrange(1, 4))
    )


def random_host_value(rng: random.Random, depth: int = 5):
    """Host value generator; no ObjRef, no empty tuples, finite floats."""
    if depth <= 0 or rng.random() < 0.35:
        return random_hashable_value(rng, 1)
    k = rng.randrange(4)
    n = rng.randrange(0, 5)
    if k == 0:
        return [random_host_value(rng, depth - 1) for _ in range(n)]
    if k == 1:
        return tuple(
            random_host_value(rng, depth - 1) for _ in range(max(1, n))
        )
    if k == 2:
        return {random_hashable_value(rng) for _ in range(n)}
    return {
        random_hashable_value(rng): random_host_value(rng, depth - 1) for _ in range(n)
    }


def value_to_fixpoint_term(v) -> Term:
    """Independent builder of the expected (normalized) term image of a value."""
    if v is None:
        return Atom("pyNone")
    if isinstance(v, bool):
        return Int(1 if v else 0)
    if type(v) is int:
        return Int(v)
    if type(v) is float:
        return Float(v)
    if type(v) is str:
        return Atom(v)
    if type(v) is list:
        return mklist([value_to_fixpoint_term(x) for x in v])
    if type(v) is tuple:
        return Compound("", [value_to_fixpoint_term(x) for x in v])
    if type(v) in (set, frozenset):
        items = sorted((value_to_fixpoint_term(x) for x in v), key=ordering_key)
        return Compound("pySet", (mklist(items),))
    if type(v) is dict:
        pairs = [
            Compound("", (value_to_fixpoint_term(k), value_to_fixpoint_term(x)))
            for k, x in v.items()
        ]
        return Compound("pyDict", (mklist(pairs),))
    raise AssertionError(f"unexpected value {v!r}")


def random_translatable_term(rng: random.Random, depth: int = 6) -> Term:
    """Pre-normalized translatable term: a fixpoint of the round trip."""
    return value_to_fixpoint_term(random_host_value(rng, depth))


# --- naive ordering oracle (independent recursive comparator) ---------------

def oracle_compare(a: Term, b: Term) -> int:
    def kind(t):
        if isinstance(t, Var):
            return 0
        if isinstance(t, (Int, Float)):
            return 1
        if isinstance(t, Atom):
            return 2
        return 3

    ka, kb = kind(a), kind(b)
    if ka != kb:
        return -1 if ka < kb else 1
    if ka == 0:
        return (a.id > b.id) - (a.id < b.id)
    if ka == 1:
        av, bv = a.value, b.value
        if av != av:
            av = math.inf
        if bv != bv:
            bv = math.inf
        if av != bv:
            return -1 if av < bv else 1
        ra = 0 if isinstance(a, Int) else (2 if a.value != a.value else 1)
        rb = 0 if isinstance(b, Int) else (2 if b.value != b.value else 1)
        return (ra > rb) - (ra < rb)
    if ka == 2:
        return (a.name > b.name) - (a.name < b.name)
    if len(a.args) != len(b.args):
        return -1 if len(a.args) < len(b.args) else 1
    if a.functor.name != b.functor.name:
        return -1 if a.functor.name < b.functor.name else 1
    for x, y in zip(a.args, b.args):
        c = oracle_compare(x, y)
        if c:
            return c
    return 0


# --- alpha-equivalence (structural equality up to variable renaming) --------

def variant(a: Term, b: Term) -> bool:
    mapping: dict = {}
    rmapping: dict = {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        tx, ty = type(x), type(y)
        if tx is not ty:
            return False
        if tx is Var:
            if mapping.setdefault(x, y) is not y:
                return False
            if rmapping.setdefault(y, x) is not x:
                return False
        elif tx is Compound:
            if x.functor is not y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        elif tx is Int or tx is Float:
            if x.value != y.value:
                return False
        elif x is not y:
            return False
    return True


@pytest.fixture
def rng():
    return random.Random(20240811)


@pytest.fixture
def bridge():
    from termbridge import Bridge

    return Bridge()


@pytest.fixture
def jns_bridge(bridge):
    bridge.consult("jns_test", JNS_TEST_PROGRAM)
    bridge.consult("basics", BASICS_PROGRAM)
    return bridge
