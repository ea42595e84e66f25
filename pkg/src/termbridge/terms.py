"""Logic-side term model: atoms, numbers, variables, compounds, lists.

Atoms are interned through an append-only symbol table, so atom equality is
identity. Compounds are immutable; lists are '.'/2 chains ending in the atom
[]. Ordering, equality and the writer all traverse iteratively, so deeply
nested terms never overflow the interpreter stack.
"""

from __future__ import annotations

import itertools
import math
import threading
from typing import Iterable, Iterator

from .errors import TermLimitError

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1
MAX_ARITY = 65535

_SYMBOLIC_CHARS = frozenset("+-*/\\^<>=~:.?@#&$")


class Term:
    __slots__ = ()


class Atom(Term):
    """Interned constant: Atom('x') always returns the same object."""

    __slots__ = ("name", "index")

    _interned: dict[str, "Atom"] = {}
    _lock = threading.Lock()

    def __new__(cls, name: str) -> "Atom":
        a = cls._interned.get(name)
        if a is None:
            with cls._lock:
                a = cls._interned.get(name)
                if a is None:
                    a = object.__new__(cls)
                    a.name = name
                    a.index = len(cls._interned)
                    cls._interned[name] = a
        return a

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"

    def __reduce__(self):
        return (Atom, (self.name,))


class Int(Term):
    __slots__ = ("value",)

    def __init__(self, value: int):
        value = int(value)
        if not (INT_MIN <= value <= INT_MAX):
            raise TermLimitError(f"integer out of 64-bit range: {value}")
        self.value = value

    def __eq__(self, other) -> bool:
        return type(other) is Int and other.value == self.value

    def __hash__(self) -> int:
        return hash(("i", self.value))

    def __repr__(self) -> str:
        return f"Int({self.value})"


class Float(Term):
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    def __eq__(self, other) -> bool:
        if type(other) is not Float:
            return False
        a, b = self.value, other.value
        return a == b or (a != a and b != b)

    def __hash__(self) -> int:
        v = self.value
        return hash(("f", 0.0)) if v != v else hash(("f", v))

    def __repr__(self) -> str:
        return f"Float({self.value!r})"


_var_ids = itertools.count(1)


class Var(Term):
    """Logic variable. Identity is object identity; id is for display/order."""

    __slots__ = ("id", "name")

    def __init__(self, name: str | None = None, id: int | None = None):
        self.id = next(_var_ids) if id is None else id
        self.name = name

    def __repr__(self) -> str:
        return f"Var(_{self.id}{'/' + self.name if self.name else ''})"


class Compound(Term):
    __slots__ = ("functor", "args")

    def __init__(self, functor: "Atom | str", args: Iterable[Term]):
        if isinstance(functor, str):
            functor = Atom(functor)
        args = tuple(args)
        if not args:
            raise TermLimitError("compound arity must be at least 1")
        if len(args) > MAX_ARITY:
            raise TermLimitError(f"compound arity {len(args)} exceeds {MAX_ARITY}")
        self.functor = functor
        self.args = args

    def __eq__(self, other) -> bool:
        if type(other) is not Compound:
            return False
        return struct_eq(self, other)

    def __hash__(self) -> int:
        return _term_hash(self)

    def __repr__(self) -> str:
        return f"Compound({self.functor.name!r}/{len(self.args)})"


NIL = Atom("[]")
DOT = Atom(".")


def mklist(items: Iterable[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = Compound(DOT, (item, out))
    return out


def list_parts(t: Term) -> tuple[list[Term], Term]:
    """Split a '.'/2 chain into (elements, tail). Terminates on any term."""
    items: list[Term] = []
    while type(t) is Compound and t.functor is DOT and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def is_proper_list(t: Term) -> bool:
    _, tail = list_parts(t)
    return tail is NIL


def iter_list(t: Term) -> Iterator[Term]:
    items, tail = list_parts(t)
    if tail is not NIL:
        raise ValueError("not a proper list")
    return iter(items)


def struct_eq(a: Term, b: Term) -> bool:
    """Structural equality; variables compare by identity. Iterative."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        tx = type(x)
        if tx is not type(y):
            return False
        if tx is Int:
            if x.value != y.value:
                return False
        elif tx is Float:
            if not (x.value == y.value or (x.value != x.value and y.value != y.value)):
                return False
        elif tx is Compound:
            if x.functor is not y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        else:
            # Atom or Var: identity already failed
            return False
    return True


def _term_hash(t: Term) -> int:
    # Post-order fold so nesting depth cannot overflow the Python stack.
    out: list[int] = []
    stack: list = [t]
    while stack:
        node = stack.pop()
        if type(node) is tuple:  # reduce marker: (functor_index, arity)
            fi, n = node
            h = hash((fi, n, tuple(out[-n:])))
            del out[-n:]
            out.append(h)
        elif type(node) is Compound:
            stack.append((node.functor.index, len(node.args)))
            stack.extend(reversed(node.args))
        else:
            out.append(hash(node))
    return out[0]


# --- canonical ordering --------------------------------------------------
#
# Total order: Var < numbers (by value, Int before Float on ties) < Atom
# (by name) < Compound (arity, then functor name, then args left to right).

def _num_rank(t: Term) -> tuple:
    if type(t) is Int:
        return (t.value, 0)
    v = t.value
    if v != v:  # NaN sorts above every other number
        return (math.inf, 2)
    return (v, 1)


def compare_terms(a: Term, b: Term) -> int:
    """Returns -1, 0 or 1 under the canonical term ordering."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        kx = _kind(x)
        ky = _kind(y)
        if kx != ky:
            return -1 if kx < ky else 1
        if kx == 0:
            if x.id != y.id:
                return -1 if x.id < y.id else 1
        elif kx == 1:
            rx, ry = _num_rank(x), _num_rank(y)
            if rx != ry:
                return -1 if rx < ry else 1
        elif kx == 2:
            if x is not y:
                return -1 if x.name < y.name else 1
        else:
            if len(x.args) != len(y.args):
                return -1 if len(x.args) < len(y.args) else 1
            if x.functor is not y.functor:
                return -1 if x.functor.name < y.functor.name else 1
            stack.extend(reversed(list(zip(x.args, y.args))))
    return 0


def _kind(t: Term) -> int:
    tt = type(t)
    if tt is Var:
        return 0
    if tt is Int or tt is Float:
        return 1
    if tt is Atom:
        return 2
    return 3


def ordering_key(t: Term):
    """Sort key consistent with compare_terms; built iteratively."""
    out: list = []
    stack: list = [t]
    while stack:
        node = stack.pop()
        if type(node) is tuple:  # (arity, functor_name)
            n, fname = node
            key = (3, n, fname, tuple(out[-n:]))
            del out[-n:]
            out.append(key)
        else:
            tt = type(node)
            if tt is Var:
                out.append((0, node.id))
            elif tt is Int:
                out.append((1, node.value, 0))
            elif tt is Float:
                v = node.value
                out.append((1, math.inf, 2) if v != v else (1, v, 1))
            elif tt is Atom:
                out.append((2, node.name))
            else:
                stack.append((len(node.args), node.functor.name))
                stack.extend(reversed(node.args))
    return out[0]


def term_vars(t: Term) -> list[Var]:
    """Variables of t in first-occurrence order."""
    seen: set[int] = set()
    out: list[Var] = []
    stack = [t]
    while stack:
        node = stack.pop()
        tt = type(node)
        if tt is Var:
            if id(node) not in seen:
                seen.add(id(node))
                out.append(node)
        elif tt is Compound:
            stack.extend(reversed(node.args))
    return out


def is_ground(t: Term) -> bool:
    stack = [t]
    while stack:
        node = stack.pop()
        tt = type(node)
        if tt is Var:
            return False
        if tt is Compound:
            stack.extend(node.args)
    return True


# --- writer ---------------------------------------------------------------

_BIN_OPS = {
    ":-": (1200, "xfx"),
    ",": (1000, "xfy"),
    ":": (200, "xfy"),
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

_PRE_OPS = {
    ":-": (1200, "fx"),
    "-": (200, "fy"),
}


def atom_needs_quotes(name: str) -> bool:
    if name == "[]":
        return False
    if not name:
        return True
    c = name[0]
    if c.isalpha() and c.islower():
        return not all(ch.isalnum() or ch == "_" for ch in name)
    # Symbolic atoms are always quoted when written standalone; bare symbolic
    # text is reserved for operator positions so rereads are unambiguous.
    return True


def _quote_atom(name: str) -> str:
    if not atom_needs_quotes(name):
        return name
    body = (
        name.replace("\\", "\\\\")
        .replace("'", "\\'")
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f"'{body}'"


def _float_text(v: float) -> str:
    if v != v:
        return "nan"
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(v)


def _display_names(t: Term) -> dict[int, str]:
    names: dict[int, str] = {}
    taken: set[str] = set()
    for v in term_vars(t):
        name = v.name
        if not name or name in taken or not _valid_var_name(name):
            name = f"_G{v.id}"
        names[id(v)] = name
        taken.add(name)
    return names


def _valid_var_name(name: str) -> bool:
    return bool(name) and (name[0].isupper() or name[0] == "_") and all(
        ch.isalnum() or ch == "_" for ch in name
    )


def write_term(t: Term) -> str:
    """Canonical text form; reparses to a structurally identical term."""
    names = _display_names(t)
    parts: list[str] = []
    stack: list = [(t, 1200)]
    while stack:
        item = stack.pop()
        if type(item) is str:
            parts.append(item)
            continue
        node, maxp = item
        tt = type(node)
        if tt is Atom:
            parts.append(_quote_atom(node.name))
        elif tt is Int:
            parts.append(str(node.value))
        elif tt is Float:
            parts.append(_float_text(node.value))
        elif tt is Var:
            parts.append(names.get(id(node)) or f"_G{node.id}")
        else:
            _push_compound(stack, node, maxp)
    return "".join(parts)


def _push_compound(stack: list, node: Compound, maxp: int) -> None:
    fname = node.functor.name
    arity = len(node.args)

    if node.functor is DOT and arity == 2:
        items, tail = list_parts(node)
        frames: list = ["["]
        for i, item in enumerate(items):
            if i:
                frames.append(",")
            frames.append((item, 999))
        if tail is not NIL:
            frames.append("|")
            frames.append((tail, 999))
        frames.append("]")
        stack.extend(reversed(frames))
        return

    if arity == 2 and fname in _BIN_OPS:
        p, typ = _BIN_OPS[fname]
        lmax = p if typ == "yfx" else p - 1
        rmax = p if typ == "xfy" else p - 1
        if fname == ",":
            # conjunction always parenthesized: commas collide with arg lists
            stack.extend(reversed(["(", (node.args[0], 999), ",", (node.args[1], 1000), ")"]))
            return
        frames = []
        if p > maxp:
            frames.append("(")
        frames.extend([(node.args[0], lmax), f" {fname} ", (node.args[1], rmax)])
        if p > maxp:
            frames.append(")")
        stack.extend(reversed(frames))
        return

    if arity == 1 and fname == "-":
        arg = node.args[0]
        if type(arg) is Int or type(arg) is Float:
            # "-1" would rescan as a negative literal; keep the compound form
            stack.extend(reversed(["-(", (arg, 999), ")"]))
            return
        p, _ = _PRE_OPS["-"]
        frames = []
        if p > maxp:
            frames.append("(")
        frames.extend(["- ", (arg, p)])
        if p > maxp:
            frames.append(")")
        stack.extend(reversed(frames))
        return

    if arity == 1 and fname == ":-":
        stack.extend(reversed([":- ", (node.args[0], 1199)]))
        return

    frames = [_quote_functor(fname), "("]
    for i, a in enumerate(node.args):
        if i:
            frames.append(",")
        frames.append((a, 999))
    frames.append(")")
    stack.extend(reversed(frames))


def _quote_functor(name: str) -> str:
    if name == "[]":  # bare [] before ( would scan as two brackets
        return "'[]'"
    return _quote_atom(name)
