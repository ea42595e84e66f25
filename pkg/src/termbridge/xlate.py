"""Bi-translation kernel between logic terms and host values.

Conventions: numbers and atoms map to numbers and strings, proper lists map
to sequences, ''/n compounds to tuples, pyDict/1 to maps, pySet/1 to sets,
pyObj/1 to object handles, and the atom pyNone stands for the host null.
Traversal is iterative with an explicit work stack and a configurable depth
limit, so deep nesting degrades to a clean error instead of a crash.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .errors import (
    DanglingHandle,
    DepthLimitExceeded,
    DomainFault,
    InstantiationFault,
    TermLimitError,
)
from .hostvals import ObjRef, is_hashable_value
from .terms import (
    DOT,
    MAX_ARITY,
    NIL,
    Atom,
    Compound,
    Float,
    Int,
    Term,
    Var,
    list_parts,
    mklist,
    ordering_key,
)

NULL_ATOM_NAME = "pyNone"
_PYNONE = Atom(NULL_ATOM_NAME)


@dataclass(frozen=True)
class XlateConfig:
    tuple_functor: str = ""
    map_functor: str = "pyDict"
    set_functor: str = "pySet"
    objref_functor: str = "pyObj"
    depth_limit: int = 100_000
    strict_map_keys: bool = False  # raise on duplicate map keys instead of last-wins

    def __post_init__(self):
        functors = {
            self.tuple_functor,
            self.map_functor,
            self.set_functor,
            self.objref_functor,
        }
        if len(functors) != 4:
            raise ValueError("translation functors must be pairwise distinct")


DEFAULT_CONFIG = XlateConfig()


class XlateStats:
    """Optional node-visit counter, used to check translation stays linear."""

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes = 0


def term_to_value(
    t: Term,
    cfg: XlateConfig = DEFAULT_CONFIG,
    reg=None,
    stats: XlateStats | None = None,
) -> Any:
    """Translate a ground term into a host value."""
    tup = Atom(cfg.tuple_functor)
    mapf = Atom(cfg.map_functor)
    setf = Atom(cfg.set_functor)
    objf = Atom(cfg.objref_functor)

    out: list[Any] = []
    # work stack: terms to translate, or reduce markers (tag, payload, depth)
    stack: list = [(t, 0)]
    while stack:
        item = stack.pop()
        if type(item) is _Reduce:
            item.apply(out, cfg)
            continue
        node, depth = item
        if depth > cfg.depth_limit:
            raise DepthLimitExceeded(f"term nesting exceeds {cfg.depth_limit}")
        if stats is not None:
            stats.nodes += 1
        tt = type(node)
        if tt is Int or tt is Float:
            out.append(node.value)
        elif tt is Atom:
            if node is NIL:
                out.append([])
            elif node is _PYNONE:
                out.append(None)  # the one deliberate non-injectivity
            else:
                out.append(node.name)
        elif tt is Var:
            raise InstantiationFault("unbound variable in term being translated")
        elif tt is Compound:
            f = node.functor
            if f is DOT and len(node.args) == 2:
                items, tail = list_parts(node)
                if tail is not NIL:
                    if type(tail) is Var:
                        raise InstantiationFault("unbound list tail")
                    raise DomainFault("improper list cannot be translated")
                stack.append(_Reduce("seq", len(items)))
                d = depth + 1
                for it in reversed(items):
                    stack.append((it, d))
            elif f is tup:
                stack.append(_Reduce("tuple", len(node.args)))
                d = depth + 1
                for a in reversed(node.args):
                    stack.append((a, d))
            elif f is mapf and len(node.args) == 1:
                pairs, tail = list_parts(node.args[0])
                if tail is not NIL:
                    raise DomainFault(f"{cfg.map_functor} argument must be a proper list")
                keys_vals: list[Term] = []
                for p in pairs:
                    if not (
                        type(p) is Compound
                        and p.functor is tup
                        and len(p.args) == 2
                    ):
                        raise DomainFault(
                            f"{cfg.map_functor} entries must be "
                            f"{cfg.tuple_functor!r}/2 pairs"
                        )
                    keys_vals.extend(p.args)
                stack.append(_Reduce("map", 2 * len(pairs)))
                d = depth + 1
                for kv in reversed(keys_vals):
                    stack.append((kv, d))
            elif f is setf and len(node.args) == 1:
                items, tail = list_parts(node.args[0])
                if tail is not NIL:
                    raise DomainFault(f"{cfg.set_functor} argument must be a proper list")
                stack.append(_Reduce("set", len(items)))
                d = depth + 1
                for it in reversed(items):
                    stack.append((it, d))
            elif f is objf and len(node.args) == 1:
                h = node.args[0]
                if type(h) is not Atom:
                    raise DomainFault(f"{cfg.objref_functor} argument must be a handle atom")
                if reg is None or not reg.is_live(h.name):
                    raise DanglingHandle(f"unknown or released handle {h.name!r}")
                out.append(ObjRef(h.name))
            else:
                raise DomainFault(f"untranslatable functor {f.name}/{len(node.args)}")
        else:
            raise DomainFault(f"untranslatable term {node!r}")
    return out[0]


class _Reduce:
    __slots__ = ("tag", "n")

    def __init__(self, tag: str, n: int):
        self.tag = tag
        self.n = n

    def apply(self, out: list, cfg: XlateConfig) -> None:
        n = self.n
        taken = out[len(out) - n :] if n else []
        if n:
            del out[len(out) - n :]
        if self.tag == "seq":
            out.append(taken)
        elif self.tag == "tuple":
            out.append(tuple(taken))
        elif self.tag == "set":
            s = set()
            for v in taken:
                if not is_hashable_value(v):
                    raise DomainFault("unhashable set element")
                s.add(v)
            out.append(s)
        else:  # map: taken is k1,v1,k2,v2,...
            m: dict = {}
            for i in range(0, len(taken), 2):
                k, v = taken[i], taken[i + 1]
                if not is_hashable_value(k):
                    raise DomainFault("unhashable map key")
                if cfg.strict_map_keys and k in m:
                    raise DomainFault(f"duplicate map key {k!r}")
                m[k] = v
            out.append(m)


def value_to_term(
    v: Any,
    cfg: XlateConfig = DEFAULT_CONFIG,
    reg=None,
    stats: XlateStats | None = None,
) -> Term:
    """Translate a host value into a term, registering bare host objects."""
    out: list[Term] = []
    stack: list = [(v, 0)]
    while stack:
        item = stack.pop()
        if type(item) is _TermReduce:
            item.apply(out, cfg)
            continue
        node, depth = item
        if depth > cfg.depth_limit:
            raise DepthLimitExceeded(f"value nesting exceeds {cfg.depth_limit}")
        if stats is not None:
            stats.nodes += 1
        tt = type(node)
        if node is None:
            out.append(Atom(NULL_ATOM_NAME))
        elif tt is bool:
            out.append(Int(1 if node else 0))
        elif tt is int:
            try:
                out.append(Int(node))
            except TermLimitError:
                raise TermLimitError(f"host integer out of 64-bit range: {node}")
        elif tt is float:
            out.append(Float(node))
        elif tt is str:
            out.append(Atom(node))
        elif tt is list:
            stack.append(_TermReduce("list", len(node)))
            d = depth + 1
            for x in reversed(node):
                stack.append((x, d))
        elif tt is tuple:
            if not node:
                raise DomainFault("zero-arity tuples have no term image")
            if len(node) > MAX_ARITY:
                raise TermLimitError(f"tuple arity {len(node)} exceeds {MAX_ARITY}")
            stack.append(_TermReduce("tuple", len(node)))
            d = depth + 1
            for x in reversed(node):
                stack.append((x, d))
        elif tt is set or tt is frozenset:
            stack.append(_TermReduce("set", len(node)))
            d = depth + 1
            for x in node:
                stack.append((x, d))
        elif tt is dict:
            stack.append(_TermReduce("map", 2 * len(node)))
            d = depth + 1
            for k, val in reversed(list(node.items())):
                stack.append((val, d))
                stack.append((k, d))
        elif tt is ObjRef:
            out.append(Compound(cfg.objref_functor, (Atom(node.handle),)))
        else:
            # HostObject and any other host type become a registered reference
            if reg is None:
                raise DomainFault(f"cannot translate {tt.__name__} without a registry")
            handle = reg.register(node)
            out.append(Compound(cfg.objref_functor, (Atom(handle),)))
    return out[0]


class _TermReduce:
    __slots__ = ("tag", "n")

    def __init__(self, tag: str, n: int):
        self.tag = tag
        self.n = n

    def apply(self, out: list, cfg: XlateConfig) -> None:
        n = self.n
        taken = out[len(out) - n :] if n else []
        if n:
            del out[len(out) - n :]
        if self.tag == "list":
            out.append(mklist(taken))
        elif self.tag == "tuple":
            out.append(Compound(cfg.tuple_functor, taken))
        elif self.tag == "set":
            taken.sort(key=ordering_key)
            out.append(Compound(cfg.set_functor, (mklist(taken),)))
        else:  # map: k1,v1,k2,v2,... in insertion order
            pairs = [
                Compound(cfg.tuple_functor, (taken[i], taken[i + 1]))
                for i in range(0, len(taken), 2)
            ]
            out.append(Compound(cfg.map_functor, (mklist(pairs),)))


def normalize_term(t: Term, cfg: XlateConfig = DEFAULT_CONFIG) -> Term:
    """Canonical image of a translatable ground term.

    Sorts and de-duplicates set member lists, applies last-wins to duplicate
    map keys, and rebuilds everything else unchanged, so normalize_term(t)
    equals value_to_term(term_to_value(t)) for every translatable term.
    """
    value = term_to_value(t, cfg, reg=_PermissiveResolver())
    return value_to_term(value, cfg, reg=None)


class _PermissiveResolver:
    # registry stand-in used by normalize_term: treats every handle as live
    def is_live(self, handle: str) -> bool:
        return True


def roundtrip_check(
    t: Term, cfg: XlateConfig = DEFAULT_CONFIG, reg=None
) -> bool:
    """True iff t survives translation to a host value and back, modulo
    normalization of set order and duplicate map keys."""
    back = value_to_term(term_to_value(t, cfg, reg), cfg, reg)
    return back == normalize_term(t, cfg)
