"""Tagged JSON encoding of host values for the wire protocol.

Grammar: {"t":"null"} | {"t":"i","v":N} | {"t":"f","v":X} | {"t":"s","v":S}
| {"t":"seq","v":[...]} | {"t":"tup","v":[...]} | {"t":"set","v":[...]}
| {"t":"map","v":[[k,v],...]} | {"t":"obj","h":"oN"}.

Set elements are serialized in canonical order (the order their logic-term
images would sort in). Object values are represented client-side only by
their handle; the server keeps the object itself.
"""

from __future__ import annotations

import math
from typing import Any


class WireError(Exception):
    kind = "ProtocolError"


class Handle:
    """Server-side marker for a registered object's handle."""

    __slots__ = ("id",)

    def __init__(self, id: str):
        self.id = id

    def __eq__(self, other):
        return isinstance(other, Handle) and other.id == self.id

    def __hash__(self):
        return hash(("handle", self.id))


def _sort_key(v: Any):
    if v is None:
        return (2, "pyNone")
    if isinstance(v, bool):
        return (1, int(v), 0)
    t = type(v)
    if t is int:
        return (1, v, 0)
    if t is float:
        return (1, math.inf, 2) if v != v else (1, v, 1)
    if t is str:
        return (2, v)
    if t is tuple:
        return (3, len(v), "", tuple(_sort_key(x) for x in v))
    raise WireError(f"unorderable set element {t.__name__}")


def encode(v: Any) -> dict:
    if v is None:
        return {"t": "null"}
    if isinstance(v, bool):
        return {"t": "i", "v": 1 if v else 0}
    t = type(v)
    if t is int:
        return {"t": "i", "v": v}
    if t is float:
        return {"t": "f", "v": v}
    if t is str:
        return {"t": "s", "v": v}
    if t is list:
        return {"t": "seq", "v": [encode(x) for x in v]}
    if t is tuple:
        return {"t": "tup", "v": [encode(x) for x in v]}
    if t is set or t is frozenset:
        return {"t": "set", "v": [encode(x) for x in sorted(v, key=_sort_key)]}
    if t is dict:
        return {"t": "map", "v": [[encode(k), encode(x)] for k, x in v.items()]}
    if t is Handle:
        return {"t": "obj", "h": v.id}
    raise WireError(f"cannot encode {t.__name__} onto the wire")


def decode(w: Any) -> Any:
    if not isinstance(w, dict) or "t" not in w:
        raise WireError(f"malformed wire value: {w!r}")
    t = w["t"]
    if t == "null":
        return None
    if t == "i":
        v = w.get("v")
        if isinstance(v, bool):
            return 1 if v else 0
        if not isinstance(v, int):
            raise WireError(f"bad integer wire value: {v!r}")
        return v
    if t == "f":
        return float(w["v"])
    if t == "s":
        v = w.get("v")
        if not isinstance(v, str):
            raise WireError(f"bad text wire value: {v!r}")
        return v
    if t == "seq":
        return [decode(x) for x in w["v"]]
    if t == "tup":
        return tuple(decode(x) for x in w["v"])
    if t == "set":
        return {decode(x) for x in w["v"]}
    if t == "map":
        return {decode(k): decode(x) for k, x in w["v"]}
    if t == "obj":
        h = w.get("h")
        if not isinstance(h, str):
            raise WireError(f"bad handle wire value: {h!r}")
        return Handle(h)
    raise WireError(f"unknown wire tag {t!r}")
