"""Host-side dynamic value model and the object registry behind opaque handles.

Host values are native Python data: None, int, float, str, list, tuple, set,
dict, plus ObjRef (a handle into a registry) and HostObject (a class-like
record with attributes and methods). Booleans are not a separate variant;
truth-like values are the ints 0 and 1.
"""

from __future__ import annotations

from typing import Any, Callable

from .errors import DanglingHandle, UnhashableValue

HASHABLE_TYPES = (type(None), int, float, str)


class ObjRef:
    """Opaque reference to a registered host object."""

    __slots__ = ("handle",)

    def __init__(self, handle: str):
        self.handle = handle

    def __eq__(self, other) -> bool:
        return isinstance(other, ObjRef) and other.handle == self.handle

    def __hash__(self) -> int:
        return hash(("objref", self.handle))

    def __repr__(self) -> str:
        return f"ObjRef({self.handle})"


class HostObject:
    """Class-like host record: named attributes plus callable methods.

    Methods receive the object itself as their first argument.
    """

    __slots__ = ("class_name", "attributes", "methods")

    def __init__(
        self,
        class_name: str,
        attributes: dict[str, Any] | None = None,
        methods: dict[str, Callable] | None = None,
    ):
        self.class_name = class_name
        self.attributes = dict(attributes or {})
        self.methods = dict(methods or {})

    def __repr__(self) -> str:
        return f"HostObject({self.class_name})"


class ObjectRegistry:
    """Tracks live host objects behind "oN" handles; detects dangling use."""

    def __init__(self):
        self._objects: dict[str, Any] = {}
        self._counter = 0

    def register(self, obj: Any) -> str:
        self._counter += 1
        handle = f"o{self._counter}"
        self._objects[handle] = obj
        return handle

    def lookup(self, handle: str) -> Any:
        try:
            return self._objects[handle]
        except KeyError:
            raise DanglingHandle(f"unknown or released handle {handle!r}") from None

    def release(self, handle: str) -> None:
        if handle not in self._objects:
            raise DanglingHandle(f"unknown or released handle {handle!r}")
        del self._objects[handle]

    def is_live(self, handle: str) -> bool:
        return handle in self._objects

    def live_count(self) -> int:
        return len(self._objects)

    def live_handles(self) -> list[str]:
        return list(self._objects)


def is_hashable_value(v: Any) -> bool:
    """True for values allowed as set elements / map keys."""
    if isinstance(v, bool) or type(v) in (int, float, str) or v is None:
        return True
    if type(v) is tuple:
        return all(is_hashable_value(x) for x in v)
    return False


def value_hash(v: Any) -> int:
    """64-bit hash over hashable host values; numeric-equal values agree."""
    if not is_hashable_value(v):
        raise UnhashableValue(f"{type(v).__name__} values are not hashable")
    return hash(v) & 0xFFFFFFFFFFFFFFFF


def values_equal(a: Any, b: Any) -> bool:
    """Structural equality that keeps Int/Float and list/tuple distinct."""
    ta, tb = type(a), type(b)
    if ta is not tb:
        return False
    if ta is list or ta is tuple:
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if ta is set or ta is frozenset:
        return a == b
    if ta is dict:
        if len(a) != len(b):
            return False
        for (ka, va), (kb, vb) in zip(a.items(), b.items()):
            if not (values_equal(ka, kb) and values_equal(va, vb)):
                return False
        return True
    if ta is float:
        return a == b or (a != a and b != b)
    return a == b
