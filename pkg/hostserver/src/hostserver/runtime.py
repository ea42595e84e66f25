"""Allow-listed callable surface of the server.

json and math are the real standard-library modules (thin wrappers pin the
output conventions: booleans become 0/1, dumps uses ", " and ": "
separators). jns_demo carries deterministic demo objects: a counter and a
fake language-identification model. Objects returned from calls live in a
server-side registry behind "oN" handles.
"""

from __future__ import annotations

import json as _json
import math as _math
from typing import Any, Callable

from .wire import Handle

EARTH_RADIUS_KM = 6371.0


class CallError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


def _normalize(v: Any) -> Any:
    t = type(v)
    if t is bool:
        return 1 if v else 0
    if t is list:
        return [_normalize(x) for x in v]
    if t is tuple:
        return tuple(_normalize(x) for x in v)
    if t is dict:
        return {_normalize(k): _normalize(x) for k, x in v.items()}
    if t is set or t is frozenset:
        return {_normalize(x) for x in v}
    return v


class ServedObject:
    """Object kept alive behind a handle: attributes plus named methods."""

    def __init__(self, class_name: str, attributes: dict | None = None,
                 methods: dict[str, Callable] | None = None):
        self.class_name = class_name
        self.attributes = dict(attributes or {})
        self.methods = dict(methods or {})


class Registry:
    def __init__(self):
        self._objects: dict[str, ServedObject] = {}
        self._counter = 0

    def register(self, obj: ServedObject) -> str:
        self._counter += 1
        handle = f"o{self._counter}"
        self._objects[handle] = obj
        return handle

    def lookup(self, handle: str) -> ServedObject:
        obj = self._objects.get(handle)
        if obj is None:
            raise CallError("DanglingHandle", f"unknown or released handle {handle!r}")
        return obj

    def release(self, handle: str) -> None:
        if handle not in self._objects:
            raise CallError("DanglingHandle", f"unknown or released handle {handle!r}")
        del self._objects[handle]

    def live_count(self) -> int:
        return len(self._objects)


class Fn:
    __slots__ = ("name", "params", "defaults", "impl")

    def __init__(self, name, params, impl, defaults=None):
        self.name = name
        self.params = params
        self.defaults = defaults or {}
        self.impl = impl

    def call(self, args: list, kwargs: dict):
        if len(args) > len(self.params):
            raise CallError(
                "ArityError",
                f"{self.name}() takes at most {len(self.params)} arguments",
            )
        bound = dict(zip(self.params, args))
        for k, v in kwargs.items():
            if k not in self.params:
                raise CallError("UnknownKeyword", f"{self.name}() got an unexpected keyword {k!r}")
            if k in bound:
                raise CallError("ArityError", f"{self.name}() got multiple values for {k!r}")
            bound[k] = v
        ordered = []
        for p in self.params:
            if p in bound:
                ordered.append(bound[p])
            elif p in self.defaults:
                ordered.append(self.defaults[p])
            else:
                raise CallError("ArityError", f"{self.name}() missing required argument {p!r}")
        return self.impl(*ordered)


def haversine_km(lat1, lon1, lat2, lon2) -> float:
    p1 = _math.radians(lat1)
    p2 = _math.radians(lat2)
    dp = _math.radians(lat2 - lat1)
    dl = _math.radians(lon2 - lon1)
    a = _math.sin(dp / 2) ** 2 + _math.cos(p1) * _math.cos(p2) * _math.sin(dl / 2) ** 2
    return EARTH_RADIUS_KM * 2 * _math.asin(_math.sqrt(a))


def _make_counter() -> ServedObject:
    obj = ServedObject("Counter", attributes={"value": 0, "name": "counter"})

    def increment(o):
        o.attributes["value"] += 1
        return o.attributes["value"]

    def add(o, n):
        o.attributes["value"] += n
        return o.attributes["value"]

    obj.methods["increment"] = increment
    obj.methods["add"] = add
    obj.methods["value"] = lambda o: o.attributes["value"]
    return obj


def _load_model(path: str) -> ServedObject:
    obj = ServedObject("LanguageModel", attributes={"path": path, "name": "lid-double"})
    obj.methods["predict"] = lambda o, text: ("__label__en", 0.98)
    return obj


MODULES: dict[str, dict[str, Fn]] = {
    "json": {
        "loads": Fn("loads", ("s",), _json.loads),
        "dumps": Fn(
            "dumps",
            ("obj", "sort_keys", "indent"),
            lambda obj, sort_keys=0, indent=None: _json.dumps(
                obj, sort_keys=bool(sort_keys), indent=indent
            ),
            defaults={"sort_keys": 0, "indent": None},
        ),
    },
    "math": {
        "sin": Fn("sin", ("x",), _math.sin),
        "cos": Fn("cos", ("x",), _math.cos),
        "asin": Fn("asin", ("x",), _math.asin),
        "sqrt": Fn("sqrt", ("x",), _math.sqrt),
        "pow": Fn("pow", ("x", "y"), _math.pow),
        "pi": Fn("pi", (), lambda: _math.pi),
        "haversine": Fn("haversine", ("lat1", "lon1", "lat2", "lon2"), haversine_km),
    },
    "jns_demo": {
        "bitranslate": Fn("bitranslate", ("x",), lambda x: x),
        "dec": Fn("dec", ("n",), lambda n: n - 1),
        "make20": Fn("make20", (), lambda: list(range(20))),
        "make_counter": Fn("make_counter", (), _make_counter),
        "load_model": Fn("load_model", ("path",), _load_model),
    },
}


class Runtime:
    """Dispatches allow-listed calls and tracks served objects."""

    def __init__(self):
        self.registry = Registry()

    def module(self, name: str) -> dict[str, Fn]:
        mod = MODULES.get(name)
        if mod is None:
            raise CallError("ModuleNotAllowed", f"module {name!r} is not allowed")
        return mod

    def call(self, module: str, name: str, args: list, kwargs: dict) -> Any:
        fn = self.module(module).get(name)
        if fn is None:
            raise CallError("NotCallable", f"{module}.{name} is not callable")
        return self._box(fn.call(self._unbox_all(args), self._unbox_map(kwargs)))

    def method(self, handle: str, name: str, args: list, kwargs: dict) -> Any:
        obj = self.registry.lookup(handle)
        m = obj.methods.get(name)
        if m is None:
            raise CallError("NoSuchMethod", f"object {handle} has no method {name!r}")
        return self._box(m(obj, *self._unbox_all(args), **self._unbox_map(kwargs)))

    def getattr(self, handle: str, name: str) -> Any:
        obj = self.registry.lookup(handle)
        if name not in obj.attributes:
            raise CallError("NoSuchAttribute", f"object {handle} has no attribute {name!r}")
        return self._box(obj.attributes[name])

    def release(self, handle: str) -> None:
        self.registry.release(handle)

    def _box(self, v: Any) -> Any:
        v = _normalize(v)
        if isinstance(v, ServedObject):
            return Handle(self.registry.register(v))
        return v

    def _unbox_all(self, args: list) -> list:
        return [self._unbox(a) for a in args]

    def _unbox_map(self, kwargs: dict) -> dict:
        return {k: self._unbox(v) for k, v in kwargs.items()}

    def _unbox(self, v: Any) -> Any:
        if isinstance(v, Handle):
            return self.registry.lookup(v.id)
        return v
