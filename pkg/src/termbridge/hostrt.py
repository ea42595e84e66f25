"""In-repo host runtime: module registry with on-demand loading, variadic
calls with keyword arguments, and object method/attribute dispatch.

Ships builtin modules json and math, plus jns_demo with deterministic test
doubles (a fake language-detection model, a counter object, benchmark
helpers). Additional modules can be declared in *.mod.json files on the
search path without code changes; their functions bind to implementations
registered in IMPLEMENTATIONS by name.
"""

from __future__ import annotations

import json as _json
import math as _math
import os
import traceback
from typing import Any, Callable

from .errors import DanglingHandle, HostError
from .hostvals import HostObject, ObjectRegistry


class HostFunction:
    __slots__ = ("name", "params", "defaults", "impl")

    def __init__(self, name: str, params: tuple[str, ...], impl: Callable,
                 defaults: dict[str, Any] | None = None):
        self.name = name
        self.params = params
        self.defaults = defaults or {}
        self.impl = impl

    def bind(self, args: list, kwargs: dict) -> list:
        if len(args) > len(self.params):
            raise HostError(
                "ArityError",
                f"{self.name}() takes at most {len(self.params)} arguments "
                f"({len(args)} given)",
            )
        bound = dict(zip(self.params, args))
        for k, v in kwargs.items():
            if k not in self.params:
                raise HostError("UnknownKeyword", f"{self.name}() got an unexpected keyword {k!r}")
            if k in bound:
                raise HostError("ArityError", f"{self.name}() got multiple values for {k!r}")
            bound[k] = v
        ordered = []
        for p in self.params:
            if p in bound:
                ordered.append(bound[p])
            elif p in self.defaults:
                ordered.append(self.defaults[p])
            else:
                raise HostError("ArityError", f"{self.name}() missing required argument {p!r}")
        return ordered


class HostModule:
    __slots__ = ("name", "functions", "loaded")

    def __init__(self, name: str, functions: dict[str, HostFunction]):
        self.name = name
        self.functions = functions
        self.loaded = True


def _wrap_host_exception(e: Exception) -> HostError:
    frames = [ln.rstrip("\n") for ln in traceback.format_tb(e.__traceback__)]
    return HostError(type(e).__name__, str(e), frames)


def _normalize(v: Any) -> Any:
    """Map host booleans to 0/1; truth-like values share one class."""
    t = type(v)
    if t is int or t is str or t is float:
        return v
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


# --- builtin module: json ---------------------------------------------------

def _json_loads(s):
    if not isinstance(s, str):
        raise HostError("TypeError", "loads() expects a text argument")
    return _normalize(_json.loads(s))


def _json_dumps(obj, sort_keys=0, indent=None):
    return _json.dumps(obj, sort_keys=bool(sort_keys), indent=indent)


# --- builtin module: math ---------------------------------------------------

EARTH_RADIUS_KM = 6371.0


def haversine_km(lat1, lon1, lat2, lon2) -> float:
    """Great-circle distance between two lat/lon points, in km."""
    p1 = _math.radians(lat1)
    p2 = _math.radians(lat2)
    dp = _math.radians(lat2 - lat1)
    dl = _math.radians(lon2 - lon1)
    a = _math.sin(dp / 2) ** 2 + _math.cos(p1) * _math.cos(p2) * _math.sin(dl / 2) ** 2
    return EARTH_RADIUS_KM * 2 * _math.asin(_math.sqrt(a))


# --- builtin module: jns_demo (deterministic test doubles) ------------------

def make_counter() -> HostObject:
    obj = HostObject("Counter", attributes={"value": 0, "name": "counter"})
    obj.methods["increment"] = _counter_increment
    obj.methods["value"] = _counter_value
    obj.methods["add"] = _counter_add
    return obj


def _counter_increment(obj):
    obj.attributes["value"] = obj.attributes["value"] + 1
    return obj.attributes["value"]


def _counter_value(obj):
    return obj.attributes["value"]


def _counter_add(obj, n):
    obj.attributes["value"] = obj.attributes["value"] + n
    return obj.attributes["value"]


def make_model(path: str) -> HostObject:
    # stand-in for an external language-identification model: fixed outputs
    obj = HostObject("LanguageModel", attributes={"path": path, "name": "lid-double"})
    obj.methods["predict"] = _model_predict
    return obj


def _model_predict(obj, text):
    if not isinstance(text, str):
        raise HostError("TypeError", "predict() expects a text argument")
    return ("__label__en", 0.98)


def _bitranslate(x):
    return x


def _dec(n):
    return n - 1


def _make20():
    return list(range(20))


_BUILTIN_MODULES: dict[str, Callable[[], HostModule]] = {}


def _builtin(name: str, funcs: list[HostFunction]):
    _BUILTIN_MODULES[name] = lambda: HostModule(name, {f.name: f for f in funcs})


_builtin("json", [
    HostFunction("loads", ("s",), _json_loads),
    HostFunction("dumps", ("obj", "sort_keys", "indent"), _json_dumps,
                 defaults={"sort_keys": 0, "indent": None}),
])

_builtin("math", [
    HostFunction("sin", ("x",), _math.sin),
    HostFunction("cos", ("x",), _math.cos),
    HostFunction("asin", ("x",), _math.asin),
    HostFunction("sqrt", ("x",), _math.sqrt),
    HostFunction("pow", ("x", "y"), _math.pow),
    HostFunction("pi", (), lambda: _math.pi),
    HostFunction("haversine", ("lat1", "lon1", "lat2", "lon2"), haversine_km),
])

_builtin("jns_demo", [
    HostFunction("bitranslate", ("x",), _bitranslate),
    HostFunction("dec", ("n",), _dec),
    HostFunction("make20", (), _make20),
    HostFunction("make_counter", (), make_counter),
    HostFunction("load_model", ("path",), make_model),
])


# name -> callable registry for declarative *.mod.json module files
IMPLEMENTATIONS: dict[str, Callable] = {
    "identity": lambda x: x,
    "add": lambda a, b: a + b,
    "mul": lambda a, b: a * b,
    "concat": lambda a, b: str(a) + str(b),
    "length": lambda xs: len(xs),
    "upper": lambda s: str(s).upper(),
}


class HostRuntime:
    """Resolves modules on demand and dispatches calls, methods, attributes."""

    def __init__(self, registry: ObjectRegistry | None = None,
                 search_path: tuple[str, ...] = ()):
        self.registry = registry if registry is not None else ObjectRegistry()
        self.search_path = tuple(search_path)
        self.modules: dict[str, HostModule] = {}
        self.last_error: HostError | None = None

    def clear_error(self) -> None:
        self.last_error = None

    def load_module(self, name: str) -> HostModule:
        mod = self.modules.get(name)
        if mod is not None:
            return mod
        factory = _BUILTIN_MODULES.get(name)
        if factory is not None:
            mod = factory()
        else:
            mod = self._load_from_path(name)
        if mod is None:
            raise HostError("ModuleNotFound", f"module {name!r} cannot be found")
        self.modules[name] = mod
        return mod

    def _load_from_path(self, name: str) -> HostModule | None:
        for d in self.search_path:
            path = os.path.join(d, f"{name}.mod.json")
            if not os.path.isfile(path):
                continue
            with open(path, encoding="utf-8") as fh:
                spec = _json.load(fh)
            funcs: dict[str, HostFunction] = {}
            for f in spec.get("functions", []):
                impl = IMPLEMENTATIONS.get(f["impl"])
                if impl is None:
                    raise HostError(
                        "ModuleNotFound",
                        f"module {name!r} binds unknown implementation {f['impl']!r}",
                    )
                funcs[f["name"]] = HostFunction(
                    f["name"], tuple(f.get("params", [])), impl,
                    defaults=dict(f.get("defaults", {})),
                )
            return HostModule(name, funcs)
        return None

    def call_host(self, module: str, fname: str, args: list, kwargs: dict) -> Any:
        mod = self.modules.get(module)
        if mod is None:
            mod = self.load_module(module)
        fn = mod.functions.get(fname)
        if fn is None:
            raise HostError("NotCallable", f"{module}.{fname} is not callable")
        if kwargs or len(args) != len(fn.params):
            ordered = fn.bind(list(args), dict(kwargs))
        else:
            ordered = args
        try:
            return _normalize(fn.impl(*ordered))
        except HostError as e:
            self.last_error = e
            raise
        except Exception as e:  # noqa: BLE001 - host failures become HostError
            err = _wrap_host_exception(e)
            self.last_error = err
            raise err from None

    def call_method(self, handle: str, mname: str, args: list, kwargs: dict) -> Any:
        obj = self._lookup(handle)
        if not isinstance(obj, HostObject) or mname not in obj.methods:
            raise HostError("NoSuchMethod", f"object {handle} has no method {mname!r}")
        try:
            return _normalize(obj.methods[mname](obj, *args, **kwargs))
        except HostError as e:
            self.last_error = e
            raise
        except Exception as e:  # noqa: BLE001
            err = _wrap_host_exception(e)
            self.last_error = err
            raise err from None

    def get_attribute(self, handle: str, name: str) -> Any:
        obj = self._lookup(handle)
        if not isinstance(obj, HostObject) or name not in obj.attributes:
            raise HostError("NoSuchAttribute", f"object {handle} has no attribute {name!r}")
        return _normalize(obj.attributes[name])

    def _lookup(self, handle: str):
        try:
            return self.registry.lookup(handle)
        except DanglingHandle:
            raise

    # handle lifetime interface shared with the out-of-process adapter
    def register_object(self, obj: Any) -> str:
        return self.registry.register(obj)

    def release_handle(self, handle: str) -> None:
        self.registry.release(handle)

    def is_live(self, handle: str) -> bool:
        return self.registry.is_live(handle)

    def live_count(self) -> int:
        return self.registry.live_count()

    # value_to_term calls register() through this registry-compatible surface
    def register(self, obj: Any) -> str:
        return self.registry.register(obj)
