"""The bridge surface joining the logic engine and the host runtime.

Logic to host: pyfunc (function calls), pydot (method/attribute access on
registered objects), free_object. Host to logic: jns_qdet (first answer of a
deterministic goal), jns_cmd (truth only), jns_comp (all answers as a list or
set of binding tuples), command_string (argument read from text). Every
failure that crosses the boundary surfaces as exactly one BridgeError and
leaves the bridge usable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Any, Callable, Iterator

from .engine import (
    Answer,
    Budget,
    KnowledgeBase,
    Machine,
    consult_text,
    deref,
    resolve,
    solve,
)
from .errors import (
    BridgeError,
    DomainFault,
    EngineError,
    FlagFault,
    HostError,
    InstantiationFault,
    TermError,
)
from .hostrt import HostRuntime
from .reader import parse_term
from .terms import (
    NIL,
    Atom,
    Compound,
    Float,
    Int,
    Term,
    Var,
    list_parts,
    ordering_key,
    write_term,
)
from .xlate import DEFAULT_CONFIG, XlateConfig, term_to_value, value_to_term

TRUTH_MODES = ("none", "plain", "delay_lists")
MAX_CALLBACK_DEPTH = 64

_EQ = Atom("=")


@dataclass(frozen=True)
class QueryFlags:
    """Options for comprehension queries.

    The engine-facing integer encoding packs truth mode into bits 0-1
    (0 none, 1 plain, 2 delay_lists) and set comprehension into bit 2;
    vars travels alongside.
    """

    vars: int = 1
    comprehension: str = "list"
    truth_vals: str = "plain"

    def __post_init__(self):
        if self.vars < 0:
            raise FlagFault("vars must be non-negative")
        if self.comprehension not in ("list", "set"):
            raise FlagFault(f"unknown comprehension mode {self.comprehension!r}")
        if self.truth_vals not in TRUTH_MODES:
            raise FlagFault(f"unknown truth mode {self.truth_vals!r}")

    def encode(self) -> int:
        return TRUTH_MODES.index(self.truth_vals) | (
            4 if self.comprehension == "set" else 0
        )

    @classmethod
    def decode(cls, flag: int, vars: int = 1) -> "QueryFlags":
        if not 0 <= flag <= 7 or (flag & 3) == 3:
            raise FlagFault(f"undecodable flag integer {flag}")
        return cls(
            vars=vars,
            comprehension="set" if flag & 4 else "list",
            truth_vals=TRUTH_MODES[flag & 3],
        )


class Bridge:
    """One logic engine + one host runtime + one object registry."""

    def __init__(
        self,
        runtime: HostRuntime | None = None,
        kb: KnowledgeBase | None = None,
        config: XlateConfig = DEFAULT_CONFIG,
        budget: int = 10_000_000,
        search_path: tuple[str, ...] = (),
    ):
        self.runtime = runtime if runtime is not None else HostRuntime(
            search_path=search_path
        )
        self.kb = kb if kb is not None else KnowledgeBase()
        self.config = config
        self.budget = budget
        self._callbacks: dict[str, Callable] = {}
        self._cb_depth = 0
        # runtimes expose a last_error buffer; cleared at each pyfunc entry
        self._err_rt = self.runtime if hasattr(self.runtime, "last_error") else None
        self._install_builtins()

    # --- consulting -------------------------------------------------------

    def consult(self, module: str, program: str) -> None:
        try:
            consult_text(self.kb, module, program)
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, f"consult into {module}") from None

    def consult_file(self, path: str, module: str | None = None) -> None:
        if module is None:
            module = os.path.splitext(os.path.basename(path))[0]
        with open(path, encoding="utf-8") as fh:
            self.consult(module, fh.read())

    # --- logic -> host ------------------------------------------------------

    def pyfunc(self, module: str, call: Term, kwargs: Term | None = None) -> Term:
        try:
            return self._pyfunc_term(module, call, kwargs)
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, f"pyfunc {module}") from None

    def pydot(self, obj: Term, call_or_attr: Term, kwargs: Term | None = None) -> Term:
        try:
            return self._pydot_term(obj, call_or_attr, kwargs)
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, "pydot") from None

    def free_object(self, obj: Term) -> None:
        try:
            self.runtime.release_handle(self._handle_of(obj))
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, "free_object") from None

    # --- host -> logic ------------------------------------------------------

    def jns_qdet(self, module: str, pred: str, args=()) -> tuple[Any, int]:
        try:
            ret = Var(name="Return")
            goal = Compound(pred, (*self._value_terms(args), ret))
            ans = Machine(self.kb, module, goal, Budget(self.budget)).first_answer()
            if ans is None:
                return (None, 0)
            return (self._term_value(ans.subst[ret]), ans.truth)
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, f"jns_qdet {module}:{pred}") from None

    def jns_cmd(self, module: str, pred: str, args=()) -> int:
        try:
            arg_terms = self._value_terms(args)
            goal = Compound(pred, arg_terms) if arg_terms else Atom(pred)
            ans = Machine(self.kb, module, goal, Budget(self.budget)).first_answer()
            return 0 if ans is None else ans.truth
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, f"jns_cmd {module}:{pred}") from None

    def jns_comp(
        self,
        module: str,
        pred: str,
        args=(),
        flags: QueryFlags | None = None,
        *,
        vars: int | None = None,
        comprehension: str | None = None,
        truth_vals: str | None = None,
    ):
        try:
            f = flags or QueryFlags()
            if vars is not None:
                f = replace(f, vars=vars)
            if comprehension is not None:
                f = replace(f, comprehension=comprehension)
            if truth_vals is not None:
                f = replace(f, truth_vals=truth_vals)
            return self._comp(module, pred, args, f)
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, f"jns_comp {module}:{pred}") from None

    def command_string(self, module: str, pred: str, argstring: str) -> int:
        try:
            term = parse_term(argstring)
            goal = Compound(pred, (term,))
            ans = Machine(self.kb, module, goal, Budget(self.budget)).first_answer()
            return 0 if ans is None else ans.truth
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, f"command_string {module}:{pred}") from None

    def register_callback(self, name: str, fn: Callable) -> None:
        self._callbacks[name] = fn

    # --- direct goal queries (REPL and tests) -------------------------------

    def query(self, module: str, goal: Term) -> Iterator[Answer]:
        """Answers for a goal term; errors surface as BridgeError."""
        try:
            yield from solve(self.kb, module, goal, Budget(self.budget))
        except BridgeError:
            raise
        except Exception as e:  # noqa: BLE001
            raise self._bridge_error(e, f"query {write_term(goal)}") from None

    def live_count(self) -> int:
        return self.runtime.live_count()

    # --- internals ----------------------------------------------------------

    def _value_terms(self, values) -> tuple[Term, ...]:
        """Call arguments become terms; arbitrary host objects are not
        silently registered on the way in, only results coming back are."""
        try:
            return tuple(value_to_term(v, self.config, None) for v in values)
        except DomainFault as e:
            raise InstantiationFault(f"untranslatable call argument: {e}") from None

    def _term_value(self, t: Term) -> Any:
        return term_to_value(t, self.config, self.runtime)

    def _pyfunc_term(self, module: str, call: Term, kwargs_term: Term | None) -> Term:
        if self._err_rt is not None:
            self._err_rt.last_error = None
        tc = type(call)
        if tc is Atom:
            fname, arg_terms = call.name, ()
        elif tc is Compound:
            fname, arg_terms = call.functor.name, call.args
        else:
            raise DomainFault("pyfunc call must be an atom or compound")
        args = [self._term_value(a) for a in arg_terms]
        kwargs = self._kwargs_from_term(kwargs_term)
        return self._invoke_and_translate(module, fname, args, kwargs)

    def _invoke_and_translate(self, module: str, fname: str, args, kwargs) -> Term:
        if module == "callbacks":
            value = self._call_callback(fname, args, kwargs)
        else:
            value = self.runtime.call_host(module, fname, args, kwargs)
        tv = type(value)
        if tv is int:
            return Int(value)
        if tv is str:
            return Atom(value)
        if tv is float:
            return Float(value)
        return value_to_term(value, self.config, self.runtime)

    def _pydot_term(self, obj: Term, call_or_attr: Term, kwargs_term: Term | None) -> Term:
        handle = self._handle_of(obj)
        tc = type(call_or_attr)
        if tc is Compound:
            fname = call_or_attr.functor.name
            args = [self._term_value(a) for a in call_or_attr.args]
            kwargs = self._kwargs_from_term(kwargs_term)
            value = self.runtime.call_method(handle, fname, args, kwargs)
        elif tc is Atom:
            value = self.runtime.get_attribute(handle, call_or_attr.name)
        else:
            raise DomainFault("pydot target must be a method call or attribute atom")
        return value_to_term(value, self.config, self.runtime)

    def _handle_of(self, obj: Term) -> str:
        if (
            type(obj) is Compound
            and obj.functor.name == self.config.objref_functor
            and len(obj.args) == 1
            and type(obj.args[0]) is Atom
        ):
            return obj.args[0].name
        raise DomainFault(
            f"expected {self.config.objref_functor}/1 object reference, "
            f"got {write_term(obj)}"
        )

    def _kwargs_from_term(self, t: Term | None) -> dict[str, Any]:
        if t is None or t is NIL:
            return {}
        items, tail = list_parts(t)
        if tail is not NIL:
            raise DomainFault("keyword list must be a proper list")
        out: dict[str, Any] = {}
        for item in items:
            if not (
                type(item) is Compound
                and item.functor is _EQ
                and len(item.args) == 2
                and type(item.args[0]) is Atom
            ):
                raise DomainFault("keyword entries must be key=value with atom keys")
            out[item.args[0].name] = self._term_value(item.args[1])
        return out

    def _call_callback(self, name: str, args: list, kwargs: dict) -> Any:
        fn = self._callbacks.get(name)
        if fn is None:
            raise HostError("NotCallable", f"callbacks.{name} is not callable")
        if self._cb_depth >= MAX_CALLBACK_DEPTH:
            raise HostError(
                "NestingLimit", f"callback nesting exceeds {MAX_CALLBACK_DEPTH}"
            )
        self._cb_depth += 1
        try:
            from .hostrt import _normalize

            return _normalize(fn(*args, **kwargs))
        except (HostError, BridgeError):
            raise
        except Exception as e:  # noqa: BLE001
            import traceback

            raise HostError(
                type(e).__name__,
                str(e),
                [ln.rstrip("\n") for ln in traceback.format_tb(e.__traceback__)],
            ) from None
        finally:
            self._cb_depth -= 1

    def _comp(self, module: str, pred: str, args, flags: QueryFlags):
        arg_terms = self._value_terms(args)
        qvars = tuple(Var() for _ in range(flags.vars))
        all_args = (*arg_terms, *qvars)
        goal = Compound(pred, all_args) if all_args else Atom(pred)
        machine = Machine(self.kb, module, goal, Budget(self.budget))
        collected: list[tuple[tuple[Term, ...], int, tuple[Term, ...]]] = []
        for ans in machine.answers():
            bindings = tuple(ans.subst[v] for v in qvars)
            collected.append((bindings, ans.truth, ans.residual))
        if flags.comprehension == "set":
            collected.sort(key=lambda item: (
                tuple(ordering_key(t) for t in item[0]),
                item[1],
            ))
        items = []
        for bindings, truth, residual in collected:
            btuple = tuple(self._term_value(t) for t in bindings)
            if flags.truth_vals == "none":
                items.append(btuple)
            elif flags.truth_vals == "plain":
                items.append((btuple, truth))
            else:
                items.append((btuple, [write_term(lit) for lit in residual]))
        if flags.comprehension == "set":
            try:
                return set(items)
            except TypeError:
                raise DomainFault("set comprehension requires hashable answers") from None
        return items

    def _bridge_error(self, e: Exception, context: str) -> BridgeError:
        logic_bt = [context]
        if isinstance(e, HostError):
            return BridgeError("host", e.kind, e.message, logic_bt, e.backtrace)
        if isinstance(e, (TermError, EngineError)):
            return BridgeError("logic", e.kind, str(e), logic_bt)
        return BridgeError("logic", "internal", f"{type(e).__name__}: {e}", logic_bt)

    # --- engine-side builtins -------------------------------------------------

    def _install_builtins(self) -> None:
        kb = self.kb
        kb.add_builtin("pyfunc", 3, self._eb_pyfunc3)
        kb.add_builtin("pyfunc", 4, self._eb_pyfunc4)
        kb.add_builtin("pydot", 3, self._eb_pydot3)
        kb.add_builtin("pydot", 4, self._eb_pydot4)
        kb.add_builtin("free_object", 1, self._eb_free)

    def _engine_args(self, machine: Machine, arg_terms) -> list:
        """Translate call arguments straight off the binding store."""
        store = machine.store
        out = []
        for a in arg_terms:
            a = deref(a, store)
            ta = type(a)
            if ta is Int or ta is Float:
                out.append(a.value)
            elif ta is Atom:
                out.append([] if a is NIL else a.name)
            else:
                out.append(self._term_value(resolve(a, store)))
        return out

    def _eb_call(self, machine: Machine, args, kwargs_idx: int | None) -> bool:
        store = machine.store
        mod = deref(args[0], store)
        if type(mod) is not Atom:
            raise DomainFault("pyfunc module must be an atom")
        if self._err_rt is not None:
            self._err_rt.last_error = None
        call = deref(args[1], store)
        tc = type(call)
        if tc is Atom:
            fname, arg_terms = call.name, ()
        elif tc is Compound:
            fname, arg_terms = call.functor.name, call.args
        else:
            raise DomainFault("pyfunc call must be an atom or compound")
        values = self._engine_args(machine, arg_terms)
        kwargs = (
            self._kwargs_from_term(machine.resolve(args[kwargs_idx]))
            if kwargs_idx is not None
            else {}
        )
        res = self._invoke_and_translate(mod.name, fname, values, kwargs)
        out = deref(args[-1], store)
        if type(out) is Var:
            store[out] = res
            machine.trail.append(out)
            return True
        return machine.unify_det(out, res)

    def _eb_pyfunc3(self, machine: Machine, args, module: str) -> bool:
        return self._eb_call(machine, args, None)

    def _eb_pyfunc4(self, machine: Machine, args, module: str) -> bool:
        return self._eb_call(machine, args, 2)

    def _eb_pydot3(self, machine: Machine, args, module: str) -> bool:
        res = self._pydot_term(machine.resolve(args[0]), machine.resolve(args[1]), None)
        return machine.unify_det(args[2], res)

    def _eb_pydot4(self, machine: Machine, args, module: str) -> bool:
        res = self._pydot_term(
            machine.resolve(args[0]),
            machine.resolve(args[1]),
            machine.resolve(args[2]),
        )
        return machine.unify_det(args[3], res)

    def _eb_free(self, machine: Machine, args, module: str) -> bool:
        self.runtime.release_handle(self._handle_of(machine.resolve(args[0])))
        return True
