"""Goal evaluation: unification, clause resolution, findall, and tabled
evaluation under the well-founded semantics.

Resolution is an iterative machine over an explicit goal stack with
trail-based backtracking, so long derivations never grow the Python stack.
Clauses are precompiled into templates whose variables are integer slots;
head matching fills a per-activation slot array and only the needed parts of
the body are materialized, which keeps the inner loop allocation-light.

Tabled predicates are evaluated by grounding the relevant part of the
program from the call and running an alternating fixpoint; answers carry
truth 1 (true) or 2 (undefined) plus a residual of undefined literals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .errors import (
    BudgetExceeded,
    EngineError,
    EvaluationFault,
    ExistenceFault,
    FlounderingFault,
    InstantiationFault,
    TabledNegationFault,
    TermSyntaxError,
)
from .reader import parse_program
from .terms import (
    INT_MAX,
    INT_MIN,
    Atom,
    Compound,
    Float,
    Int,
    Term,
    Var,
    is_ground,
    mklist,
    ordering_key,
    term_vars,
    write_term,
)

TRUTH_FALSE = 0
TRUTH_TRUE = 1
TRUTH_UNDEFINED = 2

DEFAULT_BUDGET = 10_000_000

_TNOT = Atom("tnot")
_NECK = Atom(":-")
_COMMA = Atom(",")
_TABLE = Atom("table")
_SLASH = Atom("/")
_COLON = Atom(":")


class Budget:
    """Countdown over resolution steps and ground-rule evaluations."""

    __slots__ = ("remaining",)

    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.remaining = limit

    def spend(self, n: int = 1) -> None:
        self.remaining -= n
        if self.remaining < 0:
            raise BudgetExceeded("evaluation budget exhausted")


def _as_budget(budget) -> Budget:
    if budget is None:
        return Budget()
    if isinstance(budget, Budget):
        return budget
    return Budget(int(budget))


# --- clause templates -------------------------------------------------------
#
# Variables become _Slot(i); ground subterms are kept as the original shared
# term objects so materializing a body goal only copies var-carrying spines.

_NO_SLOTS: list = []


class _Slot:
    __slots__ = ("i",)

    def __init__(self, i: int):
        self.i = i


class _CT:
    __slots__ = ("functor", "args")

    def __init__(self, functor: Atom, args: tuple):
        self.functor = functor
        self.args = args


def _compile_template(t: Term, slot_map: dict) -> tuple:
    """Returns (template, has_slots)."""
    tt = type(t)
    if tt is Var:
        s = slot_map.get(t)
        if s is None:
            s = _Slot(len(slot_map))
            slot_map[t] = s
        return s, True
    if tt is Compound:
        parts = [_compile_template(a, slot_map) for a in t.args]
        if any(h for _, h in parts):
            return _CT(t.functor, tuple(p for p, _ in parts)), True
        return t, False
    return t, False


def _materialize(tmpl, slots: list) -> Term:
    tt = type(tmpl)
    if tt is _Slot:
        v = slots[tmpl.i]
        if v is None:
            v = Var()
            slots[tmpl.i] = v
        return v
    if tt is _CT:
        c = Compound.__new__(Compound)
        c.functor = tmpl.functor
        ta = tmpl.args
        n = len(ta)
        if n == 1:
            c.args = (_materialize(ta[0], slots),)
        elif n == 2:
            c.args = (_materialize(ta[0], slots), _materialize(ta[1], slots))
        elif n == 3:
            c.args = (
                _materialize(ta[0], slots),
                _materialize(ta[1], slots),
                _materialize(ta[2], slots),
            )
        else:
            c.args = tuple([_materialize(a, slots) for a in ta])
        return c
    return tmpl


def _first_arg_key(t: Term):
    """Index key of a first argument; None means 'matches anything'."""
    tt = type(t)
    if tt is Var:
        return None
    if tt is Int:
        return ("i", t.value)
    if tt is Float:
        return ("f", t.value)
    if tt is Atom:
        return t
    return (t.functor, len(t.args))


class Clause:
    __slots__ = ("head", "body", "head_args_t", "body_t", "nslots", "ix", "push")

    def __init__(self, head: Term, body: tuple[Term, ...]):
        self.head = head
        self.body = body
        slot_map: dict = {}
        if type(head) is Compound:
            self.head_args_t = tuple(
                _compile_template(a, slot_map)[0] for a in head.args
            )
        else:
            self.head_args_t = None
        self.body_t = tuple(_compile_template(b, slot_map)[0] for b in body)
        self.nslots = len(slot_map)
        self.ix = _first_arg_key(head.args[0]) if type(head) is Compound else None
        self.push = _compile_body_pusher(self.head_args_t, self.body_t) if body else None


def _head_slot_indices(tmpl, out: set) -> None:
    if type(tmpl) is _Slot:
        out.add(tmpl.i)
    elif type(tmpl) is _CT:
        for a in tmpl.args:
            _head_slot_indices(a, out)


def _compile_body_pusher(head_args_t, body_t):
    """Generate a closure building this clause's body goal chain directly.

    The generated function takes (slots, module, rest) and returns the new
    goal stack; slots filled by head matching are read, body-only variables
    are created fresh. All structure is baked into constants, so pushing a
    body costs no per-node interpretation.
    """
    head_slots: set = set()
    for t in head_args_t or ():
        _head_slot_indices(t, head_slots)
    consts: dict = {}
    prelude: list[str] = []
    lines: list[str] = []
    seen_slots: set = set()
    counter = [0]

    def const_ref(obj) -> str:
        key = id(obj)
        name = consts.get(key)
        if name is None:
            name = f"K{len(consts)}"
            consts[key] = name
            const_objs[name] = obj
        return name

    const_objs: dict = {}

    def slot_ref(i: int) -> str:
        name = f"s{i}"
        if i not in seen_slots:
            seen_slots.add(i)
            if i in head_slots:
                prelude.append(f"{name} = slots[{i}]")
            else:
                prelude.append(f"{name} = _V()")
        return name

    def emit(tmpl) -> str:
        t = type(tmpl)
        if t is _Slot:
            return slot_ref(tmpl.i)
        if t is _CT:
            args = [emit(a) for a in tmpl.args]
            v = f"t{counter[0]}"
            counter[0] += 1
            joined = ", ".join(args) + ("," if len(args) == 1 else "")
            lines.append(f"{v} = _mk(_C)")
            lines.append(f"{v}.functor = {const_ref(tmpl.functor)}")
            lines.append(f"{v}.args = ({joined})")
            return v
        return const_ref(tmpl)

    goal_names = [emit(bt) for bt in body_t]
    chain = "rest"
    for g in reversed(goal_names):
        chain = f"({g}, module, {chain})"
    body_src = "\n    ".join(prelude + lines + [f"return {chain}"])
    src = f"def push(slots, module, rest):\n    {body_src}\n"
    ns = {"_V": Var, "_C": Compound, "_mk": Compound.__new__}
    ns.update(const_objs)
    exec(src, ns)  # noqa: S102 - source is built from structured templates only
    return ns["push"]


@dataclass
class Answer:
    subst: dict[Var, Term]
    truth: int
    residual: tuple[Term, ...] = ()


class PredEntry:
    """Clauses of one predicate plus a lazily built first-argument index."""

    __slots__ = ("clauses", "index")

    def __init__(self):
        self.clauses: list[Clause] = []
        self.index = None

    def candidates(self, first_arg: Term):
        idx = self.index
        if idx is None:
            clauses = self.clauses
            const_keys = {c.ix for c in clauses if c.ix is not None}
            by_key = {
                k: tuple(c for c in clauses if c.ix is None or c.ix == k)
                for k in const_keys
            }
            var_only = tuple(c for c in clauses if c.ix is None)
            idx = (by_key, var_only)
            self.index = idx
        sub = idx[0].get(_first_arg_key(first_arg))
        return sub if sub is not None else idx[1]


class KnowledgeBase:
    """Module-partitioned clause store plus tabling directives and builtins."""

    def __init__(self, occurs_check: bool = False):
        self.modules: dict[str, dict[tuple[str, int], PredEntry]] = {}
        self.tabled: set[tuple[str, str, int]] = set()
        self.ext_builtins: dict[tuple[str, int], Callable] = {}
        self.dispatch: dict[tuple[str, int], Callable] = dict(_CORE_BUILTINS)
        self.occurs_check = occurs_check
        self._wfs_cache: dict = {}

    def add_builtin(self, name: str, arity: int, fn: Callable) -> None:
        """fn(machine, args, module) -> bool; may bind via machine.unify_det."""
        self.ext_builtins[(name, arity)] = fn

        def wrapper(m, args, module, rest, _fn=fn):
            if _fn(m, args, module):
                m.goals = rest
                return True
            return False

        self.dispatch[(name, arity)] = wrapper

    def add_clause(self, module: str, clause: Clause) -> None:
        head = clause.head
        if type(head) is Atom:
            key = (head.name, 0)
        elif type(head) is Compound:
            key = (head.functor.name, len(head.args))
        else:
            raise EngineError("clause head must be an atom or compound")
        preds = self.modules.setdefault(module, {})
        entry = preds.get(key)
        if entry is None:
            entry = preds[key] = PredEntry()
        entry.clauses.append(clause)
        entry.index = None
        self._wfs_cache.clear()

    def declare_tabled(self, module: str, name: str, arity: int) -> None:
        self.tabled.add((module, name, arity))
        # a tabled predicate exists even before any clause is added
        self.modules.setdefault(module, {}).setdefault((name, arity), PredEntry())
        self._wfs_cache.clear()

    def clauses_for(self, module: str, name: str, arity: int) -> list[Clause]:
        return self.pred_entry(module, name, arity).clauses

    def pred_entry(self, module: str, name: str, arity: int) -> PredEntry:
        preds = self.modules.get(module)
        if preds is not None:
            entry = preds.get((name, arity))
            if entry is not None:
                return entry
        raise ExistenceFault(f"unknown predicate {module}:{name}/{arity}")

    def has_pred(self, module: str, name: str, arity: int) -> bool:
        preds = self.modules.get(module)
        return preds is not None and (name, arity) in preds


def consult_text(kb: KnowledgeBase, module: str, program: str) -> None:
    """Load clauses and ':- table name/arity.' directives from program text."""
    terms = parse_program(program)
    for idx, t in enumerate(terms, start=1):
        try:
            _load_clause_term(kb, module, t)
        except (EngineError, TermSyntaxError) as e:
            raise TermSyntaxError(f"clause {idx}: {e}", 1) from None


def _load_clause_term(kb: KnowledgeBase, module: str, t: Term) -> None:
    if type(t) is Compound and t.functor is _NECK and len(t.args) == 1:
        d = t.args[0]
        if (
            type(d) is Compound
            and d.functor is _TABLE
            and len(d.args) == 1
            and type(d.args[0]) is Compound
            and d.args[0].functor is _SLASH
            and len(d.args[0].args) == 2
            and type(d.args[0].args[0]) is Atom
            and type(d.args[0].args[1]) is Int
        ):
            kb.declare_tabled(module, d.args[0].args[0].name, d.args[0].args[1].value)
            return
        raise EngineError(f"unsupported directive {write_term(t)}")
    if type(t) is Compound and t.functor is _NECK and len(t.args) == 2:
        head, body = t.args
        kb.add_clause(module, Clause(head, tuple(_flatten_conj(body))))
        return
    if type(t) is Var or type(t) is Int or type(t) is Float:
        raise EngineError("clause head must be an atom or compound")
    kb.add_clause(module, Clause(t, ()))


def _flatten_conj(t: Term) -> list[Term]:
    out: list[Term] = []
    stack = [t]
    while stack:
        node = stack.pop()
        if type(node) is Compound and node.functor is _COMMA and len(node.args) == 2:
            stack.append(node.args[1])
            stack.append(node.args[0])
        else:
            out.append(node)
    return out


# --- binding store -------------------------------------------------------

def deref(t: Term, store: dict) -> Term:
    while type(t) is Var:
        b = store.get(t)
        if b is None:
            return t
        t = b
    return t


def _occurs(v: Var, t: Term, store: dict) -> bool:
    stack = [t]
    while stack:
        node = deref(stack.pop(), store)
        if node is v:
            return True
        if type(node) is Compound:
            stack.extend(node.args)
    return False


def unify(a: Term, b: Term, store: dict, trail: list, occurs_check: bool = False) -> bool:
    """Extend store with the MGU of a and b; self-undoes on failure."""
    mark = len(trail)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = deref(x, store)
        y = deref(y, store)
        if x is y:
            continue
        tx = type(x)
        ty = type(y)
        if tx is Var:
            if occurs_check and _occurs(x, y, store):
                break
            store[x] = y
            trail.append(x)
            continue
        if ty is Var:
            if occurs_check and _occurs(y, x, store):
                break
            store[y] = x
            trail.append(y)
            continue
        if tx is not ty:
            break
        if tx is Int or tx is Float:
            if x.value == y.value:
                continue
            break
        if tx is Compound:
            if x.functor is not y.functor or len(x.args) != len(y.args):
                break
            stack.extend(zip(x.args, y.args))
            continue
        break  # distinct atoms
    else:
        return True
    while len(trail) > mark:
        del store[trail.pop()]
    return False


def _match_args(hargs, gargs, store: dict, trail: list, slots: list, occ: bool) -> bool:
    """One-sided head-argument match: fills slots, binds goal-side variables."""
    stack = list(zip(hargs, gargs))
    while stack:
        h, g = stack.pop()
        th = type(h)
        if th is _Slot:
            cur = slots[h.i]
            if cur is None:
                slots[h.i] = g
            elif not unify(cur, g, store, trail, occ):
                return False
            continue
        if th is _CT:
            g = deref(g, store)
            tg = type(g)
            if tg is Var:
                t = _materialize(h, slots)
                if occ and _occurs(g, t, store):
                    return False
                store[g] = t
                trail.append(g)
                continue
            if tg is not Compound or g.functor is not h.functor or len(g.args) != len(h.args):
                return False
            stack.extend(zip(h.args, g.args))
            continue
        # ground template side
        g = deref(g, store)
        if h is g:
            continue
        tg = type(g)
        if tg is Var:
            store[g] = h
            trail.append(g)
            continue
        if th is not tg:
            return False
        if th is Int or th is Float:
            if h.value == g.value:
                continue
            return False
        if th is Compound:
            if not unify(h, g, store, trail, occ):
                return False
            continue
        return False  # distinct atoms
    return True


def undo_to(store: dict, trail: list, mark: int) -> None:
    while len(trail) > mark:
        del store[trail.pop()]


def rename_term(t: Term, mapping: dict) -> Term:
    tt = type(t)
    if tt is Var:
        v = mapping.get(t)
        if v is None:
            v = Var(name=t.name)
            mapping[t] = v
        return v
    if tt is Compound:
        args = tuple(rename_term(a, mapping) for a in t.args)
        c = Compound.__new__(Compound)
        c.functor = t.functor
        c.args = args
        return c
    return t


def resolve(t: Term, store: dict) -> Term:
    """Full dereferencing copy; unbound variables are kept as-is."""
    t = deref(t, store)
    if type(t) is not Compound:
        return t
    out: list[Term] = []
    stack: list = [t]
    while stack:
        node = stack.pop()
        if type(node) is tuple:  # (original compound, arity)
            orig, n = node
            args = tuple(out[len(out) - n :])
            del out[len(out) - n :]
            if all(a is b for a, b in zip(args, orig.args)):
                out.append(orig)
            else:
                c = Compound.__new__(Compound)
                c.functor = orig.functor
                c.args = args
                out.append(c)
        else:
            node = deref(node, store)
            if type(node) is Compound:
                stack.append((node, len(node.args)))
                stack.extend(reversed(node.args))
            else:
                out.append(node)
    return out[0]


def freshen(t: Term) -> Term:
    """Copy with fresh variables replacing every unbound variable."""
    return rename_term(t, {}) if term_vars(t) else t


# --- arithmetic -----------------------------------------------------------

def _check_int(v: int) -> int:
    if not (INT_MIN <= v <= INT_MAX):
        raise EvaluationFault(f"integer overflow: {v}")
    return v


def eval_arith(t: Term, store: dict):
    t = deref(t, store)
    tt = type(t)
    if tt is Int or tt is Float:
        return t.value
    if tt is Var:
        raise EvaluationFault("unbound variable in arithmetic expression")
    if tt is Atom:
        if t.name == "pi":
            return math.pi
        raise EvaluationFault(f"atom {t.name!r} is not evaluable")
    name = t.functor.name
    args = t.args
    n = len(args)
    try:
        if n == 2:
            a = eval_arith(args[0], store)
            b = eval_arith(args[1], store)
            if name == "+":
                r = a + b
            elif name == "-":
                r = a - b
            elif name == "*":
                r = a * b
            elif name == "/":
                r = a / b
            elif name == "mod":
                if not (isinstance(a, int) and isinstance(b, int)):
                    raise EvaluationFault("mod requires integers")
                r = a % b
            elif name == "pow":
                r = math.pow(a, b)
            else:
                raise EvaluationFault(f"unknown arithmetic operator {name}/{n}")
            return _check_int(r) if type(r) is int else r
        if n == 1:
            a = eval_arith(args[0], store)
            if name == "-":
                return _check_int(-a) if type(a) is int else -a
            if name == "sin":
                return math.sin(a)
            if name == "cos":
                return math.cos(a)
            if name == "asin":
                return math.asin(a)
            if name == "sqrt":
                return math.sqrt(a)
            raise EvaluationFault(f"unknown arithmetic operator {name}/{n}")
    except ZeroDivisionError:
        raise EvaluationFault("division by zero") from None
    except (ValueError, OverflowError) as e:
        raise EvaluationFault(str(e)) from None
    raise EvaluationFault(f"unknown arithmetic operator {name}/{n}")


def _num_term(v) -> Term:
    return Int(v) if type(v) is int else Float(v)


# --- the resolution machine ------------------------------------------------

class _ClauseCP:
    __slots__ = ("goal", "module", "clauses", "idx", "rest", "trail_len", "undef_len")

    def __init__(self, goal, module, clauses, idx, rest, trail_len, undef_len):
        self.goal = goal
        self.module = module
        self.clauses = clauses
        self.idx = idx
        self.rest = rest
        self.trail_len = trail_len
        self.undef_len = undef_len


class _AnswerCP:
    __slots__ = ("goal", "answers", "idx", "rest", "trail_len", "undef_len")

    def __init__(self, goal, answers, idx, rest, trail_len, undef_len):
        self.goal = goal
        self.answers = answers
        self.idx = idx
        self.rest = rest
        self.trail_len = trail_len
        self.undef_len = undef_len


class Machine:
    """One top-level resolution: leftmost selection, source clause order.

    Goals are (term, module, rest) triples forming a linked stack.
    """

    def __init__(self, kb: KnowledgeBase, module: str, goal: Term, budget: Budget,
                 store: dict | None = None, trail: list | None = None):
        self.kb = kb
        self.budget = budget
        self.store = store if store is not None else {}
        self.trail = trail if trail is not None else []
        self.cps: list = []
        self.undef: list[tuple[Term, ...]] = []
        self.goal = goal
        self.module = module
        self.goals = (goal, module, None)
        self.root_vars = term_vars(goal)

    # public: used by extension builtins
    def unify_det(self, a: Term, b: Term) -> bool:
        return unify(a, b, self.store, self.trail, self.kb.occurs_check)

    def resolve(self, t: Term) -> Term:
        return resolve(t, self.store)

    def answers(self) -> Iterator[Answer]:
        while True:
            if not self._run():
                return
            yield Answer(
                {v: resolve(v, self.store) for v in self.root_vars},
                TRUTH_UNDEFINED if self.undef else TRUTH_TRUE,
                self._residual(),
            )
            if not self._backtrack():
                return

    def first_answer(self) -> Answer | None:
        return next(self.answers(), None)

    def _residual(self) -> tuple[Term, ...]:
        if not self.undef:
            return ()
        seen: set[str] = set()
        out: list[Term] = []
        for group in self.undef:
            for lit in group:
                key = write_term(lit)
                if key not in seen:
                    seen.add(key)
                    out.append(lit)
        return tuple(out)

    def _run(self) -> bool:
        kb = self.kb
        store = self.store
        dispatch = kb.dispatch
        tabled = kb.tabled
        budget = self.budget
        rem = budget.remaining
        try:
            while True:
                goals = self.goals
                if goals is None:
                    return True
                rem -= 1
                if rem < 0:
                    raise BudgetExceeded("evaluation budget exhausted")
                g, module, rest = goals
                while type(g) is Var:
                    b = store.get(g)
                    if b is None:
                        raise InstantiationFault("unbound goal")
                    g = b
                tg = type(g)
                if tg is Compound:
                    name = g.functor.name
                    args = g.args
                    arity = len(args)
                elif tg is Atom:
                    name, args, arity = g.name, (), 0
                else:
                    raise EngineError(f"goal is not callable: {write_term(g)}")

                handler = dispatch.get((name, arity))
                if handler is not None:
                    budget.remaining = rem
                    ok = handler(self, args, module, rest)
                    rem = budget.remaining
                    if ok:
                        continue
                elif tabled and (module, name, arity) in tabled:
                    budget.remaining = rem
                    answers = wfs_answers(kb, module, resolve(g, store), budget)
                    rem = budget.remaining
                    if self._try_answers(g, answers, 0, rest):
                        continue
                else:
                    entry = kb.pred_entry(module, name, arity)
                    clauses = entry.clauses
                    if arity and len(clauses) > 1:
                        a0 = deref(args[0], store)
                        if type(a0) is not Var:
                            clauses = entry.candidates(a0)
                    if self._try_clauses(g, module, clauses, 0, rest):
                        continue
                if not self._backtrack():
                    return False
        finally:
            budget.remaining = rem

    def _try_clauses(self, goal, module, clauses, start, rest) -> bool:
        store, trail = self.store, self.trail
        occ = self.kb.occurs_check
        i = start
        n = len(clauses)
        while i < n:
            c = clauses[i]
            mark = len(trail)
            slots = [None] * c.nslots if c.nslots else _NO_SLOTS
            hargs = c.head_args_t
            if hargs is None or _match_args(hargs, goal.args, store, trail, slots, occ):
                if i + 1 < n:
                    self.cps.append(
                        _ClauseCP(goal, module, clauses, i + 1, rest, mark, len(self.undef))
                    )
                self.goals = c.push(slots, module, rest) if c.push is not None else rest
                return True
            undo_to(store, trail, mark)
            i += 1
        return False

    def _try_answers(self, goal, answers, start, rest) -> bool:
        store, trail = self.store, self.trail
        i = start
        n = len(answers)
        while i < n:
            atom, truth, residual = answers[i]
            mark = len(trail)
            if unify(goal, atom, store, trail):
                if i + 1 < n:
                    self.cps.append(
                        _AnswerCP(goal, answers, i + 1, rest, mark, len(self.undef))
                    )
                if truth == TRUTH_UNDEFINED:
                    self.undef.append(residual)
                self.goals = rest
                return True
            i += 1
        return False

    def _backtrack(self) -> bool:
        while self.cps:
            cp = self.cps.pop()
            undo_to(self.store, self.trail, cp.trail_len)
            del self.undef[cp.undef_len :]
            if type(cp) is _ClauseCP:
                if self._try_clauses(cp.goal, cp.module, cp.clauses, cp.idx, cp.rest):
                    return True
            else:
                if self._try_answers(cp.goal, cp.answers, cp.idx, cp.rest):
                    return True
        return False

    # nested enumeration for findall/3
    def _collect_all(self, goal: Term, module: str, template: Term) -> list[Term]:
        mark = len(self.trail)
        sub = Machine(self.kb, module, goal, self.budget, self.store, self.trail)
        out = [freshen(resolve(template, self.store)) for _ in sub.answers()]
        undo_to(self.store, self.trail, mark)
        return out


# core builtin handlers: return True when the machine should continue with
# updated goals, False to fail into backtracking.

def _bi_true(m: Machine, args, module, rest) -> bool:
    m.goals = rest
    return True


def _bi_fail(m: Machine, args, module, rest) -> bool:
    return False


def _bi_comma(m: Machine, args, module, rest) -> bool:
    m.goals = (args[0], module, (args[1], module, rest))
    return True


def _bi_module_qualify(m: Machine, args, module, rest) -> bool:
    mod = deref(args[0], m.store)
    if type(mod) is not Atom:
        raise InstantiationFault("module qualifier must be an atom")
    m.goals = (args[1], mod.name, rest)
    return True


def _bi_unify(m: Machine, args, module, rest) -> bool:
    if unify(args[0], args[1], m.store, m.trail, m.kb.occurs_check):
        m.goals = rest
        return True
    return False


def _bi_is(m: Machine, args, module, rest) -> bool:
    store = m.store
    v = eval_arith(args[1], store)
    if type(v) is int:
        t = Int.__new__(Int)
        t.value = v
    else:
        t = Float(v)
    out = deref(args[0], store)
    to = type(out)
    if to is Var:
        store[out] = t
        m.trail.append(out)
        m.goals = rest
        return True
    if to is type(t) and out.value == t.value:
        m.goals = rest
        return True
    return False


def _cmp_values(m: Machine, args):
    store = m.store
    a = deref(args[0], store)
    av = a.value if type(a) is Int or type(a) is Float else eval_arith(a, store)
    b = deref(args[1], store)
    bv = b.value if type(b) is Int or type(b) is Float else eval_arith(b, store)
    return av, bv


def _bi_lt(m: Machine, args, module, rest) -> bool:
    av, bv = _cmp_values(m, args)
    if av < bv:
        m.goals = rest
        return True
    return False


def _bi_gt(m: Machine, args, module, rest) -> bool:
    av, bv = _cmp_values(m, args)
    if av > bv:
        m.goals = rest
        return True
    return False


def _bi_le(m: Machine, args, module, rest) -> bool:
    av, bv = _cmp_values(m, args)
    if av <= bv:
        m.goals = rest
        return True
    return False


def _bi_ge(m: Machine, args, module, rest) -> bool:
    av, bv = _cmp_values(m, args)
    if av >= bv:
        m.goals = rest
        return True
    return False


def _bi_findall(m: Machine, args, module, rest) -> bool:
    template, goal, out = args
    g = deref(goal, m.store)
    if type(g) is Var:
        raise InstantiationFault("unbound findall goal")
    collected = m._collect_all(g, module, template)
    if unify(out, mklist(collected), m.store, m.trail):
        m.goals = rest
        return True
    return False


def _bi_tnot(m: Machine, args, module, rest) -> bool:
    g = resolve(args[0], m.store)
    tg = type(g)
    if tg is Var:
        raise FlounderingFault("tnot argument is unbound")
    if tg is Atom:
        key = (module, g.name, 0)
    elif tg is Compound:
        key = (module, g.functor.name, len(g.args))
    else:
        raise EngineError("tnot argument is not callable")
    if key not in m.kb.tabled:
        raise TabledNegationFault(
            f"tnot applied to non-tabled predicate {key[0]}:{key[1]}/{key[2]}"
        )
    if not is_ground(g):
        raise FlounderingFault(f"tnot argument is not ground: {write_term(g)}")
    status = _wfs_status(m.kb, module, g, m.budget)
    if status == TRUTH_TRUE:
        return False
    if status == TRUTH_UNDEFINED:
        m.undef.append((Compound(_TNOT, (g,)),))
    m.goals = rest
    return True


_CORE_BUILTINS = {
    ("true", 0): _bi_true,
    ("fail", 0): _bi_fail,
    ("false", 0): _bi_fail,
    (",", 2): _bi_comma,
    (":", 2): _bi_module_qualify,
    ("=", 2): _bi_unify,
    ("is", 2): _bi_is,
    ("<", 2): _bi_lt,
    (">", 2): _bi_gt,
    ("=<", 2): _bi_le,
    (">=", 2): _bi_ge,
    ("findall", 3): _bi_findall,
    ("tnot", 1): _bi_tnot,
}


# --- public evaluation API --------------------------------------------------

def solve(kb: KnowledgeBase, module: str, goal: Term, budget=None) -> Iterator[Answer]:
    """Lazy stream of answers for goal, leftmost selection, clause order."""
    return Machine(kb, module, goal, _as_budget(budget)).answers()


def findall_terms(kb: KnowledgeBase, module: str, template: Term, goal: Term,
                  budget=None) -> Term:
    """Proper list of template instances, one per answer, in answer order."""
    m = Machine(kb, module, goal, _as_budget(budget))
    return mklist([freshen(resolve(template, m.store)) for _ in m.answers()])


# --- well-founded evaluation ------------------------------------------------

@dataclass
class WfsResult:
    answers: list[Answer]
    residual_program: list[Term] = field(default_factory=list)


def wfs_evaluate(kb: KnowledgeBase, module: str, goal: Term, budget=None) -> WfsResult:
    """Well-founded model of the relevant ground subprogram, seen from goal."""
    budget = _as_budget(budget)
    triples = wfs_answers(kb, module, goal, budget)
    answers = []
    store: dict = {}
    trail: list = []
    goal_vars = term_vars(goal)
    for atom, truth, residual in triples:
        mark = len(trail)
        if unify(goal, atom, store, trail):
            answers.append(
                Answer({v: resolve(v, store) for v in goal_vars}, truth, residual)
            )
        undo_to(store, trail, mark)
    residual_program = [
        Compound(_NECK, (atom, _conj(residual)))
        for atom, truth, residual in triples
        if truth == TRUTH_UNDEFINED
    ]
    return WfsResult(answers, residual_program)


def _conj(literals: tuple[Term, ...]) -> Term:
    if not literals:
        return Atom("true")
    out = literals[-1]
    for lit in reversed(literals[:-1]):
        out = Compound(_COMMA, (lit, out))
    return out


def _canon_key(module: str, t: Term) -> str:
    mapping: dict = {}
    for i, v in enumerate(term_vars(t)):
        mapping[v] = Var(name=f"C{i}")
    return module + "|" + write_term(rename_term(t, mapping))


def wfs_answers(kb: KnowledgeBase, module: str, pattern: Term, budget: Budget):
    """Memoized list of (ground atom, truth, residual) matching pattern,
    sorted canonically."""
    key = _canon_key(module, pattern)
    cached = kb._wfs_cache.get(key)
    if cached is not None:
        return cached
    grounding = _ground_relevant(kb, module, pattern, budget)
    true_set, poss_set = _alternating_fixpoint(grounding, budget)
    pname, parity = _pred_key(pattern)
    out = []
    store: dict = {}
    trail: list = []
    for idx in grounding.atoms_of.get((module, pname, parity), ()):
        if idx not in poss_set:
            continue
        atom = grounding.atoms[idx][1]
        mark = len(trail)
        matches = unify(rename_term(pattern, {}), atom, store, trail)
        undo_to(store, trail, mark)
        if not matches:
            continue
        if idx in true_set:
            out.append((atom, TRUTH_TRUE, ()))
        else:
            out.append(
                (atom, TRUTH_UNDEFINED, _residual_for(grounding, idx, true_set, poss_set))
            )
    out.sort(key=lambda triple: ordering_key(triple[0]))
    kb._wfs_cache[key] = out
    return out


def _wfs_status(kb: KnowledgeBase, module: str, goal: Term, budget: Budget) -> int:
    for atom, truth, _ in wfs_answers(kb, module, goal, budget):
        if atom == goal:
            return truth
    return TRUTH_FALSE


def _pred_key(t: Term) -> tuple[str, int]:
    if type(t) is Atom:
        return (t.name, 0)
    if type(t) is Compound:
        return (t.functor.name, len(t.args))
    raise EngineError(f"not a callable pattern: {write_term(t)}")


class _Grounding:
    def __init__(self):
        self.atoms: list[tuple[str, Term]] = []  # (module, ground atom)
        self.atom_index: dict[str, int] = {}
        self.atoms_of: dict[tuple[str, str, int], list[int]] = {}
        self.rules: list[tuple[int, tuple, tuple, tuple]] = []
        # rule = (head_idx, pos_idxs, neg_idxs, body literal terms in order)
        self.rule_keys: set[str] = set()
        self.rules_by_head: dict[int, list[int]] = {}

    def intern(self, module: str, atom: Term) -> int:
        key = module + "|" + write_term(atom)
        idx = self.atom_index.get(key)
        if idx is None:
            idx = len(self.atoms)
            self.atoms.append((module, atom))
            self.atom_index[key] = idx
            self.atoms_of.setdefault((module,) + _pred_key(atom), []).append(idx)
        return idx

    def add_rule(self, head_idx: int, pos: tuple, neg: tuple, body: tuple) -> bool:
        key = f"{head_idx}<-{sorted(pos)}/{sorted(neg)}|{[write_term(b) for b in body]}"
        if key in self.rule_keys:
            return False
        self.rule_keys.add(key)
        self.rules_by_head.setdefault(head_idx, []).append(len(self.rules))
        self.rules.append((head_idx, pos, neg, body))
        return True


def _ground_relevant(kb: KnowledgeBase, module: str, pattern: Term, budget: Budget) -> _Grounding:
    """Instantiate, by need from the call, the ground rules relevant to pattern."""
    g = _Grounding()
    candidates: dict[tuple[str, str, int], list[int]] = {}
    candidate_set: set[int] = set()
    patterns: list[tuple[str, Term]] = [(module, pattern)]
    seen_patterns = {_canon_key(module, pattern)}
    progress = [False]

    store: dict = {}
    trail: list = []

    def note_pattern(mod: str, t: Term) -> None:
        key = _canon_key(mod, t)
        if key not in seen_patterns:
            seen_patterns.add(key)
            patterns.append((mod, t))
            progress[0] = True

    def add_candidate(idx: int) -> bool:
        if idx in candidate_set:
            return False
        candidate_set.add(idx)
        mod, atom = g.atoms[idx]
        candidates.setdefault((mod,) + _pred_key(atom), []).append(idx)
        return True

    while True:
        progress[0] = False
        for mod, pat in list(patterns):
            name, arity = _pred_key(pat)
            clauses = kb.clauses_for(mod, name, arity)
            for clause in clauses:
                budget.spend()
                mapping: dict = {}
                head = rename_term(clause.head, mapping)
                body = [rename_term(b, mapping) for b in clause.body]
                mark = len(trail)
                if not unify(head, rename_term(pat, {}), store, trail):
                    continue
                if _expand_body(
                    kb, g, mod, head, body, 0, [], store, trail, budget,
                    note_pattern, add_candidate, candidates,
                ):
                    progress[0] = True
                undo_to(store, trail, mark)
        if not progress[0]:
            return g


def _expand_body(kb, g, module, head, body, i, lits, store, trail, budget,
                 note_pattern, add_candidate, candidates) -> bool:
    """DFS over instantiations of body[i:]; records ground rules at the leaves.

    lits collects (sign, module, atom_term) for user literals in body order.
    Returns True when anything new was added to the grounding.
    """
    changed = False
    if i == len(body):
        h = resolve(head, store)
        if not is_ground(h):
            raise FlounderingFault(
                f"tabled evaluation produced a non-ground answer: {write_term(h)}"
            )
        head_idx = g.intern(module, h)
        pos = tuple(g.intern(m, a) for s, m, a in lits if s)
        neg = tuple(g.intern(m, a) for s, m, a in lits if not s)
        body_terms = tuple(a if s else Compound(_TNOT, (a,)) for s, m, a in lits)
        if g.add_rule(head_idx, pos, neg, body_terms):
            changed = True
        if add_candidate(head_idx):
            changed = True
        return changed

    lit = deref(body[i], store)
    tl = type(lit)
    if tl is Var:
        raise InstantiationFault("unbound goal in tabled clause body")
    mod = module
    if tl is Compound and lit.functor is _COLON and len(lit.args) == 2:
        m = deref(lit.args[0], store)
        if type(m) is not Atom:
            raise InstantiationFault("module qualifier must be an atom")
        mod = m.name
        lit = deref(lit.args[1], store)
        tl = type(lit)

    name, arity = _pred_key(lit)
    args = lit.args if tl is Compound else ()
    budget.spend()

    if (name, arity) in _CORE_BUILTINS:
        if name == "tnot" and arity == 1:
            target = resolve(args[0], store)
            tkey = _pred_key(target)
            if (mod, tkey[0], tkey[1]) not in kb.tabled:
                raise TabledNegationFault(
                    f"tnot applied to non-tabled predicate {mod}:{tkey[0]}/{tkey[1]}"
                )
            if not is_ground(target):
                raise FlounderingFault(
                    f"tnot argument is not ground: {write_term(target)}"
                )
            note_pattern(mod, target)
            lits.append((False, mod, target))
            changed |= _expand_body(kb, g, module, head, body, i + 1, lits, store,
                                    trail, budget, note_pattern, add_candidate, candidates)
            lits.pop()
            return changed
        if _eval_builtin_det(kb, name, arity, args, mod, store, trail, budget):
            return _expand_body(kb, g, module, head, body, i + 1, lits, store,
                                trail, budget, note_pattern, add_candidate, candidates)
        return changed

    if (name, arity) in kb.ext_builtins:
        raise EngineError(
            f"builtin {name}/{arity} is not supported inside tabled clauses"
        )

    # user literal: enumerate against current candidates, and register the
    # (possibly non-ground) call pattern so its clauses get grounded too
    note_pattern(mod, resolve(lit, store))
    for idx in candidates.get((mod, name, arity), ()):
        budget.spend()
        atom = g.atoms[idx][1]
        mark = len(trail)
        if unify(lit, atom, store, trail):
            lits.append((True, mod, atom))
            changed |= _expand_body(kb, g, module, head, body, i + 1, lits, store,
                                    trail, budget, note_pattern, add_candidate, candidates)
            lits.pop()
        undo_to(store, trail, mark)
    return changed


def _eval_builtin_det(kb, name, arity, args, module, store, trail, budget) -> bool:
    """Evaluate a deterministic builtin during grounding; True on success."""
    if name == "true":
        return True
    if name in ("fail", "false"):
        return False
    if name == "=":
        return unify(args[0], args[1], store, trail, kb.occurs_check)
    if name == "is":
        return unify(args[0], _num_term(eval_arith(args[1], store)), store, trail)
    if name in ("<", ">", "=<", ">="):
        a = eval_arith(args[0], store)
        b = eval_arith(args[1], store)
        return {"<": a < b, ">": a > b, "=<": a <= b, ">=": a >= b}[name]
    if name == "findall":
        m = Machine(kb, module, args[1], budget, store, trail)
        mark = len(trail)
        collected = [freshen(resolve(args[0], store)) for _ in m.answers()]
        undo_to(store, trail, mark)
        return unify(args[2], mklist(collected), store, trail)
    if name == ",":
        raise EngineError("unflattened conjunction in tabled clause body")
    raise EngineError(f"builtin {name}/{arity} is not supported inside tabled clauses")


def _alternating_fixpoint(g: _Grounding, budget: Budget) -> tuple[set[int], set[int]]:
    rules = g.rules

    def gamma(assumed: set[int]) -> set[int]:
        derived: set[int] = set()
        changed = True
        while changed:
            changed = False
            for head, pos, neg, _ in rules:
                budget.spend()
                if head in derived:
                    continue
                if all(p in derived for p in pos) and all(x not in assumed for x in neg):
                    derived.add(head)
                    changed = True
        return derived

    true_set: set[int] = set()
    poss_set = gamma(true_set)
    while True:
        new_true = gamma(poss_set)
        new_poss = gamma(new_true)
        if new_true == true_set and new_poss == poss_set:
            return true_set, poss_set
        true_set, poss_set = new_true, new_poss


def _residual_for(g: _Grounding, idx: int, true_set: set[int], poss_set: set[int]):
    """Undefined body literals of the canonically smallest surviving rule."""
    best = None
    best_key = None
    for rule_idx in g.rules_by_head.get(idx, ()):
        head, pos, neg, body = g.rules[rule_idx]
        if not all(p in poss_set for p in pos):
            continue
        if any(x in true_set for x in neg):
            continue
        key = ordering_key(mklist(body))
        if best_key is None or key < best_key:
            best_key = key
            best = (pos, neg, body)
    if best is None:
        return ()
    pos, neg, body = best
    undef_atoms = {
        write_term(g.atoms[i][1])
        for i in (*pos, *neg)
        if i in poss_set and i not in true_set
    }
    out = []
    for lit in body:
        inner = lit.args[0] if (type(lit) is Compound and lit.functor is _TNOT) else lit
        if write_term(inner) in undef_atoms:
            out.append(lit)
    return tuple(out)
