"""Engine: consulting, unification vs a naive oracle, solving, findall,
budget and error behavior."""

import random

import pytest

from termbridge.engine import (
    Budget,
    KnowledgeBase,
    Machine,
    consult_text,
    deref,
    findall_terms,
    solve,
    unify,
)
from termbridge.errors import (
    BudgetExceeded,
    EvaluationFault,
    ExistenceFault,
    FlounderingFault,
    InstantiationFault,
    TabledNegationFault,
    TermSyntaxError,
)
from termbridge.reader import parse_term
from termbridge.terms import Atom, Compound, Int, Var, iter_list, write_term

from conftest import BASICS_PROGRAM, JNS_TEST_PROGRAM, random_term, variant


def kb_with(module, text):
    kb = KnowledgeBase()
    consult_text(kb, module, text)
    return kb


def answers_list(kb, module, goal_text, budget=None):
    goal = parse_term(goal_text)
    return list(solve(kb, module, goal, budget)), goal


# --- consult ----------------------------------------------------------------

def test_consult_jns_test_registers_predicates():
    kb = kb_with("jns_test", JNS_TEST_PROGRAM)
    assert len(kb.clauses_for("jns_test", "test1", 3)) == 3
    assert ("jns_test", "unk", 1) in kb.tabled


def test_consult_empty_is_noop():
    kb = KnowledgeBase()
    consult_text(kb, "m", "")
    assert kb.modules.get("m") in (None, {})


def test_consult_reverse_works():
    kb = kb_with("basics", BASICS_PROGRAM)
    answers, goal = answers_list(kb, "basics", "reverse([1,2,3], R)")
    assert len(answers) == 1
    r = answers[0].subst[goal.args[1]]
    assert [t.value for t in iter_list(r)] == [3, 2, 1]


def test_consult_syntax_error_reports_clause_index():
    kb = KnowledgeBase()
    with pytest.raises(TermSyntaxError) as e:
        consult_text(kb, "m", "p(a). q(b :- . r(c).")
    assert "clause" in str(e.value)


def test_consult_rejects_bad_heads_and_directives():
    kb = KnowledgeBase()
    with pytest.raises(TermSyntaxError):
        consult_text(kb, "m", "1.")
    with pytest.raises(TermSyntaxError):
        consult_text(kb, "m", ":- weird(stuff).")


# --- unify -------------------------------------------------------------------

def test_unify_basic():
    store, trail = {}, []
    a = parse_term("f(X, b)")
    b = parse_term("f(a, Y)")
    assert unify(a, b, store, trail)
    assert deref(a.args[0], store) is Atom("a")
    assert deref(b.args[1], store) is Atom("b")


def test_unify_failure_leaves_store_untouched():
    store, trail = {}, []
    a = parse_term("f(X, b, X)")
    b = parse_term("g(a, b, c)")
    assert not unify(a, b, store, trail)
    assert store == {} and trail == []
    c = parse_term("f(X, b, X)")
    d = parse_term("f(a, b, c)")  # X cannot be both a and c
    assert not unify(c, d, store, trail)
    assert store == {}


def naive_unify(a, b, subst):
    """Substitution-composition oracle; returns dict or None."""

    def walk(t):
        while isinstance(t, Var) and id(t) in subst:
            t = subst[id(t)]
        return t

    a, b = walk(a), walk(b)
    if a is b:
        return subst
    if isinstance(a, Var):
        subst[id(a)] = b
        return subst
    if isinstance(b, Var):
        subst[id(b)] = a
        return subst
    if type(a) is not type(b):
        return None
    if isinstance(a, (Int,)):
        return subst if a.value == b.value else None
    if isinstance(a, Atom):
        return subst if a is b else None
    if isinstance(a, Compound):
        if a.functor is not b.functor or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            if naive_unify(x, y, subst) is None:
                return None
        return subst
    return subst if a.value == b.value else None


def test_unify_agrees_with_oracle_on_one_sided_pairs(rng):
    # ground right-hand sides cannot create cyclic bindings
    for _ in range(10_000):
        pool = []
        a = random_term(rng, 3, pool)
        b = random_term(rng, 3, None)  # ground
        store, trail = {}, []
        ours = unify(a, b, store, trail)
        oracle = naive_unify(a, b, {}) is not None
        assert ours == oracle
        if ours:
            from termbridge.engine import resolve

            assert variant(resolve(a, store), resolve(b, store))


def test_unify_with_occurs_check_agrees_on_cyclic_pairs(rng):
    kb = KnowledgeBase(occurs_check=True)
    for _ in range(2000):
        pool = []
        a = random_term(rng, 2, pool)
        b = random_term(rng, 2, pool)  # shared pool: cycles possible
        store, trail = {}, []
        ours = unify(a, b, store, trail, occurs_check=True)

        def occurs(v, t, s):
            t = t
            while isinstance(t, Var) and id(t) in s:
                t = s[id(t)]
            if t is v:
                return True
            if isinstance(t, Compound):
                return any(occurs(v, x, s) for x in t.args)
            return False

        def safe_unify(x, y, s):
            def walk(t):
                while isinstance(t, Var) and id(t) in s:
                    t = s[id(t)]
                return t

            x, y = walk(x), walk(y)
            if x is y:
                return s
            if isinstance(x, Var):
                if occurs(x, y, s):
                    return None
                s[id(x)] = y
                return s
            if isinstance(y, Var):
                if occurs(y, x, s):
                    return None
                s[id(y)] = x
                return s
            if type(x) is not type(y):
                return None
            if isinstance(x, Compound):
                if x.functor is not y.functor or len(x.args) != len(y.args):
                    return None
                for p, q in zip(x.args, y.args):
                    if safe_unify(p, q, s) is None:
                        return None
                return s
            if isinstance(x, Atom):
                return s if x is y else None
            return s if x.value == y.value else None

        assert ours == (safe_unify(a, b, {}) is not None)


# --- solve --------------------------------------------------------------------

def test_solve_jns_test_answers_and_truths():
    kb = kb_with("jns_test", JNS_TEST_PROGRAM)
    answers, goal = answers_list(kb, "jns_test", "test1(a, V1, V2)")
    v1, v2 = goal.args[1], goal.args[2]
    got = [(a.subst[v1].name if hasattr(a.subst[v1], "name") else a.subst[v1],
            a.subst[v2].value, a.truth) for a in answers]
    assert got == [("b", 1, 1), ("c", 2, 1), ("d", 5, 2)]
    assert answers[0].residual == ()
    assert [write_term(t) for t in answers[2].residual] == ["tnot(unk(something))"]


def test_solve_fail_yields_empty_stream():
    kb = kb_with("m", "p(a).")
    answers, _ = answers_list(kb, "m", "fail")
    assert answers == []


def test_solve_is_deterministic():
    kb = kb_with("m", "p(1). p(2). p(3). q(X) :- p(X), X > 1.")
    runs = []
    for _ in range(3):
        answers, goal = answers_list(kb, "m", "q(X)")
        runs.append([a.subst[goal.args[0]].value for a in answers])
    assert runs[0] == [2, 3] and all(r == runs[0] for r in runs)


def test_builtins_and_arithmetic():
    kb = kb_with("m", "double(X, Y) :- Y is X * 2.")
    answers, goal = answers_list(kb, "m", "double(21, R)")
    assert answers[0].subst[goal.args[1]] == Int(42)
    answers, _ = answers_list(kb, "m", "1 < 2")
    assert len(answers) == 1
    answers, _ = answers_list(kb, "m", "2 =< 1")
    assert answers == []
    answers, goal = answers_list(kb, "m", "X = f(1)")
    assert write_term(answers[0].subst[goal.args[0]]) == "f(1)"


def test_arithmetic_errors():
    kb = kb_with("m", "bad(Y) :- Y is foo + 1. div0(Y) :- Y is 1 / 0. unb(X, Y) :- Y is X + 1.")
    with pytest.raises(EvaluationFault):
        answers_list(kb, "m", "bad(Y)")[0]
    with pytest.raises(EvaluationFault):
        answers_list(kb, "m", "div0(Y)")
    with pytest.raises(EvaluationFault):
        answers_list(kb, "m", "unb(A, B)")


def test_integer_overflow_in_arithmetic():
    kb = kb_with("m", "big(Y) :- Y is 9223372036854775807 + 1.")
    with pytest.raises(EvaluationFault):
        answers_list(kb, "m", "big(Y)")


def test_existence_error():
    kb = kb_with("m", "p(a).")
    with pytest.raises(ExistenceFault):
        answers_list(kb, "m", "nosuch(1)")


def test_unbound_goal_is_instantiation_error():
    kb = kb_with("m", "p(a).")
    with pytest.raises(InstantiationFault):
        list(solve(kb, "m", Var()))


def test_tnot_on_non_tabled_is_permission_error():
    kb = kb_with("m", "p(a). q(X) :- tnot(p(X)).")
    with pytest.raises(TabledNegationFault):
        answers_list(kb, "m", "q(a)")


def test_tnot_non_ground_flounders():
    kb = kb_with("m", ":- table p/1. p(a). q(X) :- tnot(p(X)).")
    with pytest.raises(FlounderingFault):
        answers_list(kb, "m", "q(X)")


def test_budget_exceeded():
    kb = kb_with("m", "loop(X) :- loop(X).")
    with pytest.raises(BudgetExceeded):
        answers_list(kb, "m", "loop(1)", budget=1000)


def test_module_qualified_goals():
    kb = kb_with("lib", "val(7).")
    consult_text(kb, "main", "go(X) :- lib:val(X).")
    answers, goal = answers_list(kb, "main", "go(X)")
    assert answers[0].subst[goal.args[0]] == Int(7)


def test_findall_collects_in_order():
    kb = kb_with("m", "p(3). p(1). p(2).")
    out = findall_terms(kb, "m", parse_term("X"), parse_term("p(X)"))
    # careful: the two X above are different Var objects; build properly
    goal = parse_term("p(X)")
    out = findall_terms(kb, "m", goal.args[0], goal)
    assert [t.value for t in iter_list(out)] == [3, 1, 2]


def test_findall_empty_on_failure():
    kb = kb_with("m", "p(1).")
    goal = parse_term("fail")
    out = findall_terms(kb, "m", Var(), goal)
    assert out is Atom("[]")


def test_findall_builtin_inside_program():
    kb = kb_with("m", "p(1). p(2). all(L) :- findall(X, p(X), L).")
    answers, goal = answers_list(kb, "m", "all(L)")
    r = answers[0].subst[goal.args[0]]
    assert [t.value for t in iter_list(r)] == [1, 2]


def test_findall_truth_not_inspected():
    kb = kb_with("jns_test", JNS_TEST_PROGRAM)
    goal = parse_term("test1(a, X, Y)")
    template = Compound("-", (goal.args[1], goal.args[2]))
    out = findall_terms(kb, "jns_test", template, goal)
    items = list(iter_list(out))
    assert len(items) == 3
    assert write_term(items[2]) == "d - 5"


def test_answer_stream_is_lazy():
    kb = kb_with("m", "p(1). p(2). p(3).")
    stream = solve(kb, "m", parse_term("p(X)"))
    first = next(stream)
    assert first.truth == 1
    stream2 = solve(kb, "m", parse_term("p(X)"))
    assert len(list(stream2)) == 3


def test_machine_reentrancy_via_shared_kb():
    # two independent machines on one kb, interleaved
    kb = kb_with("m", "p(1). p(2).")
    s1 = solve(kb, "m", parse_term("p(X)"))
    s2 = solve(kb, "m", parse_term("p(Y)"))
    a1 = next(s1)
    a2 = next(s2)
    assert a1.truth == a2.truth == 1
    assert len(list(s1)) == 1 and len(list(s2)) == 1
