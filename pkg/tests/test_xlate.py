"""Bi-translation: conventions, errors, round trips, linearity, depth limits."""

import pytest

from termbridge.errors import (
    DanglingHandle,
    DepthLimitExceeded,
    DomainFault,
    InstantiationFault,
    TermLimitError,
)
from termbridge.hostvals import HostObject, ObjectRegistry, ObjRef, values_equal
from termbridge.reader import parse_term
from termbridge.terms import Atom, Compound, Float, Int, Var, mklist
from termbridge.xlate import (
    DEFAULT_CONFIG,
    XlateConfig,
    XlateStats,
    normalize_term,
    roundtrip_check,
    term_to_value,
    value_to_term,
)

from conftest import (
    random_host_value,
    random_translatable_term,
    value_to_fixpoint_term,
)


def test_config_functors_must_be_distinct():
    with pytest.raises(ValueError):
        XlateConfig(tuple_functor="pySet")


def test_paper_dict_term_to_value():
    t = parse_term("pyDict([''(name,'Bob'),''(langs,['English','GERMAN'])])")
    v = term_to_value(t)
    assert v == {"name": "Bob", "langs": ["English", "GERMAN"]}
    assert list(v) == ["name", "langs"]  # insertion order preserved


def test_empty_list_atom_becomes_empty_sequence():
    assert term_to_value(Atom("[]")) == []


def test_set_duplicates_collapse():
    t = parse_term("pySet([2,1,1])")
    # oracle: sorted de-duplication of the element values
    assert term_to_value(t) == set([2, 1, 1])
    assert term_to_value(t) == {1, 2}


def test_scalars_and_null():
    assert term_to_value(Int(5)) == 5
    assert term_to_value(Float(2.5)) == 2.5
    assert term_to_value(Atom("abc")) == "abc"
    assert value_to_term(None) is Atom("pyNone")
    assert term_to_value(Atom("pyNone")) is None  # deliberate non-injectivity


def test_var_raises_instantiation():
    with pytest.raises(InstantiationFault):
        term_to_value(mklist([Var()]))
    with pytest.raises(InstantiationFault):
        term_to_value(Compound("", (Int(1), Var())))
    with pytest.raises(InstantiationFault):
        term_to_value(mklist([Int(1)], Var()))  # unbound tail


def test_unknown_functor_is_domain_error():
    with pytest.raises(DomainFault) as e:
        term_to_value(Compound("weird", (Int(1),)))
    assert "weird" in str(e.value)


def test_improper_list_is_domain_error():
    with pytest.raises(DomainFault):
        term_to_value(Compound(".", (Int(1), Int(2))))


def test_bad_map_entries():
    with pytest.raises(DomainFault):
        term_to_value(Compound("pyDict", (mklist([Atom("notapair")]),)))
    unhash = Compound("pyDict", (mklist([Compound("", (mklist([Int(1)]), Int(2)))]),))
    with pytest.raises(DomainFault):
        term_to_value(unhash)


def test_duplicate_map_keys_last_wins_and_strict_mode():
    t = parse_term("pyDict([''(k,1),''(k,2)])")
    assert term_to_value(t) == {"k": 2}
    strict = XlateConfig(strict_map_keys=True)
    with pytest.raises(DomainFault):
        term_to_value(t, strict)


def test_numeric_key_identity_across_int_float():
    t = parse_term("pyDict([''(1,a),''(1.0,b)])")
    assert term_to_value(t) == {1: "b"}


def test_objref_roundtrip_and_dangling():
    reg = ObjectRegistry()
    h = reg.register(HostObject("Model"))
    t = Compound("pyObj", (Atom(h),))
    v = term_to_value(t, DEFAULT_CONFIG, reg)
    assert v == ObjRef(h)
    assert value_to_term(v, DEFAULT_CONFIG, reg) == t
    reg.release(h)
    with pytest.raises(DanglingHandle):
        term_to_value(t, DEFAULT_CONFIG, reg)


def test_host_object_registers_on_translation():
    reg = ObjectRegistry()
    obj = HostObject("Model")
    t = value_to_term(obj, DEFAULT_CONFIG, reg)
    assert t.functor.name == "pyObj"
    assert reg.lookup(t.args[0].name) is obj


def test_value_side_conventions():
    assert value_to_term({"gpa": 3.5}) == parse_term("pyDict([''(gpa,3.5)])")
    assert value_to_term([]) is Atom("[]")
    assert value_to_term({3, 1, 2}) == parse_term("pySet([1,2,3])")
    assert value_to_term((1, "a")) == parse_term("''(1,a)")
    assert value_to_term(True) == Int(1)
    assert value_to_term(False) == Int(0)


def test_zero_arity_tuple_is_domain_error():
    with pytest.raises(DomainFault):
        value_to_term(())


def test_oversize_tuple_is_limit_error():
    with pytest.raises(TermLimitError):
        value_to_term(tuple(range(70_000)))


def test_oversize_host_int_is_limit_error():
    with pytest.raises(TermLimitError):
        value_to_term(2**70)


def test_set_output_sorted_canonically():
    t = value_to_term({"b", "a", 3, 1.5})
    inner = t.args[0]
    from termbridge.terms import list_parts

    items, _ = list_parts(inner)
    assert items == [Float(1.5), Int(3), Atom("a"), Atom("b")]


def test_roundtrip_check_examples():
    assert roundtrip_check(parse_term("pyDict([])"))
    assert roundtrip_check(mklist([Int(i) for i in range(1000)]))
    assert roundtrip_check(parse_term("pySet([3,1,2])"))  # normalizes, still true


def test_roundtrip_property_terms(rng):
    for _ in range(3000):
        t = random_translatable_term(rng, 5)
        v = term_to_value(t)
        back = value_to_term(v)
        assert back == t


def test_roundtrip_property_values(rng):
    for _ in range(3000):
        v = random_host_value(rng, 4)
        t = value_to_term(v)
        assert t == value_to_fixpoint_term(v)
        back = term_to_value(t)
        assert values_equal(back, v)


def test_translation_is_linear():
    ratios = []
    for n in (100, 10_000, 1_000_000):
        t = mklist([Int(i) for i in range(n)])
        stats = XlateStats()
        term_to_value(t, DEFAULT_CONFIG, None, stats)
        ratios.append(stats.nodes / n)
    assert max(ratios) / min(ratios) < 2.0


def test_depth_limit_is_clean():
    deep = Atom("[]")
    for _ in range(10_000):
        deep = mklist([deep])
    v = term_to_value(deep)  # default limit 100000: succeeds
    assert isinstance(v, list)
    tight = XlateConfig(depth_limit=1000)
    with pytest.raises(DepthLimitExceeded):
        term_to_value(deep, tight)
    with pytest.raises(DepthLimitExceeded):
        value_to_term(v, tight)


def test_normalize_term_sorts_sets_and_dedups_maps():
    t = parse_term("pySet([2,1,2])")
    assert normalize_term(t) == parse_term("pySet([1,2])")
    t2 = parse_term("pyDict([''(k,1),''(k,2)])")
    assert normalize_term(t2) == parse_term("pyDict([''(k,2)])")
