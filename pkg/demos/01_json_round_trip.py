"""Calling host functions from logic programs: the json round trip.

A host-side JSON string becomes a logic-side pyDict term, gets a new key
appended as a term, and goes back through json.dumps with a keyword
argument, all across the bridge.
"""

from termbridge import Bridge, parse_term, write_term
from termbridge.terms import Compound, list_parts, mklist

bridge = Bridge()

# parse a JSON string on the host side; the result dictionary arrives as a
# pyDict term whose entries are ''(Key, Value) pairs in insertion order
doc = '{"name":"Bob", "langs":["English", "GERMAN"]}'
dict_term = bridge.pyfunc("json", parse_term(f"loads('{doc}')"))
print("term image:   ", write_term(dict_term))

# append ''(gpa, 3.5) to the pair list, logic-side
pairs, _ = list_parts(dict_term.args[0])
pairs.append(parse_term("''(gpa,3.5)"))
extended = Compound("pyDict", (mklist(pairs),))
print("extended:     ", write_term(extended))

# serialize back on the host side, sorted by key
out = bridge.pyfunc("json", Compound("dumps", (extended,)), parse_term("[sort_keys=1]"))
print("sorted dump:  ", out.name)

# the same call driven from inside a logic program
bridge.consult("demo", """
roundtrip(In, Out) :-
    pyfunc(json, loads(In), Mid),
    pyfunc(json, dumps(Mid), Out).
""")
value, truth = bridge.jns_qdet("demo", "roundtrip", [doc])
print("via program:  ", value, " truth:", truth)
