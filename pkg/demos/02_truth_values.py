"""Three-valued answers: true, false, undefined.

A fact can be plainly true, a call can fail, and an answer whose proof runs
through a negative self-dependency is undefined. Comprehension queries
return every answer with its truth value; delay lists name the undefined
literals an answer hangs on.
"""

from termbridge import Bridge

bridge = Bridge()
bridge.consult("jns_test", """
:- table unk/1.
test1(a,b,1).                      test1(a,c,2).
test1(a,d,5):- unk(something).     unk(X):- tnot(unk(X)).
""")

# all answers, each tagged 1 (true) or 2 (undefined)
print("plain:      ", bridge.jns_comp("jns_test", "test1", ["a"], vars=2))

# the same three answers as a set
print("set:        ", bridge.jns_comp("jns_test", "test1", ["a"], vars=2,
                                      comprehension="set"))

# bindings only
print("no truth:   ", bridge.jns_comp("jns_test", "test1", ["a"], vars=2,
                                      truth_vals="none"))

# undefined answers carry the literals their proofs are stuck on
print("delay lists:", bridge.jns_comp("jns_test", "test1", ["a"], vars=2,
                                      truth_vals="delay_lists"))

# deterministic calls: first answer plus its truth value; failure gives (None, 0)
print("qdet hit:   ", bridge.jns_qdet("jns_test", "test1", ["a", "b"]))
print("cmd miss:   ", bridge.jns_cmd("jns_test", "test1", ["a", "z", 9]))
print("undefined:  ", bridge.jns_cmd("jns_test", "unk", ["something"]))
