"""Well-founded semantics on the classic game graph.

win(X) holds when some move from X reaches a losing position. On a finite
chain the winner is decided; on a two-cycle both positions are undefined,
and the residual program shows why.
"""

from termbridge import Bridge, parse_term, write_term, wfs_evaluate

GAME = ":- table win/1.\nwin(X) :- move(X, Y), tnot(win(Y)).\n"

# a -> b -> c: b wins (it moves to c, which has no move), a loses
bridge = Bridge()
bridge.consult("chain", GAME + "move(a,b). move(b,c).")
res = wfs_evaluate(bridge.kb, "chain", parse_term("win(W)"))
print("chain answers:")
for ans in res.answers:
    binding = next(iter(ans.subst.values()))
    print("   win(%s) truth %d" % (write_term(binding), ans.truth))

# a <-> b: neither side can be decided; both are undefined
bridge.consult("cycle", GAME + "move(a,b). move(b,a).")
res = wfs_evaluate(bridge.kb, "cycle", parse_term("win(W)"))
print("cycle answers:")
for ans in res.answers:
    binding = next(iter(ans.subst.values()))
    residual = ", ".join(write_term(t) for t in ans.residual)
    print("   win(%s) truth %d  stuck on: %s" % (write_term(binding), ans.truth, residual))

print("residual program:")
for rule in res.residual_program:
    print("   " + write_term(rule))
