"""Host objects behind handles: methods, attributes, explicit release.

Objects that have no structural term image are returned to the logic side
as pyObj(Handle) references. Methods and attributes are reached through
pydot; free_object releases the handle, after which any use fails cleanly.
"""

from termbridge import Bridge, BridgeError, parse_term, write_term
from termbridge.terms import Atom

bridge = Bridge()

# a fake language-identification model with fixed outputs
model = bridge.pyfunc("jns_demo", parse_term("load_model('./lid.176.bin')"))
print("model ref:   ", write_term(model))
print("prediction:  ", write_term(bridge.pydot(model, parse_term(
    "predict('a sentence long enough to classify')"))))
print("attribute:   ", write_term(bridge.pydot(model, Atom("name"))))

# a stateful counter
counter = bridge.pyfunc("jns_demo", Atom("make_counter"))
bridge.pydot(counter, parse_term("add(5)"))
bridge.pydot(counter, parse_term("add(2)"))
print("counter:     ", write_term(bridge.pydot(counter, Atom("value"))))

# handles are explicit resources
print("live handles:", bridge.live_count())
bridge.free_object(model)
bridge.free_object(counter)
print("after free:  ", bridge.live_count())

try:
    bridge.pydot(model, parse_term("predict('again')"))
except BridgeError as e:
    print("dangling use:", e)
