"""Swapping the in-repo host runtime for a real out-of-process one.

The same bridge API runs against a child process speaking newline-delimited
JSON; json and math below are the remote interpreter's actual standard
library. Requires the hostserver package (see hostserver/ in this repo).
"""

import sys

from termbridge import Bridge, parse_term, write_term
from termbridge.adapter import adapter_client

runtime = adapter_client([sys.executable, "-m", "hostserver"])
print("handshake:   ", runtime.ping())

bridge = Bridge(runtime=runtime)
doc = '{"name":"Bob", "langs":["English", "GERMAN"]}'
print("remote loads:", write_term(bridge.pyfunc("json", parse_term(f"loads('{doc}')"))))
print("remote math: ", write_term(bridge.pyfunc(
    "math", parse_term("haversine(36.12, -86.67, 33.94, -118.40)"))))

# objects stay on the server; only the handle crosses the wire
counter = bridge.pyfunc("jns_demo", parse_term("make_counter"))
bridge.pydot(counter, parse_term("add(41)"))
bridge.pydot(counter, parse_term("add(1)"))
print("remote state:", write_term(bridge.pydot(counter, parse_term("value"))))
bridge.free_object(counter)
print("leaks:       ", runtime.ping()["live_handles"])

runtime.close()
