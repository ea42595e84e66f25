"""A small benchmark run: call latency in four directions plus transfer cost.

Uses reduced iteration counts so the demo finishes in seconds; the CLI
`termbridge bench` command runs the fuller grid.
"""

from termbridge.bench import (
    bench_haversine,
    bench_list_comp,
    bench_simple_loop,
    bench_transfer,
    emit_table,
)

results = []
for direction, iters in (
    ("logic_only", 5000),
    ("host_only", 5000),
    ("logic_to_host", 5000),
    ("host_to_logic", 1000),
):
    results.append(bench_simple_loop(direction, iters))
    results.append(bench_haversine(direction, max(iters // 10, 100)))
    results.append(bench_list_comp(direction, max(iters // 10, 100)))

for shape in ("tuple", "list", "set", "map"):
    for size in (10, 1000):
        results.append(bench_transfer(shape, size, max(1, 500 // size)))

print(emit_table(results))
