"""REPL and script runner for the bridge.

Directives:
  ?- Goal.            solve a goal in the current module, print answers
                      with their truth values
  :py mod.fn(args)    call a host function and print the result term
  :consult FILE       load a logic program (module named after the file)
  :module NAME        switch the current module
  :bench NAME         run one benchmark with small defaults
  :quit               leave the REPL

Exit codes: 0 ok, 1 evaluation error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field

from . import bench as bench_mod
from .adapter import adapter_client
from .bridge import Bridge
from .errors import BridgeError, TermSyntaxError
from .reader import parse_term
from .terms import term_vars, write_term
from .xlate import XlateConfig

BENCH_NAMES = ("simple_loop", "haversine", "list_comp", "transfer")

_QUICK_ITERS = {
    "logic_only": 10_000,
    "host_only": 10_000,
    "logic_to_host": 3_000,
    "host_to_logic": 2_000,
}


@dataclass
class CliConfig:
    paths: list[str] = field(default_factory=list)
    budget: int = 10_000_000
    depth_limit: int = 100_000
    output: str = "plain"
    seed: int | None = None
    adapter: str | None = None


class Session:
    """Holds one bridge and interprets REPL/script directives."""

    def __init__(self, cfg: CliConfig, script_dir: str | None = None):
        self.cfg = cfg
        self.module = "user"
        self.script_dir = script_dir
        runtime = adapter_client(cfg.adapter) if cfg.adapter else None
        self.bridge = Bridge(
            runtime=runtime,
            config=XlateConfig(depth_limit=cfg.depth_limit),
            budget=cfg.budget,
            search_path=tuple(cfg.paths),
        )
        self.bridge.consult("user", "")

    def run_line(self, line: str) -> tuple[list[str], bool]:
        """Execute one directive; returns (output lines, ok flag)."""
        line = line.strip()
        if not line or line.startswith("%") or line.startswith("#"):
            return [], True
        try:
            if line.startswith("?-"):
                return self._goal(line[2:].strip()), True
            if line.startswith(":py "):
                return self._pycall(line[4:].strip()), True
            if line.startswith(":consult "):
                return self._consult(line[9:].strip()), True
            if line.startswith(":module "):
                self.module = line[8:].strip()
                return [f"module {self.module}"], True
            if line.startswith(":bench"):
                return self._bench(line[6:].strip()), True
            if line in (":quit", ":q"):
                raise _Quit()
            return [self._usage()], False
        except _Quit:
            raise
        except BridgeError as e:
            return [f"error: {e}"], False
        except TermSyntaxError as e:
            return [f"error: {e}"], False
        except Exception as e:  # noqa: BLE001 - the REPL survives everything
            return [f"error: {type(e).__name__}: {e}"], False

    def _goal(self, text: str) -> list[str]:
        if text.endswith("."):
            text = text[:-1]
        goal = parse_term(text)
        shown = [v for v in term_vars(goal) if v.name and not v.name.startswith("_")]
        out: list[str] = []
        for ans in self.bridge.query(self.module, goal):
            tag = "true" if ans.truth == 1 else "undefined"
            if self.cfg.output == "json":
                import json as _j

                out.append(_j.dumps({
                    "bindings": {v.name: write_term(ans.subst[v]) for v in shown},
                    "truth": ans.truth,
                }))
            elif shown:
                binds = ", ".join(f"{v.name} = {write_term(ans.subst[v])}" for v in shown)
                out.append(f"{binds}  ({tag})")
            else:
                out.append(f"yes  ({tag})")
        if not out:
            out.append("no")
        return out

    def _pycall(self, text: str) -> list[str]:
        text = _requote(text)
        if "." not in text:
            return [self._usage()]
        module, rest = text.split(".", 1)
        call = parse_term(rest)
        result = self.bridge.pyfunc(module.strip(), call)
        return [f"= {write_term(result)}"]

    def _consult(self, path: str) -> list[str]:
        import os

        candidates = [path]
        if self.script_dir:
            candidates.append(os.path.join(self.script_dir, path))
        candidates.extend(os.path.join(p, path) for p in self.cfg.paths)
        for c in candidates:
            if os.path.isfile(c):
                self.bridge.consult_file(c)
                name = os.path.splitext(os.path.basename(c))[0]
                self.module = name
                return [f"consulted {name}"]
        raise FileNotFoundError(f"no such file: {path}")

    def _bench(self, name: str) -> list[str]:
        name = name.strip()
        results = _run_benchmarks([name] if name else list(BENCH_NAMES), [10, 100])
        return bench_mod.emit_table(results).splitlines()

    @staticmethod
    def _usage() -> str:
        return (
            "directives: ?- Goal. | :py mod.fn(args) | :consult FILE | "
            ":module NAME | :bench [NAME] | :quit"
        )


class _Quit(Exception):
    pass


def _requote(text: str) -> str:
    """Double-quoted segments become quoted atoms; the reader has no string
    syntax of its own."""
    out: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                out.append(c)
                i += 1
                continue
            body = text[i + 1 : j].replace("\\", "\\\\").replace("'", "\\'")
            out.append(f"'{body}'")
            i = j + 1
        else:
            out.append(c)
            i += 1
    return "".join(out)


def repl(cfg: CliConfig | None = None, stdin=None, stdout=None) -> int:
    cfg = cfg or CliConfig()
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    try:
        session = Session(cfg)
    except Exception as e:  # noqa: BLE001
        print(f"error: {e}", file=stdout)
        return 2
    print("termbridge (:quit to leave)", file=stdout)
    for line in stdin:
        try:
            out, _ok = session.run_line(line)
        except _Quit:
            break
        for ln in out:
            print(ln, file=stdout)
    return 0


def run_script(path: str, cfg: CliConfig | None = None, stdout=None) -> int:
    cfg = cfg or CliConfig()
    stdout = stdout if stdout is not None else sys.stdout
    import os

    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        print(f"error: {e}", file=stdout)
        return 2
    try:
        session = Session(cfg, script_dir=os.path.dirname(os.path.abspath(path)))
    except Exception as e:  # noqa: BLE001
        print(f"error: {e}", file=stdout)
        return 2
    for line in lines:
        try:
            out, ok = session.run_line(line)
        except _Quit:
            break
        for ln in out:
            print(ln, file=stdout)
        if not ok:
            return 1
    return 0


def _run_benchmarks(names: list[str], sizes: list[int]) -> list[bench_mod.BenchResult]:
    results: list[bench_mod.BenchResult] = []
    for name in names:
        if name not in BENCH_NAMES:
            raise ValueError(f"unknown benchmark {name!r}")
        if name == "transfer":
            for shape in ("tuple", "list", "set", "map"):
                for size in sizes:
                    if shape == "tuple" and size > bench_mod.TUPLE_SIZE_CAP:
                        continue
                    iters = max(1, 1000 // size)
                    results.append(bench_mod.bench_transfer(shape, size, iters))
            continue
        fn = getattr(bench_mod, f"bench_{name}")
        for direction in bench_mod.DIRECTIONS:
            results.append(fn(direction, _QUICK_ITERS[direction]))
    return results


def bench_command(names: list[str], sizes: list[int], out_path: str | None,
                  stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    try:
        results = _run_benchmarks(names or list(BENCH_NAMES), sizes or [10, 100, 1000])
    except ValueError as e:
        print(f"error: {e}", file=stdout)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"error: {e}", file=stdout)
        return 1
    table = bench_mod.emit_table(results)
    print(table, file=stdout, end="")
    if out_path:
        csv_part = table.split("\n\n", 1)[1] if "\n\n" in table else table
        try:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(csv_part)
        except OSError as e:
            print(f"error: {e}", file=stdout)
            return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="termbridge", description=__doc__)
    parser.add_argument("--paths", nargs="*", default=[],
                        help="search paths for programs and host module files")
    parser.add_argument("--budget", type=int, default=10_000_000)
    parser.add_argument("--depth-limit", type=int, default=100_000)
    parser.add_argument("--output", choices=("plain", "terms", "json"), default="plain")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--adapter", default=None,
                        help="host runtime endpoint, e.g. stdio:python -m hostserver")
    sub = parser.add_subparsers(dest="command")
    runp = sub.add_parser("run", help="execute a directive script")
    runp.add_argument("script")
    benchp = sub.add_parser("bench", help="run benchmarks, print table + CSV")
    benchp.add_argument("names", nargs="*", default=[])
    benchp.add_argument("--sizes", type=int, nargs="*", default=[])
    benchp.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    cfg = CliConfig(
        paths=args.paths,
        budget=args.budget,
        depth_limit=args.depth_limit,
        output=args.output,
        seed=args.seed,
        adapter=args.adapter,
    )
    if cfg.seed is not None:
        random.seed(cfg.seed)
    import os

    for p in cfg.paths:
        if not os.path.isdir(p):
            print(f"warning: search path {p!r} does not exist", file=sys.stderr)

    if args.command == "run":
        return run_script(args.script, cfg)
    if args.command == "bench":
        return bench_command(args.names, args.sizes, args.out)
    return repl(cfg)


if __name__ == "__main__":
    sys.exit(main())
