#!/usr/bin/env python3
"""Benchmark the compiled SAT kernel against the pure-Python fallback.

Three workloads: plain satisfiability on random 3-CNF, full backbone
computation, and an end-to-end abduction suite. The same source file backs
both kernels; the compiled one is the Cython build of it.

Usage: python benchmarks/bench_sat.py [--instances N] [--problems N]
"""

import argparse
import importlib.util
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import argos
from argos import _satcore

from _oracles import random_3cnf


def load_pure_twin():
    path = Path(argos.__file__).resolve().parent / "_satcore.py"
    spec = importlib.util.spec_from_file_location("argos._satcore_pure", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def bench_solve(module, instances):
    start = time.perf_counter()
    for clauses, n in instances:
        solver = module.Solver(n)
        for c in clauses:
            solver.add_clause(c)
        solver.solve([])
    return time.perf_counter() - start


def bench_backbone(module, instances):
    start = time.perf_counter()
    for clauses, n in instances:
        solver = module.Solver(n)
        for c in clauses:
            solver.add_clause(c)
        if solver.solve([]) != module.SAT:
            continue
        candidates = {v: solver.model_value(v) for v in range(1, n + 1)}
        for v in range(1, n + 1):
            if v not in candidates:
                continue
            want = candidates[v]
            if solver.solve([-v if want else v]) == module.SAT:
                for u in list(candidates):
                    if solver.model_value(u) != candidates[u]:
                        del candidates[u]
    return time.perf_counter() - start


def bench_abduction(kernel_module, n_problems):
    """Time the whole engine with the given kernel monkey-patched in."""
    import dataclasses

    from argos import sat
    from argos.backends import OracleBackend
    from argos.engine import Engine, EngineConfig
    from argos.kinship import generate_kinship

    original = sat._satcore
    sat._satcore = kernel_module
    try:
        problems, kb = generate_kinship(n_problems, 4, seed=11, validate=False)
        kb = dataclasses.replace(kb, reasoning_depth=0)
        backend = OracleBackend(kb)
        config = EngineConfig(generation_style="entity_pair", score_style="truth")
        start = time.perf_counter()
        for p in problems:
            Engine(p, config, backend).solve()
        return time.perf_counter() - start
    finally:
        sat._satcore = original


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=150,
                        help="random 3-CNF instances per workload")
    parser.add_argument("--problems", type=int, default=10,
                        help="abduction problems for the end-to-end workload")
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()

    if not _satcore.COMPILED:
        print("warning: the imported kernel is not compiled; comparing it to itself")
    pure = load_pure_twin()
    compiled = _satcore

    rng = random.Random(args.seed)
    instances = []
    for _ in range(args.instances):
        n = rng.randint(30, 60)
        m = int(4.0 * n)
        instances.append((random_3cnf(rng, n, m), n))

    rows = []
    for name, fn, payload in (
        ("solve 3-CNF", bench_solve, instances),
        ("backbone", bench_backbone, instances),
        ("abduction suite", bench_abduction, args.problems),
    ):
        t_pure = fn(pure, payload)
        t_compiled = fn(compiled, payload)
        speedup = t_pure / t_compiled if t_compiled > 0 else float("inf")
        rows.append((name, t_pure, t_compiled, speedup))

    print(f"{'workload':<18} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}")
    for name, t_pure, t_compiled, speedup in rows:
        print(f"{name:<18} {t_pure:>10.3f} {t_compiled:>13.3f} {speedup:>7.2f}x")


if __name__ == "__main__":
    main()
