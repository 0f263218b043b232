"""Timing harness for the edit-distance kernels: compiled core vs pure twin.

Both backends run on identical inputs; the report shows per-call means and
the speedup ratio.  The compiled extension is optional at install time, so
the script degrades to a pure-only report when it is missing.

    python benchmarks/bench_kernels.py --pairs 200 --tokens 40 --nodes 30
"""

import argparse
import time

import numpy as np

from parasphere.metrics import _editpure
from parasphere.metrics.trees import _ted_arrays
from parasphere.metrics import ParseTree

try:
    from parasphere.metrics import _editcore
except ImportError:
    _editcore = None


def random_sequences(rng, n_pairs, max_tokens, alphabet=30):
    out = []
    for _ in range(n_pairs):
        la = int(rng.integers(1, max_tokens + 1))
        lb = int(rng.integers(1, max_tokens + 1))
        out.append((rng.integers(0, alphabet, size=la),
                    rng.integers(0, alphabet, size=lb)))
    return out


def random_tree(rng, max_nodes):
    n = int(rng.integers(1, max_nodes + 1))

    def grow(budget):
        label = "ABCDEF"[rng.integers(0, 6)]
        children = []
        budget -= 1
        while budget > 0 and rng.random() < 0.65:
            child, budget = grow(budget)
            children.append(child)
        return ParseTree(label=label, children=tuple(children)), budget

    tree, _ = grow(n)
    return tree


def random_tree_arrays(rng, n_pairs, max_nodes):
    out = []
    for _ in range(n_pairs):
        intern = {}
        a = _ted_arrays(random_tree(rng, max_nodes), intern)
        b = _ted_arrays(random_tree(rng, max_nodes), intern)
        out.append((*a, *b))
    return out


def time_backend(fn, inputs, repeats):
    best = float("inf")
    checksum = 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        checksum = 0
        for args in inputs:
            checksum += fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best / len(inputs), checksum


def report(name, inputs, pure_fn, core_fn, repeats):
    pure_t, pure_sum = time_backend(pure_fn, inputs, repeats)
    print(f"{name:<12} pure    {1e6 * pure_t:9.1f} us/call")
    if core_fn is None:
        print(f"{name:<12} cython  (extension not built)")
        return
    core_t, core_sum = time_backend(core_fn, inputs, repeats)
    if core_sum != pure_sum:
        raise AssertionError(f"{name}: backend disagreement "
                             f"({core_sum} vs {pure_sum})")
    print(f"{name:<12} cython  {1e6 * core_t:9.1f} us/call   "
          f"speedup x{pure_t / core_t:.1f}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="compare the compiled and pure edit-distance kernels")
    parser.add_argument("--pairs", type=int, default=200,
                        help="input pairs per workload")
    parser.add_argument("--tokens", type=int, default=40,
                        help="max sequence length for levenshtein")
    parser.add_argument("--nodes", type=int, default=30,
                        help="max node count for tree distance")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats; best run is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    seqs = random_sequences(rng, args.pairs, args.tokens)
    trees = random_tree_arrays(rng, args.pairs, args.nodes)

    print(f"pairs={args.pairs} tokens<={args.tokens} nodes<={args.nodes} "
          f"repeats={args.repeats}")
    report("levenshtein", seqs, _editpure.levenshtein,
           _editcore.levenshtein if _editcore else None, args.repeats)
    report("ted", trees, _editpure.ted_kernel,
           _editcore.ted_kernel if _editcore else None, args.repeats)


if __name__ == "__main__":
    main()
