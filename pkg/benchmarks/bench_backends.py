"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the actor forward+backward and critic forward+backward hot paths at
the production sizes (state dim 7, hidden 64, action dim 6).

Run: python benchmarks/bench_backends.py [--iters N]
"""

import argparse
import time

import numpy as np

from ossmentor._kernels import _pure

try:
    from ossmentor._kernels import _fast
except ImportError:
    _fast = None


def make_inputs(rng, state_dim=7, hidden=64, m=6):
    return {
        "x": rng.normal(size=state_dim),
        "w1": rng.normal(size=(hidden, state_dim)),
        "b1": rng.normal(size=hidden),
        "wa": rng.normal(size=(m, hidden)),
        "ba": rng.normal(size=m),
        "wb": rng.normal(size=(m, hidden)),
        "bb": rng.normal(size=m),
        "w2": rng.normal(size=hidden),
        "b2": 0.1,
        "da": rng.normal(size=m),
        "db": rng.normal(size=m),
    }


def bench(kernels, inp, iters):
    z, h, a, b = kernels.two_head_forward(
        inp["x"], inp["w1"], inp["b1"], inp["wa"], inp["ba"], inp["wb"], inp["bb"]
    )
    start = time.perf_counter()
    for _ in range(iters):
        z, h, a, b = kernels.two_head_forward(
            inp["x"], inp["w1"], inp["b1"], inp["wa"], inp["ba"], inp["wb"], inp["bb"]
        )
        kernels.two_head_backward(inp["x"], z, h, inp["da"], inp["db"], inp["wa"], inp["wb"])
        z1, h1, _ = kernels.one_head_forward(inp["x"], inp["w1"], inp["b1"], inp["w2"], inp["b2"])
        kernels.one_head_backward(inp["x"], z1, h1, 0.5, inp["w2"])
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--iters", type=int, default=50_000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    inp = make_inputs(rng)

    t_pure = bench(_pure, inp, args.iters)
    print(f"pure numpy : {args.iters} iters in {t_pure:.3f}s "
          f"({1e6 * t_pure / args.iters:.2f} us/iter)")
    if _fast is None:
        print("cython     : extension not built")
        return
    t_fast = bench(_fast, inp, args.iters)
    print(f"cython     : {args.iters} iters in {t_fast:.3f}s "
          f"({1e6 * t_fast / args.iters:.2f} us/iter)")
    print(f"speedup    : {t_pure / t_fast:.2f}x")


if __name__ == "__main__":
    main()
