"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from tgcntrack import kernels, synth, tgcn
from tgcntrack.tracker import run_sequence

SIZES = (5, 20, 60)


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}" + "".join(f"{name:>12}" for name in sorted(backends)) + f"{'speedup':>10}")

    rows = []
    for n in SIZES:
        cost = rng.uniform(0, 1, (n, n))
        rows.append((f"assignment {n}x{n}", lambda impl, c=cost: impl.solve_assignment(c)))
    for n in SIZES:
        a = np.c_[rng.uniform(0, 500, (n, 2)), rng.uniform(10, 100, (n, 2))]
        b = np.c_[rng.uniform(0, 500, (n, 2)), rng.uniform(10, 100, (n, 2))]
        rows.append((f"iou {n}x{n}", lambda impl, a=a, b=b: impl.iou_matrix(a, b)))

    for label, call in rows:
        times = {name: bench(lambda: call(impl), args.repeat) for name, impl in backends.items()}
        line = f"{label:<24}" + "".join(f"{times[name] * 1e6:>10.1f}us" for name in sorted(times))
        if "cython" in times:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line)

    sc = synth.generate(synth.ScenarioSpec("crossing", 40, 0, 16, 0.5))
    model = tgcn.init_model(8, 16, 2, seed=0)
    saved = kernels._impl
    times = {}
    for name, impl in backends.items():
        kernels._impl = impl
        times[name] = bench(lambda: run_sequence(sc.detections, model), max(3, args.repeat // 4))
    kernels._impl = saved
    line = f"{'track crossing 40f':<24}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in sorted(times))
    if "cython" in times:
        line += f"{times['python'] / times['cython']:>9.1f}x"
    print(line)


if __name__ == "__main__":
    main()
