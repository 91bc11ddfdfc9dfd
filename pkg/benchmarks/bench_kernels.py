"""Compare the compiled kernels with the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

from qdarwin.kernels import compiled_backend, python_backend


def discord_case(rng, d=4):
    z = rng.normal(size=(2 * d, 2 * d)) + 1j * rng.normal(size=(2 * d, 2 * d))
    rho = z @ z.conj().T
    rho /= np.trace(rho)
    blocks = np.transpose(rho.reshape(2, d, 2, d), (0, 2, 1, 3)).copy()
    tt, pp = np.meshgrid(np.arange(64) * math.pi / 63, np.arange(128) * 2 * math.pi / 128, indexing="ij")
    return blocks, tt.ravel(), pp.ravel()


def branch_case(rng, n=400, rows=2000):
    overlaps = np.cos(rng.uniform(0, 3, n)) + 0j
    masks = (rng.random((rows, n)) < 0.3).astype(np.uint8)
    return overlaps, masks, 0.5, 0.5


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    cases = {
        "qubit_conditional_entropies (64x128 grid, d=2)": ("qubit_conditional_entropies", discord_case(rng, 2)),
        "qubit_conditional_entropies (64x128 grid, d=4)": ("qubit_conditional_entropies", discord_case(rng)),
        "masked_products (2000 x 400)": ("masked_products", branch_case(rng)[:2]),
        "branch_mutual_information (2000 x 400)": ("branch_mutual_information", branch_case(rng)),
    }
    if compiled_backend is None:
        print("compiled extension not available; timing the NumPy fallback only")
    print(f"{'kernel':52s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, (name, inputs) in cases.items():
        py = best_time(lambda: getattr(python_backend, name)(*inputs), args.repeat)
        if compiled_backend is None:
            print(f"{label:52s} {py * 1e3:11.2f} {'-':>12s} {'-':>8s}")
            continue
        cy = best_time(lambda: getattr(compiled_backend, name)(*inputs), args.repeat)
        a = np.asarray(getattr(python_backend, name)(*inputs))
        b = np.asarray(getattr(compiled_backend, name)(*inputs))
        assert np.allclose(a, b, atol=1e-10), f"backends disagree on {name}"
        print(f"{label:52s} {py * 1e3:11.2f} {cy * 1e3:12.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
