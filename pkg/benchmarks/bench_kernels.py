"""Compare the compiled kernels with the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Times ``jacobi_eigh`` on stacks of random Hermitian matrices and
``ordered_product`` on stacks of random unitaries, checks that both backends
agree, and prints one line per case. ``numpy.linalg.eigh`` is listed as a
reference point.
"""

import argparse
import timeit

import numpy as np

from qslbound import _fallback

try:
    from qslbound import _kernels
except ImportError:  # pragma: no cover - depends on build
    _kernels = None


def _hermitian_stack(rng, n, d):
    g = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    return 0.5 * (g + np.conj(np.swapaxes(g, -1, -2)))


def _unitary_stack(rng, n, d):
    q, r = np.linalg.qr(rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d)))
    ph = np.diagonal(r, axis1=1, axis2=2)
    return q * (ph / np.abs(ph))[:, None, :]


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels is not None else [])
    if _kernels is None:
        print("compiled extension not built; timing the fallback only")

    print("best-of-repeat wall time in ms")
    print(f"{'kernel':<16}{'n':>6}{'d':>3}" + "".join(f"{name:>12}" for name, _ in backends)
          + f"{'speedup':>10}{'max diff':>12}")
    for n, d in ((1, 2), (1000, 2), (1000, 4), (4096, 2), (1000, 8)):
        h = _hermitian_stack(rng, n, d)
        times = [_best(lambda m=m: m.jacobi_eigh(h), args.repeat) for _, m in backends]
        ref = np.linalg.eigh(h)[0]
        diff = max(np.abs(m.jacobi_eigh(h)[0] - ref).max() for _, m in backends)
        _row("jacobi_eigh", n, d, times, diff)
        t_np = _best(lambda: np.linalg.eigh(h), args.repeat)
        print(f"{'  numpy.eigh':<16}{n:>6}{d:>3}{t_np * 1e3:>12.3f}")

    for n, d in ((512, 2), (2048, 2), (2048, 4), (2048, 8)):
        s = _unitary_stack(rng, n, d)
        times = [_best(lambda m=m: m.ordered_product(s), args.repeat) for _, m in backends]
        outs = [m.ordered_product(s) for _, m in backends]
        diff = max(np.abs(o - outs[0]).max() for o in outs)
        _row("ordered_product", n, d, times, diff)


def _row(name, n, d, times, diff):
    speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else f"{'-':>10}"
    print(f"{name:<16}{n:>6}{d:>3}" + "".join(f"{t * 1e3:>12.3f}" for t in times) + speed + f"{diff:>12.1e}")


if __name__ == "__main__":
    main()
