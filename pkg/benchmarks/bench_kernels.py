"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--epochs 2]

Reports the best-of-N time per call for each hot kernel, then wall time per
training epoch for the LSTM and TCN defaults on the 422-sample synthetic set.
"""

from __future__ import annotations

import argparse
import time
import timeit

import numpy as np

from aquanet import kernels
from aquanet.data import generate_synthetic
from aquanet.models import default_spec
from aquanet.training import TrainConfig, train


def kernel_cases(rng):
    B, H, T, C, F = 337, 128, 12, 64, 64
    z = rng.normal(size=(B, 4 * H))
    c = rng.normal(size=(B, H))
    gates, _, tanh_c, _ = kernels.backend_module("python").lstm_gates_forward(z, c)
    dh = rng.normal(size=(B, H))
    x = rng.normal(size=(B, T, C))
    w = rng.normal(size=(F, C, 3))
    b = np.zeros(F)
    dy = rng.normal(size=(B, T, F))
    s = rng.normal(size=5000)
    y = (rng.random(5000) < 0.3).astype(np.int8)
    return {
        "lstm_gates_forward": lambda m: m.lstm_gates_forward(z, c),
        "lstm_gates_backward": lambda m: m.lstm_gates_backward(gates, c, tanh_c, dh, dh),
        "causal_conv_forward": lambda m: m.causal_conv_forward(x, w, b, 2),
        "causal_conv_backward": lambda m: m.causal_conv_backward(x, w, 2, dy),
        "rank_auc": lambda m: m.rank_auc(s, y),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--epochs", type=int, default=2)
    args = ap.parse_args(argv)

    backends = kernels.available()
    if "cython" not in backends:
        print("compiled kernels are not built; only the numpy backend is available")

    cases = kernel_cases(np.random.default_rng(0))
    print(f"{'kernel':<24}" + "".join(f"{b:>14}" for b in backends) + ("     speed-up" if len(backends) > 1 else ""))
    for name, fn in cases.items():
        times = []
        for b in backends:
            mod = kernels.backend_module(b)
            times.append(min(timeit.repeat(lambda: fn(mod), number=3, repeat=args.repeat)) / 3)
        row = f"{name:<24}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[1] / times[0]:>12.1f}x"
        print(row)

    data = generate_synthetic(422, 7)
    cfg = TrainConfig(epochs=args.epochs)
    print(f"\n{'training epoch':<24}" + "".join(f"{b:>14}" for b in backends))
    before = kernels.BACKEND
    try:
        for kind in ("lstm", "tcn"):
            times = []
            for b in backends:
                kernels.use(b)
                t0 = time.perf_counter()
                train(default_spec(kind), data, None, cfg)
                times.append((time.perf_counter() - t0) / args.epochs)
            print(f"{kind:<24}" + "".join(f"{t:>13.3f}s" for t in times))
    finally:
        kernels.use(before)


if __name__ == "__main__":
    main()
