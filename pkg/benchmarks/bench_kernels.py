"""Compare the compiled and pure-Python kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--snr-db 10]

Times each hot kernel on the three preset games and prints one line per
kernel and backend, with the speed-up of the compiled backend.
"""

import argparse
import sys
import timeit

import numpy as np

from icnash import GameSpec, Info, ViMap, kernels, preset_channel


def cases(snr):
    rng = np.random.default_rng(0)
    for name in ("example1", "example2", "example3"):
        games = {i: GameSpec.from_snr(preset_channel(name), snr, Info(i)) for i in "AI"}
        g = games["A"]
        vm = ViMap(g, 0.1)
        P = rng.uniform(0, 1, (g.n_users, g.n_visible))
        P *= (np.asarray(g.budgets) / (P @ g.full_space.probs))[:, None]
        b = np.asarray(g.budgets)
        w = g.full_space.probs
        x = rng.normal(0, 10, g.n_visible)
        yield name, "project", lambda k, x=x, w=w, b=b: k.project(x, w, b[0])
        yield name, "t_affine", lambda k, P=P, vm=vm, w=w, b=b: k.t_affine(
            P, vm._gains, w, b, 0.1, np.empty_like(P))
        yield name, "fd_grad_affine", lambda k, P=P, vm=vm, w=w, b=b: k.fd_grad_affine(
            P, 0, vm._gains, w, b, 0.1, 1e-6, np.empty(P.shape[1]))
        gi = games["I"]
        vi = ViMap(gi, 0.1)
        Q = np.tile(gi.budgets, (gi.n_visible, 1)).T.copy()
        yield name, "t_partial", lambda k, Q=Q, vi=vi, gi=gi: k.t_partial(
            Q, vi._idx, vi._gains, gi.full_space.probs, gi.visible_weights,
            np.asarray(gi.budgets), 0.1, np.empty_like(Q))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--snr-db", type=float, default=10.0)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the python backend is available",
              file=sys.stderr)
    print(f"{'example':<9} {'kernel':<15} " + " ".join(f"{b + ' us':>12}" for b in backends)
          + ("     speed-up" if len(backends) == 2 else ""))
    for name, kernel, fn in cases(args.snr_db):
        times = []
        for b in backends:
            mod = kernels.load_backend(b)
            timer = timeit.Timer(lambda: fn(mod))
            n, _ = timer.autorange()
            times.append(min(timer.repeat(args.repeat, n)) / n * 1e6)
        line = f"{name:<9} {kernel:<15} " + " ".join(f"{t:12.1f}" for t in times)
        if len(times) == 2:
            line += f" {times[1] / times[0]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
