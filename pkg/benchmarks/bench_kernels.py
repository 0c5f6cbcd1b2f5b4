"""Compare the compiled and pure-Python split kernels on the same fits.

    python benchmarks/bench_kernels.py [--rows 5000] [--features 20] [--repeat 3]

Both backends grow identical trees; this reports wall time and checks that the
predicted probabilities agree bit for bit.
"""
import argparse
import time

import numpy as np

from sfe_ids.models import available, fit_model, predict_proba
from sfe_ids.synth import BlobSpec, make_blobs


def best_time(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=5000)
    ap.add_argument("--features", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    X, y = make_blobs(BlobSpec(n_rows=args.rows, n_features=args.features, separation=3.0))
    X = X.astype(np.float32)
    cases = [("dt", {}), ("rf", {"n_trees": 10}), ("et", {"n_trees": 10}),
             ("gbt", {"n_rounds": 10})]
    backends = available()
    print(f"{args.rows} rows x {args.features} features, backends: {', '.join(backends)}")
    print(f"{'model':<6}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}  identical")
    for kind, params in cases:
        times, probas = [], []
        for b in backends:
            t, model = best_time(lambda: fit_model(kind, X, y, 3, params, seed=0, backend=b),
                                 args.repeat)
            times.append(t)
            probas.append(predict_proba(model, X))
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else f"{'n/a':>10}"
        same = all(np.array_equal(probas[0], p) for p in probas[1:])
        print(f"{kind:<6}" + "".join(f"{t:>11.3f}s" for t in times) + f"{speed}  {same}")


if __name__ == "__main__":
    main()
