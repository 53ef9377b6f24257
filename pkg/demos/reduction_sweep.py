"""Model error vs reduction order for the four identification pipelines.

Runs the Monte-Carlo benchmark with an order sweep and prints the mean
impulse-response error (Hankel pipelines) and frequency-response error
(Loewner pipelines) at each order.  Reduce the realization count to keep the
demo quick; pass a higher count for smoother curves.

Run:  python demos/reduction_sweep.py [realizations]
"""

import sys

from pencilid import PipelineConfig, building_surrogate, run_benchmark

R = int(sys.argv[1]) if len(sys.argv) > 1 else 5
ORDERS = (10, 20, 30, 40, 48)

model = building_surrogate(ts=0.015)
cfg = PipelineConfig(
    methods=("smm-hf", "ls-hf", "smm-lf", "noisy-lf"),
    realizations=R,
    ns=1000,
    sigma2=1e-7,
    order=48,
    order_sweep=ORDERS,
)

print(f"benchmarking 4 pipelines x {R} realizations, sweep orders {ORDERS}")
report = run_benchmark(model, cfg)

print(f"\n{'method':10s}" + "".join(f"  r={r:>4d}" for r in ORDERS))
for metric, methods in (("W_h", ("smm-hf", "ls-hf")),
                        ("W_H", ("smm-lf", "noisy-lf"))):
    print(f"mean {metric}:")
    for m in methods:
        sweep = report["methods"][m]["order_sweep"]
        vals = sweep["mean_" + metric]
        cells = "".join(f"  {v:6.3f}" if v is not None else "     -"
                        for v in vals)
        print(f"{m:10s}{cells}")

print(f"\nwall time: {report['wall_time_s']:.1f} s")
