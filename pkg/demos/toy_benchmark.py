"""The texture-shift benchmark: baseline vs. randomized training.

Source images carry a per-class color shortcut and one family of textures;
target images use random colors and a disjoint texture family. A model that
learns the color shortcut fails on the target, and texture randomization
pushes it toward the cue that survives the shift.

The full run (3 ablations x 3 seeds x 5000 iterations) takes around half an
hour on one core. Pass a smaller iteration count for a quick look:

    python3 demos/toy_benchmark.py 1000
"""

import sys

from texrand.trainer.benchmark import BenchmarkConfig, run_ablation

iterations = int(sys.argv[1]) if len(sys.argv) > 1 else 5000
seeds = (0,) if iterations < 5000 else (0, 1, 2)


def progress(name, seed, target, source):
    print(f"{name:>14s} seed {seed}: target mIoU {target:.3f}, source mIoU {source:.3f}", flush=True)


result = run_ablation(BenchmarkConfig(iterations=iterations, seeds=seeds), progress)
for name in result.target_miou:
    print(f"{name:>14s} mean target mIoU {result.mean(name):.3f}")
