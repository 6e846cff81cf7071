"""Global and local texture randomization on one toy image.

Writes five PNGs to an output directory: the source image, the painting,
the globally stylized image, a random-boundary mask and the locally mixed
result.

    python3 demos/randomization_walkthrough.py [out_dir]
"""

import sys
from pathlib import Path

from texrand.gtr import CodecWeights, gtr_stylize
from texrand.imaging import Image, write_image
from texrand.ltr import LtrConfig, generate_mask, mix
from texrand.rng import RngStream
from texrand.trainer.benchmark import painting_pool
from texrand.trainer.toydata import gen_toy_dataset

out = Path(sys.argv[1] if len(sys.argv) > 1 else "randomization_demo")
out.mkdir(parents=True, exist_ok=True)

x = gen_toy_dataset("source", 1, 0)[0].image
painting = painting_pool(1, size=64)[0]

# Identity codec: per-channel mean/std of the image is replaced by the painting's.
x_gtr = gtr_stylize(x, painting.to_unit(), CodecWeights.identity())

# The mask is smoothed noise thresholded so half of it is white.
mask = generate_mask(64, 64, LtrConfig(), RngStream(3))
x_ltr = mix(x, x_gtr, mask)

for name, img in [("source", x), ("painting", painting), ("gtr", x_gtr),
                  ("mask", Image(mask.bits[:, :, None] * 255.0, "byte")), ("ltr", x_ltr)]:
    write_image(out / f"{name}.png", img)
print(f"lambda {mask.lambda_used:.2f}, white fraction {mask.white_fraction:.3f}; wrote {out}/")
