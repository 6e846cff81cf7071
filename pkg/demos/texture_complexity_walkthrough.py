"""How texture complexity separates flat, busy and in-between paintings.

Scores a family of procedural paintings whose detail level sweeps from 0 to
1 and marks the ones that land in the default selection band used by
`texrand tcps select`.

    python3 demos/texture_complexity_walkthrough.py
"""

import numpy as np

from texrand.rng import RngStream
from texrand.tcps import SelectionConfig, synthetic_painting, texture_complexity

cfg = SelectionConfig()
rng = RngStream(0)

print(f"band [{cfg.band_min}, {cfg.band_max}], epsilon {cfg.epsilon}")
print("detail  complexity  in band")
for detail in np.linspace(0.0, 1.0, 11):
    painting = synthetic_painting(96, 96, float(detail), rng)
    tc = texture_complexity(painting, cfg.epsilon)
    print(f"{detail:6.2f}  {tc:10.4f}  {'yes' if cfg.in_band(tc) else ''}")

# Too flat and the painting barely changes texture; too busy and the
# stylized image loses the content's structure. The band keeps the middle.
