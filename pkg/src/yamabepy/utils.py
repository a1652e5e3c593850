import numpy as np
from scipy.stats import qmc


def halton_fiber_points(fiber_dim: int, count: int, half_width, fill=0.8) -> np.ndarray:
    """
    Deterministic low-discrepancy points in the box [-fill*half_width, fill*half_width]
    (unscrambled Halton sequence, so the same call always returns the same points).
    ``half_width`` is a scalar or one value per coordinate.
    """
    sampler = qmc.Halton(d=fiber_dim, scramble=False)
    # first Halton point is the origin corner, skip it
    unit = sampler.random(count + 1)[1:]
    return (2.0 * unit - 1.0) * fill * half_width
