"""Principal-branch Lambert W on the nonnegative reals.

Solves w * exp(w) = z for z >= 0, which is the only domain the power
scheduler needs (its argument is a square root). Initial guess log1p(z)
followed by Halley refinement; converges in a handful of iterations for
the whole domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_MAX_ITER = 50


@dataclass(frozen=True)
class LambertResult:
    w: float
    residual: float
    iterations: int


def lambert_w0(z: float) -> LambertResult:
    """Principal branch W0(z) for real z >= 0.

    Raises ValueError for z < 0 and RuntimeError if Halley iteration fails
    to converge (should not happen on this domain).
    """
    if z < 0:
        raise ValueError(f"lambert_w0 requires z >= 0, got {z}")
    if z == 0.0:
        return LambertResult(w=0.0, residual=0.0, iterations=0)

    w = math.log1p(z)
    for k in range(1, _MAX_ITER + 1):
        e = math.exp(w)
        f = w * e - z
        # Halley step: f' = e*(w+1), f'' = e*(w+2)
        denom = e * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0))
        dw = f / denom
        w -= dw
        if abs(dw) <= 2e-16 * (1.0 + abs(w)):
            break
    else:
        raise RuntimeError(f"lambert_w0 did not converge for z={z}")

    residual = abs(w * math.exp(w) - z)
    return LambertResult(w=w, residual=residual, iterations=k)
