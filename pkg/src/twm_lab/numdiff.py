"""Central finite differences with relative steps, used as gradient oracles."""

import numpy as np

from .errors import StepTooLarge


def central_gradient(fun, x, rel_step=1e-6, positive=False):
    """Central-difference gradient of the scalar function ``fun`` at ``x``.

    The step for component i is ``rel_step * max(|x_i|, 1)``, or
    ``rel_step * x_i`` when ``positive`` is set (prices), in which case the
    stencil must stay inside the positive orthant.
    """
    x = np.asarray(x, dtype=float)
    if rel_step <= 0:
        raise StepTooLarge(f"step must be positive, got {rel_step}")
    if positive:
        if rel_step >= 1:
            raise StepTooLarge(
                f"relative step {rel_step} moves prices out of the positive orthant"
            )
        steps = rel_step * x
    else:
        steps = rel_step * np.maximum(np.abs(x), 1.0)
    grad = np.empty_like(x)
    for i, h in enumerate(steps):
        up = x.copy()
        down = x.copy()
        up[i] += h
        down[i] -= h
        if positive and down[i] <= 0:
            raise StepTooLarge(f"price {i} leaves the positive orthant")
        grad[i] = (fun(up) - fun(down)) / (up[i] - down[i])
    return grad
