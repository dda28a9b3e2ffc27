import numpy as np


def normalize_angle(a):
    """Wrap into ``(-pi, pi]``.  For output only; integration stays unwrapped."""
    a = np.asarray(a, dtype=float)
    r = np.pi - np.mod(np.pi - a, 2.0 * np.pi)
    return float(r) if r.ndim == 0 else r
