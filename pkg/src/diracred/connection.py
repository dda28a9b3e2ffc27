"""Linear discrete principal connections on a trivialized ``Q = Sigma x G``.

A linear connection is fixed by one matrix ``H`` (``dim_g x dim_sigma``),
the shape block of the discrete horizontal lift.  Equivariance forces the
base-point block to be ``(x, g) -> g + B x`` and vanishing on the diagonal
forces ``B = -H``, so every other map is derived from ``H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import DimensionError, PointQ, TrivializedSpace, as_vector


@dataclass(frozen=True, eq=False)
class DiscreteConnection:
    space: TrivializedSpace
    H: np.ndarray = field(default=None)

    def __post_init__(self):
        shape = (self.space.dim_g, self.space.dim_sigma)
        H = np.zeros(shape) if self.H is None else np.array(self.H, dtype=float)
        if H.size != shape[0] * shape[1] or (H.ndim == 2 and H.shape != shape):
            raise DimensionError(f"H must have shape {shape}, got {np.shape(self.H)}")
        H = H.reshape(shape)
        if not np.all(np.isfinite(H)):
            raise ValueError("H has non-finite entries")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @classmethod
    def flat(cls, space: TrivializedSpace) -> "DiscreteConnection":
        return cls(space, np.zeros((space.dim_g, space.dim_sigma)))

    @property
    def is_flat(self) -> bool:
        return not np.any(self.H)

    def _x(self, x) -> np.ndarray:
        return as_vector(x, self.space.dim_sigma, "shape vector")

    def _mu(self, mu) -> np.ndarray:
        return as_vector(mu, self.space.dim_g, "g* vector")

    # -- horizontal lift and its blocks ------------------------------------

    def h_d(self, q0: PointQ, x1) -> np.ndarray:
        """Fiber value of the horizontal lift of ``x1`` through ``q0``."""
        return self.h_dQ(q0) + self.h_dSigma(x1)

    def h_dQ(self, q: PointQ) -> np.ndarray:
        self.space.check_point(q)
        return q.g - self.H @ q.x

    def h_dSigma(self, x) -> np.ndarray:
        return self.H @ self._x(x)

    def h_dSigma_adj(self, mu) -> np.ndarray:
        return self.H.T @ self._mu(mu)

    def h_dQ_adj(self, mu) -> tuple[np.ndarray, np.ndarray]:
        """Adjoint of :meth:`h_dQ` as the covector ``(-H^T mu, mu)``."""
        mu = self._mu(mu)
        return -self.H.T @ mu, mu

    def h_d0(self, x0, x1) -> np.ndarray:
        """``h_d((x0, 0), x1) = H (x1 - x0)``."""
        return self.H @ (self._x(x1) - self._x(x0))

    # -- connection form ---------------------------------------------------

    def omega_d(self, q0: PointQ, q1: PointQ) -> np.ndarray:
        self.space.check_point(q1)
        return q1.g - self.h_d(q0, q1.x)

    # -- partial derivatives paired against a g* covector --------------------
    # The lift is linear, so D1 h_d(q0, x1)(q) = h_d(q, 0) and
    # D2 h_d(q0, x1)(x) = h_d(0, x); these return <mu, .> of those maps.

    def pair_h_d0_first(self, mu) -> np.ndarray:
        """``<mu, h_d0(., 0)> = -H^T mu``."""
        return -self.H.T @ self._mu(mu)

    def pair_h_d0_second(self, mu) -> np.ndarray:
        """``<mu, h_d0(0, .)> = H^T mu``."""
        return self.H.T @ self._mu(mu)

    def pair_h_d_fiber(self, mu) -> np.ndarray:
        """``<mu, h_d((0, .), 0)> = mu``."""
        return self._mu(mu).copy()

    def to_config(self) -> dict:
        if self.is_flat:
            return {"type": "flat"}
        return {"type": "matrix", "H": self.H.tolist()}

    @classmethod
    def from_config(cls, space: TrivializedSpace, cfg) -> "DiscreteConnection":
        """Build from ``"flat"`` / ``{"type": "flat"}`` / ``{"type": "matrix", "H": rows}``."""
        if cfg is None or cfg == "flat":
            return cls.flat(space)
        if isinstance(cfg, dict):
            kind = cfg.get("type", "matrix")
            if kind == "flat":
                return cls.flat(space)
            if kind == "matrix":
                return cls(space, np.asarray(cfg["H"], dtype=float))
        raise ValueError(f"unrecognized connection spec {cfg!r}")
