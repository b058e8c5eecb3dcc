"""Uniform 1-D grids, diagonal-norm quadrature, and the two-field state.

Conventions: bounded grids contain both interval endpoints with
``dx = (x_max - x_min) / (N - 1)``.  Periodic grids identify ``x_max``
with ``x_min`` and therefore exclude it, ``dx = (x_max - x_min) / N``;
all periodic derivative operators are circulant on those N nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError, DomainError

#: below this water height the conservative -> primitive conversion refuses
#: to divide (fully wet states are assumed throughout)
H_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    x_min: float
    x_max: float
    n_nodes: int
    spacing: float
    bc_kind: str  # "periodic" or "bounded"
    nodes: np.ndarray

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def is_periodic(self) -> bool:
        return self.bc_kind == "periodic"


def make_uniform_grid(x_min, x_max, n_nodes, bc_kind="periodic") -> Grid:
    """Build a uniform grid on [x_min, x_max] with the stated boundary kind."""
    if bc_kind not in ("periodic", "bounded"):
        raise ConfigurationError(f"unknown bc_kind {bc_kind!r}")
    if not x_max > x_min:
        raise ConfigurationError(
            f"degenerate interval [{x_min}, {x_max}]: x_max must exceed x_min"
        )
    n_nodes = int(n_nodes)
    if n_nodes < 3:
        raise ConfigurationError(f"n_nodes must be at least 3, got {n_nodes}")

    if bc_kind == "periodic":
        dx = (x_max - x_min) / n_nodes
        nodes = x_min + dx * np.arange(n_nodes)
    else:
        dx = (x_max - x_min) / (n_nodes - 1)
        nodes = np.linspace(x_min, x_max, n_nodes)
    return Grid(float(x_min), float(x_max), n_nodes, float(dx), bc_kind, nodes)


@dataclass(frozen=True, eq=False)
class MassMatrix:
    """Diagonal quadrature weights inducing the discrete inner product."""

    diagonal: np.ndarray

    def __post_init__(self):
        if np.any(self.diagonal <= 0.0):
            raise ConfigurationError("mass matrix weights must be positive")

    @property
    def n(self) -> int:
        return self.diagonal.size


def _check_lengths(*arrays):
    n = arrays[0].shape[0] if hasattr(arrays[0], "shape") else len(arrays[0])
    for a in arrays[1:]:
        m = a.shape[0] if hasattr(a, "shape") else len(a)
        if m != n:
            raise DimensionError(f"array length mismatch: {m} vs {n}")


def integral(u, mass: MassMatrix) -> float:
    """Quadrature of u against the diagonal norm, 1^T M u."""
    u = np.asarray(u, dtype=float)
    _check_lengths(u, mass.diagonal)
    return float(mass.diagonal @ u)


def weighted_inner_product(u, v, mass: MassMatrix) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_lengths(u, v, mass.diagonal)
    # (u v) first: elementwise products commute exactly, so the form is
    # symmetric in floating point as well
    return float(np.sum(u * v * mass.diagonal))


def l2_norm(u, mass: MassMatrix) -> float:
    return float(np.sqrt(weighted_inner_product(u, u, mass)))


def linf_norm(u) -> float:
    return float(np.max(np.abs(u))) if np.size(u) else 0.0


@dataclass(eq=False)
class State:
    """Two-field solution vector.

    ``representation`` is either "primitive" (total water height eta and
    velocity v) or "conservative" (water height h and discharge P = h v).
    The container stores raw fields; interpretation of eta0/bathymetry is
    left to the owning model.
    """

    field_a: np.ndarray
    field_b: np.ndarray
    representation: str = "primitive"

    def __post_init__(self):
        if self.representation not in ("primitive", "conservative"):
            raise ConfigurationError(
                f"unknown state representation {self.representation!r}"
            )
        _check_lengths(self.field_a, self.field_b)

    @property
    def n(self) -> int:
        return self.field_a.size

    def flat(self) -> np.ndarray:
        return np.concatenate([self.field_a, self.field_b])


def make_state(grid: Grid, field_a, field_b, representation="primitive") -> State:
    field_a = np.asarray(field_a, dtype=float)
    field_b = np.asarray(field_b, dtype=float)
    if field_a.size != grid.n_nodes or field_b.size != grid.n_nodes:
        raise DimensionError(
            f"state fields of length {field_a.size}/{field_b.size} "
            f"do not match grid with {grid.n_nodes} nodes"
        )
    return State(field_a, field_b, representation)


def split_flat(y):
    """Split a flat 2N vector into its two length-N fields (views)."""
    y = np.asarray(y)
    n = y.size // 2
    return y[:n], y[n:]


def primitive_to_conservative(eta, v, still_depth, eta0=0.0):
    """(eta, v) -> (h, P) with h = eta + D - eta0 and P = h v."""
    h = np.asarray(eta, dtype=float) + np.asarray(still_depth, dtype=float) - eta0
    return h, h * np.asarray(v, dtype=float)


def conservative_to_primitive(h, p, still_depth, eta0=0.0):
    """(h, P) -> (eta, v); errors on dry or near-dry states instead of clamping."""
    h = np.asarray(h, dtype=float)
    if np.min(h) <= H_FLOOR:
        raise DomainError(
            f"water height {np.min(h):.3e} at or below floor {H_FLOOR:.0e}; "
            "conversion requires a fully wet state"
        )
    eta = h - np.asarray(still_depth, dtype=float) + eta0
    return eta, np.asarray(p, dtype=float) / h
