"""Svärd-Kalisch dispersive shallow water system.

Conservative form (h water height, P = h v discharge, b bathymetry):

    h_t + (h v)_x = (ahat (ahat (h+b)_x)_x)_x,
    P_t + (h v^2)_x + g h (h+b)_x
        = (ahat v (ahat (h+b)_x)_x)_x + (bhat v_x)_{xt}
          + ((ghat v_x)_{xx} + (ghat v_{xx})_x) / 2,

with spatially varying coefficients tied to the still water depth
D = eta0 - b:

    ahat^2 = atilde sqrt(g D) D^2,  bhat = btilde D^3,
    ghat = gtilde sqrt(g D) D^3.

The semidiscretizations are split-form so that the shallow-water flux
terms cancel in the entropy balance; they conserve (or, with upwind
biasing of the alpha terms, dissipate) the total modified entropy

    Ehat = sum_i M_ii [ (h v^2 + g h^2)/2 + g h b + bhat (Dv)^2 / 2 ]_i,

where Dv uses the scheme's matching derivative (central D1, or D1minus
for the upwind variant).  The right-hand side is evaluated in primitive
variables (eta, v); the velocity equation solves a symmetric positive
definite system that is re-factored at every call because it depends on
the water height.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linsolve
from .errors import ConfigurationError, DomainError, NumericsError
from .grid import Grid, split_flat
from .sbp import SbpOperatorSet

VARIANTS = ("periodic_central_split", "periodic_upwind", "reflecting_beta_only")


@dataclass(frozen=True)
class SkParameterSet:
    """Dimensionless dispersion coefficients (alpha, beta, gamma tilde)."""

    name: str
    alpha_tilde: float
    beta_tilde: float
    gamma_tilde: float

    @property
    def supports_variable_bathymetry(self) -> bool:
        # ahat^2 = atilde sqrt(gD) D^2 requires atilde >= 0
        return self.alpha_tilde >= 0.0


PARAMETER_SETS = {
    "set1": SkParameterSet("set1", -1.0 / 3.0, 0.0, 0.0),
    "set2": SkParameterSet(
        "set2", 0.0004040404040404049, 0.49292929292929294, 0.15707070707070708
    ),
    "set3": SkParameterSet("set3", 0.0, 0.27946992481203003, 0.0521077694235589),
    "set4": SkParameterSet("set4", 0.0, 0.2308939393939394, 0.04034343434343434),
    "set5": SkParameterSet("set5", 0.0, 1.0 / 3.0, 0.0),
}


def sk_parameter_set(name) -> SkParameterSet:
    if isinstance(name, SkParameterSet):
        return name
    try:
        return PARAMETER_SETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown parameter set {name!r}; available: {sorted(PARAMETER_SETS)}"
        ) from None


def euler_phase_speed(k, h0, gravity):
    """Full water-wave phase velocity sqrt(g tanh(k h0) / k)."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(gravity * np.tanh(k * h0) / k)


def sk_dispersion_omega(k, params, h0, gravity):
    """Positive frequency branch of the linearized flat-bottom system.

    Linearizing about (h, v) = (h0, 0) and inserting plane waves turns the
    system into a quadratic in omega,

        (h0 + beta k^2) w^2 - k^3 (gamma + alpha (h0 + beta k^2)) w
            + alpha gamma k^6 - g h0^2 k^2 = 0,

    with the dimensional coefficients alpha = atilde sqrt(g h0) h0^2,
    beta = btilde h0^3, gamma = gtilde sqrt(g h0) h0^3.  The branch
    continuous with omega = sqrt(g h0) k as k -> 0 is returned.
    """
    params = sk_parameter_set(params)
    k = float(k)
    if k <= 0 or h0 <= 0:
        raise DomainError("dispersion relation requires k > 0 and h0 > 0")
    root_gh = np.sqrt(gravity * h0)
    alpha = params.alpha_tilde * root_gh * h0**2
    beta = params.beta_tilde * h0**3
    gamma = params.gamma_tilde * root_gh * h0**3
    a = h0 + beta * k**2
    b = k**3 * (gamma + alpha * a)
    c = alpha * gamma * k**6 - gravity * h0**2 * k**2
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise DomainError(
            f"no real dispersion branch for k={k}, h0={h0}, set={params.name}"
        )
    omega = (b + np.sqrt(disc)) / (2.0 * a)
    if omega <= 0:
        raise DomainError(
            f"no positive dispersion branch for k={k}, h0={h0}, set={params.name}"
        )
    return float(omega)


@dataclass(eq=False)
class SkDiscretization:
    grid: Grid
    gravity: float
    eta0: float
    bathymetry: np.ndarray
    still_depth: np.ndarray
    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    gamma_hat: np.ndarray
    params: SkParameterSet
    variant: str
    operators: SbpOperatorSet
    split_form: bool = True
    _source: Optional[Callable] = None
    _velocity_solver: linsolve.ShiftedSolver = None  # static part analyzed once
    _interior_mask: np.ndarray | None = None
    _entropy_deriv: Callable = None  # derivative entering the modified entropy

    @property
    def n(self) -> int:
        return self.grid.n_nodes

    def water_height(self, eta):
        return eta + self.still_depth - self.eta0

    # -- right-hand side -----------------------------------------------------

    def rhs_fields(self, eta, v, t=0.0):
        if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(v))):
            raise NumericsError("non-finite state passed to SK right-hand side")
        h = self.water_height(eta)
        if np.min(h) <= 0.0:
            raise DomainError(
                f"water height must stay positive, min={np.min(h):.3e}"
            )
        d1 = self.operators.d1.apply
        hv = h * v
        reflecting = self.variant == "reflecting_beta_only"

        if self.variant == "periodic_upwind":
            pair = self.operators.upwind
            dp, dm = pair.d_plus.apply, pair.d_minus.apply
            y_disp = self.alpha_hat * dm(self.alpha_hat * dp(eta))
            deta = -d1(hv) + dm(y_disp)
        elif reflecting:
            y_disp = None
            deta = -d1(hv)
        else:
            y_disp = self.alpha_hat * d1(self.alpha_hat * d1(eta))
            deta = d1(y_disp - hv)

        # split-form shallow water terms (advective part, after the time
        # product rule moved v * h_t to the left)
        d1_v = d1(v)
        if self.split_form:
            rhs_v = -0.5 * (d1(hv * v) + hv * d1_v - v * d1(hv))
        else:
            rhs_v = -(d1(hv * v) - v * d1(hv))
        rhs_v = rhs_v - self.gravity * h * d1(eta)

        if y_disp is not None and np.any(self.alpha_hat):
            if self.variant == "periodic_upwind":
                if self.split_form:
                    rhs_v = rhs_v + 0.5 * (
                        dm(v * y_disp) - v * dm(y_disp) + y_disp * dp(v)
                    )
                else:
                    rhs_v = rhs_v + dm(v * y_disp) - v * dm(y_disp)
            else:
                if self.split_form:
                    rhs_v = rhs_v + 0.5 * (
                        d1(v * y_disp) - v * d1(y_disp) + y_disp * d1_v
                    )
                else:
                    rhs_v = rhs_v + d1(v * y_disp) - v * d1(y_disp)

        if not reflecting and np.any(self.gamma_hat):
            d2 = self.operators.d2.apply
            rhs_v = rhs_v + 0.5 * (
                d2(self.gamma_hat * d1_v) + d1(self.gamma_hat * d2(v))
            )

        if self._source is not None:
            s_h, s_hv = self._source(t, self.grid.nodes)
            deta = deta + s_h
            rhs_v = rhs_v + s_hv - v * s_h

        if self._interior_mask is not None:
            rhs_v = rhs_v * self._interior_mask

        diagonal = h
        if reflecting:
            # identity rows at the walls: the static block rows are already
            # projected out, so the diagonal entry is the full row
            diagonal = h.copy()
            diagonal[0] = diagonal[-1] = 1.0
        dv = self._velocity_solver.factor(diagonal).solve(rhs_v)
        if reflecting:
            dv[0] = dv[-1] = 0.0
        return deta, dv

    def rhs(self, t, y):
        eta, v = split_flat(y)
        deta, dv = self.rhs_fields(eta, v, t)
        return np.concatenate([deta, dv])

    # -- invariants ------------------------------------------------------------

    def invariants(self, y) -> dict:
        eta, v = split_flat(np.asarray(y))
        h = self.water_height(eta)
        if np.min(h) <= 0.0:
            raise DomainError("invariants need a positive water height")
        w = self.operators.mass.diagonal
        entropy_density = 0.5 * (h * v**2 + self.gravity * h**2) \
            + self.gravity * h * self.bathymetry
        dv = self._entropy_deriv(v)
        return {
            "mass": float(w @ h),
            "discharge": float(w @ (h * v)),
            "entropy": float(w @ entropy_density),
            "modified_entropy": float(
                w @ (entropy_density + 0.5 * self.beta_hat * dv**2)
            ),
        }

    def modified_entropy(self, y) -> float:
        return self.invariants(y)["modified_entropy"]

    def modified_entropy_functional(self):
        return SkModifiedEntropyFunctional(self)


class SkModifiedEntropyFunctional:
    """Total modified entropy with exact cubic increments in gamma.

    In primitive variables the density (h v^2 + g h^2)/2 + g h b
    + bhat (Dv)^2 / 2 is a cubic polynomial of (eta, v), so the increment
    J(y + gamma dy) - J(y) has exact polynomial coefficients.
    """

    def __init__(self, disc: SkDiscretization):
        self._disc = disc

    def value(self, y):
        return self._disc.modified_entropy(y)

    def delta_coefficients(self, y, dy):
        d = self._disc
        eta, v = split_flat(np.asarray(y))
        de, dv = split_flat(np.asarray(dy))
        h = d.water_height(eta)
        g = d.gravity
        w = d.operators.mass.diagonal
        dvx = d._entropy_deriv(v)
        ddvx = d._entropy_deriv(dv)
        c1 = float(
            w @ (0.5 * de * v**2 + h * v * dv + g * h * de
                 + g * de * d.bathymetry + d.beta_hat * dvx * ddvx)
        )
        c2 = float(
            w @ (de * v * dv + 0.5 * h * dv**2 + 0.5 * g * de**2
                 + 0.5 * d.beta_hat * ddvx**2)
        )
        c3 = float(w @ (0.5 * de * dv**2))
        return c1, c2, c3

    def delta(self, y, dy, gamma):
        c1, c2, c3 = self.delta_coefficients(y, dy)
        return gamma * (c1 + gamma * (c2 + gamma * c3))

    def rate(self, y, ydot):
        c1, _, _ = self.delta_coefficients(y, ydot)
        return c1

    def rate_scale(self, y, ydot):
        d = self._disc
        eta, v = split_flat(np.asarray(y))
        de, dv = split_flat(np.asarray(ydot))
        h = d.water_height(eta)
        g = d.gravity
        w = d.operators.mass.diagonal
        dvx = d._entropy_deriv(v)
        ddvx = d._entropy_deriv(dv)
        return float(
            w @ (np.abs(0.5 * de * v**2) + np.abs(h * v * dv) + np.abs(g * h * de)
                 + np.abs(g * de * d.bathymetry) + np.abs(d.beta_hat * dvx * ddvx))
        )


def build_sk_discretization(grid, operators, bathymetry_fn, gravity, eta0,
                            params, variant, *, split_form=True,
                            source_terms=None):
    """Coefficient fields, static matrix blocks, and variant validation.

    ``source_terms(t, x) -> (s_h, s_hv)`` supplies manufactured sources in
    the conservative form; the velocity equation receives s_hv - v s_h
    after the product-rule rewrite.
    """
    params = sk_parameter_set(params)
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown SK variant {variant!r}")
    if variant.startswith("periodic") != grid.is_periodic:
        raise ConfigurationError(
            f"variant {variant} incompatible with bc_kind {grid.bc_kind}"
        )
    if variant == "reflecting_beta_only" and (
        params.alpha_tilde != 0.0 or params.gamma_tilde != 0.0
    ):
        raise ConfigurationError(
            "reflecting boundaries require alpha_tilde = gamma_tilde = 0 "
            f"(got set {params.name})"
        )
    b = np.asarray(bathymetry_fn(grid.nodes), dtype=float)
    if b.shape != grid.nodes.shape:
        b = np.full(grid.n_nodes, float(bathymetry_fn(grid.nodes)))
    depth = eta0 - b
    if np.min(depth) <= 0.0:
        raise DomainError(
            f"still water depth must be positive everywhere, min={np.min(depth):.3e}"
        )
    if params.alpha_tilde < 0.0:
        raise ConfigurationError(
            f"parameter set {params.name} has alpha_tilde < 0 and cannot be "
            "used with the variable-bathymetry coefficient law"
        )
    root_gd = np.sqrt(gravity * depth)
    alpha_hat = np.sqrt(params.alpha_tilde * root_gd) * depth
    beta_hat = params.beta_tilde * depth**3
    gamma_hat = params.gamma_tilde * root_gd * depth**3

    operators.require("d1")
    n = grid.n_nodes
    d1m = operators.d1.matrix
    interior_mask = None
    entropy_deriv = operators.d1.apply
    if variant == "periodic_central_split":
        operators.require("d2")
        beta_block = -(d1m * beta_hat) @ d1m
    elif variant == "periodic_upwind":
        operators.require("upwind", "d2")
        pair = operators.upwind
        beta_block = -(pair.d_plus.matrix * beta_hat) @ pair.d_minus.matrix
        entropy_deriv = pair.d_minus.apply
    else:  # reflecting_beta_only
        beta_block = -(d1m * beta_hat) @ d1m
        interior_mask = np.ones(n)
        interior_mask[0] = interior_mask[-1] = 0.0
        beta_block = beta_block * interior_mask[:, None]

    return SkDiscretization(
        grid=grid,
        gravity=float(gravity),
        eta0=float(eta0),
        bathymetry=b,
        still_depth=depth,
        alpha_hat=alpha_hat,
        beta_hat=beta_hat,
        gamma_hat=gamma_hat,
        params=params,
        variant=variant,
        operators=operators,
        split_form=split_form,
        _source=source_terms,
        _velocity_solver=linsolve.ShiftedSolver(beta_block),
        _interior_mask=interior_mask,
        _entropy_deriv=entropy_deriv,
    )
