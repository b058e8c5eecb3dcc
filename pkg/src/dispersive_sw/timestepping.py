"""Explicit Runge-Kutta time stepping with an optional relaxation wrapper.

Relaxation rescales the update increment, u_new = u + gamma * du with
gamma near 1 chosen so that a designated nonlinear functional J is
exactly conserved (or not increased) across the step; the step then
advances time by gamma * dt.  Functionals provide a ``delta`` evaluation
J(u + gamma du) - J(u) that avoids catastrophic cancellation; for the
energy functionals of both models this difference is an exact cubic
polynomial in gamma.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, NumericsError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# tableaus


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    a: np.ndarray  # s x s, strictly lower triangular
    b: np.ndarray
    c: np.ndarray
    order: int
    b_embedded: np.ndarray | None = None
    embedded_order: int | None = None

    def __post_init__(self):
        s = self.b.size
        if self.a.shape != (s, s) or self.c.size != s:
            raise ConfigurationError("inconsistent tableau dimensions")
        if np.any(np.abs(np.triu(self.a)) > 0):
            raise ConfigurationError("tableau must be explicit")
        if abs(self.b.sum() - 1.0) > 1e-13:
            raise ConfigurationError("tableau weights must sum to one")

    @property
    def stages(self) -> int:
        return self.b.size

    @property
    def is_embedded(self) -> bool:
        return self.b_embedded is not None

    @property
    def is_fsal(self) -> bool:
        return bool(
            np.allclose(self.a[-1], self.b) and abs(self.c[-1] - 1.0) < 1e-14
        )


def _tab(name, a, b, c, order, b_emb=None, emb_order=None):
    return ButcherTableau(
        name,
        np.array(a, dtype=float),
        np.array(b, dtype=float),
        np.array(c, dtype=float),
        order,
        None if b_emb is None else np.array(b_emb, dtype=float),
        emb_order,
    )


RK4 = _tab(
    "rk4",
    [[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1, 0]],
    [1 / 6, 1 / 3, 1 / 3, 1 / 6],
    [0, 0.5, 0.5, 1],
    order=4,
)

# Dormand-Prince 5(4) pair, first-same-as-last
DOPRI5 = _tab(
    "dopri5",
    [
        [0, 0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0],
    ],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0],
    [0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1],
    order=5,
    b_emb=[5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40],
    emb_order=4,
)

TABLEAUS = {"rk4": RK4, "dopri5": DOPRI5}


# ---------------------------------------------------------------------------
# functionals for relaxation


class FunctionalFromCallable:
    """Wrap a plain J(y) callable; delta falls back to a direct difference."""

    def __init__(self, func: Callable[[np.ndarray], float]):
        self._func = func

    def value(self, y):
        return float(self._func(y))

    def delta(self, y, dy, gamma):
        return self.value(y + gamma * dy) - self.value(y)


# ---------------------------------------------------------------------------
# single steps


class _StepFailure(Exception):
    pass


def rk_step(rhs, y, t, dt, tableau: ButcherTableau, k1=None):
    """One explicit RK step.

    Returns (du, err, k_stages): the update increment dt * sum(b_i k_i),
    the embedded error estimate (or None), and the stage derivatives.
    Non-finite stage values raise a step-failure signal so an adaptive
    driver can retry with a smaller step.
    """
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    s = tableau.stages
    k = [None] * s
    k[0] = rhs(t, y) if k1 is None else k1
    if not np.all(np.isfinite(k[0])):
        raise _StepFailure("non-finite right-hand side at first stage")
    for i in range(1, s):
        yi = y + dt * sum(
            tableau.a[i, j] * k[j] for j in range(i) if tableau.a[i, j] != 0.0
        )
        k[i] = rhs(t + tableau.c[i] * dt, yi)
        if not np.all(np.isfinite(k[i])):
            raise _StepFailure(f"non-finite right-hand side at stage {i}")
    du = dt * sum(tableau.b[i] * k[i] for i in range(s) if tableau.b[i] != 0.0)
    err = None
    if tableau.is_embedded:
        db = tableau.b - tableau.b_embedded
        err = dt * sum(db[i] * k[i] for i in range(s) if db[i] != 0.0)
    return du, err, k


@dataclass
class RelaxationConfig:
    """Settings for the relaxation wrapper.

    functional selects what is conserved ("energy", "modified_entropy", or
    "custom"); mode "conservative" enforces J(u+du) = J(u), mode
    "dissipative-estimate" only prevents growth.
    """

    functional: str = "energy"
    mode: str = "conservative"
    root_tolerance: float = 1e-14
    bracket_half_width: float = 1e-2

    def __post_init__(self):
        if self.mode not in ("conservative", "dissipative-estimate"):
            raise ConfigurationError(f"unknown relaxation mode {self.mode!r}")
        if self.root_tolerance <= 0:
            raise ConfigurationError("root tolerance must be positive")
        if not 0 < self.bracket_half_width < 1:
            raise ConfigurationError("gamma bracket must be a neighborhood of 1")


def _solve_gamma(residual, half_width, tol, max_iter=50):
    """Safeguarded root of r(gamma) on [1-h, 1+h] (Illinois false position).

    The root is refined essentially to machine precision: per-step residual
    tolerances looser than roundoff would accumulate into a visible drift
    of the conserved functional over long runs.  ``tol`` only classifies
    the degenerate case where the functional does not respond to the
    increment at all (then gamma = 1 conserves it already).

    Returns (gamma, converged); converged=False means no sign change was
    found, and callers fall back to gamma = 1 with a logged warning.
    """
    r1 = residual(1.0)
    if r1 == 0.0:
        return 1.0, True
    lo, hi = 1.0 - half_width, 1.0 + half_width
    r_lo, r_hi = residual(lo), residual(hi)
    if not (np.isfinite(r_lo) and np.isfinite(r_hi) and np.isfinite(r1)):
        return 1.0, False
    if max(abs(r1), abs(r_lo), abs(r_hi)) <= tol:
        return 1.0, True
    if np.sign(r_lo) != np.sign(r1):
        a, b, ra, rb = lo, 1.0, r_lo, r1
    elif np.sign(r1) != np.sign(r_hi):
        a, b, ra, rb = 1.0, hi, r1, r_hi
    else:
        return 1.0, abs(r1) <= tol
    best, r_best = (a, ra) if abs(ra) <= abs(rb) else (b, rb)
    side = 0
    for _ in range(max_iter):
        if rb != ra:
            cand = (a * rb - b * ra) / (rb - ra)
        else:
            cand = 0.5 * (a + b)
        if not (a < cand < b) or not np.isfinite(cand):
            cand = 0.5 * (a + b)
        rc = residual(cand)
        if abs(rc) <= abs(r_best):
            best, r_best = cand, rc
        if rc == 0.0 or (b - a) <= 16 * np.finfo(float).eps:
            break
        if np.sign(rc) == np.sign(ra):
            a, ra = cand, rc
            if side == -1:
                rb *= 0.5
            side = -1
        else:
            b, rb = cand, rc
            if side == 1:
                ra *= 0.5
            side = 1
    return best, True


def relaxation_step(rhs, y, t, dt, tableau, relax: RelaxationConfig, functional):
    """Baseline RK step followed by the relaxation rescaling.

    Returns (y_new, t_new, gamma, err, fallback) where fallback flags a
    failed gamma solve (gamma = 1 was used).
    """
    du, err, _ = rk_step(rhs, y, t, dt, tableau)
    gamma, fell_back = _relax_increment(y, du, relax, functional)
    return y + gamma * du, t + gamma * dt, gamma, err, fell_back


def _relax_increment(y, du, relax, functional):
    scale = max(1.0, abs(functional.value(y)))
    tol = relax.root_tolerance * scale

    def residual(gamma):
        return functional.delta(y, du, gamma)

    if relax.mode == "dissipative-estimate" and residual(1.0) <= 0.0:
        return 1.0, False
    gamma, converged = _solve_gamma(residual, relax.bracket_half_width, tol)
    if not converged:
        log.warning(
            "relaxation root not bracketed (r(1) = %.3e); falling back to gamma = 1",
            residual(1.0),
        )
        return 1.0, True
    return gamma, False


# ---------------------------------------------------------------------------
# step-size controller


def adaptive_controller(err_norm, dt, err_norm_prev=1.0, *, safety=0.9,
                        fac_min=0.2, fac_max=5.0, order=5):
    """PI step-size law; accept iff the weighted error norm is at most 1."""
    accept = err_norm <= 1.0
    if err_norm == 0.0:
        return accept, dt * fac_max
    k = order
    factor = safety * err_norm ** (-0.7 / k) * max(err_norm_prev, 1e-16) ** (0.4 / k)
    if not accept:
        factor = min(1.0, safety * err_norm ** (-1.0 / k))
    return accept, dt * min(fac_max, max(fac_min, factor))


def _error_norm(err, y_old, y_new, atol, rtol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


# ---------------------------------------------------------------------------
# driver


@dataclass
class IntegratorConfig:
    tableau: ButcherTableau = DOPRI5
    dt: float | None = None  # fixed step size; None selects adaptive mode
    atol: float = 1e-7
    rtol: float = 1e-7
    dt_initial: float | None = None
    dt_min: float = 1e-12
    dt_max: float = np.inf
    max_steps: int = 10_000_000
    relaxation: Optional[RelaxationConfig] = None


@dataclass
class StepRecord:
    """One accepted step, enough for cubic Hermite dense output."""

    t_old: float
    t_new: float
    y_old: np.ndarray
    y_new: np.ndarray
    f_old: np.ndarray | None
    f_new: np.ndarray | None
    gamma: float

    def interpolate(self, t):
        """Cubic Hermite evaluation inside [t_old, t_new]."""
        h = self.t_new - self.t_old
        theta = (t - self.t_old) / h
        h00 = (1 + 2 * theta) * (1 - theta) ** 2
        h10 = theta * (1 - theta) ** 2
        h01 = theta**2 * (3 - 2 * theta)
        h11 = theta**2 * (theta - 1)
        return (
            h00 * self.y_old
            + h01 * self.y_new
            + h * (h10 * self.f_old + h11 * self.f_new)
        )


@dataclass
class IntegrationResult:
    t: float
    y: np.ndarray
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    relaxation_fallbacks: int = 0
    gammas: list = field(default_factory=list)


def integrate(rhs, y0, t_span, config: IntegratorConfig, functional=None,
              on_step=None, dense_output=False) -> IntegrationResult:
    """Drive steps from t_span[0] to t_span[1].

    on_step(record) is invoked after every accepted step; with
    dense_output=True the record carries endpoint derivatives so callers
    can sample gauges by Hermite interpolation.  Fixed-dt mode is selected
    by config.dt; otherwise the embedded estimate feeds the PI controller.
    """
    t0, t_end = float(t_span[0]), float(t_span[-1])
    if not t_end > t0:
        raise ConfigurationError("empty time span")
    tab = config.tableau
    relax = config.relaxation
    if relax is not None and functional is None:
        raise ConfigurationError("relaxation requested but no functional supplied")
    adaptive = config.dt is None
    if adaptive and not tab.is_embedded:
        raise ConfigurationError(f"tableau {tab.name} has no embedded error estimate")

    result = IntegrationResult(t=t0, y=np.array(y0, dtype=float))
    y, t = result.y, t0
    span = t_end - t0
    dt = config.dt if not adaptive else (config.dt_initial or span / 1000.0)
    dt = min(dt, span, config.dt_max)
    err_prev = 1.0
    k1 = None  # FSAL cache; only reused when the state it belongs to is current

    def call_rhs(ti, yi):
        result.n_rhs += 1
        return rhs(ti, yi)

    while t < t_end - 1e-12 * max(1.0, abs(t_end)):
        if result.n_steps + result.n_rejected >= config.max_steps:
            raise NumericsError(f"exceeded max_steps={config.max_steps} at t={t}")
        dt_step = min(dt, t_end - t)
        try:
            du, err, k = rk_step(call_rhs, y, t, dt_step, tab, k1=k1)
        except (_StepFailure, DomainError) as exc:
            # an inadmissible trial state is recoverable under step control
            if not adaptive:
                if isinstance(exc, DomainError):
                    raise
                raise NumericsError(f"non-finite state in fixed-step run at t={t}")
            result.n_rejected += 1
            k1 = None
            dt = dt_step / 2.0
            if dt < config.dt_min:
                raise NumericsError(
                    f"step size underflow at t={t}: dt={dt:.3e} ({exc})"
                )
            continue

        if adaptive:
            err_norm = _error_norm(err, y, y + du, config.atol, config.rtol)
            accept, dt_next = adaptive_controller(
                err_norm, dt_step, err_prev, order=(tab.embedded_order or tab.order) + 1
            )
            if not accept:
                result.n_rejected += 1
                dt = dt_next
                if dt < config.dt_min:
                    raise NumericsError(
                        f"step size underflow at t={t}: dt={dt:.3e} (error too large)"
                    )
                continue
            err_prev = max(err_norm, 1e-16)
            dt = min(dt_next, config.dt_max)
        gamma = 1.0
        if relax is not None:
            gamma, fell_back = _relax_increment(y, du, relax, functional)
            if fell_back:
                result.relaxation_fallbacks += 1
        y_new = y + gamma * du
        t_new = t + gamma * dt_step

        # FSAL: the last stage is f(t+dt, y+du), reusable as the next first
        # stage.  After a relaxed step with gamma != 1 the derivative must be
        # re-evaluated at the relaxed state before it can be reused.
        f_new = None
        if tab.is_fsal and gamma == 1.0:
            f_new = k[-1]
        elif dense_output or (tab.is_fsal and relax is not None):
            f_new = call_rhs(t_new, y_new)
        k1 = f_new if tab.is_fsal else None
        if dense_output and f_new is None:
            f_new = call_rhs(t_new, y_new)

        if on_step is not None:
            record = StepRecord(t, t_new, y, y_new, k[0] if dense_output else None,
                                f_new, gamma)
            on_step(record)
        if relax is not None:
            result.gammas.append(gamma)
        y, t = y_new, t_new
        result.n_steps += 1

    result.t, result.y = t, y
    return result
