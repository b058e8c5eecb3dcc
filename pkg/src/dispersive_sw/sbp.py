"""Finite difference summation-by-parts (SBP) operators on uniform grids.

Periodic operators are circulant and stored as a stencil (offset /
coefficient pair); application costs O(N * width).  Bounded operators
repeat the interior stencil and replace an antisymmetric corner block of
Q = M D1, which keeps M D1 + D1^T M = diag(-1, 0, ..., 0, 1) exact by
construction.  All norm matrices are diagonal.

The defining identities are

* periodic first derivative:   M D1 + D1^T M = 0
* bounded first derivative:    M D1 + D1^T M = e_R e_R^T - e_L e_L^T
* periodic upwind pair:        M D+ + D-^T M = 0,
                               S = M (D+ - D-) / 2 negative semidefinite
* periodic second derivative:  M D2 = D2^T M

and every builder verifies its identity (and, for upwind pairs, the
dissipation sign via the circulant symbol) before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .errors import ConfigurationError
from .grid import Grid, MassMatrix

# interior central first-derivative stencils (unit spacing, offsets -p/2..p/2)
_CENTRAL_D1 = {
    2: [-1 / 2, 0.0, 1 / 2],
    4: [1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12],
    6: [-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60],
    8: [1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280],
}

# rational central stencils used for the exact bounded-closure solve
_CENTRAL_D1_RATIONAL = {
    2: [Fraction(-1, 2), Fraction(0), Fraction(1, 2)],
    4: [Fraction(1, 12), Fraction(-2, 3), Fraction(0), Fraction(2, 3),
        Fraction(-1, 12)],
    6: [Fraction(-1, 60), Fraction(3, 20), Fraction(-3, 4), Fraction(0),
        Fraction(3, 4), Fraction(-3, 20), Fraction(1, 60)],
}

# interior narrow second-derivative stencils (unit spacing)
_NARROW_D2 = {
    2: [1.0, -2.0, 1.0],
    4: [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12],
    6: [1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90],
    8: [-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560],
}

# boundary-modified norm weights of the classical diagonal-norm operators
# (interior order p, boundary order p/2)
_BOUNDED_NORM = {
    2: [Fraction(1, 2)],
    4: [Fraction(17, 48), Fraction(59, 48), Fraction(43, 48), Fraction(49, 48)],
    6: [
        Fraction(13649, 43200),
        Fraction(12013, 8640),
        Fraction(2711, 4320),
        Fraction(5359, 4320),
        Fraction(7877, 8640),
        Fraction(43801, 43200),
    ],
}

BOUNDED_ORDERS = (2, 4, 6)
PERIODIC_CENTRAL_ORDERS = (2, 4, 6, 8)
UPWIND_ORDERS = (1, 2, 3, 4)


@dataclass(frozen=True, eq=False)
class DerivativeOperator:
    """Derivative matrix together with the norm it satisfies SBP against."""

    kind: str
    accuracy_order: int
    grid: Grid
    mass: MassMatrix
    matrix: np.ndarray
    offsets: np.ndarray | None = None  # set for circulant (periodic) operators
    coefficients: np.ndarray | None = None
    closure_rows: int = 0  # boundary rows with reduced order (bounded only)

    @property
    def n(self) -> int:
        return self.grid.n_nodes

    def apply(self, u: np.ndarray) -> np.ndarray:
        if self.offsets is not None:
            return apply_circulant(u, self.offsets, self.coefficients)
        return self.matrix @ u

    __call__ = apply


@dataclass(frozen=True, eq=False)
class UpwindOperatorPair:
    """Biased derivative pair; M D+ + D-^T M = 0 and M (D+ - D-)/2 <= 0."""

    d_plus: DerivativeOperator
    d_minus: DerivativeOperator
    mass: MassMatrix
    accuracy_order: int
    grid: Grid

    def central_average(self) -> DerivativeOperator:
        """(D+ + D-)/2, a valid central first-derivative SBP operator."""
        if self.d_plus.offsets is None:
            mat = 0.5 * (self.d_plus.matrix + self.d_minus.matrix)
            order = self.accuracy_order
            kind = "bounded_central_d1"
            return DerivativeOperator(
                kind, order, self.grid, self.mass, mat,
                closure_rows=self.d_plus.closure_rows,
            )
        off, coef = _add_stencils(
            (self.d_plus.offsets, 0.5 * self.d_plus.coefficients),
            (self.d_minus.offsets, 0.5 * self.d_minus.coefficients),
        )
        order = self.accuracy_order + (self.accuracy_order % 2)
        mat = circulant_matrix(self.grid.n_nodes, off, coef)
        return DerivativeOperator(
            "periodic_central_d1", order, self.grid, self.mass, mat, off, coef
        )


# ---------------------------------------------------------------------------
# circulant helpers


def apply_circulant(u, offsets, coefficients):
    """Apply a circulant stencil via rolls, pairing +/- offsets.

    Accumulating each offset pair together makes antisymmetric stencils
    annihilate constants exactly in floating point (the two contributions
    cancel elementwise before they are added to the accumulator).
    """
    u = np.asarray(u)
    table = {int(k): c for k, c in zip(offsets, coefficients) if c != 0.0}
    out = table[0] * u if 0 in table else np.zeros_like(u, dtype=float)
    for k in sorted({abs(k) for k in table if k != 0}):
        if k in table and -k in table:
            out = out + (table[k] * np.roll(u, -k) + table[-k] * np.roll(u, k))
        elif k in table:
            out = out + table[k] * np.roll(u, -k)
        else:
            out = out + table[-k] * np.roll(u, k)
    return out


def circulant_matrix(n, offsets, coefficients):
    mat = np.zeros((n, n))
    idx = np.arange(n)
    for k, c in zip(offsets, coefficients):
        mat[idx, (idx + int(k)) % n] += c
    return mat


def _trim_stencil(offsets, coefficients):
    keep = np.abs(coefficients) > 0.0
    if not np.any(keep):
        return np.array([0]), np.array([0.0])
    return offsets[keep], coefficients[keep]


def _add_stencils(*stencils):
    lo = min(int(off.min()) for off, _ in stencils)
    hi = max(int(off.max()) for off, _ in stencils)
    acc = np.zeros(hi - lo + 1)
    for off, coef in stencils:
        for k, c in zip(off, coef):
            acc[int(k) - lo] += c
    offsets = np.arange(lo, hi + 1)
    return _trim_stencil(offsets, acc)


def _convolve_stencils(off1, coef1, off2, coef2):
    """Stencil of the product of two circulant operators."""
    lo = int(off1.min() + off2.min())
    hi = int(off1.max() + off2.max())
    acc = np.zeros(hi - lo + 1)
    for ka, ca in zip(off1, coef1):
        for kb, cb in zip(off2, coef2):
            acc[int(ka + kb) - lo] += ca * cb
    return _trim_stencil(np.arange(lo, hi + 1), acc)


def _symbol(offsets, coefficients, thetas):
    """Fourier symbol sum_k c_k exp(i k theta) of a circulant stencil."""
    return np.sum(
        coefficients[None, :] * np.exp(1j * np.outer(thetas, offsets)), axis=1
    )


def _stencil_moments(offsets, coefficients, up_to):
    return [float(np.sum(coefficients * np.asarray(offsets, float) ** m))
            for m in range(up_to + 1)]


# ---------------------------------------------------------------------------
# interior stencil construction


@lru_cache(maxsize=None)
def _biased_stencil(order):
    """Minimal-width biased first-derivative stencil of the given order.

    Offsets run from -floor((p-1)/2) to p - floor((p-1)/2); the p+1 order
    conditions determine the coefficients uniquely (unit spacing).
    """
    lo = -((order - 1) // 2)
    offsets = np.arange(lo, lo + order + 1)
    vander = np.vander(offsets.astype(float), increasing=True).T  # row m: k^m
    rhs = np.zeros(order + 1)
    rhs[1] = 1.0
    coef = np.linalg.solve(vander, rhs)
    moments = _stencil_moments(offsets, coef, order)
    target = [1.0 if m == 1 else 0.0 for m in range(order + 1)]
    if max(abs(a - b) for a, b in zip(moments, target)) > 1e-12:
        raise ConfigurationError(f"biased stencil order conditions failed, p={order}")
    return offsets, coef


def _check_upwind_symbol(off_p, coef_p, n_theta=720):
    """Verify Re(symbol of D+) <= 0, i.e. the dissipation matrix S <= 0."""
    thetas = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    re = _symbol(off_p, coef_p, thetas).real
    scale = np.sum(np.abs(coef_p))
    if np.max(re) > 1e-12 * scale:
        raise ConfigurationError(
            f"upwind stencil is not dissipative (max Re symbol {np.max(re):.2e})"
        )


# ---------------------------------------------------------------------------
# periodic builders


def _require_periodic(grid, width):
    if not grid.is_periodic:
        raise ConfigurationError("operator requires a periodic grid")
    if grid.n_nodes <= width:
        raise ConfigurationError(
            f"grid with {grid.n_nodes} nodes too small for stencil width {width}"
        )


def _periodic_mass(grid):
    return MassMatrix(np.full(grid.n_nodes, grid.spacing))


def build_periodic_central_d1(grid: Grid, order: int) -> DerivativeOperator:
    """Central circulant first-derivative operator, M = dx * I."""
    if order not in _CENTRAL_D1:
        raise ConfigurationError(
            f"periodic central order must be one of {PERIODIC_CENTRAL_ORDERS}, got {order}"
        )
    coef = np.array(_CENTRAL_D1[order]) / grid.spacing
    half = order // 2
    offsets = np.arange(-half, half + 1)
    _require_periodic(grid, offsets.size)
    offsets, coef = _trim_stencil(offsets, coef)
    mass = _periodic_mass(grid)
    mat = circulant_matrix(grid.n_nodes, offsets, coef)
    op = DerivativeOperator(
        "periodic_central_d1", order, grid, mass, mat, offsets, coef
    )
    _assert_report(verify_sbp_identity(op))
    return op


def build_periodic_upwind(grid: Grid, order: int) -> UpwindOperatorPair:
    """Biased pair D+/D- with D- = -D+^T (circulant reversal), M = dx * I."""
    if order not in UPWIND_ORDERS:
        raise ConfigurationError(
            f"upwind order must be one of {UPWIND_ORDERS}, got {order}"
        )
    off_p, coef_p = _biased_stencil(order)
    coef_p = coef_p / grid.spacing
    _require_periodic(grid, off_p.size + 1)
    _check_upwind_symbol(off_p, coef_p)
    off_m, coef_m = -off_p[::-1], -coef_p[::-1]  # -D+^T as a stencil
    mass = _periodic_mass(grid)
    n = grid.n_nodes
    dp = DerivativeOperator(
        "periodic_upwind_d1_plus", order, grid, mass,
        circulant_matrix(n, off_p, coef_p), off_p, coef_p,
    )
    dm = DerivativeOperator(
        "periodic_upwind_d1_minus", order, grid, mass,
        circulant_matrix(n, off_m, coef_m), off_m, coef_m,
    )
    pair = UpwindOperatorPair(dp, dm, mass, order, grid)
    _assert_report(verify_sbp_identity(pair))
    return pair


def build_periodic_d2(grid: Grid, order: int, flavor="narrow") -> DerivativeOperator:
    """Periodic second-derivative operator, symmetric against M.

    flavor "narrow" uses the classical compact stencil, "wide" squares the
    central first-derivative operator, "upwind_composite" forms D+ D-.
    """
    if flavor == "narrow":
        if order not in _NARROW_D2:
            raise ConfigurationError(f"no narrow D2 of order {order}")
        coef = np.array(_NARROW_D2[order]) / grid.spacing**2
        half = order // 2
        offsets, coef = _trim_stencil(np.arange(-half, half + 1), coef)
        kind = "periodic_d2_narrow"
    elif flavor == "wide":
        d1 = build_periodic_central_d1(grid, order)
        offsets, coef = _convolve_stencils(
            d1.offsets, d1.coefficients, d1.offsets, d1.coefficients
        )
        kind = "periodic_d2_wide"
    elif flavor == "upwind_composite":
        pair = build_periodic_upwind(grid, order)
        offsets, coef = _convolve_stencils(
            pair.d_plus.offsets, pair.d_plus.coefficients,
            pair.d_minus.offsets, pair.d_minus.coefficients,
        )
        kind = "periodic_d2_upwind_composite"
    else:
        raise ConfigurationError(f"unknown D2 flavor {flavor!r}")
    _require_periodic(grid, offsets.size)
    mass = _periodic_mass(grid)
    op = DerivativeOperator(
        kind, order, grid, mass, circulant_matrix(grid.n_nodes, offsets, coef),
        offsets, coef,
    )
    _assert_report(verify_sbp_identity(op))
    return op


# ---------------------------------------------------------------------------
# bounded builders


@lru_cache(maxsize=None)
def _bounded_closure(order):
    """Boundary closure of the diagonal-norm bounded operator (unit spacing).

    With the classical norm weights fixed, Q = M D1 is the interior
    antisymmetric band everywhere except an antisymmetric corner block
    (plus Q[0,0] = -1/2); the block entries follow from the boundary
    accuracy conditions D1 x^k = k x^(k-1), k <= p/2.  The corner size
    starts at the number of modified norm weights and grows until the
    linear system is consistent.

    Returns (norm_weights, corner_block) where corner_block is the
    upper-left c x c block of Q.
    """
    if order not in _BOUNDED_NORM:
        raise ConfigurationError(
            f"bounded central order must be one of {BOUNDED_ORDERS}, got {order}"
        )
    hw = _BOUNDED_NORM[order]
    r = len(hw)
    tau = order // 2
    half = order // 2
    interior = _CENTRAL_D1_RATIONAL[order]

    def stencil_value(offset):
        return interior[offset + half] if abs(offset) <= half else Fraction(0)

    for c in range(r, r + tau + half + 1):
        pairs = [(i, j) for i in range(c) for j in range(i + 1, c)]
        index = {pq: m for m, pq in enumerate(pairs)}
        h_full = list(hw) + [Fraction(1)] * (c - r)
        rows, rhs = [], []
        for i in range(c):
            for k in range(tau + 1):
                # sum_j Q[i, j] j^k = h_i * k * i^(k-1); move the fixed
                # diagonal (Q[0,0] = -1/2) and the interior-tail columns
                # j >= c to the right-hand side
                if k == 0:
                    target = Fraction(0)
                elif k == 1:
                    target = h_full[i]
                else:
                    target = h_full[i] * k * Fraction(i) ** (k - 1)
                if i == 0 and k == 0:
                    target += Fraction(1, 2)  # Q[0,0] = -1/2
                for j in range(c, i + half + 1):
                    target -= stencil_value(j - i) * Fraction(j) ** k
                row = [Fraction(0)] * len(pairs)
                for (a, b), m in index.items():
                    if a == i:
                        row[m] += Fraction(b) ** k
                    elif b == i:
                        row[m] -= Fraction(a) ** k
                rows.append(row)
                rhs.append(target)
        sol = _solve_rational(rows, rhs)
        if sol is not None:
            block = np.zeros((c, c))
            block[0, 0] = -0.5
            for (a, b), m in index.items():
                block[a, b] = float(sol[m])
                block[b, a] = -float(sol[m])
            return np.array([float(f) for f in hw]), block
    raise ConfigurationError(
        f"no consistent boundary closure found for bounded order {order}"
    )


def _solve_rational(rows, rhs):
    """Exact particular solution of a rational linear system, or None."""
    import sympy

    if not rows or not rows[0]:
        return [] if all(f == 0 for f in rhs) else None
    mat = sympy.Matrix([[sympy.Rational(f) for f in row] for row in rows])
    vec = sympy.Matrix([sympy.Rational(f) for f in rhs])
    try:
        sol, _params = mat.gauss_jordan_solve(vec)
    except ValueError:
        return None
    sol = sol.subs({p: 0 for p in sol.free_symbols})
    return [Fraction(int(v.p), int(v.q)) for v in sol]


def build_bounded_central_d1(grid: Grid, order: int) -> DerivativeOperator:
    """Diagonal-norm bounded SBP operator: interior order p, boundary order p/2."""
    if grid.is_periodic:
        raise ConfigurationError("bounded operator requires a bounded grid")
    hw, block = _bounded_closure(order)
    c = block.shape[0]
    n = grid.n_nodes
    if n < 2 * c + 1:
        raise ConfigurationError(
            f"grid with {n} nodes below closure size {2 * c + 1} for order {order}"
        )
    half = order // 2
    interior = np.array(_CENTRAL_D1[order])

    q = np.zeros((n, n))
    for k in range(-half, half + 1):
        val = interior[k + half]
        if val != 0.0:
            idx = np.arange(max(0, -k), min(n, n - k))
            q[idx, idx + k] = val
    q[:c, :c] = block
    q[n - c:, n - c:] = -block[::-1, ::-1]

    weights = np.ones(n)
    weights[: hw.size] = hw
    weights[n - hw.size:] = hw[::-1]
    mass = MassMatrix(weights * grid.spacing)
    mat = q / weights[:, None] / grid.spacing
    op = DerivativeOperator(
        "bounded_central_d1", order, grid, mass, mat, closure_rows=c
    )
    _assert_report(verify_sbp_identity(op))
    return op


def build_bounded_upwind(grid: Grid, order: int) -> UpwindOperatorPair:
    """Bounded upwind pair D+/- = D1 -/+ M^-1 S with S = -c Delta^T Delta.

    Delta is the p-th undivided difference, so S is symmetric negative
    semidefinite and annihilates polynomials below degree p; the pair
    satisfies M D+ + D-^T M = e_R e_R^T - e_L e_L^T exactly.
    """
    central = build_bounded_central_d1(grid, order)
    n = grid.n_nodes
    diff = np.zeros((n - order, n))
    binom = np.array([(-1) ** j * _binomial(order, j) for j in range(order + 1)])
    for i in range(n - order):
        diff[i, i : i + order + 1] = binom
    strength = 4.0 ** (-order) / grid.spacing
    s = -strength * (diff.T @ diff)
    minv = 1.0 / central.mass.diagonal
    dp = DerivativeOperator(
        "bounded_upwind_d1_plus", order, grid, central.mass,
        central.matrix + minv[:, None] * s, closure_rows=central.closure_rows,
    )
    dm = DerivativeOperator(
        "bounded_upwind_d1_minus", order, grid, central.mass,
        central.matrix - minv[:, None] * s, closure_rows=central.closure_rows,
    )
    pair = UpwindOperatorPair(dp, dm, central.mass, order, grid)
    _assert_report(verify_sbp_identity(pair))
    return pair


def _binomial(n, k):
    return comb(n, k)


# ---------------------------------------------------------------------------
# identity verification


@dataclass(frozen=True)
class IdentityReport:
    kind: str
    residuals: dict
    threshold: float
    passed: bool


def _assert_report(report: IdentityReport):
    if not report.passed:
        raise ConfigurationError(
            f"SBP identity violated for {report.kind}: {report.residuals}"
        )


def verify_sbp_identity(op) -> IdentityReport:
    """Residuals of the defining SBP identities, with a PASS flag.

    The threshold is 1e-12 * scale with scale = max|M| * max-row-sum|D|.
    """
    if isinstance(op, UpwindOperatorPair):
        m = np.diag(op.mass.diagonal)
        dp, dm = op.d_plus.matrix, op.d_minus.matrix
        res = m @ dp + dm.T @ m
        if not op.grid.is_periodic:
            n = op.grid.n_nodes
            res = res.copy()
            res[n - 1, n - 1] -= 1.0
            res[0, 0] += 1.0
        scale = np.max(op.mass.diagonal) * max(
            np.max(np.sum(np.abs(dp), axis=1)), 1.0
        )
        residuals = {
            "adjoint": float(np.max(np.abs(res))),
            "consistency_plus": float(np.max(np.abs(dp @ np.ones(dp.shape[0])))),
            "consistency_minus": float(np.max(np.abs(dm @ np.ones(dp.shape[0])))),
        }
        if op.d_plus.offsets is not None:
            thetas = np.linspace(0, 2 * np.pi, 720, endpoint=False)
            sym = _symbol(op.d_plus.offsets, op.d_plus.coefficients, thetas).real
            # S eigenvalues are dx * Re(symbol of D+); must be <= 0
            residuals["dissipation"] = float(
                max(np.max(sym) * np.max(op.mass.diagonal), 0.0)
            )
        threshold = 1e-12 * scale
        passed = all(v <= threshold for v in residuals.values())
        return IdentityReport("upwind_pair", residuals, threshold, passed)

    m = np.diag(op.mass.diagonal)
    d = op.matrix
    n = d.shape[0]
    scale = np.max(op.mass.diagonal) * max(np.max(np.sum(np.abs(d), axis=1)), 1.0)
    residuals = {}
    if op.kind == "periodic_central_d1":
        residuals["periodic_sbp"] = float(np.max(np.abs(m @ d + d.T @ m)))
        residuals["consistency"] = float(np.max(np.abs(d @ np.ones(n))))
    elif op.kind == "bounded_central_d1":
        res = m @ d + d.T @ m
        res = res.copy()
        res[n - 1, n - 1] -= 1.0
        res[0, 0] += 1.0
        residuals["bounded_sbp"] = float(np.max(np.abs(res)))
        residuals["consistency"] = float(np.max(np.abs(d @ np.ones(n))))
    elif op.kind.startswith("periodic_d2"):
        residuals["symmetry"] = float(np.max(np.abs(m @ d - d.T @ m)))
        residuals["consistency"] = float(np.max(np.abs(d @ np.ones(n))))
        moments = _stencil_moments(op.offsets, op.coefficients, 1)
        residuals["annihilates_linears"] = float(abs(moments[1]))
    elif op.kind.startswith("bounded_upwind"):
        # handled through the pair report
        residuals["consistency"] = float(np.max(np.abs(d @ np.ones(n))))
    else:
        raise ConfigurationError(f"cannot verify operator kind {op.kind!r}")
    threshold = 1e-12 * scale
    passed = all(v <= threshold for v in residuals.values())
    return IdentityReport(op.kind, residuals, threshold, passed)


# ---------------------------------------------------------------------------
# operator bundles


@dataclass(frozen=True, eq=False)
class SbpOperatorSet:
    """Operators sharing one grid and norm, as required by a model variant."""

    grid: Grid
    accuracy_order: int
    mass: MassMatrix
    d1: DerivativeOperator | None = None
    d2: DerivativeOperator | None = None
    upwind: UpwindOperatorPair | None = None

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ConfigurationError(
                    f"operator set lacks {name!r} required by the chosen variant"
                )


def periodic_operators(grid, order, *, upwind=False, d2_flavor="narrow"):
    """Convenience bundle for periodic semidiscretizations.

    With upwind=True the central first derivative is the pair average and
    the second derivative the upwind composite, so all stencils stay narrow.
    """
    if upwind:
        pair = build_periodic_upwind(grid, order)
        d1 = pair.central_average()
        d2 = build_periodic_d2(grid, order, "upwind_composite")
        return SbpOperatorSet(grid, order, pair.mass, d1=d1, d2=d2, upwind=pair)
    d1 = build_periodic_central_d1(grid, order)
    d2 = build_periodic_d2(grid, order, d2_flavor) if d2_flavor else None
    return SbpOperatorSet(grid, order, d1.mass, d1=d1, d2=d2)


def bounded_operators(grid, order, *, upwind=False):
    d1 = build_bounded_central_d1(grid, order)
    pair = build_bounded_upwind(grid, order) if upwind else None
    return SbpOperatorSet(grid, order, d1.mass, d1=d1, upwind=pair)
