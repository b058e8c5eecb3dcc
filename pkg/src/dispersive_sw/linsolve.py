"""Reusable factorizations for the elliptic systems of both models.

Matrices assembled from bounded operators are banded and go through
LAPACK's banded LU (gbtrf/gbtrs); periodic operators produce circulant
wrap-around corners, which fall back to dense LU.  The bandwidth is
measured from the assembled matrix, never assumed.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import DimensionError, FactorizationError

#: use the banded path when the total band width stays below this fraction of N
BANDED_FRACTION = 0.5


def measure_bandwidth(a: np.ndarray, tol: float = 0.0):
    """(lower, upper) bandwidth of a; entries with |a_ij| <= tol count as zero."""
    nz = np.argwhere(np.abs(a) > tol)
    if nz.size == 0:
        return 0, 0
    diff = nz[:, 0] - nz[:, 1]
    return int(max(diff.max(), 0)), int(max((-diff).max(), 0))


def circulant_band_width(a: np.ndarray, tol: float = 0.0) -> int:
    """Bandwidth counted modulo n, so wrap-around corners stay narrow."""
    n = a.shape[0]
    nz = np.argwhere(np.abs(a) > tol)
    if nz.size == 0:
        return 0
    offsets = (nz[:, 1] - nz[:, 0] + n // 2) % n - n // 2
    return int(np.max(np.abs(offsets)))


def _pack_banded(a: np.ndarray, lower: int, upper: int) -> np.ndarray:
    """LAPACK gbtrf storage (2*lower + upper + 1, n) of a banded matrix."""
    n = a.shape[0]
    ab = np.zeros((2 * lower + upper + 1, n))
    for off in range(-lower, upper + 1):
        d = np.diagonal(a, off)
        if off >= 0:
            ab[lower + upper - off, off : off + d.size] = d
        else:
            ab[lower + upper - off, : d.size] = d
    return ab


class DenseFactorization:
    """Pivoted dense LU, reusable across right-hand sides."""

    def __init__(self, a: np.ndarray):
        self.n = a.shape[0]
        self._scale = np.max(np.abs(a))
        lu, piv = sla.lu_factor(a, check_finite=False)
        self._check_pivots(np.abs(np.diag(lu)))
        self.lu, self.piv = lu, piv

    def _check_pivots(self, pivots):
        floor = self.n * np.finfo(float).eps * max(self._scale, 1e-300)
        smallest = float(pivots.min()) if pivots.size else 0.0
        if smallest <= floor:
            raise FactorizationError(
                f"matrix singular to working precision (pivot {smallest:.3e})",
                pivot=smallest,
            )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise DimensionError(
                f"rhs of length {rhs.shape[0]} does not match system size {self.n}"
            )
        return sla.lu_solve((self.lu, self.piv), rhs, check_finite=False)


class BandedFactorization:
    """Banded LU via LAPACK gbtrf/gbtrs."""

    def __init__(self, a: np.ndarray, lower: int, upper: int, *, packed=False):
        self.lower, self.upper = lower, upper
        if packed:
            ab = a
            self.n = a.shape[1]
            self._scale = np.max(np.abs(ab))
        else:
            self.n = a.shape[0]
            self._scale = np.max(np.abs(a))
            ab = _pack_banded(a, lower, upper)
        lu, piv, info = lapack.dgbtrf(ab, kl=lower, ku=upper)
        if info > 0:
            raise FactorizationError(
                f"banded matrix singular to working precision (U[{info - 1}] = 0)",
                pivot=0.0,
            )
        if info < 0:
            raise FactorizationError(f"gbtrf failed with info={info}")
        diag = np.abs(lu[lower + upper, :])
        floor = self.n * np.finfo(float).eps * max(self._scale, 1e-300)
        if diag.size and float(diag.min()) <= floor:
            raise FactorizationError(
                f"banded matrix singular to working precision (pivot {diag.min():.3e})",
                pivot=float(diag.min()),
            )
        self.lu, self.piv = lu, piv

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise DimensionError(
                f"rhs of length {rhs.shape[0]} does not match system size {self.n}"
            )
        x, info = lapack.dgbtrs(self.lu, self.lower, self.upper, rhs, self.piv)
        if info != 0:
            raise FactorizationError(f"gbtrs failed with info={info}")
        return x


class PeriodicBandedFactorization:
    """Circulant-banded matrix with wrap-around corners (Woodbury).

    A = B + U V with B the banded core and U V the two corner blocks of
    rank at most 2w; solves cost O(n w^2) instead of the dense O(n^3)
    factorization the wrap-around would otherwise force.
    """

    def __init__(self, a: np.ndarray, width: int | None = None):
        n = a.shape[0]
        w = circulant_band_width(a) if width is None else width
        if w == 0 or 4 * w >= n:
            raise FactorizationError(
                f"circulant width {w} too large for the periodic-banded path"
            )
        self.n, self.w = n, w
        core = a.copy()
        top_right = a[:w, n - w :].copy()
        bottom_left = a[n - w :, :w].copy()
        core[:w, n - w :] = 0.0
        core[n - w :, :w] = 0.0
        self._finish(BandedFactorization(core, w, w), top_right, bottom_left)

    def _finish(self, core_fact, top_right, bottom_left):
        n, w = self.n, self.w
        self._core = core_fact
        u = np.zeros((n, 2 * w))
        u[:w, :w] = np.eye(w)
        u[n - w :, w:] = np.eye(w)
        v = np.zeros((2 * w, n))
        v[:w, n - w :] = top_right
        v[w:, :w] = bottom_left
        bu = self._core.solve(u)
        capacitance = np.eye(2 * w) + v @ bu
        try:
            self._cap = sla.lu_factor(capacitance, check_finite=False)
        except sla.LinAlgError as exc:
            raise FactorizationError(f"singular capacitance block: {exc}") from exc
        self._bu, self._v = bu, v

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise DimensionError(
                f"rhs of length {rhs.shape[0]} does not match system size {self.n}"
            )
        z = self._core.solve(rhs)
        small = sla.lu_solve(self._cap, self._v @ z, check_finite=False)
        return z - self._bu @ small


class ShiftedSolver:
    """Repeatedly factor (static + diag(d)) for changing diagonals d.

    The static part is analyzed once; per call only the diagonal moves,
    which keeps banded and periodic-banded systems cheap to re-factor.
    Used by the velocity equation of the Svärd-Kalisch model, whose
    system matrix depends on the water height.
    """

    def __init__(self, static_part: np.ndarray):
        self.n = static_part.shape[0]
        self._mode = "dense"
        self._static = np.asarray(static_part, dtype=float)
        cw = circulant_band_width(self._static)
        lower, upper = measure_bandwidth(self._static)
        if 0 < cw and 4 * cw < self.n and lower + upper > 2 * cw:
            self._mode = "periodic"
            self.w = cw
            core = self._static.copy()
            self._top_right = core[: self.w, self.n - self.w :].copy()
            self._bottom_left = core[self.n - self.w :, : self.w].copy()
            core[: self.w, self.n - self.w :] = 0.0
            core[self.n - self.w :, : self.w] = 0.0
            self._ab0 = _pack_banded(core, self.w, self.w)
        elif lower + upper + 1 <= BANDED_FRACTION * self.n:
            self._mode = "banded"
            self._lower, self._upper = lower, upper
            self._ab0 = _pack_banded(self._static, lower, upper)

    def factor(self, diagonal: np.ndarray):
        diagonal = np.asarray(diagonal, dtype=float)
        if diagonal.shape[0] != self.n:
            raise DimensionError("diagonal length does not match system size")
        try:
            if self._mode == "periodic":
                ab = self._ab0.copy()
                ab[2 * self.w, :] += diagonal
                fact = PeriodicBandedFactorization.__new__(PeriodicBandedFactorization)
                fact.n, fact.w = self.n, self.w
                fact._finish(
                    BandedFactorization(ab, self.w, self.w, packed=True),
                    self._top_right,
                    self._bottom_left,
                )
                return fact
            if self._mode == "banded":
                ab = self._ab0.copy()
                ab[self._lower + self._upper, :] += diagonal
                return BandedFactorization(ab, self._lower, self._upper, packed=True)
        except FactorizationError:
            pass  # fall through to the dense path
        full = self._static.copy()
        np.fill_diagonal(full, np.diagonal(full) + diagonal)
        return DenseFactorization(full)


def factor(a: np.ndarray, structure=None):
    """Factor a square matrix; banded storage when the band is narrow enough.

    structure: None (measure the bandwidth), "dense", or ("banded", l, u).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if structure == "dense":
        return DenseFactorization(a)
    if structure is None:
        lower, upper = measure_bandwidth(a)
        cw = circulant_band_width(a)
        if 0 < cw and 4 * cw < a.shape[0] and lower + upper > 2 * cw:
            try:
                return PeriodicBandedFactorization(a, cw)
            except FactorizationError:
                pass
    else:
        tag, lower, upper = structure
        if tag != "banded":
            raise DimensionError(f"unknown structure tag {tag!r}")
    if lower + upper + 1 <= BANDED_FRACTION * a.shape[0]:
        return BandedFactorization(a, lower, upper)
    return DenseFactorization(a)


def solve(factorization, rhs: np.ndarray) -> np.ndarray:
    return factorization.solve(rhs)
