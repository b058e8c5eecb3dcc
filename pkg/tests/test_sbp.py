import numpy as np
import pytest

from dispersive_sw.errors import ConfigurationError
from dispersive_sw.grid import make_uniform_grid
from dispersive_sw.sbp import (
    BOUNDED_ORDERS,
    PERIODIC_CENTRAL_ORDERS,
    UPWIND_ORDERS,
    DerivativeOperator,
    build_bounded_central_d1,
    build_bounded_upwind,
    build_periodic_central_d1,
    build_periodic_d2,
    build_periodic_upwind,
    periodic_operators,
    verify_sbp_identity,
)

PGRID = make_uniform_grid(0.0, 1.0, 64, "periodic")
BGRID = make_uniform_grid(-1.0, 1.0, 64, "bounded")


def test_periodic_p2_is_the_classical_stencil():
    op = build_periodic_central_d1(PGRID, 2)
    dx = PGRID.spacing
    assert np.allclose(op.mass.diagonal, dx)
    row = op.matrix[3]
    assert row[2] == -0.5 / dx and row[4] == 0.5 / dx and row[3] == 0.0
    # wrap-around rows of the displayed circulant
    assert op.matrix[0, -1] == -0.5 / dx and op.matrix[-1, 0] == 0.5 / dx


@pytest.mark.parametrize("order", PERIODIC_CENTRAL_ORDERS)
def test_periodic_central_identities(order):
    op = build_periodic_central_d1(PGRID, order)
    report = verify_sbp_identity(op)
    assert report.passed
    assert np.max(np.abs(op.apply(np.ones(64)))) == 0.0


@pytest.mark.parametrize("order", PERIODIC_CENTRAL_ORDERS)
def test_periodic_central_accuracy_eoc(order):
    errs = []
    for n in (64, 128):
        grid = make_uniform_grid(0.0, 1.0, n, "periodic")
        op = build_periodic_central_d1(grid, order)
        u = np.sin(2 * np.pi * grid.nodes)
        exact = 2 * np.pi * np.cos(2 * np.pi * grid.nodes)
        errs.append(np.max(np.abs(op.apply(u) - exact)))
    eoc = np.log2(errs[0] / errs[1])
    assert abs(eoc - order) <= 0.25


@pytest.mark.parametrize("order", UPWIND_ORDERS)
def test_upwind_pair_identities_and_dissipation(order):
    pair = build_periodic_upwind(PGRID, order)
    report = verify_sbp_identity(pair)
    assert report.passed
    m = np.diag(pair.mass.diagonal)
    residual = m @ pair.d_plus.matrix + pair.d_minus.matrix.T @ m
    assert np.max(np.abs(residual)) == 0.0  # exact by the transpose construction
    rng = np.random.default_rng(5)
    for _ in range(100):
        u = rng.normal(size=64)
        quad = float(u @ (m @ (pair.d_minus.matrix @ u)))
        tol = 1e-12 * float(u @ (m @ u))
        assert quad >= -tol
        assert float(u @ (m @ (pair.d_plus.matrix @ u))) <= tol


def test_upwind_p1_is_forward_backward():
    pair = build_periodic_upwind(PGRID, 1)
    dx = PGRID.spacing
    row = pair.d_plus.matrix[5]
    assert row[5] == -1.0 / dx and row[6] == 1.0 / dx
    row = pair.d_minus.matrix[5]
    assert row[5] == 1.0 / dx and row[4] == -1.0 / dx
    # dissipation matrix is dx/2 times the periodic second difference
    s = 0.5 * np.diag(pair.mass.diagonal) @ (
        pair.d_plus.matrix - pair.d_minus.matrix
    )
    d2 = build_periodic_d2(PGRID, 2, "narrow").matrix
    np.testing.assert_allclose(s, 0.5 * dx**2 * d2, atol=1e-14)


def test_upwind_p1_average_is_central_p2():
    pair = build_periodic_upwind(PGRID, 1)
    avg = pair.central_average()
    expect = build_periodic_central_d1(PGRID, 2)
    np.testing.assert_allclose(avg.matrix, expect.matrix, atol=1e-15)
    assert avg.accuracy_order == 2


@pytest.mark.parametrize("order", UPWIND_ORDERS)
def test_upwind_average_is_valid_central_operator(order):
    pair = build_periodic_upwind(PGRID, order)
    avg = pair.central_average()
    assert verify_sbp_identity(avg).passed


@pytest.mark.parametrize("flavor", ["narrow", "wide", "upwind_composite"])
def test_periodic_d2_symmetry(flavor):
    op = build_periodic_d2(PGRID, 4, flavor)
    assert verify_sbp_identity(op).passed
    m = np.diag(op.mass.diagonal)
    assert np.max(np.abs(m @ op.matrix - op.matrix.T @ m)) <= 1e-12 * np.max(
        np.abs(op.matrix)
    )


def test_narrow_d2_p2_stencil():
    op = build_periodic_d2(PGRID, 2, "narrow")
    dx2 = PGRID.spacing**2
    row = op.matrix[7]
    assert row[6] == 1.0 / dx2 and row[7] == -2.0 / dx2 and row[8] == 1.0 / dx2


def test_wide_d2_equals_squared_d1():
    d1 = build_periodic_central_d1(PGRID, 4)
    wide = build_periodic_d2(PGRID, 4, "wide")
    np.testing.assert_allclose(wide.matrix, d1.matrix @ d1.matrix, atol=1e-10)


@pytest.mark.parametrize("order", PERIODIC_CENTRAL_ORDERS)
def test_periodic_d2_accuracy(order):
    # resolutions kept coarse enough that the error sits above the
    # eps / dx^2 roundoff floor of second-derivative stencils
    errs = []
    for n in (16, 32):
        grid = make_uniform_grid(0.0, 1.0, n, "periodic")
        op = build_periodic_d2(grid, order, "narrow")
        u = np.sin(2 * np.pi * grid.nodes)
        exact = -(2 * np.pi) ** 2 * u
        errs.append(np.max(np.abs(op.apply(u) - exact)))
    eoc = np.log2(errs[0] / errs[1])
    assert abs(eoc - order) <= 0.25


@pytest.mark.parametrize("order", BOUNDED_ORDERS)
def test_bounded_identities_and_orders(order):
    op = build_bounded_central_d1(BGRID, order)
    assert verify_sbp_identity(op).passed
    x = BGRID.nodes
    c = op.closure_rows
    # boundary rows exact through p/2, interior rows through p
    for k in range(order // 2 + 1):
        expect = k * x ** (k - 1) if k >= 1 else np.zeros_like(x)
        assert np.max(np.abs(op.matrix @ x**k - expect)) <= 1e-10
    for k in range(order // 2 + 1, order + 1):
        res = (op.matrix @ x**k - k * x ** (k - 1))[c:-c]
        assert np.max(np.abs(res)) <= 1e-10


def test_bounded_p2_matches_displayed_example():
    grid = make_uniform_grid(0.0, 4.0, 5, "bounded")
    op = build_bounded_central_d1(grid, 2)
    expect = np.array(
        [
            [-1, 1, 0, 0, 0],
            [-0.5, 0, 0.5, 0, 0],
            [0, -0.5, 0, 0.5, 0],
            [0, 0, -0.5, 0, 0.5],
            [0, 0, 0, -1, 1],
        ]
    )
    np.testing.assert_allclose(op.matrix, expect, atol=1e-15)
    np.testing.assert_allclose(op.mass.diagonal, [0.5, 1, 1, 1, 0.5], atol=1e-15)


def test_bounded_p4_matches_classical_coefficients():
    grid = make_uniform_grid(0.0, 14.0, 15, "bounded")
    op = build_bounded_central_d1(grid, 4)
    np.testing.assert_allclose(
        op.matrix[0, :6] * grid.spacing,
        [-24 / 17, 59 / 34, -4 / 17, -3 / 34, 0, 0],
        atol=1e-14,
    )
    np.testing.assert_allclose(
        op.matrix[3, :6] * grid.spacing,
        [3 / 98, 0, -59 / 98, 0, 32 / 49, -4 / 49],
        atol=1e-14,
    )
    np.testing.assert_allclose(
        op.mass.diagonal[:5] / grid.spacing,
        [17 / 48, 59 / 48, 43 / 48, 49 / 48, 1.0],
        atol=1e-14,
    )


def test_bounded_telescoping():
    rng = np.random.default_rng(2)
    for order in BOUNDED_ORDERS:
        op = build_bounded_central_d1(BGRID, order)
        u = rng.normal(size=64)
        total = float(op.mass.diagonal @ (op.matrix @ u))
        assert abs(total - (u[-1] - u[0])) <= 1e-12


@pytest.mark.parametrize("order", BOUNDED_ORDERS)
def test_bounded_upwind_pair(order):
    pair = build_bounded_upwind(BGRID, order)
    assert verify_sbp_identity(pair).passed
    m = np.diag(pair.mass.diagonal)
    s = 0.5 * m @ (pair.d_plus.matrix - pair.d_minus.matrix)
    np.testing.assert_allclose(s, s.T, atol=1e-12)
    eigs = np.linalg.eigvalsh(s)
    assert np.max(eigs) <= 1e-10 * max(1.0, np.max(np.abs(s)))


def test_lemma_one_vector_annihilation():
    # 1^T M D = 0 for every periodic operator
    ops = [build_periodic_central_d1(PGRID, p) for p in PERIODIC_CENTRAL_ORDERS]
    ops += [build_periodic_d2(PGRID, p, "narrow") for p in PERIODIC_CENTRAL_ORDERS]
    for pair_order in UPWIND_ORDERS:
        pair = build_periodic_upwind(PGRID, pair_order)
        ops += [pair.d_plus, pair.d_minus]
    for op in ops:
        lhs = op.mass.diagonal @ op.matrix
        assert np.max(np.abs(lhs)) <= 1e-13 * np.max(np.abs(op.matrix)), op.kind


def test_lemma_central_quadratic_form_vanishes():
    rng = np.random.default_rng(9)
    op = build_periodic_central_d1(PGRID, 6)
    m = op.mass.diagonal
    for _ in range(100):
        u = rng.normal(size=64)
        norm2 = float(np.sum(m * u * u))
        assert abs(np.sum(m * u * op.apply(u))) <= 1e-12 * norm2


def test_verify_flags_perturbed_operator():
    op = build_periodic_central_d1(PGRID, 4)
    bad = op.matrix.copy()
    bad[3, 7] += 1e-6
    tampered = DerivativeOperator(
        op.kind, op.accuracy_order, op.grid, op.mass, bad, op.offsets,
        op.coefficients,
    )
    report = verify_sbp_identity(tampered)
    assert not report.passed
    expected = 1e-6 * op.mass.diagonal[3]
    assert report.residuals["periodic_sbp"] == pytest.approx(expected, rel=1e-6)


def test_unsupported_orders_rejected():
    with pytest.raises(ConfigurationError):
        build_periodic_central_d1(PGRID, 3)
    with pytest.raises(ConfigurationError):
        build_periodic_upwind(PGRID, 5)
    with pytest.raises(ConfigurationError):
        build_bounded_central_d1(BGRID, 8)
    with pytest.raises(ConfigurationError):
        build_periodic_d2(PGRID, 4, "spectral")


def test_grid_too_small_for_stencil():
    tiny = make_uniform_grid(0.0, 1.0, 6, "periodic")
    with pytest.raises(ConfigurationError):
        build_periodic_central_d1(tiny, 8)
    tinyb = make_uniform_grid(0.0, 1.0, 8, "bounded")
    with pytest.raises(ConfigurationError):
        build_bounded_central_d1(tinyb, 6)


def test_bounded_on_periodic_grid_rejected():
    with pytest.raises(ConfigurationError):
        build_bounded_central_d1(PGRID, 2)
    with pytest.raises(ConfigurationError):
        build_periodic_central_d1(BGRID, 2)


def test_operator_set_requirements():
    ops = periodic_operators(PGRID, 4)
    ops.require("d1", "d2")
    with pytest.raises(ConfigurationError):
        ops.require("upwind")
