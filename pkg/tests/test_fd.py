import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from pemplate.fd import (
    BoundaryCondition, GridSpec, SparseOperator, assemble_biharmonic, assemble_laplacian,
    estimate_convergence_order,
)

SS = BoundaryCondition.SIMPLY_SUPPORTED
CL = BoundaryCondition.CLAMPED


def ghost_filled_biharmonic(n, bc):
    """Dense oracle: apply the 13-point stencil to each unit vector on an
    array padded with boundary and ghost layers filled explicitly."""
    eps = 1.0 / (n + 1)
    s = 1 if bc is CL else -1
    out = np.zeros((n * n, n * n))
    for k in range(n * n):
        U = np.zeros((n + 4, n + 4))           # layers: ghost, boundary, interior..., boundary, ghost
        U[2:n + 2, 2:n + 2].flat[k] = 1.0
        U[0, :] = s * U[2, :]
        U[-1, :] = s * U[-3, :]
        U[:, 0] = s * U[:, 2]
        U[:, -1] = s * U[:, -3]
        c = U[2:-2, 2:-2]
        r = (20 * c
             - 8 * (U[1:-3, 2:-2] + U[3:-1, 2:-2] + U[2:-2, 1:-3] + U[2:-2, 3:-1])
             + 2 * (U[1:-3, 1:-3] + U[1:-3, 3:-1] + U[3:-1, 1:-3] + U[3:-1, 3:-1])
             + (U[:-4, 2:-2] + U[4:, 2:-2] + U[2:-2, :-4] + U[2:-2, 4:]))
        out[:, k] = r.ravel() / eps**4
    return out


@pytest.mark.parametrize("bc", [SS, CL])
@pytest.mark.parametrize("n", [5, 6, 9])
def test_biharmonic_matches_ghost_oracle(n, bc):
    B = assemble_biharmonic(GridSpec(n), bc).toarray()
    ref = ghost_filled_biharmonic(n, bc)
    assert np.abs(B - ref).max() <= 1e-12 * np.abs(ref).max()


def test_laplacian_sine_eigenpair():
    grid = GridSpec(9)
    L = assemble_laplacian(grid, SS)
    u = grid.sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    mu = 2 * (1 - math.cos(math.pi * grid.eps)) * 2 / grid.eps**2
    assert np.abs(L @ u + mu * u).max() <= 1e-12 * mu


def test_laplacian_shape_and_constant_rows():
    grid = GridSpec(5)
    L = assemble_laplacian(grid, SS)
    assert L.shape == (25, 25)
    assert np.diff(L.matrix.indptr).max() <= 5
    r = L @ np.ones(25)
    assert np.all(r[grid.depth() >= 2] == 0)


def test_biharmonic_of_constant_vanishes_in_deep_interior():
    grid = GridSpec(9)
    for bc in (SS, CL):
        B = assemble_biharmonic(grid, bc)
        r = B @ np.ones(grid.size)
        assert np.abs(r[grid.depth() >= 3]).max() <= 1e-13 * abs(B.matrix).max()


@pytest.mark.parametrize("n", [7, 15])
def test_quartic_is_exact(n):
    # dyadic spacing keeps every sample and sum exact in binary
    grid = GridSpec(n)
    r = assemble_biharmonic(grid, SS) @ grid.sample(lambda x, y: x**4)
    deep = grid.depth() >= 3
    assert np.all(r[deep] == 24.0)


def test_simply_supported_biharmonic_is_laplacian_squared():
    for n in (5, 8, 11):
        grid = GridSpec(n)
        L = assemble_laplacian(grid, SS).matrix
        B = assemble_biharmonic(grid, SS).matrix
        assert abs(L @ L - B).max() <= 1e-12 * abs(B).max()


def test_clamped_differs_from_laplacian_squared():
    grid = GridSpec(6)
    L = assemble_laplacian(grid, CL).matrix
    B = assemble_biharmonic(grid, CL).matrix
    assert abs(L @ L - B).max() > 1.0


@pytest.mark.parametrize("bc", [SS, CL])
@pytest.mark.parametrize("n", [5, 7, 10])
def test_positive_definite_by_inverse_iteration(n, bc):
    B = assemble_biharmonic(GridSpec(n), bc)
    smallest = spla.eigsh(B.matrix.tocsc(), k=1, sigma=0, which="LM", return_eigenvectors=False)[0]
    assert smallest > 0
    assert smallest == pytest.approx(np.linalg.eigvalsh(B.toarray()).min(), rel=1e-8)


def test_sine_modes_diagonalize_both_operators():
    grid = GridSpec(8)
    L = assemble_laplacian(grid, SS)
    B = assemble_biharmonic(grid, SS)
    e = grid.eps
    mu = lambda j: 2 * (1 - math.cos(j * math.pi * e)) / e**2
    for m, k in [(1, 1), (2, 5), (8, 3)]:
        phi = grid.sample(lambda x, y: np.sin(m * np.pi * x) * np.sin(k * np.pi * y))
        lam = mu(m) + mu(k)
        assert np.abs(L @ phi + lam * phi).max() <= 1e-10 * lam
        assert np.abs(B @ phi - lam**2 * phi).max() <= 1e-10 * lam**2


def test_sine_mode_convergence_order():
    study = estimate_convergence_order(
        lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
        lambda x, y: 4 * np.pi**4 * np.sin(np.pi * x) * np.sin(np.pi * y),
        SS, ns=(7, 15, 31, 63),
    )
    assert not study.exact
    assert 1.9 <= study.order <= 2.1
    ratios = study.errors[:-1] / study.errors[1:]
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_quartic_study_reports_exact():
    study = estimate_convergence_order(lambda x, y: x**4 + x * y**3, lambda x, y: 24.0 + 0 * x,
                                       SS, ns=(7, 15, 31), margin=2)
    assert study.exact and str(study) == "exact"


def test_convergence_needs_three_levels():
    with pytest.raises(ValueError, match="3 refinement"):
        estimate_convergence_order(lambda x, y: x, lambda x, y: x, SS, ns=(7, 15))


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(0)
    with pytest.raises(ValueError, match="n >= 5"):
        assemble_biharmonic(GridSpec(4), SS)
    g = GridSpec(9)
    assert g.eps * (g.n + 1) == 1.0


def test_coo_text_round_trip():
    B = assemble_biharmonic(GridSpec(5), CL)
    text = B.to_coo_text()
    assert text.startswith("# n 25 symmetric 1\n")
    back = SparseOperator.from_coo_text(text)
    assert back.symmetric
    assert (back.matrix != B.matrix).nnz == 0
    with pytest.raises(ValueError, match="line 2"):
        SparseOperator.from_coo_text("# n 2\n0 1\n")


def test_bc_parse():
    assert BoundaryCondition.parse("Simply-Supported") is SS
    assert BoundaryCondition.parse("clamped") is CL
    with pytest.raises(ValueError, match="unknown boundary"):
        BoundaryCondition.parse("free")


@settings(max_examples=20, deadline=None)
@given(n=st.integers(5, 12), bc=st.sampled_from([SS, CL]))
def test_structure_properties(n, bc):
    grid = GridSpec(n)
    B = assemble_biharmonic(grid, bc).matrix
    L = assemble_laplacian(grid, bc).matrix
    assert abs(B - B.T).max() == 0
    assert abs(L - L.T).max() == 0
    rows = np.asarray(B.sum(axis=1)).ravel()
    assert np.abs(rows[grid.depth() >= 3]).max() <= 1e-13 * abs(B).max()
