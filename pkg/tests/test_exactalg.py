import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, ZZ as SZZ, GF as SGF
from sympy.matrices.normalforms import invariant_factors

from derivator.errors import UnsupportedRing
from derivator.exactalg import (
    GF, QQ, ZZ, ExactMatrix, GradedPoly, ModulePresentation, Subquotient, determinant, graded_slice,
    homology_at, image_basis, integer_invariants, inverse, kernel, matrix, parse_ring, rank, snf,
    solve, sub_map_is_iso,
)


def small_int_matrices(max_dim=5, spread=6):
    return st.integers(1, max_dim).flatmap(
        lambda m: st.integers(1, max_dim).flatmap(
            lambda n: st.lists(st.lists(st.integers(-spread, spread), min_size=n, max_size=n),
                               min_size=m, max_size=m)))


def sympy_invariants(data):
    inv = invariant_factors(Matrix(data), domain=SZZ)
    return tuple(abs(int(x)) for x in inv if int(x) != 0)


@settings(max_examples=60, deadline=None)
@given(small_int_matrices())
def test_invariant_factors_match_sympy(data):
    A = matrix(ZZ, data)
    assert integer_invariants(A) == sympy_invariants(data)


@settings(max_examples=40, deadline=None)
@given(small_int_matrices())
def test_snf_transforms(data):
    A = matrix(ZZ, data)
    res = snf(A)
    assert res.U @ A @ res.V == res.D
    diag = [res.D.rows[i].get(i, 0) for i in range(min(A.nrows, A.ncols))]
    nz = [d for d in diag if d]
    assert tuple(nz) == res.invariant_factors
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0


@settings(max_examples=40, deadline=None)
@given(small_int_matrices(), st.sampled_from([2, 3, 5, 7]))
def test_rank_mod_p_matches_sympy(data, p):
    A = matrix(GF(p), data)
    expected = Matrix(data).applyfunc(lambda x: x % p)
    # rank over F_p from sympy's DomainMatrix
    from sympy.polys.matrices import DomainMatrix
    dm = DomainMatrix.from_Matrix(expected).convert_to(SGF(p))
    assert rank(A) == dm.rank()


@settings(max_examples=40, deadline=None)
@given(small_int_matrices(), st.sampled_from(["Z", "Q", "F3"]))
def test_kernel_is_kernel(data, rname):
    ring = parse_ring(rname)
    A = matrix(ring, data)
    K = kernel(A)
    assert (A @ K).is_zero()
    assert K.ncols == A.ncols - rank(A)


@settings(max_examples=40, deadline=None)
@given(small_int_matrices(4, 4))
def test_solve_recovers_products(data):
    A = matrix(ZZ, data)
    x = ExactMatrix.from_dense(ZZ, [[1 + i] for i in range(A.ncols)])
    B = A @ x
    X = solve(A, B)
    assert X is not None and A @ X == B


def test_solve_detects_lattice_obstruction():
    A = matrix(ZZ, [[2]])
    assert solve(A, matrix(ZZ, [[1]])) is None
    assert solve(matrix(QQ, [[2]]), matrix(QQ, [[1]])) is not None


def test_determinant_and_inverse():
    A = matrix(ZZ, [[2, 1], [7, 4]])
    assert determinant(A) == 1
    assert inverse(A) @ A == ExactMatrix.identity(ZZ, 2)
    with pytest.raises(ValueError):
        inverse(matrix(ZZ, [[2, 0], [0, 1]]))


def test_image_basis_spans_column_lattice():
    A = matrix(ZZ, [[2, 4, 6], [0, 3, 3]])
    B = image_basis(A)
    assert B.ncols == 2
    assert solve(B, A) is not None and solve(A, B) is not None


def test_module_invariants():
    M = ModulePresentation(ZZ, 2, matrix(ZZ, [[2, 0], [0, 3]]))
    assert M.invariants() == ((6,), 0)
    assert M.describe() == "Z/6"
    assert ModulePresentation.cyclic(ZZ, 0).describe() == "Z"
    assert ModulePresentation.from_invariants(ZZ, [2], 1).order() is None
    assert ModulePresentation.free(GF(5), 3).order() == 3


def test_homology_of_multiplication_by_two():
    # Z --2--> Z has kernel 0 and cokernel Z/2
    d = matrix(ZZ, [[2]])
    assert homology_at(ExactMatrix(ZZ, 0, 1), d).describe() == "Z/2"
    assert homology_at(d, ExactMatrix(ZZ, 1, 0)).describe() == "0"


def test_subquotient_coords_and_iso():
    L = ExactMatrix.identity(ZZ, 2)
    S = matrix(ZZ, [[4], [0]])
    Q = Subquotient(ZZ, 2, L, S)
    assert Q.describe() == "Z/4 + Z"
    swap = matrix(ZZ, [[1, 0], [0, -1]])
    assert sub_map_is_iso(Q, Q, swap)
    assert not sub_map_is_iso(Q, Q, matrix(ZZ, [[2, 0], [0, 1]]))


def test_parse_ring():
    assert parse_ring("Z") == ZZ
    assert parse_ring("F7") == GF(7)
    R = parse_ring("Q[2]")
    assert R.kind == "POLY" and R.nvars == 2
    with pytest.raises(ValueError):
        parse_ring("F4")


def test_graded_slice_of_xy_row():
    # (x y): R(-1)^2 -> R in degree 2 maps a 4-dim space onto the 3 quadratics
    R = GradedPoly(QQ, 2)
    x, y = R.var(0), R.var(1)
    A = ExactMatrix(R, 1, 2, [{0: x, 1: y}], row_degrees=(0,), col_degrees=(1, 1))
    S = graded_slice(A, 2)
    assert S.shape == (3, 4)
    assert rank(S) == 3
    with pytest.raises(UnsupportedRing):
        rank(A)
