import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobiuseig.errors import DimensionError, MatrixMarketError, SingularShift, StructuralError
from mobiuseig.sparse_core import (
    SparseMatrix,
    factorize,
    from_triplets,
    matvec,
    minimum_degree_order,
    read_matrix_market,
    solve,
    write_matrix_market,
)


def random_sparse(rng, n, density, complex_=False):
    a = rng.standard_normal((n, n)) * (rng.random((n, n)) < density)
    if complex_:
        a = a + 1j * rng.standard_normal((n, n)) * (a != 0)
    return a


def reconstruction_error(a_dense, fact):
    pa = a_dense[np.ix_(fact.perm_r, fact.perm_c)]
    return np.max(np.abs(pa - fact.lower() @ fact.upper()))


class TestAssembly:
    def test_single_entry(self):
        a = from_triplets([(0, 0, 2.0)], 1)
        assert a.toarray().tolist() == [[2.0]]

    def test_duplicates_are_summed(self):
        a = from_triplets([(0, 1, 1.0), (0, 1, 1.0)], 2)
        assert a.toarray()[0, 1] == 2.0
        assert a.nnz == 1

    def test_out_of_range_index(self):
        with pytest.raises(StructuralError):
            from_triplets([(0, 2, 1.0)], 2)
        with pytest.raises(StructuralError):
            from_triplets([(-1, 0, 1.0)], 2)

    def test_canonical_storage(self):
        a = from_triplets([(2, 0, 1.0), (0, 0, 3.0), (1, 2, 4.0), (0, 2, 5.0)], 3)
        assert np.all(np.diff(a.colptr) >= 0)
        for j in range(3):
            rows = a.rowind[a.colptr[j] : a.colptr[j + 1]]
            assert np.all(np.diff(rows) > 0)

    def test_dense_round_trip(self):
        rng = np.random.default_rng(1)
        d = random_sparse(rng, 30, 0.2)
        assert np.array_equal(SparseMatrix.from_dense(d).toarray(), d)


class TestMatvec:
    def test_identity(self):
        x = np.arange(5.0)
        assert np.array_equal(matvec(SparseMatrix.identity(5), x), x)

    def test_scalar(self):
        assert matvec(from_triplets([(0, 0, 2.0)], 1), np.array([3.0])).tolist() == [6.0]

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            matvec(SparseMatrix.identity(3), np.ones(4))

    def test_random_against_dense_mirror(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(1, 60))
            d = random_sparse(rng, n, 0.05, complex_=bool(rng.integers(2)))
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            ref = d @ x
            got = SparseMatrix.from_dense(d) @ x
            assert np.max(np.abs(got - ref)) <= 1e-13 * max(1.0, np.max(np.abs(ref)))

    def test_block_matvec(self):
        rng = np.random.default_rng(3)
        d = random_sparse(rng, 20, 0.2)
        x = rng.standard_normal((20, 3))
        assert np.allclose(SparseMatrix.from_dense(d) @ x, d @ x, rtol=0, atol=1e-13)


class TestFactorize:
    def test_diagonal_exact(self):
        f = factorize(SparseMatrix.from_dense(np.diag([2.0, 1.0])).astype(complex))
        assert reconstruction_error(np.diag([2.0, 1.0]), f) == 0.0

    def test_singular_example_is_singular(self):
        # J - 0.5 L for J=[[1,1],[1,2]], L=diag(1,0) has determinant 0
        a = SparseMatrix.from_dense(np.array([[0.5, 1.0], [1.0, 2.0]]))
        with pytest.raises(SingularShift):
            factorize(a.astype(complex), shift=0.5)

    def test_structurally_empty_column(self):
        a = from_triplets([(0, 0, 1.0), (1, 0, 1.0)], 2)
        with pytest.raises(SingularShift, match="no nonzero pivot"):
            factorize(a)

    def test_diag_dominant_residual(self):
        rng = np.random.default_rng(4)
        d = random_sparse(rng, 100, 0.05)
        d[np.diag_indices(100)] = np.abs(d).sum(axis=1) + 1
        f = factorize(SparseMatrix.from_dense(d).astype(complex))
        b = rng.standard_normal(100)
        x = solve(f, b)
        assert np.max(np.abs(d @ x - b)) <= 1e-10 * np.max(np.abs(b))

    def test_solve_identity_and_diag(self):
        f = factorize(SparseMatrix.identity(3, complex))
        b = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(f.solve(b), b.astype(complex))
        f = factorize(SparseMatrix.from_dense(np.diag([2.0, 4.0])))
        assert np.allclose(f.solve(np.array([2.0, 4.0])), [1.0, 1.0], rtol=0, atol=0)

    def test_solve_dimension_mismatch(self):
        f = factorize(SparseMatrix.identity(3, complex))
        with pytest.raises(DimensionError):
            f.solve(np.ones(2))

    def test_random_complex_reconstruction(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(1, 121))
            d = random_sparse(rng, n, min(1.0, 4.0 / n), complex_=True)
            d[np.diag_indices(n)] += 3.0 * (1 + 1j)
            f = factorize(SparseMatrix.from_dense(d))
            scale = np.max(np.abs(d))
            assert reconstruction_error(d, f) <= 1e-10 * scale
            b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            x = f.solve(b)
            assert np.linalg.norm(d @ x - b) <= 1e-9 * np.linalg.norm(b)

    def test_pivoting_handles_zero_diagonal(self):
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        f = factorize(SparseMatrix.from_dense(d))
        assert np.allclose(f.solve(np.array([1.0, 2.0])), [2.0, 1.0])

    def test_mindegree_ordering_is_a_permutation(self):
        rng = np.random.default_rng(6)
        d = random_sparse(rng, 40, 0.1)
        d[np.diag_indices(40)] += 5
        a = SparseMatrix.from_dense(d)
        order = minimum_degree_order(a)
        assert sorted(order.tolist()) == list(range(40))
        f = factorize(a.astype(complex), ordering="mindegree")
        assert reconstruction_error(d, f) <= 1e-12 * np.max(np.abs(d))

    def test_block_solve_counts_columns(self):
        f = factorize(SparseMatrix.identity(4, complex))
        f.solve(np.ones((4, 3)))
        f.solve(np.ones(4))
        assert f.solves == 4

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_solve_inverts_matvec(self, n, seed):
        rng = np.random.default_rng(seed)
        d = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        d[np.diag_indices(n)] += 2 * n
        a = SparseMatrix.from_dense(d)
        x = rng.standard_normal(n) + 0j
        assert np.allclose(factorize(a).solve(a @ x), x, rtol=0, atol=1e-10)


class TestMatrixMarket:
    def test_read_single_entry(self, tmp_path):
        p = tmp_path / "a.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.0\n")
        assert read_matrix_market(p).toarray().tolist() == [[2.0]]

    def test_one_based_indices(self, tmp_path):
        p = tmp_path / "a.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real general\n% comment\n3 3 1\n3 1 7.5\n")
        a = read_matrix_market(p)
        assert a.triplets() == [(2, 0, 7.5)]

    def test_round_trip_is_bitwise(self, tmp_path):
        rng = np.random.default_rng(7)
        d = random_sparse(rng, 25, 0.2) * 10.0 ** rng.integers(-8, 8, (25, 25))
        a = SparseMatrix.from_dense(d)
        p = tmp_path / "a.mtx"
        write_matrix_market(a, p)
        b = read_matrix_market(p)
        assert a.triplets() == b.triplets()

    @pytest.mark.parametrize(
        "text, line",
        [
            ("%%MatrixMarket matrix array real general\n1 1\n2.0\n", 1),
            ("%%MatrixMarket matrix coordinate real general\n1 1\n", 2),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 2.0\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n", 4),
        ],
    )
    def test_parse_errors_carry_line_numbers(self, tmp_path, text, line):
        p = tmp_path / "bad.mtx"
        p.write_text(text)
        with pytest.raises(MatrixMarketError) as exc:
            read_matrix_market(p)
        assert exc.value.line == line
