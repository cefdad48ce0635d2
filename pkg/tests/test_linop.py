import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from splitmerge import (
    CsrOperator,
    DenseOperator,
    ShiftedOperator,
    dense_eigendecomposition,
    gershgorin_shift,
    load_matrix_market,
    save_matrix_market,
)
from splitmerge.errors import (
    AsymmetricMatrixError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    MatrixMarketError,
    MatrixMarketHeaderError,
    NonSquareMatrixError,
)

from conftest import random_symmetric


class TestApply:
    def test_diagonal_action(self, diag21):
        np.testing.assert_allclose(diag21.apply(np.array([1.0, 1.0])), [2.0, 1.0])

    def test_column_readoff(self, twobytwo):
        np.testing.assert_allclose(twobytwo.apply(np.array([1.0, 0.0])), [2.0, 1.0])

    def test_csr_identity(self):
        op = CsrOperator(sp.identity(3, format="csr"))
        np.testing.assert_allclose(op.apply(np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_dimension_mismatch(self, diag21):
        with pytest.raises(DimensionMismatchError):
            diag21.apply(np.ones(3))

    def test_counter_increments_once_per_apply(self, diag21):
        assert diag21.matvec_count == 0
        for expected in range(1, 6):
            diag21.apply(np.ones(2))
            assert diag21.matvec_count == expected

    def test_share_isolates_counter(self, diag21):
        diag21.apply(np.ones(2))
        view = diag21.share()
        assert view.matvec_count == 0
        view.apply(np.ones(2))
        assert view.matvec_count == 1
        assert diag21.matvec_count == 1

    def test_csr_agrees_with_dense_reference(self, rng):
        for _ in range(25):
            dense = random_symmetric(rng, 16)
            dense[np.abs(dense) < 0.4] = 0.0  # some sparsity
            op = CsrOperator(sp.csr_matrix(dense))
            x = rng.standard_normal(16)
            ref = dense @ x
            got = op.apply(x)
            assert np.linalg.norm(got - ref) <= 1e-13 * max(np.linalg.norm(ref), 1.0)

    def test_symmetry_probe(self, rng):
        for _ in range(10):
            op = DenseOperator(random_symmetric(rng, 12))
            assert op.check_symmetry(rng=rng)
        skew = np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert not DenseOperator(skew).check_symmetry(rng=rng)


class TestGershgorin:
    def test_offdiagonal_2x2(self):
        op = DenseOperator(np.array([[0.0, 2.0], [2.0, 0.0]]))
        shifted = gershgorin_shift(op)
        assert shifted.eta == pytest.approx(2.0)
        spec = dense_eigendecomposition(shifted)
        # closed form: base eigenvalues are +-2, shifted to {4, 0}
        np.testing.assert_allclose(spec.eigenvalues, [4.0, 0.0], atol=1e-12)

    def test_already_psd_unchanged(self):
        op = DenseOperator(np.diag([1.0, 3.0]))
        shifted = gershgorin_shift(op)
        assert shifted.eta == 0.0
        x = np.array([0.3, -0.7])
        np.testing.assert_allclose(shifted.apply(x), op.apply(x))

    def test_negative_diagonal(self):
        op = DenseOperator(np.diag([-1.0, -2.0]))
        shifted = gershgorin_shift(op)
        assert shifted.eta == pytest.approx(2.0)
        np.testing.assert_allclose(np.diag(shifted.to_dense()), [1.0, 0.0], atol=1e-15)

    def test_psd_probe_on_random_symmetric(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 33))
            op = DenseOperator(random_symmetric(rng, n))
            assert gershgorin_shift(op).check_psd(rng=rng)

    def test_negative_sign_shift(self):
        base = DenseOperator(np.diag([5.0, 1.0]))
        # -(A - 6I) has eigenvalues {1, 5}: PSD, smallest base eigenvalue on top
        flipped = ShiftedOperator(base, eta=6.0, sign=-1)
        np.testing.assert_allclose(flipped.apply(np.array([1.0, 0.0])), [1.0, 0.0])
        np.testing.assert_allclose(flipped.apply(np.array([0.0, 1.0])), [0.0, 5.0])
        assert flipped.check_psd()

    def test_shifted_frobenius_matches_dense(self, rng):
        base = DenseOperator(random_symmetric(rng, 9))
        shifted = gershgorin_shift(base)
        assert shifted.frobenius_norm == pytest.approx(
            np.linalg.norm(shifted.to_dense()), rel=1e-12
        )


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestMatrixMarket:
    def test_coordinate_symmetric(self, tmp_path):
        path = _write(
            tmp_path,
            "sym.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "% a comment\n"
            "2 2 3\n"
            "1 1 2.0\n"
            "2 1 1.0\n"
            "2 2 2.0\n",
        )
        op = load_matrix_market(path)
        np.testing.assert_allclose(op.to_dense(), [[2.0, 1.0], [1.0, 2.0]])

    def test_coordinate_symmetric_omitted_entries_are_zero(self, tmp_path):
        # the published format: unspecified entries (here the (2,2) diagonal)
        # are zero; only the stored lower triangle is mirrored
        path = _write(
            tmp_path,
            "sym0.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "2 2 2\n"
            "1 1 2.0\n"
            "2 1 1.0\n",
        )
        op = load_matrix_market(path)
        np.testing.assert_allclose(op.to_dense(), [[2.0, 1.0], [1.0, 0.0]])

    def test_index_out_of_range(self, tmp_path):
        path = _write(
            tmp_path,
            "bad.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n",
        )
        with pytest.raises(IndexOutOfRangeError):
            load_matrix_market(path)

    def test_general_asymmetric_rejected(self, tmp_path):
        path = _write(
            tmp_path,
            "asym.mtx",
            "%%MatrixMarket matrix coordinate real general\n"
            "2 2 2\n"
            "1 2 1.0\n"
            "2 1 0.5\n",
        )
        with pytest.raises(AsymmetricMatrixError):
            load_matrix_market(path)

    def test_general_symmetric_accepted(self, tmp_path):
        path = _write(
            tmp_path,
            "gen.mtx",
            "%%MatrixMarket matrix coordinate real general\n"
            "2 2 4\n"
            "1 1 2.0\n1 2 1.0\n2 1 1.0\n2 2 2.0\n",
        )
        np.testing.assert_allclose(load_matrix_market(path).to_dense(), [[2.0, 1.0], [1.0, 2.0]])

    def test_array_general(self, tmp_path):
        path = _write(
            tmp_path,
            "arr.mtx",
            "%%MatrixMarket matrix array real general\n2 2\n2.0\n1.0\n1.0\n2.0\n",
        )
        op = load_matrix_market(path)
        assert isinstance(op, DenseOperator)
        np.testing.assert_allclose(op.to_dense(), [[2.0, 1.0], [1.0, 2.0]])

    def test_array_asymmetric_rejected(self, tmp_path):
        path = _write(
            tmp_path,
            "arrbad.mtx",
            "%%MatrixMarket matrix array real general\n2 2\n2.0\n1.0\n0.5\n2.0\n",
        )
        with pytest.raises(AsymmetricMatrixError):
            load_matrix_market(path)

    def test_non_square(self, tmp_path):
        path = _write(
            tmp_path,
            "rect.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1.0\n",
        )
        with pytest.raises(NonSquareMatrixError):
            load_matrix_market(path)

    @pytest.mark.parametrize(
        "banner",
        [
            "%%MatrixMarket matrix coordinate complex symmetric",
            "%%MatrixMarket matrix coordinate pattern symmetric",
            "%%MatrixMarket matrix coordinate integer symmetric",
            "%%MatrixMarket matrix array real symmetric",
            "%%MatrixMarket vector coordinate real general",
            "%%NotMatrixMarket matrix coordinate real general",
            "just text",
        ],
    )
    def test_rejected_banners(self, tmp_path, banner):
        path = _write(tmp_path, "hdr.mtx", banner + "\n2 2 1\n1 1 1.0\n")
        with pytest.raises(MatrixMarketHeaderError):
            load_matrix_market(path)

    def test_entry_count_mismatch(self, tmp_path):
        path = _write(
            tmp_path,
            "short.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n",
        )
        with pytest.raises(MatrixMarketError):
            load_matrix_market(path)

    def test_cross_check_against_scipy(self, tmp_path, rng):
        dense = random_symmetric(rng, 7)
        dense[np.abs(dense) < 0.3] = 0.0
        dense += np.eye(7)
        path = tmp_path / "rand.mtx"
        scipy.io.mmwrite(str(path.with_suffix("")), sp.coo_matrix(dense), symmetry="symmetric")
        ours = load_matrix_market(path).to_dense()
        theirs = scipy.io.mmread(path).toarray()
        np.testing.assert_allclose(ours, theirs, atol=1e-15)

    def test_save_load_round_trip(self, tmp_path, rng):
        dense = random_symmetric(rng, 6)
        op = DenseOperator(dense)
        path = tmp_path / "out.mtx"
        save_matrix_market(op, path)
        np.testing.assert_allclose(load_matrix_market(path).to_dense(), dense, rtol=1e-15)

    def test_case_insensitive_banner(self, tmp_path):
        path = _write(
            tmp_path,
            "case.mtx",
            "%%matrixmarket MATRIX Coordinate Real Symmetric\n1 1 1\n1 1 4.0\n",
        )
        np.testing.assert_allclose(load_matrix_market(path).to_dense(), [[4.0]])


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_apply_matches_dense_reference_property(seed):
    rng = np.random.default_rng(seed)
    dense = random_symmetric(rng, 16)
    sparse_op = CsrOperator(sp.csr_matrix(dense))
    dense_op = DenseOperator(dense)
    x = rng.standard_normal(16)
    ref = dense @ x
    scale = max(np.linalg.norm(ref), 1e-30)
    assert np.linalg.norm(dense_op.apply(x) - ref) <= 1e-13 * scale
    assert np.linalg.norm(sparse_op.apply(x) - ref) <= 1e-13 * scale
