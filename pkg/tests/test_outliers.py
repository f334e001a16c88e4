import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_rmt.ensemble import (
    Deformation,
    EnsembleConfig,
    EntryLaw,
    Family,
    basis_vector,
    deformation_matrix,
    derive_seed,
    random_unit_vector,
    sample_iid_matrix,
)
from sparse_rmt.errors import (
    DegenerateOutlierError,
    DomainError,
    NotAnOutlierError,
    SingularPointError,
)
from sparse_rmt.outliers import (
    default_eps,
    eigvec_overlap,
    hausdorff,
    outlier_report,
    outlier_set,
    predicted_overlap,
    predicted_set,
    secular_root,
    secular_value,
)
from sparse_rmt.spectra import eig

points = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
point_sets = st.lists(points, min_size=1, max_size=8)


class TestOutlierSet:
    def test_trivial(self):
        assert list(outlier_set(np.array([0.5, 2.0]), 0.25)) == [2.0]
        assert len(outlier_set(np.array([1.2, 1.3]), 0.5)) == 0

    def test_keeps_multiplicity(self):
        assert len(outlier_set(np.array([3.0, 3.0, 0.1]), 0.1)) == 2

    def test_eps_must_be_positive(self):
        with pytest.raises(DomainError):
            outlier_set(np.array([2.0]), 0.0)

    def test_predicted_and_default_eps(self):
        assert list(predicted_set(np.array([2.0, 0.5, 0.0]))) == [2.0]
        assert math.isclose(default_eps(np.array([2.0, 3.0j])), 0.25)
        with pytest.raises(DomainError):
            default_eps(np.array([0.5]))


class TestHausdorff:
    def test_identical(self):
        assert hausdorff([1 + 0j], [1 + 0j]) == 0

    def test_hand_computed(self):
        assert math.isclose(hausdorff([0j], [3, 4j]), 4.0)

    def test_empty_conventions(self):
        assert hausdorff([], [2.0]) == math.inf
        assert hausdorff([2.0], []) == math.inf
        assert hausdorff([], []) == 0

    @given(point_sets, point_sets)
    def test_symmetric(self, a, b):
        assert hausdorff(a, b) == hausdorff(b, a)

    @given(point_sets)
    def test_zero_on_permutation(self, a):
        assert hausdorff(a, a[::-1]) == 0

    @settings(max_examples=1000)
    @given(point_sets, point_sets, point_sets)
    def test_triangle_inequality(self, a, b, c):
        assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-9


class TestOutlierReport:
    def test_unperturbed_diagonal(self):
        s = eig(np.diag([0.3, 2.1, -0.2]))
        rep = outlier_report(s, np.array([2.0, 0.0, 0.0]), eps=0.25)
        assert rep.count_match
        assert math.isclose(rep.hausdorff, 0.1, abs_tol=1e-12)
        assert rep.to_dict()["observed"] == [[2.1, 0.0]]

    @pytest.mark.slow
    def test_rank_one_monte_carlo(self):
        n, k = 1000, 50
        law = EntryLaw(Family.REAL_GAUSSIAN)
        defm = Deformation.rank_one(basis_vector(n, 0, 2.0), basis_vector(n, 0))
        e = deformation_matrix(defm)
        hits = 0
        trials = 30
        for t in range(trials):
            y = sample_iid_matrix(EnsembleConfig(n, k, law, derive_seed(55, t))) + e
            out = outlier_set(eig(y), 0.25)
            hits += len(out) == 1 and abs(out[0] - 2) <= 0.15
        assert hits / trials >= 0.9


class TestSecular:
    def test_zero_matrix_values(self):
        x = np.zeros((2, 2))
        u, v = basis_vector(2, 0, 2.0), basis_vector(2, 0)
        assert np.isclose(secular_value(x, 1.5, u, v), -1 / 3)
        assert abs(secular_value(x, 2.0, u, v)) <= 1e-15

    def test_diagonal_closed_form(self):
        x = np.diag([0.5, 0.0])
        e1 = basis_vector(2, 0)
        assert np.isclose(secular_value(x, 2.0, e1, e1), 1 / 3)

    def test_singular_point(self):
        with pytest.raises(SingularPointError):
            secular_value(np.diag([0.5, 0.0]), 0.5, basis_vector(2, 0), basis_vector(2, 0))

    def test_root_exact(self):
        x = np.zeros((2, 2))
        z = secular_root(x, basis_vector(2, 0, 2.0), basis_vector(2, 0), 1.8)
        assert abs(z - 2.0) <= 1e-10

    def test_root_matches_dense_eigenvalue(self, rng):
        n = 60
        x = sample_iid_matrix(EnsembleConfig(n, n, EntryLaw(Family.COMPLEX_GAUSSIAN), 9))
        u, v = random_unit_vector(n, 1) * 3, random_unit_vector(n, 2)
        y = x + np.outer(u, v.conj())
        vals = np.linalg.eigvals(y)
        top = vals[np.argmax(np.abs(vals))]
        z = secular_root(x, u, v, complex(np.vdot(v, u)) if abs(np.vdot(v, u)) > 1.5 else 2.5)
        assert abs(z - top) <= 1e-8

    def test_root_inside_disk_is_flagged(self):
        x = np.diag([0.2, 0.0])
        e1 = basis_vector(2, 0, 0.6)
        with pytest.raises(NotAnOutlierError) as info:
            secular_root(x, e1, e1, 1.5)
        assert abs(info.value.root - 0.56) <= 1e-9

    def test_init_inside_disk_rejected(self):
        with pytest.raises(DomainError):
            secular_root(np.zeros((2, 2)), basis_vector(2, 0, 2.0), basis_vector(2, 0), 0.5)

    @pytest.mark.slow
    def test_monte_carlo_complex_target(self):
        n, target = 200, 1.5 + 1.5j
        law = EntryLaw(Family.REAL_GAUSSIAN)
        u, v = basis_vector(n, 0, target), basis_vector(n, 0)
        close = 0
        for t in range(30):
            x = sample_iid_matrix(EnsembleConfig(n, n, law, derive_seed(77, t)))
            close += abs(secular_root(x, u, v, target) - target) <= 0.2
        assert close / 30 >= 0.9


class TestOverlap:
    @pytest.mark.parametrize("inner,expected", [(2, 0.75), (3j, 8 / 9), (4, 0.9375)])
    def test_predicted(self, inner, expected):
        assert math.isclose(predicted_overlap(inner), expected)

    def test_predicted_boundary(self):
        with pytest.raises(DomainError):
            predicted_overlap(1 + 0j)

    def test_rank_one_without_noise(self):
        u = random_unit_vector(10, 3, complex_valued=True)
        y = 2 * np.outer(u, u.conj())
        res = eigvec_overlap(y, 2 * u, u)
        assert math.isclose(res.overlap_sq, 1.0, abs_tol=1e-12)
        assert res.predicted == 0.75
        assert abs(res.lambda_max - 2) <= 1e-12

    def test_overlap_with_noise_bounded(self):
        n = 300
        x = sample_iid_matrix(EnsembleConfig(n, n, EntryLaw(Family.REAL_GAUSSIAN), 5))
        u = random_unit_vector(n, 7)
        y = x + 3 * np.outer(u, u)
        res = eigvec_overlap(y, 3 * u, u, x=x)
        assert 0 <= res.overlap_sq <= 1
        assert res.residual <= 1e-8
        # fixed instance; the large-n limit is 8/9
        assert abs(res.overlap_sq - 8 / 9) <= 0.1

    def test_degenerate(self):
        y = np.diag([3.0, 3.0, 0.0])
        with pytest.raises(DegenerateOutlierError) as info:
            eigvec_overlap(y, basis_vector(3, 0, 3.0), basis_vector(3, 0))
        assert info.value.count == 2
        with pytest.raises(DegenerateOutlierError):
            eigvec_overlap(np.zeros((3, 3)), basis_vector(3, 0, 3.0), basis_vector(3, 0))
