import math
from fractions import Fraction

import numpy as np
import pytest

from ribbontau.model import (
    CornerAssignment,
    Dressing,
    Group,
    ModelSpec,
    ScopeError,
    SingularMatrixError,
    TruncationPolicy,
    WeightConvention,
    bgw_q_terms,
    bgw_series,
    gauge_spectrum_check,
    hciz_series,
    hciz_series_shells,
    monodromy_matrix,
    schur_moment,
    weight_fraction,
    z_series,
    z_series_shells,
)
from ribbontau.partitions import Partition
from ribbontau.ribbon import MonodromyWord, build_graph
from ribbontau.symfun import PowerSums, SpectralMatrix, power_sums_infinity

rng = np.random.default_rng(99)


def rmat(n, scale=0.6):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * m / np.sqrt(2 * n)


def loop():
    return build_graph(1, [[1, -1]])


def segment():
    return build_graph(1, [[1], [-1]])


class TestMonodromy:
    def test_dressed_loop_word(self):
        n = 3
        a, b, x = rmat(n), rmat(n), rmat(n)
        corners = CornerAssignment(n, {1: a, -1: b})
        dressing = Dressing({1: x})
        got = monodromy_matrix(MonodromyWord([-1, 1]), corners, dressing)
        want = x.conj().T @ b @ x @ a
        assert np.allclose(got, want)

    def test_identity_corners(self):
        n = 2
        corners = CornerAssignment(n, {1: np.eye(n), -1: np.eye(n)})
        got = monodromy_matrix(MonodromyWord([1, -1]), corners)
        assert np.allclose(got, np.eye(n))

    def test_single_label(self):
        a = rmat(2)
        corners = CornerAssignment(2, {1: a, -1: np.eye(2)})
        assert np.allclose(monodromy_matrix(MonodromyWord([1]), corners), a)

    def test_missing_label(self):
        corners = CornerAssignment(2, {1: np.eye(2)})
        with pytest.raises(LookupError):
            monodromy_matrix(MonodromyWord([-1]), corners)

    def test_cyclic_rotation_preserves_traces(self):
        n = 3
        corners = CornerAssignment(n, {1: rmat(n), -1: rmat(n), 2: rmat(n), -2: rmat(n)})
        word = [1, 2, -1, -2]
        mats = []
        for k in range(4):
            rotated = word[k:] + word[:k]
            m = np.eye(n, dtype=complex)
            for lab in rotated:
                m = m @ corners.matrix(lab)
            mats.append(m)
        for m in mats[1:]:
            for p in range(1, 5):
                t0 = np.trace(np.linalg.matrix_power(mats[0], p))
                t1 = np.trace(np.linalg.matrix_power(m, p))
                assert abs(t0 - t1) < 1e-12


class TestWeights:
    def test_u_weight_single_box(self):
        assert weight_fraction(Partition([1]), Group.U, 3, 1, WeightConvention.CALIBRATED) == Fraction(1, 3)

    def test_gl_weight_single_box(self):
        # N^{-1} / s_(1)(p_inf) = 1/N
        assert weight_fraction(Partition([1]), Group.GL_GAUSSIAN, 3, 1, WeightConvention.CALIBRATED) == Fraction(1, 3)

    def test_n_rescaled_adds_n_power(self):
        cal = weight_fraction(Partition([2]), Group.U, 2, 2, WeightConvention.CALIBRATED)
        res = weight_fraction(Partition([2]), Group.U, 2, 2, WeightConvention.N_RESCALED)
        assert res == cal / Fraction(2) ** 4


class TestSchurMoment:
    def test_distinct_partitions_vanish(self):
        spec = ModelSpec(Group.U, 2, segment(), CornerAssignment(2, {1: rmat(2), -1: rmat(2)}))
        assert schur_moment([Partition([1]), Partition([2])], spec) == 0

    def test_empty_partitions_give_one(self):
        spec = ModelSpec(Group.U, 2, segment(), CornerAssignment(2, {1: rmat(2), -1: rmat(2)}))
        assert schur_moment([Partition(), Partition()], spec) == 1

    def test_loop_trace_value(self):
        n = 3
        a, b = rmat(n), rmat(n)
        spec = ModelSpec(Group.U, n, loop(), CornerAssignment(n, {1: a, -1: b}))
        got = schur_moment([Partition([1])], spec)
        assert got == pytest.approx(np.trace(a) * np.trace(b) / n)

    def test_su_not_covered(self):
        spec = ModelSpec(Group.SU, 2, loop(), CornerAssignment(2, {1: rmat(2), -1: rmat(2)}))
        with pytest.raises(ScopeError):
            schur_moment([Partition([1])], spec)

    def test_ell_beyond_n_vanishes(self):
        spec = ModelSpec(Group.U, 2, loop(), CornerAssignment(2, {1: rmat(2), -1: rmat(2)}))
        assert schur_moment([Partition([1, 1, 1])], spec) == 0


class TestZSeries:
    def test_zero_couplings(self):
        n = 2
        spec = ModelSpec(
            Group.U, n, loop(), CornerAssignment(n, {1: rmat(n), -1: rmat(n)}),
            couplings=[PowerSums([0.0] * 6)],
        )
        assert z_series(spec, TruncationPolicy(6)) == 1

    def test_loop_matches_hciz_term_by_term(self):
        n, degree = 2, 8
        a, b = np.diag([0.3, 0.1]).astype(complex), np.diag([0.2, 0.4]).astype(complex)
        spec = ModelSpec(
            Group.U, n, loop(), CornerAssignment(n, {1: a, -1: b}),
            couplings=[power_sums_infinity(degree)],
        )
        zs = z_series_shells(spec, TruncationPolicy(degree))
        hs = hciz_series_shells(SpectralMatrix(a), SpectralMatrix(b), TruncationPolicy(degree))
        for k in zs:
            assert zs[k] == pytest.approx(hs[k], abs=1e-15)

    def test_scalar_loop_is_exponential(self):
        a, b = 0.5, 0.7
        spec = ModelSpec(
            Group.U, 1, loop(), CornerAssignment(1, {1: [[a]], -1: [[b]]}),
            couplings=[power_sums_infinity(20)],
        )
        assert z_series(spec, TruncationPolicy(20)) == pytest.approx(math.exp(a * b), abs=1e-12)

    def test_su_needs_single_vertex(self):
        with pytest.raises(ScopeError) as err:
            ModelSpec(
                Group.SU, 2, segment(), CornerAssignment(2, {1: rmat(2), -1: rmat(2)}),
                couplings=[power_sums_infinity(4)] * 2,
            )
        assert "single" in str(err.value)

    def test_su_single_vertex_equals_u(self):
        n, degree = 2, 6
        a, b = rmat(n), rmat(n)
        corners = CornerAssignment(n, {1: a, -1: b})
        coup = [power_sums_infinity(degree)]
        z_u = z_series(ModelSpec(Group.U, n, loop(), corners, coup), TruncationPolicy(degree))
        z_su = z_series(ModelSpec(Group.SU, n, loop(), corners, coup), TruncationPolicy(degree))
        assert z_u == z_su

    def test_face_mode_is_vertex_mode_on_dual(self):
        n, degree = 2, 5
        a, b = rmat(n), rmat(n)
        corners = CornerAssignment(n, {1: a, -1: b})
        coup = [PowerSums([0.2, 0.1, 0.0, 0.0, 0.0]), PowerSums([0.1, 0.0, 0.0, 0.0, 0.0])]
        spec_face = ModelSpec(Group.U, n, loop(), corners, coup, mode="face")
        from ribbontau.ribbon import dual

        spec_dual = ModelSpec(Group.U, n, dual(loop()), corners, coup)
        assert z_series(spec_face, TruncationPolicy(degree)) == z_series(spec_dual, TruncationPolicy(degree))

    def test_coupling_count_validated(self):
        with pytest.raises(ValueError):
            ModelSpec(
                Group.U, 2, segment(), CornerAssignment(2, {1: rmat(2), -1: rmat(2)}),
                couplings=[power_sums_infinity(4)],
            )


class TestHciz:
    def test_scalar_exponential(self):
        a, b = 0.5, 0.5
        val = hciz_series(np.array([[a]]), np.array([[b]]), TruncationPolicy(20))
        assert val == pytest.approx(math.exp(a * b), abs=1e-10)

    def test_zero_matrices(self):
        z = np.zeros((2, 2))
        assert hciz_series(z, z, TruncationPolicy(8)) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hciz_series(np.eye(2), np.eye(3), TruncationPolicy(4))


class TestBgw:
    def test_beta_zero(self):
        a, b = rmat(2), rmat(2)
        assert bgw_series(a, b, 0.0, Group.U, TruncationPolicy(8)) == 1

    def test_scalar_su_closure(self):
        beta, a, b = 0.3, 0.5, 0.4
        trunc = TruncationPolicy(16, q_max=8)
        val = bgw_series(np.array([[a]]), np.array([[b]]), beta, Group.SU, trunc)
        assert val == pytest.approx(math.exp(beta * (a + b)), abs=1e-8)

    def test_su_det_term(self):
        # the (mu=empty, q=-1) term of the q-ladder equals det A for 2x2,
        # i.e. s_(1,1)(AB)/s_(1,1)(I_2) * det(B)^{-1} == det(A)
        a = np.diag([0.7, 0.4]).astype(complex)
        b = np.diag([0.5, 0.3]).astype(complex)
        from ribbontau.symfun import schur_of_matrix

        val = schur_of_matrix(Partition([1, 1]), SpectralMatrix(a @ b)) / np.linalg.det(b)
        assert val == pytest.approx(np.linalg.det(a))

    def test_singular_matrix_rejected(self):
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.eye(2, dtype=complex)
        with pytest.raises(SingularMatrixError):
            bgw_series(a, b, 0.5, Group.SU, TruncationPolicy(8, q_max=1))

    def test_q_zero_entry_is_u_series(self):
        a, b = np.diag([0.8, 0.5]).astype(complex), np.diag([0.6, 0.4]).astype(complex)
        trunc = TruncationPolicy(8, q_max=2)
        terms = bgw_q_terms(a, b, 0.4, 2, trunc)
        assert terms[0][0] == 0
        assert terms[0][1] == bgw_series(a, b, 0.4, Group.U, trunc)
        assert [q for q, _ in terms] == [0, 1, -1, 2, -2]

    def test_gl_not_supported(self):
        with pytest.raises(ScopeError):
            bgw_series(rmat(2), rmat(2), 0.1, Group.GL_GAUSSIAN, TruncationPolicy(4))


class TestGauge:
    def test_same_corners(self):
        c = CornerAssignment(2, {1: rmat(2), -1: rmat(2)})
        assert gauge_spectrum_check(c, c, loop())

    def test_conjugated_corners(self):
        n = 3
        a, b = rmat(n), rmat(n)
        g = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]
        c1 = CornerAssignment(n, {1: a, -1: b})
        c2 = CornerAssignment(n, {1: g @ a @ g.conj().T, -1: b})
        assert gauge_spectrum_check(c1, c2, loop())
        coup = [power_sums_infinity(6)]
        z1 = z_series(ModelSpec(Group.U, n, loop(), c1, coup), TruncationPolicy(6))
        z2 = z_series(ModelSpec(Group.U, n, loop(), c2, coup), TruncationPolicy(6))
        assert abs(z1 - z2) < 1e-9

    def test_perturbed_spectrum_detected(self):
        a, b = rmat(2), rmat(2)
        c1 = CornerAssignment(2, {1: a, -1: b})
        c2 = CornerAssignment(2, {1: a + 0.05 * np.eye(2), -1: b})
        assert not gauge_spectrum_check(c1, c2, loop())

    def test_telescoping_move_inside_face_word(self):
        # two-loop graph: face (1, 2) carries C1 C2, so C1 -> C1 g,
        # C2 -> g^-1 C2 changes the corners but no face spectrum
        n = 3
        g2 = build_graph(2, [[1, -1, 2, -2]])
        mats = {l: rmat(n) for l in g2.labels()}
        c1 = CornerAssignment(n, mats)
        g = rmat(n) + 2 * np.eye(n)  # well-conditioned invertible
        moved = dict(mats)
        moved[1] = mats[1] @ g
        moved[2] = np.linalg.inv(g) @ mats[2]
        c2 = CornerAssignment(n, moved)
        assert not np.allclose(c2.matrix(1), c1.matrix(1))
        assert gauge_spectrum_check(c1, c2, g2)
        coup = [power_sums_infinity(6)]
        z1 = z_series(ModelSpec(Group.U, n, g2, c1, coup), TruncationPolicy(6))
        z2 = z_series(ModelSpec(Group.U, n, g2, c2, coup), TruncationPolicy(6))
        assert abs(z1 - z2) < 1e-9


class TestTruncationPolicy:
    def test_validation(self):
        with pytest.raises(ValueError):
            TruncationPolicy(-1)
        with pytest.raises(ValueError):
            TruncationPolicy(4, q_max=-1)

    def test_length_bound(self):
        assert TruncationPolicy(6).length_bound(3) == 3
        assert TruncationPolicy(6, max_length=2).length_bound(3) == 2
