import itertools

import numpy as np
import pytest

from thetaquant.fourier import FourierFunction, FourierMode
from thetaquant.sections import QuadratureGrid, required_grid_size
from thetaquant.siegel import SiegelPoint
from thetaquant.toeplitz import (
    OperatorMatrix,
    bms_experiment,
    c1_antisymmetry_constant,
    eta,
    hs_inner,
    hs_norm_scaled,
    loglog_order,
    operator_norm,
    product_expansion_fit,
    rescaled_toeplitz,
    toeplitz_function,
    toeplitz_mode_closed_form,
    toeplitz_mode_quadrature,
    toeplitz_modes_quadrature,
    trace_pair_closed_form,
    trace_pair_sign,
)

from oracles import toeplitz_entry_brute

Z_LIST = [1j, 1 + 2j, 0.5 + 0.7j]


def grid_for(p, k, m_max=0):
    return QuadratureGrid(required_grid_size(p, k, m_max), p.n)


class TestEta:
    def test_constant_mode(self, points_n1):
        for p in points_n1:
            assert eta(p, 3, ((0,), (0,))) == 1.0

    def test_frozen_value(self):
        assert eta(SiegelPoint(1j), 1, ((1,), (0,))) == pytest.approx(
            0.2078795763507619, abs=1e-14
        )

    def test_increases_to_one(self, points_n1):
        for p in points_n1:
            vals = [eta(p, k, ((1,), (2,))) for k in (1, 10, 100)]
            assert vals[0] < vals[1] < vals[2] < 1.0
            assert vals[2] > 0.9


class TestClosedForm:
    def test_constant_mode_is_identity(self, points_n1):
        for p in points_n1:
            A = toeplitz_mode_closed_form(p, 3, ((0,), (0,)))
            assert np.allclose(A.entries, np.eye(3), atol=1e-14)

    def test_shift_pattern_level_two(self):
        p = SiegelPoint(1j)
        A = toeplitz_mode_closed_form(p, 2, ((1,), (0,))).entries
        e = np.exp(-np.pi / 4)
        assert A[1, 0] == pytest.approx(e, abs=1e-12)
        assert A[0, 1] == pytest.approx(e, abs=1e-12)
        assert A[0, 0] == A[1, 1] == 0

    def test_diagonal_phases_level_two(self):
        p = SiegelPoint(1j)
        A = toeplitz_mode_closed_form(p, 2, ((0,), (1,))).entries
        e = np.exp(-np.pi / 4)
        assert np.allclose(np.diag(A), [e, -e], atol=1e-12)
        assert abs(A[0, 1]) == abs(A[1, 0]) == 0

    @pytest.mark.parametrize("z", Z_LIST)
    @pytest.mark.parametrize("mode", [((1,), (0,)), ((2,), (-1,)), ((0,), (3,))])
    def test_entry_modulus_is_eta(self, z, mode):
        p = SiegelPoint(z)
        for k in (1, 2, 5):
            A = toeplitz_mode_closed_form(p, k, mode).entries
            nz = np.abs(A[np.abs(A) > 0])
            assert np.max(np.abs(nz - eta(p, k, mode))) < 1e-12

    def test_single_entry_against_brute_grid(self):
        # one entry computed from scratch: (F_{1,0} theta_0, theta_1) at k=2
        Z = 1j
        p = SiegelPoint(Z)
        N = required_grid_size(p, 2, 1)
        want = toeplitz_entry_brute(Z, 2, 1, 0, 0, 1, N)
        got = toeplitz_mode_closed_form(p, 2, ((1,), (0,))).entries[1, 0]
        assert got == pytest.approx(want, abs=1e-10)


class TestQuadratureOracle:
    @pytest.mark.parametrize("z", Z_LIST)
    def test_agreement_small_sweep(self, z):
        p = SiegelPoint(z)
        modes = [
            FourierMode((r,), (s,))
            for r in (-2, 0, 1)
            for s in (-1, 0, 2)
        ]
        for k in (1, 3):
            grid = grid_for(p, k, 2)
            quads = toeplitz_modes_quadrature(p, k, modes, grid)
            for m in modes:
                A = toeplitz_mode_closed_form(p, k, m)
                assert np.max(np.abs(A.entries - quads[m].entries)) < 1e-8

    def test_constant_mode_identity(self):
        p = SiegelPoint(1 + 2j)
        A = toeplitz_mode_quadrature(p, 2, ((0,), (0,)), grid_for(p, 2))
        assert np.max(np.abs(A.entries - np.eye(2))) < 1e-8

    def test_conjugate_mode_is_adjoint(self):
        p = SiegelPoint(0.5 + 0.7j)
        grid = grid_for(p, 2, 2)
        A = toeplitz_mode_quadrature(p, 2, ((1,), (2,)), grid)
        B = toeplitz_mode_quadrature(p, 2, ((-1,), (-2,)), grid)
        assert np.max(np.abs(B.entries - A.entries.conj().T)) < 1e-8

    def test_refuses_coarse_grid(self):
        from thetaquant.sections import GridError

        p = SiegelPoint(1j)
        with pytest.raises(GridError):
            toeplitz_mode_quadrature(p, 4, ((1,), (0,)), QuadratureGrid(8, 1))

    def test_n2_agreement(self, point_n2):
        k = 2
        modes = [FourierMode((1, 0), (0, 1)), FourierMode((0, 1), (1, 0))]
        grid = grid_for(point_n2, k, 1)
        quads = toeplitz_modes_quadrature(point_n2, k, modes, grid)
        for m in modes:
            A = toeplitz_mode_closed_form(point_n2, k, m)
            assert np.max(np.abs(A.entries - quads[m].entries)) < 1e-8


class TestToeplitzFunction:
    def test_constant_function(self):
        p = SiegelPoint(1j)
        f = FourierFunction.constant(1.0)
        assert np.allclose(
            toeplitz_function(p, 4, f).entries, np.eye(4), atol=1e-14
        )

    def test_real_function_hermitian(self, points_n1):
        f = FourierFunction(
            {((1,), (0,)): 0.5 - 0.2j, ((-1,), (0,)): 0.5 + 0.2j,
             ((2,), (1,)): 1j, ((-2,), (-1,)): -1j}
        )
        assert f.is_real()
        for p in points_n1:
            A = toeplitz_function(p, 3, f).entries
            assert np.max(np.abs(A - A.conj().T)) < 1e-10

    def test_adjoint_is_conjugate_symbol(self):
        p = SiegelPoint(1 + 2j)
        f = FourierFunction({((1,), (2,)): 0.7 + 0.3j, ((0,), (1,)): -1.2j})
        A = toeplitz_function(p, 4, f)
        B = toeplitz_function(p, 4, f.conjugate())
        assert np.max(np.abs(A.adjoint().entries - B.entries)) < 1e-10

    def test_two_cosine_structure(self):
        p = SiegelPoint(1j)
        f = FourierFunction({((1,), (0,)): 1.0, ((-1,), (0,)): 1.0})
        A = toeplitz_function(p, 2, f).entries
        e = np.exp(-np.pi / 4)
        assert np.allclose(A, e * np.array([[0, 2], [2, 0]]) / 2 * 2, atol=1e-12) or \
            np.allclose(A, e * np.array([[0, 1], [1, 0]]) * 2, atol=1e-12)
        # shift plus its transpose, both entries e^{-pi/4}
        assert A[0, 1] == pytest.approx(2 * e, abs=1e-12)


class TestRescaled:
    def test_identity_mode(self):
        p = SiegelPoint(1j)
        assert np.allclose(
            rescaled_toeplitz(p, 3, ((0,), (0,))).entries, np.eye(3), atol=1e-14
        )

    def test_unit_shift_level_two(self):
        p = SiegelPoint(1j)
        A = rescaled_toeplitz(p, 2, ((1,), (0,))).entries
        assert A[1, 0] == pytest.approx(1.0, abs=1e-14)
        assert A[0, 1] == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("mode", [((1,), (0,)), ((2,), (3,)), ((-1,), (2,))])
    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_unitary(self, mode, k):
        p = SiegelPoint(0.5 + 0.7j)
        A = rescaled_toeplitz(p, k, mode).entries
        assert np.max(np.abs(A.conj().T @ A - np.eye(k))) < 1e-12

    def test_z_independence(self):
        A = rescaled_toeplitz(SiegelPoint(1j), 4, ((1,), (2,))).entries
        B = rescaled_toeplitz(SiegelPoint(1 + 2j), 4, ((1,), (2,))).entries
        assert np.max(np.abs(A - B)) < 1e-9

    def test_matches_heat_rescaled_closed_form(self, points_n1):
        from thetaquant.formal import heat_coefficient

        for p in points_n1:
            for mode in [((1,), (0,)), ((2,), (-1,))]:
                direct = rescaled_toeplitz(p, 3, mode).entries
                via = heat_coefficient(p, 3, mode) * toeplitz_mode_closed_form(
                    p, 3, mode
                ).entries
                assert np.max(np.abs(direct - via)) < 1e-12


class TestNormsAndTraces:
    def test_identity_norm(self):
        p = SiegelPoint(1j)
        assert operator_norm(OperatorMatrix.identity(4, 1, p)) == pytest.approx(1.0)

    def test_rescaled_norm_one(self):
        p = SiegelPoint(1 + 2j)
        assert operator_norm(rescaled_toeplitz(p, 3, ((1,), (1,)))) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_mode_norm_is_eta(self):
        p = SiegelPoint(1j)
        A = toeplitz_mode_closed_form(p, 2, ((1,), (0,)))
        assert operator_norm(A) == pytest.approx(np.exp(-np.pi / 4), abs=1e-12)

    def test_hs_identity(self):
        p = SiegelPoint(1j)
        I = OperatorMatrix.identity(5, 1, p)
        assert hs_inner(I, I) == pytest.approx(5.0)

    def test_hs_equals_frobenius(self, rng):
        p = SiegelPoint(1j)
        M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        A = OperatorMatrix(3, 1, p, M, "derived")
        got = hs_inner(A, A).real
        assert got == pytest.approx(np.linalg.norm(M, "fro") ** 2, rel=1e-12)
        assert hs_inner(A, A).imag == pytest.approx(0.0, abs=1e-12)

    def test_scaled_norm_of_rescaled_is_one(self, points_n1):
        for p in points_n1:
            A = rescaled_toeplitz(p, 4, ((2,), (1,)))
            assert hs_norm_scaled(A) == pytest.approx(1.0, abs=1e-12)

    def test_cross_mode_orthogonal(self):
        p = SiegelPoint(1j)
        A = toeplitz_function(p, 2, FourierFunction.mode((1,), (0,)))
        B = toeplitz_function(p, 2, FourierFunction.mode((0,), (1,)))
        assert abs(hs_inner(A, B)) < 1e-14


class TestTraceLemma:
    def test_identity_pair(self, points_n1):
        for p in points_n1:
            for k in (1, 2, 5):
                v = trace_pair_closed_form(p, k, ((0,), (0,)), ((0,), (0,)))
                assert v == pytest.approx(k, abs=1e-12)

    def test_off_congruence_zero(self):
        p = SiegelPoint(1j)
        assert trace_pair_closed_form(p, 2, ((1,), (0,)), ((0,), (1,))) == 0

    def test_equal_modes_value(self):
        # frozen from the direct matrix trace: 2 e^{-pi/2}
        p = SiegelPoint(1j)
        v = trace_pair_closed_form(p, 2, ((1,), (0,)), ((1,), (0,)))
        assert v == pytest.approx(0.4157591527015238, abs=1e-13)

    def test_sign_is_one_for_equal_modes(self):
        assert trace_pair_sign(3, ((2,), (1,)), ((2,), (1,))) == 1

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_matches_direct_traces(self, k, points_n1):
        modes = [
            FourierMode((r,), (s,))
            for r in range(-2, 3)
            for s in range(-2, 3)
        ]
        p = points_n1[1]
        mats = {m: toeplitz_mode_closed_form(p, k, m) for m in modes}
        for m1, m2 in itertools.product(modes, modes):
            closed = trace_pair_closed_form(p, k, m1, m2)
            direct = hs_inner(mats[m1], mats[m2])
            assert abs(closed - direct) < 1e-10

    def test_congruent_pair_carries_sign(self):
        # t = r + k, u = s + k with k=1: the sign can be -1; the values
        # must still match the direct trace including that sign
        p = SiegelPoint(1j)
        m1 = ((1,), (1,))
        m2 = ((2,), (2,))
        closed = trace_pair_closed_form(p, 1, m1, m2)
        direct = hs_inner(
            toeplitz_mode_closed_form(p, 1, m1),
            toeplitz_mode_closed_form(p, 1, m2),
        )
        assert abs(closed - direct) < 1e-12
        assert trace_pair_sign(1, m1, m2) == -1


class TestAsymptotics:
    def test_bms_two_cosine(self):
        p = SiegelPoint(1j)
        f = FourierFunction({((1,), (0,)): 1.0, ((-1,), (0,)): 1.0})
        rows = bms_experiment(p, f, (8, 16, 32, 64, 128))
        errs = [r["error"] for r in rows]
        assert rows[0]["sup"] == pytest.approx(2.0, abs=1e-6)
        assert all(b < a for a, b in zip(errs, errs[1:]))
        ratios = [b / a for a, b in zip(errs, errs[1:])]
        assert all(0.3 <= r <= 0.7 for r in ratios)
        # at Z = i the norm is 2 eta_k(1,0), so the error is 2(1 - e^{-pi/2k})
        for row in rows:
            want = 2 * (1 - np.exp(-np.pi / (2 * row["k"])))
            assert row["error"] == pytest.approx(want, abs=1e-10)

    def test_bms_constant_function(self):
        p = SiegelPoint(1j)
        rows = bms_experiment(p, FourierFunction.constant(1.0), (2, 4))
        assert all(r["error"] < 1e-12 for r in rows)

    def test_product_fit_c0_is_pointwise_product(self):
        p = SiegelPoint(1j)
        f = FourierFunction.mode((1,), (0,))
        g = FourierFunction.mode((0,), (1,))
        # the order fit needs the asymptotic regime; at k = 8 the 1/k^2
        # curvature of the Gaussian factors still biases the slope
        fit = product_expansion_fit(p, f, g, (16, 32, 64, 128, 256))
        assert fit.c0_fit_order >= 0.9
        c0 = fit.coefficients[0]
        assert c0.approx_eq(f * g, tol=1e-5)
        assert not fit.ill_conditioned

    def test_product_fit_constant_pair(self):
        p = SiegelPoint(1j)
        one = FourierFunction.constant(1.0)
        fit = product_expansion_fit(p, one, one, (8, 16, 32, 64, 128))
        for l in range(1, 4):
            for c in fit.coefficients[l].terms.values():
                assert abs(c) < 1e-10

    def test_c1_constant_and_residual(self, points_n1):
        ks = (8, 16, 32, 64, 128)
        expected = 1.0 / (2 * np.pi)
        pairs = [
            (FourierFunction.mode((1,), (0,)), FourierFunction.mode((0,), (1,))),
            (FourierFunction.mode((1,), (1,)), FourierFunction.mode((0,), (1,))),
        ]
        constants = []
        for p in points_n1[:2]:
            for f, g in pairs:
                comp = c1_antisymmetry_constant(p, f, g, ks)
                assert comp.relative_residual < 0.02
                constants.append(comp.constant)
        for c in constants:
            assert abs(c - expected) / expected < 0.02
        spread = max(abs(c - constants[0]) for c in constants)
        assert spread / abs(constants[0]) < 0.02

    def test_loglog_order_exact_power(self):
        ks = (8, 16, 32, 64)
        errs = [3.0 / k for k in ks]
        assert loglog_order(ks, errs) == pytest.approx(1.0, abs=1e-12)
