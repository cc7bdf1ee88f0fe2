import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogofock.errors import PreconditionError
from bogofock.linalg import mat_exp
from bogofock.symplectic import (
    SigmaGenerator,
    SymplecticElement,
    commuting_flow,
    compose,
    flow,
    hs_flow_bound,
    inverse,
    is_sigma2,
    is_symplectic,
    k_t,
    k_t_derivative,
    k_properties,
    local_exponent,
    tau,
    theta,
)
from conftest import PHASE_THETA

MU = math.sqrt(0.75)  # sqrt(r^2 - w^2) for S = 0.5i, T = 1


def scalar_k(r, w, t):
    mu = math.sqrt(r * r - w * w)
    return r * math.sinh(t * mu) / (mu * math.cosh(t * mu) + 1j * w * math.sinh(t * mu))


def generators(max_d=4):
    return st.tuples(st.integers(1, max_d), st.integers(0, 2**32 - 1)).map(
        lambda p: SigmaGenerator.random(p[0], np.random.default_rng(p[1]))
    )


class TestMembership:
    def test_identity(self):
        assert is_symplectic(np.eye(3), np.zeros((3, 3))) == (0, 0, 0, 0)

    def test_hyperbolic(self):
        res = is_symplectic([[math.cosh(1)]], [[math.sinh(1)]])
        assert max(res) < 1e-14

    def test_fails_for_s_equal_t(self):
        res = is_symplectic([[1.0]], [[1.0]])
        assert res.s1 == pytest.approx(1.0)
        assert not res.passes()

    @pytest.mark.parametrize(
        "s, t",
        [
            (1j * np.eye(2), 0.5 * np.eye(2)),
            ([[0, 1], [-1, 0]], [[0, 1], [1, 0]]),
        ],
    )
    def test_sigma2_members(self, s, t):
        assert tuple(is_sigma2(s, t)) == (0, 0)

    def test_hermitian_s_is_not_sigma2(self):
        res = is_sigma2(np.eye(2), np.zeros((2, 2)))
        assert res.anti_hermitian == pytest.approx(2.0)
        with pytest.raises(PreconditionError):
            SigmaGenerator(np.eye(2), np.zeros((2, 2))).validate()

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            is_symplectic(np.eye(2), np.eye(3))


class TestInverseAndCompose:
    def test_identity(self):
        inv = inverse(SymplecticElement.identity(2))
        np.testing.assert_array_equal(inv.S, np.eye(2))
        np.testing.assert_array_equal(inv.T, np.zeros((2, 2)))

    def test_scalar(self):
        inv = inverse(SymplecticElement([[math.cosh(1)]], [[math.sinh(1)]]))
        assert inv.S[0, 0] == pytest.approx(math.cosh(1))
        assert inv.T[0, 0] == pytest.approx(-math.sinh(1))

    @given(generators(), st.floats(-2, 2))
    @settings(max_examples=40, deadline=None)
    def test_inverse_is_backward_flow(self, g, t):
        inv = inverse(flow(g, t).element)
        back = flow(g, -t)
        np.testing.assert_allclose(inv.matrix, back.matrix, atol=1e-10)
        np.testing.assert_allclose(inv.matrix @ flow(g, t).matrix, np.eye(2 * g.d), atol=1e-10)

    @given(generators(3), st.floats(-1, 1), st.floats(-1, 1))
    @settings(max_examples=40, deadline=None)
    def test_flow_group_law(self, g, t, s):
        prod = compose(flow(g, t).element, flow(g, s).element)
        np.testing.assert_allclose(prod.matrix, flow(g, t + s).matrix, atol=1e-10)
        assert prod.residuals().passes()


class TestFlow:
    def test_diagonal_case(self, rng):
        g = SigmaGenerator.random(3, rng)
        g = SigmaGenerator(g.S, np.zeros((3, 3)))
        smp = flow(g, 0.7)
        np.testing.assert_allclose(smp.block11, mat_exp(0.7 * g.S), atol=1e-14)
        np.testing.assert_array_equal(smp.block21, np.zeros((3, 3)))

    def test_squeeze_blocks(self, squeeze):
        smp = flow(squeeze, 1.0)
        assert smp.block11[0, 0] == pytest.approx(math.cosh(0.5), abs=1e-14)
        assert smp.block21[0, 0] == pytest.approx(math.sinh(0.5), abs=1e-14)
        assert smp.block11[0, 0] == pytest.approx(1.127626, abs=1e-6)
        assert smp.block21[0, 0] == pytest.approx(0.521095, abs=1e-6)

    def test_phase_block11(self, phase):
        want = math.cosh(MU) + 0.5j * math.sinh(MU) / MU
        assert flow(phase, 1.0).block11[0, 0] == pytest.approx(want, abs=1e-14)

    @given(generators(), st.floats(-2, 2))
    @settings(max_examples=60, deadline=None)
    def test_samples_are_symplectic(self, g, t):
        smp = flow(g, t)
        assert smp.element.residuals().passes()
        lem = k_properties(smp)
        assert lem["k1_norm"] < 1
        assert lem["k1_symmetry"] < 1e-10
        assert lem["k3_symmetry"] < 1e-10


class TestK:
    def test_zero_time(self, rng):
        g = SigmaGenerator.random(3, rng)
        np.testing.assert_array_equal(k_t(g, 0.0), np.zeros((3, 3)))

    @pytest.mark.parametrize("t", [0.1, 1.0, 3.0, -2.0])
    def test_squeeze_is_tanh(self, t):
        g = SigmaGenerator([[0]], [[0.7]])
        assert k_t(g, t)[0, 0] == pytest.approx(math.tanh(0.7 * t), abs=1e-14)

    @pytest.mark.parametrize("r, w, t", [(1.0, 0.5, 1.0), (0.8, 0.3, 2.5), (2.0, 1.0, -0.4)])
    def test_scalar_closed_form(self, r, w, t):
        g = SigmaGenerator([[1j * w]], [[r]])
        assert k_t(g, t)[0, 0] == pytest.approx(scalar_k(r, w, t), abs=1e-13)

    def test_derivative_at_zero_is_t(self, rng):
        g = SigmaGenerator.random(3, rng)
        np.testing.assert_allclose(k_t_derivative(g, 0.0), g.T, atol=1e-14)

    @pytest.mark.parametrize("t", [0.0, 0.5, 2.0])
    def test_derivative_squeeze(self, t):
        g = SigmaGenerator([[0]], [[0.5]])
        assert k_t_derivative(g, t)[0, 0] == pytest.approx(0.5 / math.cosh(0.5 * t) ** 2, abs=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_derivative_finite_difference(self, seed):
        g = SigmaGenerator.random(3, np.random.default_rng(seed))
        h, t = 1e-4, 0.7
        fd = (k_t(g, t + h) - k_t(g, t - h)) / (2 * h)
        np.testing.assert_allclose(k_t_derivative(g, t), fd, atol=1e-6)


class TestPhase:
    def test_tau_zero_at_origin(self, phase):
        assert tau(phase, 0.0) == 0.0

    @pytest.mark.parametrize("s", [0.3, 1.0, 4.0])
    def test_tau_vanishes_for_real_generator(self, squeeze, s):
        assert tau(squeeze, s) == 0.0

    def test_tau_phase_closed_form(self, phase):
        sh, ch = math.sinh(MU), math.cosh(MU)
        want = -(0.5 / 2) * sh**2 / (MU**2 * ch**2 + 0.25 * sh**2)
        assert tau(phase, 1.0) == pytest.approx(want, abs=1e-14)

    def test_theta_squeeze(self, squeeze):
        assert theta(squeeze, 2.0) == 0.0
        assert theta(squeeze, 0.0) == 0.0

    @pytest.mark.parametrize("t", sorted(PHASE_THETA))
    def test_theta_phase_reference(self, phase, t):
        assert theta(phase, t) == pytest.approx(PHASE_THETA[t], abs=1e-10)

    def test_theta_phase_negative(self, phase):
        assert theta(phase, 1.0) < 0

    def test_local_exponent(self, phase, squeeze):
        assert local_exponent(phase, 0.7, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert local_exponent(squeeze, 0.3, 1.2) == 0.0
        want = 2 * PHASE_THETA[0.5] - PHASE_THETA[1.0]
        assert local_exponent(phase, 0.5, 0.5) == pytest.approx(want, abs=1e-10)

    @given(generators(2), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
    @settings(max_examples=15, deadline=None)
    def test_two_cocycle(self, g, t, s, u):
        rho = lambda a, b: local_exponent(g, a, b)  # noqa: E731
        assert rho(t, s) + rho(t + s, u) == pytest.approx(rho(s, u) + rho(t, s + u), abs=1e-9)

    def test_rho_symmetric(self, phase):
        assert local_exponent(phase, 0.4, 0.7) == pytest.approx(local_exponent(phase, 0.7, 0.4), abs=1e-12)


class TestHsBound:
    @given(generators(), st.floats(-2, 2))
    @settings(max_examples=60, deadline=None)
    def test_bound_holds(self, g, t):
        lhs, rhs = hs_flow_bound(g, t)
        assert lhs <= rhs * (1 + 1e-12) + 1e-14

    def test_zero_t(self, phase):
        assert hs_flow_bound(phase, 0.0) == (0.0, 0.0)

    def test_t_zero_generator(self, rotation):
        assert hs_flow_bound(rotation, 1.3) == (0.0, 0.0)


class TestCommutingFlow:
    def test_squeeze(self):
        smp = commuting_flow([[0]], [[0.5]], 1.0)
        assert smp.K[0, 0] == pytest.approx(math.tanh(0.5), abs=1e-15)
        assert smp.K[0, 0] == pytest.approx(0.462117, abs=1e-6)

    def test_diagonal_2d(self, commuting2d):
        smp = commuting_flow(commuting2d.S, commuting2d.T, 1.0)
        np.testing.assert_allclose(smp.K, np.diag(np.tanh([0.3, 0.7])), atol=1e-15)
        np.testing.assert_allclose(smp.matrix, flow(commuting2d, 1.0).matrix, atol=1e-14)

    def test_zero_t(self):
        s = np.array([[0, 1.0], [-1.0, 0]])
        smp = commuting_flow(s, np.zeros((2, 2)), 0.6)
        np.testing.assert_allclose(smp.block11, mat_exp(0.6 * s), atol=1e-15)
        np.testing.assert_array_equal(smp.block21, np.zeros((2, 2)))

    def test_rotation_with_commuting_t(self):
        s = np.array([[0, 0.4], [-0.4, 0]])
        t = 0.3 * np.eye(2)
        smp = commuting_flow(s, t, 1.5)
        np.testing.assert_allclose(smp.matrix, flow(SigmaGenerator(s, t), 1.5).matrix, atol=1e-13)

    @pytest.mark.parametrize(
        "s, t",
        [
            ([[0.5j]], [[1.0]]),  # complex S
            ([[0, 1.0], [-1.0, 0]], [[0.3, 0], [0, 0.7]]),  # [S, T] != 0
            ([[1.0]], [[0.0]]),  # not in sigma_2
        ],
    )
    def test_rejects(self, s, t):
        with pytest.raises(PreconditionError):
            commuting_flow(s, t, 1.0)
