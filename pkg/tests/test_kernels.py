"""Backend cross-checks: the compiled kernels must reproduce the numpy path."""

import numpy as np
import pytest

from msdarcy import kernels
from msdarcy import _kernels_np as knp
from msdarcy import mixture as mx
from msdarcy.hyperbolic import numerical_flux
from msdarcy.mixture import CellState, MixtureModel, PressureLaw

compiled = kernels.available_backends().get("compiled")
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def make_tables(n, rng, affine=False):
    lam0 = rng.uniform(0.0, 1.0, (n, n))
    lam0 = 0.5 * (lam0 + lam0.T)
    np.fill_diagonal(lam0, 0.0)
    if affine:
        lami = rng.uniform(0.0, 0.3, (n, n))
        np.fill_diagonal(lami, 0.0)
        lamj = np.ascontiguousarray(lami.T)
    else:
        lami = np.zeros((n, n))
        lamj = np.zeros((n, n))
    return lam0, np.ascontiguousarray(lami), lamj


@needs_compiled
@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("muscl", [False, True])
def test_hyperbolic_update_matches(n, muscl):
    rng = np.random.default_rng(n)
    N = 73
    r_pad = np.ascontiguousarray(rng.uniform(0.5, 2.0, (n, N + 4)))
    m_pad = np.ascontiguousarray(rng.uniform(-1.0, 1.0, (n, N + 4)))
    k = rng.uniform(0.5, 2.0, n)
    gamma = rng.uniform(1.0, 2.5, n)
    a = knp.hyperbolic_update(r_pad, m_pad, k, gamma, 0.05, muscl)
    b = compiled.hyperbolic_update(r_pad, m_pad, k, gamma, 0.05, muscl)
    assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-14)
    assert np.allclose(a[1], b[1], rtol=1e-12, atol=1e-14)


@needs_compiled
@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("affine", [False, True])
def test_source_update_matches(n, affine):
    rng = np.random.default_rng(10 + n)
    N = 50
    r = np.ascontiguousarray(rng.uniform(0.5, 2.0, (n, N)))
    m = np.ascontiguousarray(rng.uniform(-1.0, 1.0, (n, N)))
    M = rng.uniform(0.5, 2.0, n)
    lam0, lami, lamj = make_tables(n, rng, affine)
    a = knp.source_update(r, m, M, lam0, lami, lamj, 3.7)
    b = compiled.source_update(r, m, M, lam0, lami, lamj, 3.7)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_compiled
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_parabolic_update_matches(n):
    rng = np.random.default_rng(20 + n)
    N = 41
    r_pad = np.ascontiguousarray(rng.uniform(0.5, 2.0, (n, N + 2)))
    k = rng.uniform(0.5, 2.0, n)
    gamma = rng.uniform(1.0, 2.5, n)
    M = rng.uniform(0.5, 2.0, n)
    lam0, lami, lamj = make_tables(n, rng, affine=True)
    a = knp.parabolic_update(r_pad, M, k, gamma, lam0, lami, lamj, 0.02)
    b = compiled.parabolic_update(r_pad, M, k, gamma, lam0, lami, lamj, 0.02)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_compiled
def test_max_signal_speed_matches():
    rng = np.random.default_rng(30)
    r = np.ascontiguousarray(rng.uniform(0.5, 2.0, (3, 100)))
    m = np.ascontiguousarray(rng.uniform(-1.0, 1.0, (3, 100)))
    k = rng.uniform(0.5, 2.0, 3)
    gamma = np.array([1.0, 2.0, 1.7])
    a = knp.max_signal_speed(r, m, k, gamma)
    b = compiled.max_signal_speed(r, m, k, gamma)
    assert a == pytest.approx(b, rel=1e-14)


class TestKernelAgainstReference:
    """The vectorized kernels against the pointwise reference operations."""

    def test_first_order_update_is_rusanov_flux_difference(self):
        rng = np.random.default_rng(40)
        n, N = 2, 16
        model = MixtureModel.constant_lambda(
            (PressureLaw(1.3, 2.0), PressureLaw(0.8, 1.5)), [1.0, 2.0], 0.4
        )
        r_pad = rng.uniform(0.5, 2.0, (n, N + 4))
        m_pad = rng.uniform(-0.5, 0.5, (n, N + 4))
        coef = 0.03
        r_new, m_new = knp.hyperbolic_update(
            r_pad, m_pad, model.stiffness, model.exponents, coef, False
        )
        # reference: assemble interface fluxes pointwise and difference them
        fluxes = []
        for f in range(N + 1):
            left = CellState(r_pad[:, f + 1], m_pad[:, f + 1][:, None])
            right = CellState(r_pad[:, f + 2], m_pad[:, f + 2][:, None])
            fluxes.append(numerical_flux(model, left, right))
        fluxes = np.array(fluxes)
        for c in range(N):
            dflux = fluxes[c + 1] - fluxes[c]
            assert np.allclose(
                r_new[:, c], r_pad[:, c + 2] - coef * dflux[:n], rtol=1e-13, atol=1e-14
            )
            assert np.allclose(
                m_new[:, c], m_pad[:, c + 2] - coef * dflux[n:], rtol=1e-13, atol=1e-14
            )

    def test_source_update_solves_the_implicit_system(self):
        rng = np.random.default_rng(41)
        n, N = 3, 8
        laws = tuple(PressureLaw(1.0, 2.0) for _ in range(n))
        lam0, lami, lamj = make_tables(n, rng, affine=True)
        model = MixtureModel(laws, rng.uniform(0.5, 2.0, n), lam0, lami, lamj)
        r = rng.uniform(0.5, 2.0, (n, N))
        m = rng.uniform(-1.0, 1.0, (n, N))
        coef = 2.2
        m_new = knp.source_update(
            r, m, model.mobilities, lam0, lami, lamj, coef
        )
        for c in range(N):
            bt = mx.mobility_matrix(model, r[:, c], check=False)
            residual = (np.eye(n) + coef * bt) @ m_new[:, c] - m[:, c]
            assert np.max(np.abs(residual)) < 1e-12

    def test_parabolic_update_matches_limit_flux(self):
        from msdarcy.parabolic import limit_flux

        rng = np.random.default_rng(42)
        n, N = 2, 12
        model = MixtureModel.constant_lambda(
            (PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0)), [1.0, 1.5], 0.5
        )
        r_pad = rng.uniform(0.5, 2.0, (n, N + 2))
        dx = 0.1
        dt = 1e-4
        r_new = knp.parabolic_update(
            r_pad,
            model.mobilities,
            model.stiffness,
            model.exponents,
            model.lam_const,
            model.lam_di,
            model.lam_dj,
            dt / dx**2,
        )
        for c in range(N):
            j_left = limit_flux(model, r_pad[:, c], r_pad[:, c + 1], dx)
            j_right = limit_flux(model, r_pad[:, c + 1], r_pad[:, c + 2], dx)
            expected = r_pad[:, c + 1] - (dt / dx) * (j_right - j_left)
            assert np.allclose(r_new[:, c], expected, rtol=1e-12, atol=1e-14)

    def test_flux_consistency(self):
        model = MixtureModel.constant_lambda([PressureLaw(1.0, 2.0)], [1.0], 0.0)
        state = CellState([1.0], [[0.0]])
        assert np.allclose(numerical_flux(model, state, state), [0.0, 1.0], atol=1e-15)
        state2 = CellState([1.7], [[0.6]])
        assert np.allclose(
            numerical_flux(model, state2, state2),
            mx.flux_vector(model, state2, 0),
            rtol=1e-15,
        )
