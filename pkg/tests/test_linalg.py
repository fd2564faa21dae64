import numpy as np
import pytest

from msdarcy import linalg
from msdarcy.errors import DimensionError


class TestKron:
    def test_identity_blocks(self):
        b = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = linalg.kron(np.eye(2), b)
        expected = np.zeros((4, 4))
        expected[:2, :2] = b
        expected[2:, 2:] = b
        assert np.array_equal(out, expected)

    def test_scalar_scaling(self):
        assert np.array_equal(linalg.kron([[2.0]], np.eye(2)), 2.0 * np.eye(2))

    def test_eigenvalues_duplicate_with_identity(self):
        a = np.array([[2.0, 1.0], [1.0, 3.0]])
        got = np.sort(np.linalg.eigvalsh(linalg.kron(a, np.eye(2))))
        expected = np.sort(np.repeat(np.linalg.eigvalsh(a), 2))
        assert np.allclose(got, expected, atol=1e-12)

    def test_mixed_product_property(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.standard_normal((3, 2))
            b = rng.standard_normal((2, 4))
            c = rng.standard_normal((2, 3))
            d = rng.standard_normal((4, 2))
            lhs = linalg.kron(a, b) @ linalg.kron(c, d)
            rhs = linalg.kron(a @ c, b @ d)
            assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))

    def test_bilinearity(self):
        rng = np.random.default_rng(4)
        a, a2 = rng.standard_normal((2, 2, 2))
        b = rng.standard_normal((3, 3))
        lhs = linalg.kron(2.0 * a + a2, b)
        rhs = 2.0 * linalg.kron(a, b) + linalg.kron(a2, b)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestBlockBuilders:
    def test_blockdiag_vec_pattern(self):
        out = linalg.blockdiag_vec([np.array([1.0, 2.0]), np.array([3.0, 4.0])])
        assert np.array_equal(out, [[1, 0], [2, 0], [0, 3], [0, 4]])

    def test_blockdiag_mat_single(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(linalg.blockdiag_mat([a]), a)

    def test_blockdiag_vec_gram_identity(self):
        rng = np.random.default_rng(5)
        vecs = [rng.standard_normal(3) for _ in range(4)]
        b = linalg.blockdiag_vec(vecs)
        gram = b.T @ b
        assert np.max(np.abs(gram - np.diag([v @ v for v in vecs]))) < 1e-12

    def test_hadamard(self):
        a = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(linalg.hadamard(a, np.ones((2, 3))), a)
        with pytest.raises(DimensionError):
            linalg.hadamard(a, np.ones((3, 2)))


class TestDiscreteOperators:
    def test_constant_field_zero_gradient(self):
        f = np.full((2, 64), 3.5)
        assert np.max(np.abs(linalg.grad_general(f, 0.1))) == 0.0

    def test_polynomial_gradient_accuracy(self):
        x = np.linspace(0.0, 1.0, 2001)
        dx = x[1] - x[0]
        f = np.stack([x, x**2])
        g = linalg.grad_general(f, dx)
        assert np.max(np.abs(g[0] - 1.0)) < 1e-10
        assert np.max(np.abs(g[1] - 2.0 * x)) < 1e-10

    def test_gradient_convergence_order_two(self):
        errs = []
        for n in (64, 128, 256):
            x = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
            dx = x[1] - x[0]
            g = linalg.grad_general(np.sin(x)[None, :], dx, periodic=True)
            errs.append(np.max(np.abs(g[0] - np.cos(x))))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(rates > 1.9)

    def test_divergence_of_gradient_telescopes(self):
        x = np.linspace(0.0, 2.0 * np.pi, 128, endpoint=False)
        dx = x[1] - x[0]
        f = np.stack([np.sin(x), np.cos(2 * x)])
        g = linalg.grad_general(f, dx, periodic=True)
        div = linalg.div_general(g, dx, n=2, periodic=True)
        assert np.max(np.abs(div.sum(axis=1))) < 1e-10

    def test_div_total_is_component_sum(self):
        rng = np.random.default_rng(6)
        v = rng.standard_normal((3, 32))
        a = linalg.div_total(v, 0.1, n=3)
        b = linalg.div_general(v, 0.1, n=3).sum(axis=0)
        assert np.array_equal(a, b)

    def test_small_grid_rejected(self):
        with pytest.raises(DimensionError):
            linalg.grad_general(np.ones((1, 2)), 0.1)


class TestProductRules:
    def test_exact_for_low_degree(self):
        # alpha = x, a = (x, x^2): both sides equal (2x, 3x^2) up to the
        # cubic-term stencil error h^2
        x = np.linspace(0.0, 1.0, 101)
        dx = x[1] - x[0]
        a = np.stack([x, x**2])
        lhs = linalg.grad_general(x[None, :] * a, dx)
        rhs = a * 1.0 + x[None, :] * linalg.grad_general(a, dx)
        assert np.max(np.abs(lhs[0] - 2.0 * x)) < 1e-10
        # cubic term: h^2 f'''/6 interior, larger one-sided edge constant
        assert np.max(np.abs(lhs - rhs)) < 4.0 * dx**2

    def test_residual_second_order(self):
        res = [linalg.verify_product_rules(n) for n in (65, 129, 257, 513)]
        rates = np.log2(np.array(res[:-1]) / np.array(res[1:]))
        assert np.all(np.abs(rates - 2.0) < 0.2)

    def test_constant_fields_exact(self):
        x = np.linspace(0.0, 1.0, 33)
        dx = x[1] - x[0]
        a = np.ones((2, 33))
        lhs = linalg.grad_general(2.0 * a, dx)
        assert np.max(np.abs(lhs)) == 0.0

    def test_identity_chain_rule(self):
        # c(b) = b reduces the chain rule to grad b = grad b
        x = np.linspace(0.0, 1.0, 65)
        dx = x[1] - x[0]
        b = np.stack([np.exp(x), x**3])
        g = linalg.grad_general(b, dx)
        assert np.array_equal(g, linalg.grad_general(b, dx))
