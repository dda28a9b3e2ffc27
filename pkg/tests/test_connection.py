import numpy as np
import pytest
from hypothesis import given

from diracred.connection import DiscreteConnection
from diracred.spaces import DimensionError, TrivializedSpace, pair

from conftest import rand_point, random_connection, seeds

SP = TrivializedSpace(3, 1)


def test_h_d_at_own_shape_point(rng):
    c = random_connection(rng)
    q0 = rand_point(rng, c.space)
    np.testing.assert_allclose(c.h_d(q0, q0.x), q0.g, atol=1e-15)


def test_flat_connection():
    c = DiscreteConnection.flat(SP)
    assert c.is_flat
    q0 = SP.point([1, 2, 3], [0.5])
    np.testing.assert_array_equal(c.h_d(q0, [7, 8, 9]), [0.5])
    q1 = SP.point([4, 5, 6], [2.0])
    np.testing.assert_array_equal(c.omega_d(q0, q1), [1.5])


@given(seeds)
def test_connection_axioms(seed):
    rng = np.random.default_rng(seed)
    c = random_connection(rng)
    sp = c.space
    q0, q1 = rand_point(rng, sp), rand_point(rng, sp)
    a, b = rng.uniform(-1, 1, sp.dim_g), rng.uniform(-1, 1, sp.dim_g)
    x1 = rng.uniform(-1, 1, sp.dim_sigma)
    np.testing.assert_allclose(c.omega_d(q0, q0), 0, atol=1e-14)
    lhs = c.omega_d(sp.point(q0.x, q0.g + a), sp.point(q1.x, q1.g + b))
    np.testing.assert_allclose(lhs, b + c.omega_d(q0, q1) - a, atol=1e-14)
    np.testing.assert_allclose(c.h_d(sp.point(q0.x, q0.g + a), x1), a + c.h_d(q0, x1), atol=1e-14)
    # decomposition and explicit forms
    np.testing.assert_array_equal(c.h_d(q0, x1), c.h_dQ(q0) + c.h_dSigma(x1))
    np.testing.assert_allclose(c.omega_d(q0, q1), q1.g - q0.g - c.H @ (q1.x - q0.x), atol=1e-14)


@given(seeds)
def test_h_d0_examples(seed):
    rng = np.random.default_rng(seed)
    c = random_connection(rng)
    sp = c.space
    x0, x1 = rng.uniform(-1, 1, (2, sp.dim_sigma))
    mu = rng.uniform(-1, 1, sp.dim_g)
    np.testing.assert_allclose(c.h_d0(x0, x0), 0, atol=1e-15)
    np.testing.assert_allclose(c.h_d0(np.zeros(sp.dim_sigma), x1), c.h_dSigma(x1), atol=1e-15)
    np.testing.assert_allclose(c.h_d0(x0, np.zeros(sp.dim_sigma)), -c.H @ x0, atol=1e-15)
    np.testing.assert_allclose(c.pair_h_d0_first(mu), -c.H.T @ mu, atol=1e-15)
    np.testing.assert_allclose(c.h_d0(x0, x1), c.h_d(sp.point(x0, np.zeros(sp.dim_g)), x1), atol=1e-15)


@given(seeds)
def test_blocks_and_adjoints(seed):
    rng = np.random.default_rng(seed)
    c = random_connection(rng)
    sp = c.space
    g = rng.uniform(-1, 1, sp.dim_g)
    x = rng.uniform(-1, 1, sp.dim_sigma)
    mu = rng.uniform(-1, 1, sp.dim_g)
    np.testing.assert_array_equal(c.h_dQ(sp.point(np.zeros(sp.dim_sigma), g)), g)
    np.testing.assert_array_equal(c.pair_h_d_fiber(mu), mu)
    np.testing.assert_array_equal(c.h_dSigma_adj(np.zeros(sp.dim_g)), 0)
    assert float(c.h_dSigma_adj(mu) @ x) == pytest.approx(float(mu @ c.h_dSigma(x)), abs=1e-13)
    q = rand_point(rng, sp)
    mx, mg = c.h_dQ_adj(mu)
    assert pair(sp.covector(mx, mg), q) == pytest.approx(float(mu @ c.h_dQ(q)), abs=1e-13)


@given(seeds)
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    c = random_connection(rng)
    sp = c.space
    q0, q1 = rand_point(rng, sp), rand_point(rng, sp)
    x0, x1 = rng.uniform(-1, 1, (2, sp.dim_sigma))
    s = rng.uniform(-2, 2)
    sup = c.h_d(q0 + q1, x0 + s * x1) - c.h_d(q0, x0) - c.h_d(q1, s * x1)
    np.testing.assert_allclose(sup, 0, atol=1e-12)


def test_partial_derivative_model(rng):
    c = random_connection(rng)
    sp = c.space
    q0 = rand_point(rng, sp)
    x1 = rng.uniform(-1, 1, sp.dim_sigma)
    q = rand_point(rng, sp)
    x = rng.uniform(-1, 1, sp.dim_sigma)
    e = 1e-5
    d1 = (c.h_d(sp.point(q0.x + e * q.x, q0.g + e * q.g), x1) - c.h_d(sp.point(q0.x - e * q.x, q0.g - e * q.g), x1)) / (2 * e)
    np.testing.assert_allclose(d1, c.h_d(q, np.zeros(sp.dim_sigma)), atol=1e-8)
    d2 = (c.h_d(q0, x1 + e * x) - c.h_d(q0, x1 - e * x)) / (2 * e)
    np.testing.assert_allclose(d2, c.h_d(sp.zero_point(), x), atol=1e-8)


def test_config_roundtrip(rng):
    c = random_connection(rng)
    assert np.array_equal(DiscreteConnection.from_config(c.space, c.to_config()).H, c.H)
    for spec in ("flat", {"type": "flat"}, None):
        assert DiscreteConnection.from_config(SP, spec).is_flat
    assert DiscreteConnection.flat(SP).to_config() == {"type": "flat"}
    with pytest.raises(ValueError):
        DiscreteConnection.from_config(SP, "curved")


def test_shape_validation():
    with pytest.raises(DimensionError):
        DiscreteConnection(SP, np.zeros((3, 1)))
    with pytest.raises(ValueError):
        DiscreteConnection(SP, [[np.inf, 0, 0]])
    c = DiscreteConnection(SP, [[1, 2, 3]])
    with pytest.raises(DimensionError):
        c.h_dSigma([1, 2])
