import numpy as np
import pytest

from utils.errors import ConfigError, PreconditionError
from utils.fields import (
    FieldSample,
    LinearEGradient,
    MagneticQuadrupole,
    UniformField,
    field_model,
    maxwell_residual,
    sample,
    spacelike_derivative,
    spacelike_field,
)
from utils.minkowski import METRIC, AntisymTensor2, field_from_eb, four_vector, velocity_from_beta


def test_uniform_field_is_the_same_everywhere(rng):
    model = UniformField(E=(0.0, 0.0, 0.0), B=(0.0, 0.0, 1.0))
    for _ in range(5):
        s = sample(model, rng.normal(size=4))
        assert s.H.matrix[1, 2] == 1.0
        assert s.is_uniform
        assert not np.any(s.grad)


def test_quadrupole_off_axis():
    s = sample(MagneticQuadrupole(gradient=2.0), four_vector(0.0, 1.0, 0.0, 0.0))
    assert np.array_equal(s.H.b, [0.0, 2.0, 0.0])
    # d/dx slice carries dB/dx = (0, b, 0)
    assert np.array_equal(s.gradient_slice(1).b, [0.0, 2.0, 0.0])
    assert np.array_equal(s.gradient_slice(2).b, [2.0, 0.0, 0.0])
    assert s.gradient_slice(0).norm() == 0.0


def test_quadrupole_at_origin_has_gradient_but_no_field():
    s = sample(MagneticQuadrupole(gradient=1.0), four_vector(0.0, 0.0, 0.0, 0.0))
    assert s.H.norm() == 0.0
    assert not s.is_uniform


def test_linear_e_gradient_is_flagged_nonphysical():
    model = LinearEGradient(k=0.5)
    assert model.nonphysical
    s = sample(model, four_vector(0.0, 2.0, 0.0, 0.0))
    assert np.array_equal(s.H.e, [-1.0, 0.0, 0.0])


@pytest.mark.parametrize("model", [MagneticQuadrupole(gradient=1.5, B0=0.3), LinearEGradient(k=2.0), UniformField()])
def test_homogeneous_maxwell_equations_hold(model, rng):
    assert maxwell_residual(sample(model, rng.normal(size=4))) == 0.0


def test_field_model_factory():
    assert field_model("magnetic-quadrupole", gradient=3.0) == MagneticQuadrupole(gradient=3.0)
    with pytest.raises(ConfigError, match="unknown field model"):
        field_model("dipole")


def test_sample_rejects_foreign_models():
    with pytest.raises(ConfigError):
        sample(object(), np.zeros(4))


def test_spacelike_derivative_of_uniform_field_is_zero():
    s = sample(UniformField(B=(0.0, 0.0, 1.0)), np.zeros(4))
    assert not np.any(spacelike_derivative(s, four_vector(1.0, 0.0, 0.0, 0.0)))


def test_spacelike_derivative_at_rest_keeps_spatial_slices():
    c = 2.0
    s = sample(MagneticQuadrupole(gradient=1.0, B0=0.5), four_vector(0.0, 0.3, -0.2, 0.1))
    d_sl = spacelike_derivative(s, four_vector(c, 0.0, 0.0, 0.0), c)
    assert np.array_equal(d_sl[1:], s.grad[1:])
    assert not np.any(d_sl[0])


def test_spacelike_derivative_is_orthogonal_to_velocity(rng):
    c = 1.5
    for _ in range(20):
        grad = rng.normal(size=(4, 4, 4))
        grad = grad - grad.transpose(0, 2, 1)
        s = FieldSample(H=AntisymTensor2.zero(), grad=grad)
        beta = rng.normal(size=3)
        beta *= rng.uniform(0.0, 0.95) / np.linalg.norm(beta)
        v = velocity_from_beta(beta, c)
        d_sl = spacelike_derivative(s, v, c)
        projected = np.einsum("r,rab->ab", METRIC @ v, d_sl)
        assert np.max(np.abs(projected)) < 1e-12 * np.max(np.abs(d_sl)) * v[0] ** 2


def test_spacelike_operators_reject_off_shell_velocity():
    s = sample(MagneticQuadrupole(), np.zeros(4))
    off_shell = four_vector(1.0, 0.5, 0.0, 0.0)
    with pytest.raises(PreconditionError, match="off shell"):
        spacelike_derivative(s, off_shell)
    with pytest.raises(PreconditionError):
        spacelike_field(s.H, off_shell)
    # intermediate integrator stages skip the check
    spacelike_derivative(s, off_shell, strict=False)


def test_spacelike_field_at_rest_drops_the_electric_part():
    c = 2.0
    H = field_from_eb([0.3, -0.1, 0.2], [0.5, 0.4, -0.7])
    h_sl = spacelike_field(H, four_vector(c, 0.0, 0.0, 0.0), c)
    assert np.allclose(h_sl.e, 0.0, rtol=0, atol=1e-16)
    assert np.allclose(h_sl.b, H.b, rtol=0, atol=0)
    assert spacelike_field(AntisymTensor2.zero(), four_vector(c, 0.0, 0.0, 0.0), c).norm() == 0.0


def test_spacelike_field_is_orthogonal_to_velocity(rng):
    for _ in range(20):
        H = field_from_eb(rng.normal(size=3), rng.normal(size=3))
        beta = rng.normal(size=3)
        beta *= rng.uniform(0.0, 0.95) / np.linalg.norm(beta)
        v = velocity_from_beta(beta)
        h_sl = spacelike_field(H, v)
        residual = (METRIC @ v) @ h_sl.matrix
        assert np.max(np.abs(residual)) < 1e-12 * H.norm() * v[0] ** 3


@pytest.mark.parametrize("model", [MagneticQuadrupole(gradient=1.5, B0=0.3), LinearEGradient(k=2.0)])
def test_gradient_matches_central_differences(model, rng):
    delta = 1e-3
    for _ in range(10):
        r = np.concatenate([[0.0], rng.uniform(-2.0, 2.0, size=3)])
        s = sample(model, r)
        assert not np.any(s.grad[0])
        for i in range(1, 4):
            step = np.zeros(4)
            step[i] = delta
            numeric = (sample(model, r + step).H.matrix - sample(model, r - step).H.matrix) / (2 * delta)
            assert np.allclose(s.grad[i], numeric, rtol=0, atol=1e-9)


def test_quadrupole_field_is_divergence_and_curl_free(rng):
    model = MagneticQuadrupole(gradient=0.8, B0=1.1)
    for _ in range(10):
        s = sample(model, np.concatenate([[0.0], rng.uniform(-3.0, 3.0, size=3)]))
        # d_b[i, j] = dB_j / dx^i
        d_b = np.array([s.gradient_slice(i).b for i in range(1, 4)])
        curl = np.array([d_b[1, 2] - d_b[2, 1], d_b[2, 0] - d_b[0, 2], d_b[0, 1] - d_b[1, 0]])
        assert abs(np.trace(d_b)) < 1e-15
        assert np.max(np.abs(curl)) < 1e-15
        assert np.any(d_b)


def test_spacelike_field_is_idempotent(rng):
    for _ in range(20):
        H = field_from_eb(rng.normal(size=3), rng.normal(size=3))
        beta = rng.normal(size=3)
        beta *= rng.uniform(0.0, 0.95) / np.linalg.norm(beta)
        v = velocity_from_beta(beta)
        once = spacelike_field(H, v)
        twice = spacelike_field(once, v)
        assert np.max(np.abs(twice.matrix - once.matrix)) < 1e-12 * H.norm() * v[0] ** 3
