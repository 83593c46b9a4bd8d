"""
Static analytic field models: the field tensor H^{ab}(r) and its full
gradient D[r, a, b] = d^r H^{ab} at a spacetime point, plus the space-like
projections of field and gradient relative to a four-velocity.

Models are evaluated analytically. Potentials are never used.
"""

from dataclasses import dataclass, field

import numpy as np

from utils.errors import ConfigError, PreconditionError
from utils.minkowski import METRIC, AntisymTensor2, FourVector, bracket, contract_vv, field_from_eb

ON_SHELL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Field tensor H and gradient grad[r] = d^r H^{ab} (shape (4, 4, 4), contravariant)."""

    H: AntisymTensor2
    grad: np.ndarray = field(default_factory=lambda: np.zeros((4, 4, 4)))

    @property
    def is_uniform(self) -> bool:
        return not np.any(self.grad)

    def gradient_slice(self, rho: int) -> AntisymTensor2:
        return AntisymTensor2.from_matrix(self.grad[rho])


@dataclass(frozen=True)
class UniformField:
    E: tuple[float, float, float] = (0.0, 0.0, 0.0)
    B: tuple[float, float, float] = (0.0, 0.0, 0.0)

    tag = "uniform"
    nonphysical = False
    has_gradient = False

    def _eb(self, x: np.ndarray):
        zero = np.zeros((3, 3))
        return np.asarray(self.E, dtype=float), np.asarray(self.B, dtype=float), zero, zero

    def magnetic_strength(self) -> float:
        return float(np.linalg.norm(self.B))


@dataclass(frozen=True)
class MagneticQuadrupole:
    """B = (b y, b x, 0) + B0 z_hat. Curl- and divergence-free."""

    gradient: float = 1.0
    B0: float = 0.0

    tag = "magnetic-quadrupole"
    nonphysical = False
    has_gradient = True

    def _eb(self, x: np.ndarray):
        b = self.gradient
        b_field = np.array([b * x[1], b * x[0], self.B0])
        # d_b[i, j] = dB_j / dx^i
        d_b = np.zeros((3, 3))
        d_b[0, 1] = b
        d_b[1, 0] = b
        return np.zeros(3), b_field, np.zeros((3, 3)), d_b

    def magnetic_strength(self) -> float:
        return abs(self.B0)


@dataclass(frozen=True)
class LinearEGradient:
    """E = (k x, 0, 0). Has div E = k, i.e. an implied uniform source charge; test-only model."""

    k: float = 1.0

    tag = "linear-e-gradient"
    nonphysical = True
    has_gradient = True

    def _eb(self, x: np.ndarray):
        d_e = np.zeros((3, 3))
        d_e[0, 0] = self.k
        return np.array([self.k * x[0], 0.0, 0.0]), np.zeros(3), d_e, np.zeros((3, 3))

    def magnetic_strength(self) -> float:
        return 0.0


FieldModel = UniformField | MagneticQuadrupole | LinearEGradient

FIELD_MODELS: dict[str, type] = {
    UniformField.tag: UniformField,
    MagneticQuadrupole.tag: MagneticQuadrupole,
    LinearEGradient.tag: LinearEGradient,
}


def field_model(tag: str, **params) -> FieldModel:
    """Build a field model from its tag and keyword parameters."""
    cls = FIELD_MODELS.get(tag)
    if cls is None:
        raise ConfigError([("field.type", f'unknown field model "{tag}", expected one of {sorted(FIELD_MODELS)}')])
    return cls(**params)


def sample(model: FieldModel, r: FourVector) -> FieldSample:
    """
    Evaluate a static field model at position r.

    Args:
        model: Field model instance.
        r: Contravariant position four-vector; r^0 is ignored.

    Returns:
        FieldSample with the field tensor and the gradient d^r H^{ab}.
        The time slice of the gradient is zero for static models.
    """
    if type(model) not in FIELD_MODELS.values():
        raise ConfigError([("field.type", f"unsupported field model {model!r}")])
    e_field, b_field, d_e, d_b = model._eb(np.asarray(r, dtype=float)[1:])
    grad = np.zeros((4, 4, 4))
    if model.has_gradient:
        for i in range(3):
            # spatial d^i equals d/dx^i
            grad[i + 1] = field_from_eb(d_e[i], d_b[i]).matrix
    return FieldSample(H=field_from_eb(e_field, b_field), grad=grad)


def check_on_shell(v: FourVector, c: float, tol: float = ON_SHELL_TOL) -> None:
    residual = abs(contract_vv(v, v) + c * c) / (c * c)
    if residual > tol:
        raise PreconditionError(f"four-velocity is off shell: |v.v + c^2|/c^2 = {residual:.3e}")


def spacelike_derivative(s: FieldSample, v: FourVector, c: float = 1.0, strict: bool = True) -> np.ndarray:
    """
    Space-like gradient d^r + (1/c^2) v^r v_l d^l applied to H.

    Returns an array of shape (4, 4, 4) whose contraction with v_r vanishes.
    strict=False skips the on-shell check (used on intermediate integrator stages).
    """
    if strict:
        check_on_shell(v, c)
    along = np.einsum("l,lab->ab", METRIC @ v, s.grad)
    return s.grad + (1.0 / (c * c)) * v[:, None, None] * along


def spacelike_field(H: AntisymTensor2, v: FourVector, c: float = 1.0, strict: bool = True) -> AntisymTensor2:
    """H + (1/c^2) v^[a v_r H^{r b]}, the part of H with v_a H^{ab} = 0."""
    if strict:
        check_on_shell(v, c)
    u = -(H.matrix @ (METRIC @ v))
    return H + bracket(v, u) * (1.0 / (c * c))


def lower_all(grad: np.ndarray) -> np.ndarray:
    g = np.diag(METRIC)
    return grad * g[:, None, None] * g[None, :, None] * g[None, None, :]


def maxwell_residual(s: FieldSample) -> float:
    """Largest cyclic sum d_r H_ab + d_a H_br + d_b H_ra; zero for fields with no magnetic sources."""
    d = lower_all(s.grad)
    cyclic = d + np.transpose(d, (1, 2, 0)) + np.transpose(d, (2, 0, 1))
    return float(np.max(np.abs(cyclic)))
