"""
Minkowski algebra with metric diag(-1, 1, 1, 1).

Four-vectors are plain numpy arrays of shape (4,) holding contravariant
components. Antisymmetric rank-2 tensors are stored as two 3-vectors:
e = (T^10, T^20, T^30) and b = (T^23, T^31, T^12). Indices are lowered
explicitly with METRIC wherever a contraction needs them.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations

import numpy as np

from utils.errors import PreconditionError

FourVector = np.ndarray

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])


def _levi_civita() -> np.ndarray:
    """Totally antisymmetric symbol with eps^{0123} = +1."""
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


# Upper-index symbol. The lower-index symbol is -LEVI_CIVITA.
LEVI_CIVITA = _levi_civita()


def four_vector(a0: float, a1: float, a2: float, a3: float) -> FourVector:
    return np.array([a0, a1, a2, a3], dtype=float)


def lower(a: FourVector) -> FourVector:
    return METRIC @ a


def raise_index(a: FourVector) -> FourVector:
    return METRIC @ a


@dataclass(frozen=True, eq=False)
class AntisymTensor2:
    """Antisymmetric tensor T^{ab} kept as its electric-like and magnetic-like parts."""

    e: np.ndarray = field(default_factory=lambda: np.zeros(3))
    b: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "e", np.asarray(self.e, dtype=float).reshape(3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(3))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Full contravariant 4x4 matrix T^{ab}."""
        e, b = self.e, self.b
        m = np.zeros((4, 4))
        m[1:, 0] = e
        m[0, 1:] = -e
        m[2, 3], m[3, 2] = b[0], -b[0]
        m[3, 1], m[1, 3] = b[1], -b[1]
        m[1, 2], m[2, 1] = b[2], -b[2]
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "AntisymTensor2":
        """Read the six components back from a 4x4 matrix. Only the lower-left triangle is used."""
        return cls(
            e=np.array([m[1, 0], m[2, 0], m[3, 0]]),
            b=np.array([m[2, 3], m[3, 1], m[1, 2]]),
        )

    @classmethod
    def zero(cls) -> "AntisymTensor2":
        return cls()

    def components(self) -> np.ndarray:
        """Six components (e1, e2, e3, b1, b2, b3)."""
        return np.concatenate([self.e, self.b])

    @classmethod
    def from_components(cls, comps: np.ndarray) -> "AntisymTensor2":
        return cls(e=comps[:3], b=comps[3:6])

    def norm(self) -> float:
        """Euclidean norm of the six stored components."""
        return float(np.sqrt(self.e @ self.e + self.b @ self.b))

    def __add__(self, other: "AntisymTensor2") -> "AntisymTensor2":
        return AntisymTensor2(self.e + other.e, self.b + other.b)

    def __sub__(self, other: "AntisymTensor2") -> "AntisymTensor2":
        return AntisymTensor2(self.e - other.e, self.b - other.b)

    def __neg__(self) -> "AntisymTensor2":
        return AntisymTensor2(-self.e, -self.b)

    def __mul__(self, scalar: float) -> "AntisymTensor2":
        return AntisymTensor2(self.e * scalar, self.b * scalar)

    __rmul__ = __mul__

    def allclose(self, other: "AntisymTensor2", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        return np.allclose(self.components(), other.components(), rtol=rtol, atol=atol)

    def __repr__(self) -> str:
        return f"AntisymTensor2(e={self.e.tolist()}, b={self.b.tolist()})"


@dataclass(frozen=True, eq=False)
class Boost:
    """Pure boost taking a particle at rest to 3-velocity beta (in units of c)."""

    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(3)
        if not beta @ beta < 1.0:
            raise PreconditionError(f"boost requires |beta| < 1, got |beta| = {np.sqrt(beta @ beta)}")
        object.__setattr__(self, "beta", beta)

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.beta @ self.beta)

    @cached_property
    def matrix(self) -> np.ndarray:
        beta, gamma = self.beta, self.gamma
        lam = np.empty((4, 4))
        lam[0, 0] = gamma
        lam[0, 1:] = gamma * beta
        lam[1:, 0] = gamma * beta
        # (gamma - 1) / beta^2 written so that beta = 0 needs no special case
        lam[1:, 1:] = np.eye(3) + (gamma**2 / (gamma + 1.0)) * np.outer(beta, beta)
        return lam

    def inverse(self) -> "Boost":
        return Boost(-self.beta)


def contract_vv(a: FourVector, b: FourVector) -> float:
    """g_{mn} a^m b^n = -a0 b0 + a.b"""
    return float(a @ METRIC @ b)


def contract_tv(t: AntisymTensor2, v: FourVector) -> FourVector:
    """u^r = T^{rl} v_l"""
    return t.matrix @ (METRIC @ v)


def contract_tt(a: AntisymTensor2, b: AntisymTensor2) -> float:
    """A_{ab} B^{ab} = 2 (b_A . b_B - e_A . e_B)"""
    return float(2.0 * (a.b @ b.b - a.e @ b.e))


def bracket(a: FourVector, b: FourVector) -> AntisymTensor2:
    """Antisymmetrizer without the 1/2: C^{ab} = a^a b^b - a^b b^a."""
    return AntisymTensor2(
        e=a[1:] * b[0] - a[0] * b[1:],
        b=np.cross(a[1:], b[1:]),
    )


def commutator_bracket(a: AntisymTensor2, b: AntisymTensor2) -> AntisymTensor2:
    """C^{ab} = A^{ar} B_r^b - A^{br} B_r^a"""
    m = a.matrix @ METRIC @ b.matrix
    return AntisymTensor2.from_matrix(m - m.T)


def dual(t: AntisymTensor2) -> AntisymTensor2:
    """Hodge dual (1/2) eps^{abrs} T_{rs} with eps^{0123} = +1."""
    return AntisymTensor2(e=-t.b, b=t.e.copy())


def dual_dense(t: AntisymTensor2) -> AntisymTensor2:
    """Same as dual(), by explicit contraction with the symbol. Slow; used as a cross-check."""
    lowered = METRIC @ t.matrix @ METRIC
    return AntisymTensor2.from_matrix(0.5 * np.einsum("abrs,rs->ab", LEVI_CIVITA, lowered))


def boost_vector(boost: Boost, a: FourVector) -> FourVector:
    return boost.matrix @ a


def boost_tensor(boost: Boost, t: AntisymTensor2) -> AntisymTensor2:
    lam = boost.matrix
    return AntisymTensor2.from_matrix(lam @ t.matrix @ lam.T)


def field_from_eb(e_field: np.ndarray, b_field: np.ndarray) -> AntisymTensor2:
    """Field tensor with H^{i0} = -E_i, H^{23} = B_x, H^{31} = B_y, H^{12} = B_z."""
    return AntisymTensor2(e=-np.asarray(e_field, dtype=float), b=np.asarray(b_field, dtype=float))


def eb_from_field(t: AntisymTensor2) -> tuple[np.ndarray, np.ndarray]:
    return -t.e, t.b.copy()


def velocity_from_beta(beta: np.ndarray, c: float = 1.0) -> FourVector:
    """On-shell four-velocity c*gamma*(1, beta)."""
    beta = np.asarray(beta, dtype=float)
    gamma = Boost(beta).gamma
    return c * gamma * np.concatenate([[1.0], beta])


def beta_gamma(v: FourVector) -> tuple[np.ndarray, float]:
    """3-velocity over c and the Lorentz factor carried by a four-velocity."""
    beta = v[1:] / v[0]
    return beta, 1.0 / np.sqrt(1.0 - beta @ beta)
