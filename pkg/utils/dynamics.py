"""
Mass, force and momentum structure of a spinning charge.

Covers the spin mass m, the charge equation of motion (Lorentz force plus
Stern-Gerlach force), the momentum-form force, dm/dtau, the noncollinearity
vectors Z (Frenkel and Shirokov forms), the momentum P = m v + Z, and the
spin four-vector.

All formulas keep c, hbar, m0 and e explicit (Gaussian-style units).
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

from utils.errors import ConfigError, PreconditionError, RegimeError
from utils.fields import FieldSample, spacelike_derivative
from utils.minkowski import LEVI_CIVITA, METRIC, AntisymTensor2, FourVector, contract_tt, contract_vv

# magnitudes of the CODATA g-factors, keyed by preset name
G_FACTOR_PRESETS = {
    "electron": abs(constants.physical_constants["electron g factor"][0]),
    "muon": abs(constants.physical_constants["muon g factor"][0]),
}


@dataclass(frozen=True)
class ParticleParams:
    m0: float = 1.0
    e: float = 1.0
    g: float = 2.0
    hbar: float = 1e-3
    c: float = 1.0
    s: float = 0.5

    def __post_init__(self):
        violations = []
        if not self.m0 > 0:
            violations.append(("particle.m0", f"must be > 0, got {self.m0}"))
        if not self.c > 0:
            violations.append(("particle.c", f"must be > 0, got {self.c}"))
        if not self.hbar >= 0:
            violations.append(("particle.hbar", f"must be >= 0, got {self.hbar}"))
        if violations:
            raise ConfigError(violations)

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ParticleParams":
        """Natural-unit particle with the measured g-factor of a known lepton."""
        if name not in G_FACTOR_PRESETS:
            raise ConfigError([("particle.preset", f'unknown preset "{name}", expected one of {sorted(G_FACTOR_PRESETS)}')])
        return cls(**{"g": G_FACTOR_PRESETS[name], **overrides})

    @property
    def mu0(self) -> float:
        """Bohr magneton e hbar / (2 m0 c)."""
        return self.e * self.hbar / (2.0 * self.m0 * self.c)

    @property
    def mu(self) -> float:
        return self.g * self.mu0 * self.s

    @property
    def mu_a(self) -> float:
        """Anomalous moment mu0 (g - 2) / 2."""
        return self.mu0 * (self.g - 2.0) / 2.0

    @property
    def gyro(self) -> float:
        """e g / (2 m0 c)"""
        return self.e * self.g / (2.0 * self.m0 * self.c)


@dataclass(frozen=True, eq=False)
class ParticleState:
    """
    Point on a trajectory.

    v is the four-velocity. For the momentum-form formulation p holds the
    canonical momentum and v is the velocity recovered from it.
    """

    tau: float
    r: FourVector
    v: FourVector
    Pi: AntisymTensor2
    p: FourVector | None = None

    def with_velocity(self, v: FourVector) -> "ParticleState":
        return replace(self, v=v)


def _lowered(t: AntisymTensor2) -> np.ndarray:
    return METRIC @ t.matrix @ METRIC


def field_along_velocity(H: AntisymTensor2, v: FourVector) -> np.ndarray:
    """Covariant H_{br} v^r."""
    return METRIC @ H.matrix @ METRIC @ v


def gradient_coupling(Pi: AntisymTensor2, grad: np.ndarray) -> np.ndarray:
    """Contravariant Pi_{ab} d^r H^{ab}."""
    return np.einsum("ab,rab->r", _lowered(Pi), grad)


def spin_mass(params: ParticleParams, state: ParticleState, H: AntisymTensor2) -> float:
    """m = m0 - (mu / 2c^2) H_{ab} Pi^{ab}"""
    return params.m0 - params.mu / (2.0 * params.c**2) * contract_tt(H, state.Pi)


def charge_accel(params: ParticleParams, state: ParticleState, s: FieldSample, strict: bool = True) -> FourVector:
    """
    Four-acceleration dv/dtau from the Lorentz force and the space-like
    Stern-Gerlach force, divided by the spin mass.

    Raises:
        RegimeError: the spin mass is not positive (field too strong).
    """
    m = spin_mass(params, state, s.H)
    if m <= 0:
        raise RegimeError(f"spin mass m = {m:.6g} <= 0, field too strong for the spin-mass expansion")
    force = (params.e / params.c) * (s.H.matrix @ (METRIC @ state.v))
    if not s.is_uniform:
        d_sl = spacelike_derivative(s, state.v, params.c, strict=strict)
        force = force + 0.5 * params.mu * gradient_coupling(state.Pi, d_sl)
    return force / m


def momentum_rate(params: ParticleParams, state: ParticleState, s: FieldSample) -> FourVector:
    """dP/dtau = (e/c) H^{ab} v_b + (mu/2) Pi_{rl} d^a H^{rl}, with the full gradient."""
    force = (params.e / params.c) * (s.H.matrix @ (METRIC @ state.v))
    if not s.is_uniform:
        force = force + 0.5 * params.mu * gradient_coupling(state.Pi, s.grad)
    return force


def dm_dtau(
    params: ParticleParams,
    state: ParticleState,
    s: FieldSample,
    mode: str = "approx",
    w: FourVector | None = None,
) -> float:
    """
    Rate of change of the spin mass.

    Args:
        params: Particle parameters.
        state: Current state.
        s: Field sample at the particle position.
        mode: "approx" keeps only the field-variation term; "exact" adds
            (mu/c^4) w_a Pi^{ar} H_{rb} v^b.
        w: Four-acceleration for exact mode; computed from charge_accel when omitted.

    Returns:
        dm/dtau.
    """
    c2 = params.c**2
    along = np.einsum("l,lab->ab", METRIC @ state.v, s.grad)
    rate = -params.mu / (2.0 * c2) * float(np.sum(_lowered(state.Pi) * along))
    if mode == "approx":
        return rate
    if mode != "exact":
        raise ConfigError([("mode", f'unknown dm/dtau mode "{mode}", expected "approx" or "exact"')])
    if w is None:
        w = charge_accel(params, state, s)
    return rate + params.mu / c2**2 * float((METRIC @ w) @ state.Pi.matrix @ field_along_velocity(s.H, state.v))


def _z_vector(params: ParticleParams, state: ParticleState, H: AntisymTensor2, grad: np.ndarray) -> FourVector:
    c2 = params.c**2
    x = -(params.mu_a / c2) * field_along_velocity(H, state.v)
    if np.any(grad):
        coupling = METRIC @ gradient_coupling(state.Pi, grad)
        x = x + params.mu * params.hbar / (4.0 * params.m0 * c2) * coupling
    return state.Pi.matrix @ x


def z_frenkel(params: ParticleParams, state: ParticleState, s: FieldSample, strict: bool = True) -> FourVector:
    """
    Noncollinearity vector in the Frenkel formalism.

    Z^a = Pi^{ab} ((mu hbar / 4 m0 c^2) Pi_{rl} d_b H^{rl} - (mu_a / c^2) H_{br} v^r)
    with the space-like derivative. Satisfies v_a Z^a = 0 when v_a Pi^{ab} = 0.
    """
    grad = spacelike_derivative(s, state.v, params.c, strict=strict) if not s.is_uniform else s.grad
    return _z_vector(params, state, s.H, grad)


def z_frenkel_g2(params: ParticleParams, state: ParticleState, s: FieldSample, strict: bool = True) -> FourVector:
    """Closed form of z_frenkel at g = 2, where only the gradient term survives."""
    if s.is_uniform:
        return np.zeros(4)
    d_sl = spacelike_derivative(s, state.v, params.c, strict=strict)
    coupling = METRIC @ gradient_coupling(state.Pi, d_sl)
    return 0.25 * params.mu0 * params.hbar / (params.m0 * params.c**2) * (state.Pi.matrix @ coupling)


def z_frenkel_accel(params: ParticleParams, state: ParticleState, H: AntisymTensor2, w: FourVector) -> FourVector:
    """Z^a = (hbar/2c^2) Pi^{ab} w_b - (mu/c^2) Pi^a_r H^{rb} v_b"""
    c2 = params.c**2
    pi = state.Pi.matrix
    return (params.hbar / (2.0 * c2)) * (pi @ (METRIC @ w)) - (params.mu / c2) * (pi @ field_along_velocity(H, state.v))


def z_shirokov(params: ParticleParams, state: ParticleState, s: FieldSample) -> FourVector:
    """Same as z_frenkel with the full gradient in place of the space-like one."""
    return _z_vector(params, state, s.H, s.grad)


def momentum(
    params: ParticleParams,
    state: ParticleState,
    s: FieldSample,
    formalism: str = "frenkel",
    strict: bool = True,
) -> FourVector:
    """P = m v + Z"""
    if formalism == "frenkel":
        z = z_frenkel(params, state, s, strict=strict)
    elif formalism == "shirokov":
        z = z_shirokov(params, state, s)
    else:
        raise ConfigError([("formalism", f'unknown formalism "{formalism}", expected "frenkel" or "shirokov"')])
    return spin_mass(params, state, s.H) * state.v + z


def recover_velocity(
    params: ParticleParams,
    state: ParticleState,
    s: FieldSample,
    p: FourVector,
    iterations: int = 1,
) -> tuple[FourVector, FourVector]:
    """
    Velocity carried by a Shirokov momentum: fixed-point passes of
    v = (P - Z(v)) / m starting from v = P c / sqrt(-P.P).

    Returns:
        (v, Z) where Z is the vector used in the last pass, so P = m v + Z exactly.
    """
    pp = contract_vv(p, p)
    if pp >= 0:
        raise PreconditionError(f"momentum is not time-like: P.P = {pp:.6g}")
    v = p * params.c / np.sqrt(-pp)
    m = spin_mass(params, state, s.H)
    z = np.zeros(4)
    for _ in range(iterations):
        z = z_shirokov(params, state.with_velocity(v), s)
        v = (p - z) / m
    return v, z


def spin_four_vector(params: ParticleParams, Pi: AntisymTensor2, p: FourVector) -> FourVector:
    """S^m = (1 / 2 m0 c) eps^{mnab} Pi_{ab} P_n"""
    _require_timelike(p)
    return np.einsum("mnab,ab,n->m", LEVI_CIVITA, _lowered(Pi), METRIC @ p) / (2.0 * params.m0 * params.c)


def tensor_from_spin_vector(params: ParticleParams, spin: FourVector, p: FourVector) -> AntisymTensor2:
    """Pi^{ab} = (1 / m0 c) eps^{abrs} S_r P_s"""
    _require_timelike(p)
    m = np.einsum("abrs,r,s->ab", LEVI_CIVITA, METRIC @ spin, METRIC @ p) / (params.m0 * params.c)
    return AntisymTensor2.from_matrix(m)


def _require_timelike(p: FourVector) -> None:
    pp = contract_vv(p, p)
    if pp >= 0:
        raise PreconditionError(f"momentum must be time-like, got P.P = {pp:.6g}")
