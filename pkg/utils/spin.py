"""
Spin evolution: tensor right-hand sides (general, Corben, effective field),
the rest-frame spin vector zeta and its equation, the Larmor/Thomas split of
the precession frequency, and the kinematical (Thomas) field.

Tensor equations evolve in proper time tau. Precession frequencies are
quoted in lab time t, dzeta/dt = Omega x zeta.
"""

from dataclasses import dataclass

import numpy as np

from utils.dynamics import ParticleParams, ParticleState, field_along_velocity, gradient_coupling
from utils.errors import PreconditionError, RegimeError
from utils.fields import FieldSample, spacelike_derivative, spacelike_field
from utils.minkowski import (
    METRIC,
    AntisymTensor2,
    Boost,
    FourVector,
    beta_gamma,
    boost_tensor,
    bracket,
    commutator_bracket,
    contract_tt,
    dual,
    eb_from_field,
)


@dataclass(frozen=True, eq=False)
class PrecessionSplit:
    larmor: np.ndarray
    thomas: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.larmor + self.thomas


@dataclass(frozen=True)
class SpinFieldInvariant:
    """The spin-field coupling (1/2) H_{ab} Pi^{ab} evaluated four ways."""

    direct: float
    spacelike: float
    effective: float
    rest_frame: float

    @property
    def values(self) -> tuple[float, float, float, float]:
        return self.direct, self.spacelike, self.effective, self.rest_frame

    @property
    def spread(self) -> float:
        return max(self.values) - min(self.values)


def lorentz_accel(params: ParticleParams, v: FourVector, H: AntisymTensor2) -> FourVector:
    """w^b = (e / m0 c) H^{br} v_r"""
    return (params.e / (params.m0 * params.c)) * (H.matrix @ (METRIC @ v))


def spin_rate_general(
    params: ParticleParams,
    state: ParticleState,
    p: FourVector,
    s: FieldSample,
    z: FourVector | None = None,
) -> AntisymTensor2:
    """
    dPi/dtau from (hbar/2) dPi/dtau = -v^[a P^b] + mu H^[a r Pi_r^b].

    When the split P = m v + z is known, pass z: v^[a P^b] = v^[a z^b] and the
    large collinear part never enters the subtraction.

    Raises:
        PreconditionError: hbar is zero.
    """
    if params.hbar <= 0:
        raise PreconditionError("spin_rate_general divides by hbar, which must be > 0")
    kinetic = bracket(state.v, z if z is not None else p)
    return (commutator_bracket(s.H, state.Pi) * params.mu - kinetic) * (2.0 / params.hbar)


def spin_rate_corben(params: ParticleParams, state: ParticleState, s: FieldSample, strict: bool = True) -> AntisymTensor2:
    """
    Corben equation:
    dPi/dtau = (eg/2m0c) H^[a r Pi_r^b] + v^[a Pi^b]r X_r with
    X_r = ((g-2)/2)(e/m0c^3) H_{rl} v^l - (mu/2m0c^2) Pi_{hl} d_r H^{hl} (space-like d).
    """
    c = params.c
    x = ((params.g - 2.0) / 2.0) * params.e / (params.m0 * c**3) * field_along_velocity(s.H, state.v)
    if not s.is_uniform:
        d_sl = spacelike_derivative(s, state.v, c, strict=strict)
        x = x - params.mu / (2.0 * params.m0 * c**2) * (METRIC @ gradient_coupling(state.Pi, d_sl))
    return commutator_bracket(s.H, state.Pi) * params.gyro + bracket(state.v, state.Pi.matrix @ x)


def effective_field(params: ParticleParams, state: ParticleState, H: AntisymTensor2, strict: bool = True) -> AntisymTensor2:
    """H_eff = (space-like H) + (2 m0 / e g c) v^[a w^b], w the Lorentz acceleration."""
    w = lorentz_accel(params, state.v, H)
    kinematic = bracket(state.v, w) * (2.0 * params.m0 / (params.e * params.g * params.c))
    return spacelike_field(H, state.v, params.c, strict=strict) + kinematic


def spin_rate_effective(params: ParticleParams, state: ParticleState, s: FieldSample, strict: bool = True) -> AntisymTensor2:
    """
    dPi/dtau = (eg/2m0c) H_eff^[a r Pi_r^b]. Uniform fields only.

    Raises:
        RegimeError: the field sample carries a gradient.
    """
    if not s.is_uniform:
        raise RegimeError("the effective-field spin equation holds for uniform fields only")
    return commutator_bracket(effective_field(params, state, s.H, strict=strict), state.Pi) * params.gyro


def effective_field_vectors(params: ParticleParams, state: ParticleState, H: AntisymTensor2) -> tuple[np.ndarray, np.ndarray]:
    """
    Magnetic and electric 3-vectors of the effective field, built from their
    lab-frame expressions:
    H_eff = H_sl + (2/g) gamma^2 beta x (E + beta x H)
    E_eff = E_sl + (2/g) gamma^2 (E + beta x H - beta (beta . E))
    """
    beta, gamma = beta_gamma(state.v)
    e_field, b_field = eb_from_field(H)
    e_sl, b_sl = eb_from_field(spacelike_field(H, state.v, params.c))
    lorentz = e_field + np.cross(beta, b_field)
    scale = (2.0 / params.g) * gamma**2
    h_eff = b_sl + scale * np.cross(beta, lorentz)
    e_eff = e_sl + scale * (lorentz - beta * (beta @ e_field))
    return h_eff, e_eff


def zeta_from_state(state: ParticleState) -> np.ndarray:
    """zeta = b / gamma + (gamma / (gamma + 1)) beta (beta . b), b the magnetic-like part of Pi."""
    beta, gamma = beta_gamma(state.v)
    b = state.Pi.b
    return b / gamma + (gamma / (gamma + 1.0)) * beta * (beta @ b)


def state_spin_from_zeta(zeta: np.ndarray, beta: np.ndarray) -> AntisymTensor2:
    """Frenkel-consistent spin tensor with rest-frame spin zeta for a particle moving at beta."""
    zeta = np.asarray(zeta, dtype=float)
    beta = np.asarray(beta, dtype=float)
    gamma = Boost(beta).gamma
    b = gamma * zeta - (gamma**2 / (gamma + 1.0)) * beta * (beta @ zeta)
    return AntisymTensor2(e=np.cross(beta, b), b=b)


def _zeta_gradient_term(params: ParticleParams, zeta: np.ndarray, beta: np.ndarray, gamma: float, s: FieldSample) -> np.ndarray:
    # the gradient acts on the field components only
    k = gamma / (gamma + 1.0)
    grad = np.empty(3)
    for i in range(3):
        d_e, d_b = eb_from_field(s.gradient_slice(i + 1))
        grad[i] = zeta @ d_b + beta @ np.cross(zeta, d_e) - k * (beta @ zeta) * (beta @ d_b)
    coef = params.g * params.e * params.hbar / (4.0 * params.m0**2 * params.c**2) * gamma**2 / (gamma + 1.0)
    return coef * np.cross(zeta, np.cross(beta, grad))


def zeta_rate(params: ParticleParams, state: ParticleState, s: FieldSample, zeta: np.ndarray | None = None) -> np.ndarray:
    """dzeta/dtau including the hbar gradient term. zeta defaults to zeta_from_state(state)."""
    if zeta is None:
        zeta = zeta_from_state(state)
    beta, gamma = beta_gamma(state.v)
    e_field, b_field = eb_from_field(s.H)
    e_over_mc = params.e / (params.m0 * params.c)
    rate = (
        params.gyro * np.cross(zeta, b_field)
        - e_over_mc * ((params.g - 2.0) / 2.0) * gamma**2 / (gamma + 1.0) * np.cross(zeta, np.cross(beta, np.cross(beta, b_field)))
        - e_over_mc * gamma * (params.g / 2.0 - gamma / (gamma + 1.0)) * np.cross(zeta, np.cross(beta, e_field))
    )
    if not s.is_uniform:
        rate = rate + _zeta_gradient_term(params, zeta, beta, gamma, s)
    return rate


def zeta_rate_effective(params: ParticleParams, state: ParticleState, s: FieldSample) -> np.ndarray:
    """dzeta/dtau = (eg/2m0c) zeta x (H_eff - (gamma/(gamma+1)) beta x E_eff). Uniform fields only."""
    if not s.is_uniform:
        raise RegimeError("the effective-field spin equation holds for uniform fields only")
    beta, gamma = beta_gamma(state.v)
    h_eff, e_eff = effective_field_vectors(params, state, s.H)
    zeta = zeta_from_state(state)
    return params.gyro * np.cross(zeta, h_eff - (gamma / (gamma + 1.0)) * np.cross(beta, e_eff))


def precession_split(params: ParticleParams, state: ParticleState, H: AntisymTensor2) -> PrecessionSplit:
    """Larmor and Thomas parts of the lab-time precession frequency in uniform fields."""
    beta, gamma = beta_gamma(state.v)
    e_field, b_field = eb_from_field(H)
    k = gamma / (gamma + 1.0)
    beta_e = np.cross(beta, e_field)
    beta_beta_b = np.cross(beta, np.cross(beta, b_field))
    larmor = -params.gyro * (b_field / gamma - beta_e - k * beta_beta_b)
    thomas = -(params.e / (params.m0 * params.c)) * k * (beta_e + beta_beta_b)
    return PrecessionSplit(larmor=larmor, thomas=thomas)


def kinematic_thomas(params: ParticleParams, state: ParticleState, H: AntisymTensor2) -> np.ndarray:
    """Thomas frequency -(1/c)(gamma^2/(gamma+1)) beta x a, with a = c dbeta/dt from the Lorentz force."""
    v = state.v
    w = lorentz_accel(params, v, H)
    beta, gamma = beta_gamma(v)
    dbeta_dtau = (w[1:] * v[0] - v[1:] * w[0]) / v[0] ** 2
    accel = params.c * dbeta_dtau / gamma
    return -(1.0 / params.c) * gamma**2 / (gamma + 1.0) * np.cross(beta, accel)


def rest_frame_fields(state: ParticleState, H: AntisymTensor2) -> tuple[np.ndarray, np.ndarray]:
    """E and B seen in the instantaneous rest frame."""
    beta, _ = beta_gamma(state.v)
    return eb_from_field(boost_tensor(Boost(-beta), H))


def rest_frame_precession(params: ParticleParams, state: ParticleState, H: AntisymTensor2) -> PrecessionSplit:
    """Same split as precession_split, computed from the rest-frame fields."""
    beta, gamma = beta_gamma(state.v)
    e_rest, b_rest = rest_frame_fields(state, H)
    larmor = -params.gyro * b_rest / gamma
    thomas = -(params.e / (params.m0 * params.c)) / (gamma + 1.0) * np.cross(beta, e_rest)
    return PrecessionSplit(larmor=larmor, thomas=thomas)


def thomas_field(params: ParticleParams, state: ParticleState, H: AntisymTensor2) -> AntisymTensor2:
    """Kinematical field H_Th = (2 m0 / e g c) v^[a w^b]."""
    w = lorentz_accel(params, state.v, H)
    return bracket(state.v, w) * (2.0 * params.m0 / (params.e * params.g * params.c))


def thomas_dual(params: ParticleParams, state: ParticleState, H: AntisymTensor2) -> AntisymTensor2:
    return dual(thomas_field(params, state, H))


def spin_field_invariant(
    params: ParticleParams, state: ParticleState, H: AntisymTensor2, strict: bool = True
) -> SpinFieldInvariant:
    """(1/2) H Pi = (1/2) H_sl Pi = (1/2) H_eff Pi = zeta . B_rest for Frenkel-consistent states."""
    _, b_rest = rest_frame_fields(state, H)
    return SpinFieldInvariant(
        direct=0.5 * contract_tt(H, state.Pi),
        spacelike=0.5 * contract_tt(spacelike_field(H, state.v, params.c, strict=strict), state.Pi),
        effective=0.5 * contract_tt(effective_field(params, state, H, strict=strict), state.Pi),
        rest_frame=float(zeta_from_state(state) @ b_rest),
    )
