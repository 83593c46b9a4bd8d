"""
Proper-time integration of the coupled orbit and spin equations.

Four formulations share one flat state layout:
    frenkel-corben      r(4), v(4), Pi(6)   charge equation + Corben equation
    effective-field     r(4), v(4), Pi(6)   charge equation + effective-field equation
    shirokov-momentum   r(4), P(4), Pi(6)   momentum equation + general spin equation
    bmt-zeta            r(4), v(4), zeta(3) charge equation + zeta equation

rk4-fixed is a hand-written classical Runge-Kutta step; rk45-adaptive
delegates to scipy.integrate.solve_ivp between sample points.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from utils.dynamics import (
    ParticleParams,
    ParticleState,
    charge_accel,
    dm_dtau,
    momentum,
    momentum_rate,
    recover_velocity,
    spin_mass,
)
from utils.errors import ConfigError, NumericFailure, RegimeError
from utils.fields import FieldModel, sample
from utils.minkowski import METRIC, AntisymTensor2, beta_gamma, bracket, contract_tt, contract_vv, velocity_from_beta
from utils.spin import (
    spin_field_invariant,
    spin_rate_corben,
    spin_rate_effective,
    spin_rate_general,
    state_spin_from_zeta,
    zeta_from_state,
    zeta_rate,
)

logger = logging.getLogger(__name__)

FORMULATIONS = ("frenkel-corben", "shirokov-momentum", "bmt-zeta", "effective-field")
UNIFORM_ONLY = frozenset({"bmt-zeta", "effective-field"})
METHODS = ("rk4-fixed", "rk45-adaptive")

# classical RK4 Butcher table: stage rows, then the weights
RK4_TABLEAU = {
    0: [1 / 2],
    1: [0.0, 1 / 2],
    2: [0.0, 0.0, 1.0],
    3: [1 / 6, 2 / 6, 2 / 6, 1 / 6],
}
RK4_STAGES = [0.0, 0.5, 0.5, 1.0]

TRAJECTORY_COLUMNS = [
    "tau", "t", "x", "y", "z", "bx", "by", "bz", "gamma", "zx", "zy", "zz",
    "Pi_e1", "Pi_e2", "Pi_e3", "Pi_b1", "Pi_b2", "Pi_b3",
    "m", "res_vv", "res_frenkel", "res_spinnorm", "res_massshell",
]


@dataclass(frozen=True)
class StepConfig:
    """
    Integrator settings. step may be negative to integrate backwards;
    duration is always the absolute proper-time span.
    """

    method: str = "rk4-fixed"
    step: float = 2 * math.pi / 4096
    tolerance: float = 1e-10
    projection: bool = True
    duration: float = 0.0
    stride: int = 1
    fixed_point_iterations: int = 1

    def __post_init__(self):
        violations = []
        if self.method not in METHODS:
            violations.append(("integrator.method", f'unknown method "{self.method}", expected one of {list(METHODS)}'))
        if not (math.isfinite(self.step) and self.step != 0):
            violations.append(("integrator.step", f"must be finite and non-zero, got {self.step}"))
        if not self.tolerance > 0:
            violations.append(("integrator.tolerance", f"must be > 0, got {self.tolerance}"))
        if not (math.isfinite(self.duration) and self.duration >= 0):
            violations.append(("integrator.duration", f"must be >= 0, got {self.duration}"))
        if self.stride < 1:
            violations.append(("integrator.stride", f"must be >= 1, got {self.stride}"))
        if self.fixed_point_iterations < 1:
            violations.append(("integrator.fixed_point_iterations", f"must be >= 1, got {self.fixed_point_iterations}"))
        if violations:
            raise ConfigError(violations)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / abs(self.step)))


@dataclass(frozen=True, eq=False)
class StateRate:
    """d/dtau of the packed state: dr = v, then dv or dP, then dPi (6) or dzeta (3)."""

    r: np.ndarray
    u: np.ndarray
    spin: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.r, self.u, self.spin])


@dataclass(frozen=True)
class Diagnostics:
    """
    Max-over-samples residuals. res_frenkel measures v_a Pi^{ab}, or P_a Pi^{ab}
    when constraint is "shirokov". max_mass_drift compares the integrated
    dm/dtau with the recomputed spin mass; max_mass_variation is the spread
    of the spin mass itself.
    """

    samples: int
    max_res_vv: float
    max_res_frenkel: float
    max_res_spinnorm: float
    max_res_massshell: float
    max_invariant_spread: float
    max_mass_drift: float
    all_finite: bool
    max_mass_variation: float = 0.0
    constraint: str = "frenkel"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Deviation:
    """Max-over-time differences between two formulations on the same scenario."""

    formulation_a: str
    formulation_b: str
    zeta: float = 0.0
    position: float = 0.0
    gamma: float = 0.0
    regime_excluded: bool = False


def check_formulation(formulation: str, model: FieldModel) -> None:
    if formulation not in FORMULATIONS:
        raise ConfigError([("integrator.formulation", f'unknown formulation "{formulation}", expected one of {list(FORMULATIONS)}')])
    if formulation in UNIFORM_ONLY and model.has_gradient:
        raise RegimeError(f'formulation "{formulation}" requires a uniform field, got "{model.tag}"')


def initial_state(
    params: ParticleParams,
    position,
    beta,
    zeta,
    formulation: str = "frenkel-corben",
    model: FieldModel | None = None,
) -> ParticleState:
    """
    Initial state at tau = 0, t = 0 obeying the formulation's constraint.

    The spin is built Frenkel-consistent from zeta. For shirokov-momentum
    the canonical momentum P = m v + Z is filled in (which needs the field
    model) and the spin is then projected onto P_a Pi^{ab} = 0.
    """
    v = velocity_from_beta(beta, params.c)
    r = np.concatenate([[0.0], np.asarray(position, dtype=float)])
    state = ParticleState(tau=0.0, r=r, v=v, Pi=state_spin_from_zeta(zeta, beta))
    if formulation == "shirokov-momentum":
        if model is None:
            raise ConfigError([("field", "shirokov-momentum needs the field model to build the initial momentum")])
        state = _with_shirokov_momentum(params, state, model)
    return state


def _with_shirokov_momentum(params: ParticleParams, state: ParticleState, model: FieldModel) -> ParticleState:
    p = momentum(params, state, sample(model, state.r), "shirokov")
    return replace(state, p=p, Pi=project_shirokov(state.Pi, p))


def pack(formulation: str, state: ParticleState) -> np.ndarray:
    if formulation == "shirokov-momentum":
        return np.concatenate([state.r, state.p, state.Pi.components()])
    if formulation == "bmt-zeta":
        return np.concatenate([state.r, state.v, zeta_from_state(state)])
    return np.concatenate([state.r, state.v, state.Pi.components()])


def _state_from_array(formulation: str, tau: float, y: np.ndarray, c: float) -> ParticleState:
    r, u, spin = y[:4], y[4:8], y[8:]
    if formulation == "shirokov-momentum":
        pp = contract_vv(u, u)
        if not pp < 0:
            dump = {"formulation": formulation, "tau": tau, "y": y.tolist()}
            logger.error("Momentum left the time-like cone: %s", dump)
            raise NumericFailure(f"momentum is not time-like at tau={tau}: P.P = {pp:.6g}", dump)
        # placeholder velocity along P; derivative() and unpack() recover the real one
        v = u * c / math.sqrt(-pp)
        return ParticleState(tau=tau, r=r, v=v, Pi=AntisymTensor2.from_components(spin), p=u)
    if formulation == "bmt-zeta":
        beta, _ = beta_gamma(u)
        return ParticleState(tau=tau, r=r, v=u, Pi=state_spin_from_zeta(spin, beta))
    return ParticleState(tau=tau, r=r, v=u, Pi=AntisymTensor2.from_components(spin))


def unpack(
    formulation: str,
    params: ParticleParams,
    model: FieldModel,
    tau: float,
    y: np.ndarray,
    iterations: int = 1,
) -> ParticleState:
    state = _state_from_array(formulation, tau, y, params.c)
    if formulation == "shirokov-momentum":
        v, _ = recover_velocity(params, state, sample(model, state.r), state.p, iterations)
        state = state.with_velocity(v)
    return state


def derivative(
    formulation: str,
    params: ParticleParams,
    state: ParticleState,
    model: FieldModel,
    iterations: int = 1,
    strict: bool = True,
) -> StateRate:
    """
    Right-hand side of the selected formulation at state.

    Raises:
        RegimeError: uniform-only formulation with a gradient model, or m <= 0.
    """
    check_formulation(formulation, model)
    s = sample(model, state.r)
    if formulation == "shirokov-momentum":
        v, z = recover_velocity(params, state, s, state.p, iterations)
        resolved = state.with_velocity(v)
        return StateRate(
            r=v,
            u=momentum_rate(params, resolved, s),
            spin=spin_rate_general(params, resolved, state.p, s, z=z).components(),
        )
    w = charge_accel(params, state, s, strict=strict)
    if formulation == "bmt-zeta":
        spin = zeta_rate(params, state, s)
    elif formulation == "effective-field":
        spin = spin_rate_effective(params, state, s, strict=strict).components()
    else:
        spin = spin_rate_corben(params, state, s, strict=strict).components()
    return StateRate(r=state.v.copy(), u=w, spin=spin)


def project_frenkel(Pi: AntisymTensor2, v: np.ndarray, c: float) -> AntisymTensor2:
    """Pi + (1/c^2) v^[a q^b] with q^b = v_a Pi^{ab}; restores v_a Pi^{ab} = 0 for on-shell v."""
    q = (METRIC @ v) @ Pi.matrix
    return Pi + bracket(v, q) * (1.0 / (c * c))


def project_shirokov(Pi: AntisymTensor2, p: np.ndarray) -> AntisymTensor2:
    """Pi + P^[a q^b] / (-P.P) with q^b = P_a Pi^{ab}; restores P_a Pi^{ab} = 0 for time-like P."""
    q = (METRIC @ p) @ Pi.matrix
    return Pi + bracket(p, q) * (1.0 / -contract_vv(p, p))


def _project(formulation: str, params: ParticleParams, y: np.ndarray) -> np.ndarray:
    c = params.c
    y = y.copy()
    if formulation == "shirokov-momentum":
        y[8:] = project_shirokov(AntisymTensor2.from_components(y[8:]), y[4:8]).components()
        return y
    spatial = y[5:8]
    y[4] = math.sqrt(c * c + spatial @ spatial)
    if formulation != "bmt-zeta":
        y[8:] = project_frenkel(AntisymTensor2.from_components(y[8:]), y[4:8], c).components()
    return y


class _Rhs:
    """
    Flat-array right-hand side handed to the stepping schemes.

    With track_mass the last array slot carries the spin mass, advanced by
    the exact dm/dtau alongside the state.
    """

    def __init__(self, formulation: str, params: ParticleParams, model: FieldModel, iterations: int, track_mass: bool = False):
        self.formulation = formulation
        self.params = params
        self.model = model
        self.iterations = iterations
        self.track_mass = track_mass

    def __call__(self, tau: float, y: np.ndarray) -> np.ndarray:
        core = y[:-1] if self.track_mass else y
        state = _state_from_array(self.formulation, tau, core, self.params.c)
        rate = derivative(self.formulation, self.params, state, self.model, self.iterations, strict=False)
        if not self.track_mass:
            return rate.as_array()
        resolved = state.with_velocity(rate.r)
        s = sample(self.model, state.r)
        w = charge_accel(self.params, resolved, s, strict=False) if self.formulation == "shirokov-momentum" else rate.u
        return np.append(rate.as_array(), dm_dtau(self.params, resolved, s, "exact", w))


def rk4_step(fun, tau: float, y: np.ndarray, h: float) -> np.ndarray:
    slopes = [fun(tau, y)]
    for stage in range(3):
        increment = sum(a * k for a, k in zip(RK4_TABLEAU[stage], slopes))
        slopes.append(fun(tau + RK4_STAGES[stage + 1] * h, y + h * increment))
    return y + h * sum(b * k for b, k in zip(RK4_TABLEAU[3], slopes))


def _advance(config: StepConfig, rhs: _Rhs, tau: float, y: np.ndarray, h: float) -> np.ndarray:
    if config.method == "rk4-fixed":
        y_new = rk4_step(rhs, tau, y, h)
    else:
        sol = solve_ivp(rhs, (tau, tau + h), y, method="RK45", rtol=config.tolerance, atol=config.tolerance)
        if not sol.success:
            raise NumericFailure(f"adaptive solver failed at tau={tau}: {sol.message}", {"tau": tau, "y": y.tolist()})
        y_new = sol.y[:, -1]
    if config.projection:
        if rhs.track_mass:
            y_new = np.append(_project(rhs.formulation, rhs.params, y_new[:-1]), y_new[-1])
        else:
            y_new = _project(rhs.formulation, rhs.params, y_new)
    if not np.all(np.isfinite(y_new)):
        dump = {"formulation": rhs.formulation, "tau": tau, "h": h, "y": y.tolist()}
        logger.error("Non-finite state after step: %s", dump)
        raise NumericFailure(f"non-finite state after step at tau={tau}", dump)
    return y_new


def step(
    config: StepConfig,
    formulation: str,
    params: ParticleParams,
    state: ParticleState,
    model: FieldModel,
) -> ParticleState:
    """Advance state by one step of config.step (one adaptive solve of that span for rk45)."""
    check_formulation(formulation, model)
    rhs = _Rhs(formulation, params, model, config.fixed_point_iterations)
    y = _advance(config, rhs, state.tau, pack(formulation, state), config.step)
    return unpack(formulation, params, model, state.tau + config.step, y, config.fixed_point_iterations)


def _sample_row(formulation: str, params: ParticleParams, model: FieldModel, state: ParticleState, spin_norm0: float) -> tuple[dict, float]:
    c = params.c
    s = sample(model, state.r)
    beta, gamma = beta_gamma(state.v)
    zeta = zeta_from_state(state)
    m = spin_mass(params, state, s.H)
    pi_norm = state.Pi.norm()
    spin_norm = contract_tt(state.Pi, state.Pi)
    p = state.p if state.p is not None else momentum(params, state, s, "frenkel", strict=False)
    mc2 = (m * c) ** 2
    if formulation == "shirokov-momentum":
        constraint = float(np.linalg.norm((METRIC @ p) @ state.Pi.matrix)) / abs(m * c)
    else:
        constraint = float(np.linalg.norm((METRIC @ state.v) @ state.Pi.matrix)) / c
    row = {
        "tau": state.tau,
        "t": state.r[0] / c,
        "x": state.r[1], "y": state.r[2], "z": state.r[3],
        "bx": beta[0], "by": beta[1], "bz": beta[2],
        "gamma": gamma,
        "zx": zeta[0], "zy": zeta[1], "zz": zeta[2],
        "Pi_e1": state.Pi.e[0], "Pi_e2": state.Pi.e[1], "Pi_e3": state.Pi.e[2],
        "Pi_b1": state.Pi.b[0], "Pi_b2": state.Pi.b[1], "Pi_b3": state.Pi.b[2],
        "m": m,
        "res_vv": abs(contract_vv(state.v, state.v) + c * c) / (c * c),
        "res_frenkel": constraint / pi_norm if pi_norm > 0 else 0.0,
        "res_spinnorm": abs(spin_norm - spin_norm0) / abs(spin_norm0) if spin_norm0 != 0 else abs(spin_norm),
        "res_massshell": abs(contract_vv(p, p) + mc2) / mc2,
    }
    spread = spin_field_invariant(params, state, s.H, strict=False).spread
    return row, spread


def _sample_indices(n_steps: int, stride: int) -> list[int]:
    indices = list(range(0, n_steps + 1, stride))
    if indices[-1] != n_steps:
        indices.append(n_steps)
    return indices


def run(
    config: StepConfig,
    formulation: str,
    params: ParticleParams,
    initial: ParticleState,
    model: FieldModel,
) -> tuple[pd.DataFrame, Diagnostics]:
    """
    Integrate from initial for config.duration of proper time.

    Returns:
        Trajectory with one row per sample (TRAJECTORY_COLUMNS) and the
        diagnostics summary over all samples.
    """
    check_formulation(formulation, model)
    if formulation == "shirokov-momentum" and initial.p is None:
        initial = _with_shirokov_momentum(params, initial, model)
    h = config.step
    n_steps = config.n_steps
    rhs = _Rhs(formulation, params, model, config.fixed_point_iterations, track_mass=True)
    logger.info("Integrating %s with %s: %d steps of h=%.6g", formulation, config.method, n_steps, h)

    spin_norm0 = contract_tt(initial.Pi, initial.Pi)
    y = np.append(pack(formulation, initial), spin_mass(params, initial, sample(model, initial.r).H))
    tau0 = initial.tau
    rows, spreads, booked = [], [], []
    done = 0
    for index in _sample_indices(n_steps, config.stride):
        if config.method == "rk4-fixed":
            while done < index:
                y = _advance(config, rhs, tau0 + done * h, y, h)
                done += 1
        elif index > done:
            y = _advance(config, rhs, tau0 + done * h, y, (index - done) * h)
            done = index
        state = unpack(formulation, params, model, tau0 + done * h, y[:-1], config.fixed_point_iterations)
        row, spread = _sample_row(formulation, params, model, state, spin_norm0)
        rows.append(row)
        spreads.append(spread)
        booked.append(y[-1])

    trajectory = pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)
    m = trajectory["m"].to_numpy()
    diagnostics = Diagnostics(
        samples=len(trajectory),
        max_res_vv=float(trajectory["res_vv"].max()),
        max_res_frenkel=float(trajectory["res_frenkel"].max()),
        max_res_spinnorm=float(trajectory["res_spinnorm"].max()),
        max_res_massshell=float(trajectory["res_massshell"].max()),
        max_invariant_spread=float(max(spreads)),
        max_mass_drift=float(np.max(np.abs(np.array(booked) - m)) / params.m0),
        all_finite=bool(np.isfinite(trajectory.to_numpy()).all()),
        max_mass_variation=float(np.max(np.abs(m - m[0])) / params.m0),
        constraint="shirokov" if formulation == "shirokov-momentum" else "frenkel",
    )
    return trajectory, diagnostics


def compare(
    config: StepConfig,
    formulation_a: str,
    formulation_b: str,
    params: ParticleParams,
    initial: ParticleState,
    model: FieldModel,
) -> Deviation:
    """Run two formulations from the same initial state and report their max deviations."""
    if any(f in UNIFORM_ONLY for f in (formulation_a, formulation_b)) and model.has_gradient:
        return Deviation(formulation_a, formulation_b, regime_excluded=True)
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = [pool.submit(run, config, f, params, initial, model) for f in (formulation_a, formulation_b)]
        (traj_a, _), (traj_b, _) = (f.result() for f in futures)
    return deviation_between(formulation_a, formulation_b, traj_a, traj_b)


def deviation_between(formulation_a: str, formulation_b: str, traj_a: pd.DataFrame, traj_b: pd.DataFrame) -> Deviation:
    def max_norm(columns: list[str]) -> float:
        diff = traj_a[columns].to_numpy() - traj_b[columns].to_numpy()
        return float(np.max(np.linalg.norm(diff, axis=1)))

    return Deviation(
        formulation_a,
        formulation_b,
        zeta=max_norm(["zx", "zy", "zz"]),
        position=max_norm(["x", "y", "z"]),
        gamma=max_norm(["gamma"]),
    )
