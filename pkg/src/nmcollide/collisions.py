"""Exact simulation of the discrete collision protocol.

The protocol alternates unitary system-ancilla (SA) collisions with
incoherent partial-swap ancilla-ancilla (AA) collisions: after the S-1
collision, a 1-2 swap collision precedes S-2, then 2-3 precedes S-3, and
so on. Step 1 ends after S-1; step n >= 2 ends once both the (n-1)-n and
the S-n collisions are over.

The engine exploits the fact that ancilla i never interacts again after
the i-(i+1) swap: it is traced out immediately, so the simulation carries
only the joint state of the system and the single upcoming ancilla (the
sliding window). Cost is linear in the step count instead of exponential.
The literal full-chain simulation lives in :mod:`nmcollide.verify` as the
oracle for this reduction.

Finite bath temperature enters through purification: each ancilla becomes
an entangled pair of which only the first half couples to the system, and
AA collisions swap whole pairs. Fresh-pair marginals reproduce the thermal
single-ancilla state exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .quantum import (
    DensityOperator,
    HermitianOperator,
    KrausChannel,
    _apply_kraus_matrix,
    _partial_trace_matrix,
    embed_operator,
    ket,
    swap_operator,
    unitary_evolution,
)

__all__ = [
    "BathSpec",
    "CollisionConfig",
    "TrajectoryRecord",
    "partial_swap_channel",
    "sa_collision",
    "run_discrete",
    "run_discrete_thermal",
    "thermal_weights",
    "purified_pair_ket",
]


def thermal_weights(energies, inverse_temperature: float) -> np.ndarray:
    """Boltzmann weights e^{-beta e_k} / Z, computed stably for large beta."""
    e = np.asarray(energies, dtype=float)
    if inverse_temperature < 0:
        raise ConfigurationError("inverse temperature must be nonnegative")
    logw = -inverse_temperature * (e - e.min())
    w = np.exp(logw)
    return w / w.sum()


@dataclass(frozen=True)
class BathSpec:
    """Initial single-ancilla state of the bath.

    ``pure_ground`` starts every ancilla in |0>. ``thermal`` starts every
    ancilla in the Boltzmann mixture of the given level energies; the
    zero-temperature endpoint can be expressed directly through an explicit
    ``weights`` vector such as (1, 0), which beta alone cannot reach.
    """

    kind: str
    energies: Optional[tuple] = None
    inverse_temperature: Optional[float] = None
    weights: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "pure_ground":
            if self.energies is not None or self.inverse_temperature is not None or self.weights is not None:
                raise ConfigurationError("pure_ground bath takes no thermal parameters")
        elif self.kind == "thermal":
            if self.weights is not None:
                w = np.asarray(self.weights, dtype=float)
                if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                    raise ConfigurationError("explicit weights must be a probability vector")
            elif self.energies is None or self.inverse_temperature is None:
                raise ConfigurationError(
                    "thermal bath needs energies and inverse_temperature, or explicit weights"
                )
            elif self.inverse_temperature < 0:
                raise ConfigurationError("inverse temperature must be nonnegative")
        else:
            raise ConfigurationError(f"unknown bath kind {self.kind!r}")

    def weight_vector(self, ancilla_dim: int) -> np.ndarray:
        if self.kind == "pure_ground":
            w = np.zeros(ancilla_dim)
            w[0] = 1.0
            return w
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
        else:
            w = thermal_weights(self.energies, self.inverse_temperature)
        if w.shape != (ancilla_dim,):
            raise ConfigurationError(
                f"bath weight vector has length {w.shape[0]}, ancilla dim is {ancilla_dim}"
            )
        return w / w.sum()


@dataclass(frozen=True)
class CollisionConfig:
    """Full parametrization of the discrete protocol."""

    system_dim: int
    ancilla_dim: int
    hamiltonian: HermitianOperator
    t_c: float
    p_s: float
    n_steps: int
    bath: BathSpec

    def __post_init__(self):
        if self.system_dim < 1 or self.ancilla_dim < 1:
            raise ConfigurationError("dimensions must be positive")
        expected = self.system_dim * self.ancilla_dim
        if self.hamiltonian.dim != expected:
            raise ConfigurationError(
                f"hamiltonian dim {self.hamiltonian.dim} != system*ancilla = {expected}"
            )
        if not 0.0 <= self.p_s <= 1.0:
            raise ConfigurationError(f"swap probability {self.p_s} outside [0, 1]")
        # t_c = 0 is allowed as a degenerate no-dynamics case
        if self.t_c < 0:
            raise ConfigurationError("collision time must be nonnegative")
        if self.n_steps < 1:
            raise ConfigurationError("need at least one step")


@dataclass(frozen=True)
class TrajectoryRecord:
    """System states rho_n for n = 0..n_steps and the times n * t_c."""

    states: tuple
    times: tuple

    def __post_init__(self):
        if len(self.states) != len(self.times):
            raise ConfigurationError("states and times must have equal length")
        times = tuple(float(t) for t in self.times)
        if any(b < a for a, b in zip(times, times[1:])):
            raise ConfigurationError("times must be nondecreasing")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.states)

    def populations(self, level: int = 1) -> np.ndarray:
        return np.array([s.data[level, level].real for s in self.states])

    def coherences(self) -> np.ndarray:
        return np.array([s.data[0, 1] for s in self.states])


def partial_swap_channel(d: int, p_s: float) -> KrausChannel:
    """Incoherent partial swap on d (x) d: identity branch plus swap branch."""
    if not 0.0 <= p_s <= 1.0:
        raise ConfigurationError(f"swap probability {p_s} outside [0, 1]")
    eye = np.eye(d * d, dtype=np.complex128)
    ops = (np.sqrt(1.0 - p_s) * eye, np.sqrt(p_s) * swap_operator(d))
    return KrausChannel(ops, dim_in=d * d, dim_out=d * d)


def sa_collision(rho_joint: DensityOperator, h: HermitianOperator, t_c: float) -> DensityOperator:
    """One unitary collision: conjugation by e^{-i H t_c}."""
    if rho_joint.dim != h.dim:
        raise ConfigurationError(f"state dim {rho_joint.dim} != hamiltonian dim {h.dim}")
    u = unitary_evolution(h, t_c)
    return DensityOperator(u @ rho_joint.data @ u.conj().T)


def purified_pair_ket(weights) -> np.ndarray:
    """|psi> = sum_k sqrt(w_k) |k>|k>, whose first-half marginal is the mixture w."""
    w = np.asarray(weights, dtype=float)
    d = w.shape[0]
    psi = np.zeros(d * d, dtype=np.complex128)
    for k in range(d):
        psi[k * d + k] = np.sqrt(w[k])
    return psi


def _fresh_unit(cfg: CollisionConfig, thermal: bool):
    """Initial state of one bath unit and the Hamiltonian acting on S + unit.

    Pure/ground bath: the unit is a single ancilla in |0>. Thermal bath:
    the unit is a purified ancilla pair; the coupling acts on the first
    half only, and AA swaps exchange whole units.
    """
    da = cfg.ancilla_dim
    if not thermal:
        v = ket(da, 0)
        return np.outer(v, v.conj()), da, cfg.hamiltonian.data
    w = cfg.bath.weight_vector(da)
    psi = purified_pair_ket(w)
    unit = np.outer(psi, psi.conj())
    h_pair = np.kron(cfg.hamiltonian.data, np.eye(da, dtype=np.complex128))
    return unit, da * da, h_pair


def _window_run(cfg: CollisionConfig, rho0: DensityOperator, thermal: bool) -> TrajectoryRecord:
    if rho0.dim != cfg.system_dim:
        raise ConfigurationError(f"initial state dim {rho0.dim} != system dim {cfg.system_dim}")
    unit, u_dim, h_full = _fresh_unit(cfg, thermal)
    ds = cfg.system_dim
    u_sa = unitary_evolution(h_full, cfg.t_c)
    u_sa_dag = u_sa.conj().T

    swap_kraus = None
    if cfg.n_steps >= 2:
        sw = partial_swap_channel(u_dim, cfg.p_s)
        swap_kraus = tuple(
            embed_operator(k, [ds, u_dim, u_dim], [1, 2]) for k in sw.kraus
        )

    states = [rho0]
    window = np.kron(rho0.data, unit)
    window = u_sa @ window @ u_sa_dag
    states.append(DensityOperator(_partial_trace_matrix(window, [ds, u_dim], (0,))))

    for _ in range(2, cfg.n_steps + 1):
        w3 = np.kron(window, unit)
        w3 = _apply_kraus_matrix(swap_kraus, w3)
        window = _partial_trace_matrix(w3, [ds, u_dim, u_dim], (0, 2))
        window = u_sa @ window @ u_sa_dag
        # the exact dynamics preserves Hermiticity and trace; restore both each
        # step so rounding cannot drift systematically over long runs
        window = 0.5 * (window + window.conj().T)
        window = window / np.trace(window).real
        states.append(DensityOperator(_partial_trace_matrix(window, [ds, u_dim], (0,))))

    times = tuple(n * cfg.t_c for n in range(cfg.n_steps + 1))
    return TrajectoryRecord(tuple(states), times)


def run_discrete(cfg: CollisionConfig, rho0: DensityOperator) -> TrajectoryRecord:
    """Run the protocol with every ancilla initially in the pure ground state."""
    if cfg.bath.kind != "pure_ground":
        raise ConfigurationError("run_discrete expects a pure_ground bath; see run_discrete_thermal")
    return _window_run(cfg, rho0, thermal=False)


def run_discrete_thermal(cfg: CollisionConfig, rho0: DensityOperator) -> TrajectoryRecord:
    """Run the protocol with purified thermal ancilla pairs."""
    if cfg.bath.kind != "thermal":
        raise ConfigurationError("run_discrete_thermal expects a thermal bath")
    return _window_run(cfg, rho0, thermal=True)
