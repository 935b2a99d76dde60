"""Independent oracles and certification.

Nothing here shares code with the paths it checks: the inverse Laplace
transform is a fixed-Talbot contour quadrature in arbitrary precision,
the brute-force chain simulator holds every ancilla in memory instead of
the sliding window, and the certifier recomputes Choi spectra from
scratch for whatever maps it is handed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .collisions import BathSpec, CollisionConfig, TrajectoryRecord, _fresh_unit, run_discrete
from .continuum import DynamicalMap, TimeGrid
from .errors import ConfigurationError, DivergenceError
from .jaynes_cummings import QubitStateParams, jc_hamiltonian, lambda_jc, lambda_jc_superop
from .quantum import (
    DensityOperator,
    KrausChannel,
    _partial_trace_matrix,
    choi_of,
    embed_operator,
    swap_operator,
    trace_distance,
    unitary_evolution,
)

__all__ = [
    "CptReport",
    "ConvergenceReport",
    "inverse_laplace",
    "brute_force_chain",
    "certify_cpt",
    "convergence_study",
    "calibrated_swap_probability",
    "random_density_operator",
    "corrupted_beta_maps",
]


# --- numerical inverse Laplace transform ------------------------------------


def inverse_laplace(transform: Callable, t: float, n_nodes: int = 64) -> float:
    """Invert a Laplace transform at one time by fixed-Talbot quadrature.

    The contour is the parabola-like fixed Talbot path with base abscissa
    r = 2M/(5t); the transform must be analytic to the right of all its
    singularities and is called with ``mpmath`` numbers, so it has to be
    written in plain arithmetic. Evaluation runs at working precision
    proportional to the node count, which keeps the documented 1e-9
    target comfortably for the rational transforms arising here.
    """
    if t <= 0:
        raise ConfigurationError("inversion time must be positive")
    if n_nodes < 4:
        raise ConfigurationError("need at least 4 contour nodes")
    m = n_nodes
    with mpmath.workdps(max(30, m)):
        tt = mpmath.mpf(t)
        r = mpmath.mpf(2) * m / (5 * tt)
        total = mpmath.exp(r * tt) * transform(r) / 2
        for k in range(1, m):
            theta = mpmath.pi * k / m
            cot = mpmath.cot(theta)
            s = r * theta * (cot + 1j)
            sigma = theta + (theta * cot - 1) * cot
            term = mpmath.exp(s * tt) * transform(s) * (1 + 1j * sigma)
            total += term.real
        total = total * r / m
        if not mpmath.isfinite(total):
            raise DivergenceError(
                f"Talbot quadrature diverged at t={t} with {m} nodes "
                f"(contour base r={float(r):.6g})"
            )
        return float(total)


# --- brute-force chain oracle ------------------------------------------------


def brute_force_chain(cfg: CollisionConfig, rho0: DensityOperator,
                      n_max: int = 6) -> TrajectoryRecord:
    """Literal protocol simulation holding the system and every ancilla.

    Exponential in the step count; usable only for small chains, where it
    is the ground truth for the sliding-window engine.
    """
    if cfg.n_steps > n_max:
        raise ConfigurationError(
            f"brute-force chain capped at {n_max} steps, got {cfg.n_steps}"
        )
    if rho0.dim != cfg.system_dim:
        raise ConfigurationError("initial state dimension mismatch")
    thermal = cfg.bath.kind == "thermal"
    unit, u_dim, h_full = _fresh_unit(cfg, thermal)
    n = cfg.n_steps
    ds = cfg.system_dim
    dims = [ds] + [u_dim] * n

    sigma = rho0.data
    for _ in range(n):
        sigma = np.kron(sigma, unit)

    u_pair = unitary_evolution(h_full, cfg.t_c)
    swap = swap_operator(u_dim)
    states = [rho0]
    for step in range(1, n + 1):
        if step >= 2:
            s_emb = embed_operator(swap, dims, [step - 1, step])
            sigma = (1.0 - cfg.p_s) * sigma + cfg.p_s * (s_emb @ sigma @ s_emb.conj().T)
        u_emb = embed_operator(u_pair, dims, [0, step])
        sigma = u_emb @ sigma @ u_emb.conj().T
        states.append(DensityOperator(_partial_trace_matrix(sigma, dims, (0,))))
    times = tuple(k * cfg.t_c for k in range(n + 1))
    return TrajectoryRecord(tuple(states), times)


# --- CPT certification --------------------------------------------------------


@dataclass(frozen=True)
class CptReport:
    """Per-point Choi spectra and trace defects for a family of maps."""

    min_choi_eigenvalue: tuple
    max_trace_defect: tuple
    tolerance: float
    verdict: bool
    grid: Optional[TimeGrid] = None
    gamma_bar: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "grid": None
            if self.grid is None
            else {"t_max": self.grid.t_max, "n_points": self.grid.n_points, "dt": self.grid.dt},
            "gamma_bar": self.gamma_bar,
            "min_choi_eigenvalue": list(self.min_choi_eigenvalue),
            "max_trace_defect": list(self.max_trace_defect),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def certify_cpt(maps: Sequence, tolerance: float = 1e-9, *,
                grid: Optional[TimeGrid] = None,
                gamma_bar: Optional[float] = None) -> CptReport:
    """Certify complete positivity and trace preservation of each map.

    Accepts Kraus channels or superoperator-backed dynamical maps. The
    verdict is true iff every Choi minimum eigenvalue is >= -tolerance and
    every trace defect is <= tolerance.
    """
    if len(maps) == 0:
        raise ConfigurationError("cannot certify an empty map family")
    min_eigs = []
    defects = []
    for mp in maps:
        if isinstance(mp, KrausChannel):
            min_eigs.append(choi_of(mp).min_eigenvalue())
            defects.append(mp.trace_defect())
        elif isinstance(mp, DynamicalMap):
            min_eigs.append(mp.choi().min_eigenvalue())
            defects.append(mp.trace_defect())
        else:
            raise ConfigurationError(f"cannot certify object of type {type(mp)!r}")
    verdict = all(e >= -tolerance for e in min_eigs) and all(d <= tolerance for d in defects)
    return CptReport(
        min_choi_eigenvalue=tuple(min_eigs),
        max_trace_defect=tuple(defects),
        tolerance=tolerance,
        verdict=verdict,
        grid=grid,
        gamma_bar=gamma_bar,
    )


def corrupted_beta_maps(gamma_bar: float, taus, inflation: float = 1.05) -> list:
    """Closed-form map family with the coherence factor inflated.

    The inflation breaks the beta1^2 <= beta2 inequality (already at
    tau = 0, where both factors equal 1), producing a non-CP family. Used
    as the mandatory negative control for the certifier.
    """
    out = []
    for tau in np.atleast_1d(taus):
        s = lambda_jc_superop(float(tau), gamma_bar).copy()
        s[1, 1] *= inflation
        s[2, 2] *= inflation
        out.append(DynamicalMap(time=float(tau), superop=s, dim=2))
    return out


# --- discrete/continuous convergence ------------------------------------------


def calibrated_swap_probability(gamma_bar: float, t_c: float) -> float:
    """Swap probability reproducing memory-loss rate gamma_bar at collision time t_c.

    Convention p_s = e^{-gamma_bar * t_c} (rescaled time units): n swap
    collisions then weight the surviving kernel by p_s^n = e^{-gamma_bar * tau}.
    It matches both published endpoints, p_s = 1 at zero rate and p_s -> 0
    in the memoryless limit, and is validated empirically by the
    convergence study rather than assumed.
    """
    return float(np.exp(-gamma_bar * t_c))


@dataclass(frozen=True)
class ConvergenceReport:
    """Max trajectory error against the closed-form map per collision time."""

    t_c_values: tuple
    errors: tuple
    estimated_order: Optional[float]

    def __post_init__(self):
        tc = list(self.t_c_values)
        if any(b >= a for a, b in zip(tc, tc[1:])):
            raise ConfigurationError("collision times must be strictly decreasing")
        if any(e < 0 for e in self.errors):
            raise ConfigurationError("errors must be nonnegative")

    def as_dict(self) -> dict:
        return {
            "t_c_values": list(self.t_c_values),
            "errors": list(self.errors),
            "estimated_order": self.estimated_order,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


_DEFAULT_PROBE = QubitStateParams(p=0.6, r=0.25 + 0.2j)


def convergence_study(gamma_bar: float, tau_max: float, t_c_list,
                      probe: QubitStateParams = _DEFAULT_PROBE) -> ConvergenceReport:
    """Measure how fast the discrete protocol approaches the closed-form map.

    For each collision time, the swap probability is calibrated to
    gamma_bar, the protocol runs out to tau_max, and the error is the
    maximum trace distance along the whole trajectory (endpoint-only
    checks miss transients). The order estimate is the log-log slope.
    """
    t_c_values = sorted((float(t) for t in t_c_list), reverse=True)
    if len(t_c_values) != len(set(t_c_values)):
        raise ConfigurationError("collision times must be distinct")
    rho0 = probe.to_density()
    h = jc_hamiltonian()
    errors = []
    for t_c in t_c_values:
        n_steps = round(tau_max / t_c)
        if abs(n_steps * t_c - tau_max) > 1e-9 * max(1.0, tau_max):
            raise ConfigurationError(
                f"collision time {t_c} does not divide tau_max {tau_max}"
            )
        cfg = CollisionConfig(
            system_dim=2,
            ancilla_dim=2,
            hamiltonian=h,
            t_c=t_c,
            p_s=calibrated_swap_probability(gamma_bar, t_c),
            n_steps=n_steps,
            bath=BathSpec(kind="pure_ground"),
        )
        traj = run_discrete(cfg, rho0)
        worst = 0.0
        for state, t in zip(traj.states, traj.times):
            reference = lambda_jc(t, gamma_bar, probe)
            worst = max(worst, trace_distance(state, reference))
        errors.append(worst)
    if len(t_c_values) >= 2:
        slope = np.polyfit(np.log(t_c_values), np.log(np.maximum(errors, 1e-300)), 1)[0]
        estimated_order = float(slope)
    else:
        estimated_order = None
    return ConvergenceReport(
        t_c_values=tuple(t_c_values), errors=tuple(errors), estimated_order=estimated_order
    )


# --- random-state utilities ----------------------------------------------------


def random_density_operator(dim: int, rng: np.random.Generator) -> DensityOperator:
    """Full-rank random state from a complex Gaussian square root."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    mat = g @ g.conj().T + 1e-6 * np.eye(dim)
    return DensityOperator(mat / np.trace(mat).real)
