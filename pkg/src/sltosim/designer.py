"""Monte Carlo design of cavity anharmonicity and mode-function profiles.

Target intensity tables f(n), theta(n) are realized by shaping a weak
anharmonic potential V(y) and an odd mode function b(y) of the scaled
position y = x/x0: in the rotating frame the potential contributes its
Fock-diagonal elements f(n) = <n|V|n> and the mode function couples
neighbouring levels through <n-1|b|n> = theta(n-1) sqrt(n).  Both
functions are fixed-parity polynomials here, so every matrix element is
a finite exact computation and truncation is controlled by construction:
a degree-d polynomial in y connects |n> only to |n +- d|, so elements
are reported only far enough below the workspace cutoff.

The fit is a seeded random-walk descent over the coefficients: one
coefficient at a time gets a Gaussian kick, downhill moves are always
kept, and an optional auxiliary temperature admits uphill moves with
Boltzmann probability.  Identical seeds reproduce identical traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SpectralPropagator, basis_state

DEFAULT_V_DEGREE = 8
DEFAULT_B_DEGREE = 7


@dataclass(frozen=True)
class PotentialAnsatz:
    """Even potential V(y) (degrees 2..D_V) and odd mode function b(y) (1..D_b).

    Only the allowed-parity coefficients are stored, so the symmetries
    V(-y) = V(y) and b(-y) = -b(y) hold by construction.
    """

    v_coeffs: np.ndarray  # coefficient of y^(2(i+1)) at slot i
    b_coeffs: np.ndarray  # coefficient of y^(2i+1) at slot i

    def __post_init__(self):
        v = np.array(self.v_coeffs, dtype=float)
        b = np.array(self.b_coeffs, dtype=float)
        if v.ndim != 1 or b.ndim != 1 or v.size == 0 or b.size == 0:
            raise ValueError("coefficient arrays must be nonempty 1-d")
        v.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "v_coeffs", v)
        object.__setattr__(self, "b_coeffs", b)

    @classmethod
    def zeros(cls, v_degree: int = DEFAULT_V_DEGREE, b_degree: int = DEFAULT_B_DEGREE):
        if v_degree < 2 or v_degree % 2:
            raise ValueError("v_degree must be an even integer >= 2")
        if b_degree < 1 or b_degree % 2 == 0:
            raise ValueError("b_degree must be an odd integer >= 1")
        return cls(np.zeros(v_degree // 2), np.zeros((b_degree + 1) // 2))

    @property
    def v_degrees(self) -> np.ndarray:
        return 2 * (np.arange(self.v_coeffs.size) + 1)

    @property
    def b_degrees(self) -> np.ndarray:
        return 2 * np.arange(self.b_coeffs.size) + 1

    @property
    def max_degree(self) -> int:
        return int(max(self.v_degrees[-1], self.b_degrees[-1]))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.v_coeffs, self.b_coeffs])

    def with_flat(self, coeffs: np.ndarray) -> "PotentialAnsatz":
        nv = self.v_coeffs.size
        return PotentialAnsatz(coeffs[:nv].copy(), coeffs[nv:].copy())


def position_operator(dim: int) -> np.ndarray:
    """X = (a + a^dagger)/sqrt(2) on a Fock space of the given dimension."""
    x = np.zeros((dim, dim))
    for n in range(1, dim):
        x[n - 1, n] = x[n, n - 1] = math.sqrt(n / 2.0)
    return x


def fock_matrix_elements(
    ansatz: PotentialAnsatz, n_work: int
) -> tuple[np.ndarray, np.ndarray]:
    """Exact diagonal and one-step tables of the polynomial operators.

    Returns (f_act, theta_act) with f_act[n] = <n|V(X)|n> for
    n <= n_work - D_V and theta_act[j] = <j|b(X)|j+1> / sqrt(j+1) for
    j <= n_work - D_b - 1.  Higher entries are contaminated by the
    cutoff and never reported.
    """
    if n_work < ansatz.max_degree + 2:
        raise ValueError(
            f"workspace cutoff {n_work} too small for degree {ansatz.max_degree}"
        )
    dim = n_work + 1
    x = position_operator(dim)
    power = np.eye(dim)
    v_mat = np.zeros((dim, dim))
    b_mat = np.zeros((dim, dim))
    v_by_degree = dict(zip(ansatz.v_degrees.tolist(), ansatz.v_coeffs))
    b_by_degree = dict(zip(ansatz.b_degrees.tolist(), ansatz.b_coeffs))
    for degree in range(1, ansatz.max_degree + 1):
        power = power @ x
        if degree in v_by_degree:
            v_mat += v_by_degree[degree] * power
        if degree in b_by_degree:
            b_mat += b_by_degree[degree] * power
    d_v = int(ansatz.v_degrees[-1])
    d_b = int(ansatz.b_degrees[-1])
    f_act = np.diag(v_mat)[: n_work - d_v + 1].copy()
    j_top = n_work - d_b  # exact elements <j|b|j+1> need j+1+d_b <= n_work
    theta_act = np.array(
        [b_mat[j, j + 1] / math.sqrt(j + 1) for j in range(j_top)]
    )
    return f_act, theta_act


@dataclass(frozen=True)
class DesignTargets:
    """Tables to hit on n = 1..n_fit, with norms and workspace cutoff.

    The f mismatch is scored in the L2 norm and the theta mismatch in
    the Lq norm with q > 2.
    """

    f_target: np.ndarray
    theta_target: np.ndarray
    q: float = 4.0
    n_work: int = 0

    def __post_init__(self):
        f = np.array(self.f_target, dtype=float)
        th = np.array(self.theta_target, dtype=float)
        if f.size != th.size or f.size == 0:
            raise ValueError("f and theta target tables must have equal nonzero length")
        f.flags.writeable = False
        th.flags.writeable = False
        object.__setattr__(self, "f_target", f)
        object.__setattr__(self, "theta_target", th)
        if self.q <= 2:
            raise ValueError(f"theta norm order must satisfy q > 2, got {self.q}")
        if self.n_work == 0:
            object.__setattr__(
                self, "n_work", self.n_fit + max(DEFAULT_V_DEGREE, DEFAULT_B_DEGREE) + 2
            )
        if self.n_work < self.n_fit + 4:
            raise ValueError("n_work must be at least n_fit + 4")

    @property
    def n_fit(self) -> int:
        return self.f_target.size

    @classmethod
    def inverse_intensity(
        cls, amplitude: float, n_fit: int, q: float = 4.0, n_work: int = 0
    ) -> "DesignTargets":
        """f(n) = amplitude/n and theta(n) = n^(-1/2) on n = 1..n_fit."""
        n = np.arange(1, n_fit + 1, dtype=float)
        return cls(amplitude / n, 1.0 / np.sqrt(n), q=q, n_work=n_work)

    @classmethod
    def from_ansatz(
        cls, generator: PotentialAnsatz, n_fit: int, q: float = 4.0, n_work: int = 0
    ) -> "DesignTargets":
        """Tables produced by a known ansatz (self-consistency experiments)."""
        if n_work == 0:
            n_work = n_fit + generator.max_degree + 2
        f_act, theta_act = fock_matrix_elements(generator, n_work)
        return cls(f_act[1 : n_fit + 1], theta_act[1 : n_fit + 1], q=q, n_work=n_work)


def design_cost(ansatz: PotentialAnsatz, targets: DesignTargets) -> float:
    """L2 mismatch of the f table plus Lq mismatch of the theta table."""
    f_act, theta_act = fock_matrix_elements(ansatz, targets.n_work)
    n_fit = targets.n_fit
    if f_act.size < n_fit + 1 or theta_act.size < n_fit + 1:
        raise ValueError(
            f"workspace cutoff {targets.n_work} cannot reach fit index {n_fit} "
            f"for degrees up to {ansatz.max_degree}"
        )
    df = f_act[1 : n_fit + 1] - targets.f_target
    dth = theta_act[1 : n_fit + 1] - targets.theta_target
    f_norm = math.sqrt(float(np.sum(df**2)))
    th_norm = float(np.sum(np.abs(dth) ** targets.q)) ** (1.0 / targets.q)
    return f_norm + th_norm


@dataclass(frozen=True)
class AnnealSchedule:
    """Iteration budget, kick size, auxiliary temperature (0 = greedy), seed.

    ``proposal_scale`` is dimensionless: the typical cost impact of one
    kick, as a fraction of the current cost.
    """

    iterations: int
    proposal_scale: float = 0.2
    mc_temperature: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.proposal_scale <= 0:
            raise ValueError("proposal_scale must be positive")
        if self.mc_temperature < 0:
            raise ValueError("mc_temperature must be >= 0")


def _coefficient_sensitivities(ansatz0: PotentialAnsatz, targets: DesignTargets) -> np.ndarray:
    """Cost-space gain of a unit kick on each coefficient (exact: the
    tables are linear in the coefficients, so this is a one-time setup)."""
    n_fit = targets.n_fit
    zeros = np.zeros(ansatz0.flat().size)
    sens = np.empty(zeros.size)
    for k in range(zeros.size):
        unit = zeros.copy()
        unit[k] = 1.0
        f, th = fock_matrix_elements(ansatz0.with_flat(unit), targets.n_work)
        sens[k] = math.sqrt(
            float(np.sum(f[1 : n_fit + 1] ** 2) + np.sum(th[1 : n_fit + 1] ** 2))
        )
    return np.maximum(sens, 1e-30)


def mc_optimize(
    ansatz0: PotentialAnsatz, targets: DesignTargets, schedule: AnnealSchedule
) -> tuple[PotentialAnsatz, np.ndarray]:
    """Single-coefficient random-walk descent on the design cost.

    Each kick perturbs one randomly chosen coefficient by a Gaussian
    step whose width is proposal_scale * (current cost) / (that
    coefficient's cost sensitivity), so kicks stay commensurate with the
    remaining error: high-degree coefficients move in proportionally
    tiny steps and the walk has no resolution floor.

    Returns the best ansatz ever visited and the accepted-cost trace
    (length iterations + 1, starting at the initial cost).  The trace's
    running minimum is non-increasing, and at zero temperature the trace
    itself is.  Identical seeds give identical traces.
    """
    rng = np.random.default_rng(schedule.seed)
    sens = _coefficient_sensitivities(ansatz0, targets)
    coeffs = ansatz0.flat()
    current = design_cost(ansatz0, targets)
    best_coeffs = coeffs.copy()
    best_cost = current
    trace = np.empty(schedule.iterations + 1)
    trace[0] = current
    for i in range(1, schedule.iterations + 1):
        k = int(rng.integers(coeffs.size))
        width = schedule.proposal_scale * current / sens[k]
        step = rng.normal(0.0, width)
        proposal = coeffs.copy()
        proposal[k] += step
        cost = design_cost(ansatz0.with_flat(proposal), targets)
        dc = cost - current
        accept = dc < 0 or (
            schedule.mc_temperature > 0
            and rng.random() < math.exp(-dc / schedule.mc_temperature)
        )
        if accept:
            coeffs = proposal
            current = cost
            if cost < best_cost:
                best_cost = cost
                best_coeffs = proposal.copy()
        trace[i] = current
    return ansatz0.with_flat(best_coeffs), trace


@dataclass(frozen=True)
class DesignValidation:
    """Table errors of a fitted design and the cycle fidelity it costs."""

    probe_block: tuple[int, int]
    f_errors: np.ndarray
    theta_errors: np.ndarray
    max_f_error: float
    max_theta_error: float
    fidelity_degradation: float
    rule_residual: float


def validate_design(
    best: PotentialAnsatz,
    targets: DesignTargets,
    cfg,
    probe_block: tuple[int, int] = (3, 1),
) -> DesignValidation:
    """Close the loop: per-level table errors plus full-model cycle fidelity.

    Both the fitted tables and the target tables are installed as
    coupling profiles of a probe engine (cutoffs clipped to the fit
    range), the three-level model is evolved from the probe sector for
    one cycle under each, and the final-state infidelity is reported as
    the degradation caused by the residual fitting error.
    """
    from .optics import (
        OpticsEngineConfig,
        build_full_hamiltonian,
        coupling_profile_from_tables,
    )
    from .thermal import TruncatedMode

    f_act, theta_act = fock_matrix_elements(best, targets.n_work)
    n_fit = targets.n_fit
    f_err = np.abs(f_act[1 : n_fit + 1] - targets.f_target)
    th_err = np.abs(theta_act[1 : n_fit + 1] - targets.theta_target)

    probe = OpticsEngineConfig(
        mode1=TruncatedMode(cfg.mode1.omega, cfg.mode1.beta, n_fit),
        mode2=TruncatedMode(cfg.mode2.omega, cfg.mode2.beta, n_fit),
        atom=cfg.atom,
        g1=cfg.g1,
        g2=cfg.g2,
        min_detuning_ratio=cfg.min_detuning_ratio,
    )

    def tables_to_profile(f_table, th_table):
        theta = np.zeros(n_fit + 1)
        f = np.zeros(n_fit + 1)
        theta[1:] = th_table[:n_fit]
        f[1:] = f_table[:n_fit]
        return coupling_profile_from_tables(
            probe, theta, theta.copy(), f, f.copy(), require_rule=False
        )

    profile_fit = tables_to_profile(f_act[1 : n_fit + 1], theta_act[1 : n_fit + 1])
    profile_ref = tables_to_profile(targets.f_target, targets.theta_target)

    n0, m0 = probe_block
    if not (1 <= n0 <= n_fit and 0 <= m0 < n_fit):
        raise ValueError(f"probe block {probe_block} outside the fitted range")
    d2 = probe.mode2.dim
    psi0 = basis_state(probe.full_dim, (n0 * d2 + m0) * 3 + 0)
    tau = probe.tau
    finals = []
    for profile in (profile_ref, profile_fit):
        prop = SpectralPropagator(build_full_hamiltonian(probe, profile))
        finals.append(prop.states(psi0, [tau])[0])
    overlap = abs(np.vdot(finals[0], finals[1])) ** 2
    return DesignValidation(
        probe_block=probe_block,
        f_errors=f_err,
        theta_errors=th_err,
        max_f_error=float(np.max(f_err)),
        max_theta_error=float(np.max(th_err)),
        fidelity_degradation=float(max(0.0, 1.0 - overlap)),
        rule_residual=profile_fit.rule_residual,
    )
