"""Cavity-QED engine: a three-level atom exchanging quanta with two thermal modes.

The atom has a V-shaped level pair |1>, |2> bridged through a detuned
upper level |3>; each leg couples to its own cavity mode with an
intensity-dependent strength.  At large detuning the upper level only
mediates: a hot photon is absorbed, a cold photon emitted, and the atom
ends in |2>, from which the stored gap energy can leave by stimulated
emission into a resonant extraction mode (bookkept, not simulated).

Two Hamiltonians live here.  The full three-level model keeps the upper
level and the intensity profiles explicitly; it is the ground truth for
the detuning sweep.  The effective two-level model couples the sectors
|n, m, 1> <-> |n-1, m+1, 2> with one uniform strength g = g1*g2/Delta
and is exactly the two-ladder exchange engine on a relabelled system,
so its cycle is delegated to that machinery.

Intensity profiles are tables theta_k(j), f_k(j) over Fock index j.
The coupling operator convention is fixed once: the matrix element of
theta_k(N_k) a_k between |n> and |n-1> is theta_k(n-1) * sqrt(n), and
theta_k(0) = 0 regularizes the profiles that diverge at the vacuum.
With that convention the table theta(j) = (j+1)^(-1/2) makes every
transition element above the regularized lowest one exactly 1, which is
the profile whose full model converges to the uniform effective model;
the inverse-intensity table theta(j) = j^(-1/2) reaches uniform elements
only asymptotically in j and is kept as the design target family.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import (
    CompactEngineConfig,
    CycleReport,
    build_interaction_hamiltonian,
    evolve_cycle,
)
from .linalg import Operator, ShapeError, SpectralPropagator, basis_state
from .thermal import TruncatedMode, truncation_for_tail

RESONANCE_ATOL = 1e-12


@dataclass(frozen=True)
class LambdaAtom:
    """Three-level atom with E1 = 0 < E2 < E3 (E2 is the work gap omega0)."""

    e2: float
    e3: float

    def __post_init__(self):
        if not 0.0 < self.e2 < self.e3:
            raise ValueError(f"need 0 < e2 < e3, got e2={self.e2}, e3={self.e3}")


@dataclass(frozen=True)
class OpticsEngineConfig:
    """Two thermal cavities plus the atom, with all resonances pinned.

    Requires beta1 < beta2, beta1*omega1 = beta2*omega2, the two-mode
    resonance omega0 = omega1 - omega2 (which also makes the upper-level
    detuning identical on both legs), and Delta/g_k at or above
    ``min_detuning_ratio``.
    """

    mode1: TruncatedMode
    mode2: TruncatedMode
    atom: LambdaAtom
    g1: float
    g2: float
    min_detuning_ratio: float = 20.0

    def __post_init__(self):
        if self.mode1.beta >= self.mode2.beta:
            raise ValueError("need beta1 < beta2 (a real temperature gradient)")
        if abs(self.mode1.beta * self.mode1.omega - self.mode2.beta * self.mode2.omega) > RESONANCE_ATOL:
            raise ValueError("resonance violated: beta1*omega1 != beta2*omega2")
        if abs(self.atom.e2 - (self.mode1.omega - self.mode2.omega)) > RESONANCE_ATOL:
            raise ValueError("two-mode resonance violated: omega0 != omega1 - omega2")
        if self.g1 < 0 or self.g2 < 0:
            raise ValueError("couplings g1, g2 must be non-negative")
        if self.delta <= 0:
            raise ValueError("detuning must be positive")
        if max(self.g1, self.g2) > 0:
            ratio = self.delta / max(self.g1, self.g2)
            if ratio < self.min_detuning_ratio:
                raise ValueError(
                    f"detuning ratio {ratio:.2f} below configured minimum "
                    f"{self.min_detuning_ratio}"
                )

    @property
    def omega0(self) -> float:
        return self.atom.e2

    @property
    def delta(self) -> float:
        # identical for both legs once the two-mode resonance holds
        return self.atom.e3 - self.mode1.omega

    @property
    def g(self) -> float:
        return self.g1 * self.g2 / self.delta

    @property
    def tau(self) -> float:
        return math.pi / (2.0 * self.g) if self.g > 0 else math.inf

    @property
    def full_dim(self) -> int:
        return self.mode1.dim * self.mode2.dim * 3

    @classmethod
    def resonant(
        cls,
        beta1: float,
        beta2: float,
        omega1: float,
        g1: float,
        g2: float,
        detuning: float,
        n_max1: int | None = None,
        n_max2: int | None = None,
        tail_delta: float = 1e-6,
        min_detuning_ratio: float = 20.0,
    ) -> "OpticsEngineConfig":
        """Derive omega2, the atom levels, and cutoffs from the resonances."""
        omega2 = beta1 * omega1 / beta2
        if n_max1 is None:
            n_max1 = truncation_for_tail(omega1, beta1, tail_delta).n_max_used
        if n_max2 is None:
            n_max2 = truncation_for_tail(omega2, beta2, tail_delta).n_max_used
        atom = LambdaAtom(e2=omega1 - omega2, e3=detuning + omega1)
        return cls(
            mode1=TruncatedMode(omega1, beta1, n_max1),
            mode2=TruncatedMode(omega2, beta2, n_max2),
            atom=atom,
            g1=g1,
            g2=g2,
            min_detuning_ratio=min_detuning_ratio,
        )


def default_config() -> OpticsEngineConfig:
    """Reference parameter point: g = 0.05 at detuning ratio 40."""
    return OpticsEngineConfig.resonant(
        beta1=0.5, beta2=1.0, omega1=2.0, g1=2.0, g2=2.0, detuning=80.0
    )


@dataclass(frozen=True)
class CouplingProfile:
    """Intensity tables theta_k(j) and f_k(j) for j = 0..n_max_k.

    theta(0) = 0 by regularization.  The shift tables are tied to the
    couplings by f_k(j) = (g_k^2/Delta) * theta_k(j)^2 for j >= 1;
    ``rule_residual`` records how far a table pair strays from that rule
    (zero unless the profile came from fitted data).
    """

    theta1: np.ndarray
    theta2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    rule_residual: float = 0.0

    def __post_init__(self):
        for name in ("theta1", "theta2", "f1", "f2"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.theta1.shape != self.f1.shape or self.theta2.shape != self.f2.shape:
            raise ShapeError("theta and f tables must have matching lengths")
        if abs(self.theta1[0]) > 0 or abs(self.theta2[0]) > 0:
            raise ValueError("theta(0) must be 0 (vacuum regularization)")
        if abs(self.f1[0]) > 0 or abs(self.f2[0]) > 0:
            raise ValueError("f(0) must be 0 (vacuum regularization)")


def coupling_profile_from_tables(
    cfg: OpticsEngineConfig,
    theta1: Sequence[float],
    theta2: Sequence[float],
    f1: Sequence[float] | None = None,
    f2: Sequence[float] | None = None,
    require_rule: bool = True,
) -> CouplingProfile:
    """Build a profile for cfg's cutoffs, deriving or checking the f tables."""
    theta1 = np.array(theta1, dtype=float)
    theta2 = np.array(theta2, dtype=float)
    if theta1.size != cfg.mode1.dim or theta2.size != cfg.mode2.dim:
        raise ShapeError(
            f"theta tables must cover Fock indices 0..n_max "
            f"({cfg.mode1.dim}, {cfg.mode2.dim} entries)"
        )
    rule1 = (cfg.g1**2 / cfg.delta) * theta1**2
    rule2 = (cfg.g2**2 / cfg.delta) * theta2**2
    rule1[0] = 0.0
    rule2[0] = 0.0
    if f1 is None and f2 is None:
        return CouplingProfile(theta1, theta2, rule1, rule2)
    f1 = np.array(f1, dtype=float)
    f2 = np.array(f2, dtype=float)
    residual = max(
        float(np.max(np.abs(f1[1:] - rule1[1:]))) if f1.size > 1 else 0.0,
        float(np.max(np.abs(f2[1:] - rule2[1:]))) if f2.size > 1 else 0.0,
    )
    if require_rule and residual > RESONANCE_ATOL:
        raise ValueError(
            f"f tables deviate from (g^2/Delta) theta^2 by {residual:.3e}"
        )
    return CouplingProfile(theta1, theta2, f1, f2, rule_residual=residual)


def uniform_exchange_profile(cfg: OpticsEngineConfig) -> CouplingProfile:
    """Tables theta(j) = (j+1)^(-1/2): every transition element is exactly 1.

    Only the regularized vacuum entry breaks uniformity, so the full
    model reproduces the uniform effective engine on all sectors that
    avoid the lowest transition of either mode.
    """
    j1 = np.arange(cfg.mode1.dim, dtype=float)
    j2 = np.arange(cfg.mode2.dim, dtype=float)
    t1 = 1.0 / np.sqrt(j1 + 1.0)
    t2 = 1.0 / np.sqrt(j2 + 1.0)
    t1[0] = 0.0
    t2[0] = 0.0
    return coupling_profile_from_tables(cfg, t1, t2)


def inverse_intensity_profile(cfg: OpticsEngineConfig) -> CouplingProfile:
    """Tables theta(j) = j^(-1/2), f(j) = (g^2/Delta)/j, regularized at j = 0.

    This is the design-target family; its transition elements approach 1
    only for large occupation.
    """
    t1 = np.zeros(cfg.mode1.dim)
    t2 = np.zeros(cfg.mode2.dim)
    j1 = np.arange(1, cfg.mode1.dim, dtype=float)
    j2 = np.arange(1, cfg.mode2.dim, dtype=float)
    t1[1:] = 1.0 / np.sqrt(j1)
    t2[1:] = 1.0 / np.sqrt(j2)
    return coupling_profile_from_tables(cfg, t1, t2)


def _lowering_with_profile(theta: np.ndarray) -> np.ndarray:
    """Matrix of theta(N) a: element [n-1, n] = theta(n-1) * sqrt(n)."""
    dim = theta.size
    c = np.zeros((dim, dim))
    for n in range(1, dim):
        c[n - 1, n] = theta[n - 1] * math.sqrt(n)
    return c


def build_full_hamiltonian(cfg: OpticsEngineConfig, profile: CouplingProfile) -> Operator:
    """Interaction-picture three-level Hamiltonian with the explicit upper level.

    H = Delta |3><3| + f1(N1) + f2(N2)
        + g1 (theta1(N1) a1 sigma_31 + h.c.) + g2 (theta2(N2) a2 sigma_32 + h.c.)

    The two-mode resonance makes this time independent, so evolving under
    it is exact (no rotating-wave step beyond the resonance choice).
    """
    d1, d2 = cfg.mode1.dim, cfg.mode2.dim
    if profile.theta1.size != d1 or profile.theta2.size != d2:
        raise ShapeError("profile tables do not match the configured cutoffs")
    id1, id2, id_atom = np.eye(d1), np.eye(d2), np.eye(3)
    sigma31 = np.zeros((3, 3))
    sigma31[2, 0] = 1.0
    sigma32 = np.zeros((3, 3))
    sigma32[2, 1] = 1.0
    p3 = np.zeros((3, 3))
    p3[2, 2] = 1.0

    c1 = _lowering_with_profile(profile.theta1)
    c2 = _lowering_with_profile(profile.theta2)

    h = cfg.delta * np.kron(np.kron(id1, id2), p3)
    h = h + np.kron(np.kron(np.diag(profile.f1), id2), id_atom)
    h = h + np.kron(np.kron(id1, np.diag(profile.f2)), id_atom)
    leg1 = cfg.g1 * np.kron(np.kron(c1, id2), sigma31)
    leg2 = cfg.g2 * np.kron(np.kron(id1, c2), sigma32)
    h = h + leg1 + leg1.conj().T + leg2 + leg2.conj().T
    return Operator(h.astype(np.complex128), hermitian_hint=True)


def effective_compact_config(cfg: OpticsEngineConfig) -> CompactEngineConfig:
    """The two-level reduction is the ladder-exchange engine on {|1>, |2>}."""
    return CompactEngineConfig(
        beta1=cfg.mode1.beta,
        beta2=cfg.mode2.beta,
        omega1=cfg.mode1.omega,
        omega2=cfg.mode2.omega,
        g=cfg.g,
        n_max1=cfg.mode1.n_max,
        n_max2=cfg.mode2.n_max,
        a0=-cfg.omega0 / 2.0,
        a1=cfg.omega0 / 2.0,
    )


def build_effective_hamiltonian(cfg: OpticsEngineConfig) -> Operator:
    """Uniform-strength exchange coupling |n, m, 1> <-> |n-1, m+1, 2>."""
    return build_interaction_hamiltonian(effective_compact_config(cfg))


def run_optics_cycle(
    cfg: OpticsEngineConfig, times: Sequence[float] | None = None
) -> CycleReport:
    """One cycle from gibbs x gibbs x |1><1| under the effective Hamiltonian."""
    report = evolve_cycle(effective_compact_config(cfg), times)
    return dataclasses.replace(report, engine="optics-cycle")


@dataclass(frozen=True)
class WorkRecord:
    """Extractable-work bookkeeping for the resonant emission mode."""

    omega0: float
    success_population: float
    work_per_success: float
    expected_work: float
    eta: float
    power: float


def stimulated_emission_bookkeeping(report: CycleReport) -> WorkRecord:
    """Work released as one photon at omega0 per successful excitation."""
    p2 = float(report.final_system_populations[1])
    return WorkRecord(
        omega0=report.w_ext,
        success_population=p2,
        work_per_success=report.w_ext,
        expected_work=p2 * report.w_ext,
        eta=1.0 - report.beta1 / report.beta2,
        power=2.0 * report.g * report.w_ext / math.pi,
    )


@dataclass(frozen=True)
class SweepPoint:
    """Full-vs-effective comparison at one detuning value."""

    delta: float
    ratio: float  # Delta / max(g1, g2)
    population_deviation: float
    leak_max: float


def _atom_populations(amps: np.ndarray, d1: int, d2: int, d_atom: int) -> np.ndarray:
    probs = np.abs(amps.reshape(amps.shape[0], d1, d2, d_atom)) ** 2
    return probs.sum(axis=(1, 2))


def _population_traces(
    h: Operator, psi0, times: np.ndarray, d1: int, d2: int, d_atom: int,
    chunk: int = 16384,
) -> np.ndarray:
    prop = SpectralPropagator(h)
    out = np.empty((times.size, d_atom))
    for lo in range(0, times.size, chunk):
        hi = min(lo + chunk, times.size)
        amps = prop.states(psi0, times[lo:hi])
        out[lo:hi] = _atom_populations(amps, d1, d2, d_atom)
    return out


def adiabatic_elimination_error(
    cfg: OpticsEngineConfig,
    profile: CouplingProfile,
    delta_sweep: Sequence[float],
    initial_block: tuple[int, int] = (3, 1),
    samples_per_period: float = 8.0,
    max_samples: int = 200_000,
) -> list[SweepPoint]:
    """Compare full and effective evolutions over one cycle per detuning.

    The couplings g1, g2 and the theta tables are held fixed while the
    upper level is moved; the f tables are rescaled to the per-detuning
    rule.  The initial state |n0, m0, 1> is evolved under both models
    over [0, pi/(2g)] and the worst population mismatch on the |1>, |2>
    levels plus the worst transient |3> occupation are recorded.

    The probe sector matters.  The f-table rule cancels the second-order
    level shifts of the eliminated upper state only up to a one-step
    index offset, leaving a residual two-photon detuning of relative
    size [1/((m+1)(m+2)) - 1/(n(n+1))]/2 on sector (n, m).  Sectors with
    n = m + 1 cancel it exactly and show pure second-order deviation in
    1/Delta; generic sectors such as the default (3, 1) keep the
    residual, and over moderate detuning ratios their deviation decays
    roughly first order before flooring at the residual's square.
    """
    n0, m0 = initial_block
    if not (0 <= n0 <= cfg.mode1.n_max and 0 <= m0 <= cfg.mode2.n_max):
        raise ValueError(f"initial block {initial_block} outside the cutoffs")
    points = []
    g_top = max(cfg.g1, cfg.g2)
    for delta in delta_sweep:
        ratio = delta / g_top if g_top > 0 else math.inf
        if ratio < 5.0:
            raise ValueError(
                f"detuning {delta} gives ratio {ratio:.2f} < 5; elimination invalid"
            )
        cfg_d = OpticsEngineConfig(
            mode1=cfg.mode1,
            mode2=cfg.mode2,
            atom=LambdaAtom(e2=cfg.atom.e2, e3=delta + cfg.mode1.omega),
            g1=cfg.g1,
            g2=cfg.g2,
            min_detuning_ratio=min(cfg.min_detuning_ratio, 5.0),
        )
        profile_d = coupling_profile_from_tables(cfg_d, profile.theta1, profile.theta2)
        # with no coupling both models are static; any window shows deviation 0
        window = cfg_d.tau if math.isfinite(cfg_d.tau) else 1.0
        fast_rate = delta + 4.0 * g_top
        n_samples = int(min(
            max_samples,
            max(2001, math.ceil(samples_per_period * window * fast_rate / (2.0 * math.pi))),
        ))
        times = np.linspace(0.0, window, n_samples)

        d1, d2 = cfg.mode1.dim, cfg.mode2.dim
        full_index = (n0 * d2 + m0) * 3 + 0
        pops_full = _population_traces(
            build_full_hamiltonian(cfg_d, profile_d),
            basis_state(d1 * d2 * 3, full_index),
            times, d1, d2, 3,
        )
        eff_index = (n0 * d2 + m0) * 2 + 0
        pops_eff = _population_traces(
            build_effective_hamiltonian(cfg_d),
            basis_state(d1 * d2 * 2, eff_index),
            times, d1, d2, 2,
        )
        deviation = float(np.max(np.abs(pops_full[:, :2] - pops_eff)))
        leak = float(np.max(pops_full[:, 2]))
        points.append(SweepPoint(delta=delta, ratio=ratio,
                                 population_deviation=deviation, leak_max=leak))
    return points


def sweep_slopes(points: Sequence[SweepPoint]) -> tuple[float, float]:
    """Log-log slopes of (population deviation, leak) against the detuning."""
    if len(points) < 2:
        raise ValueError("need at least two sweep points to fit a slope")
    x = np.log([p.delta for p in points])
    dev = np.polyfit(x, np.log([p.population_deviation for p in points]), 1)[0]
    leak = np.polyfit(x, np.log([p.leak_max for p in points]), 1)[0]
    return float(dev), float(leak)
