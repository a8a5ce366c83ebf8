"""Command-line experiment runner.

Subcommands map one-to-one onto the experiment kinds:

* ``abstract-cycle``  two-ladder engine cycle with all conservation checks
* ``optics-cycle``    cavity-QED effective cycle plus the final-state formula
* ``delta-sweep``     full-vs-effective model comparison over detunings
* ``design``          Monte Carlo fit of cavity intensity profiles
* ``verify-slto``     check an externally supplied unitary against the
                      conservation laws and the thermal fixed point

Every run writes ``report.json`` into the output directory (also on
physics failure, with the failing checks flagged); ``--series`` adds a
CSV time series, ``--json-report`` echoes the report to stdout.  Exit
codes: 0 all checks pass, 1 a physics check failed, 2 bad usage or
config, 3 I/O failure.

Matrix files are plain text: the first line holds the matrix dimension
followed optionally by the tensor-factor dimensions; each following
line is one row of complex entries like ``0.5-0.25j``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .designer import (
    AnnealSchedule,
    DesignTargets,
    PotentialAnsatz,
    design_cost,
    fock_matrix_elements,
    mc_optimize,
)
from .engine import (
    CompactEngineConfig,
    CycleReport,
    evolution_operator,
    evolve_cycle,
)
from .linalg import (
    Operator,
    ShapeError,
    SubsystemLayout,
    commutator_norm,
    identity,
    max_abs,
    tensor_product,
)
from .optics import (
    OpticsEngineConfig,
    adiabatic_elimination_error,
    run_optics_cycle,
    sweep_slopes,
    uniform_exchange_profile,
)
from .thermal import gibbs_density, truncation_for_tail

SCHEMA_VERSION = 1

PASS_THRESHOLDS = {
    "carnot_efficiency": 1e-9,
    "cycle_duration": 1e-10,
    "max_power": 1e-10,
    "clausius": 1e-9,
    "commutator_energy": 1e-10,
    "commutator_weighted": 1e-10,
    "amplitudes": 1e-10,
    "final_state_formula": 1e-6,
    "verify_slto": 1e-9,
}


class ConfigError(ValueError):
    """Bad or inconsistent experiment configuration."""


# ---------------------------------------------------------------------------
# matrix file interchange
# ---------------------------------------------------------------------------

def write_matrix_file(path, entries: np.ndarray, layout: tuple[int, ...] | None = None):
    entries = np.asarray(entries, dtype=np.complex128)
    dim = entries.shape[0]
    header = [str(dim)] + [str(d) for d in (layout or ())]
    lines = [" ".join(header)]
    for row in entries:
        lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_file(path) -> tuple[np.ndarray, tuple[int, ...] | None]:
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ConfigError(f"{path}: empty matrix file")
    header = text[0].split()
    try:
        dims = [int(tok) for tok in header]
    except ValueError as err:
        raise ConfigError(f"{path}: bad header {text[0]!r}") from err
    dim, layout = dims[0], tuple(dims[1:]) or None
    if len(text) != dim + 1:
        raise ConfigError(f"{path}: expected {dim} rows, found {len(text) - 1}")
    rows = []
    for line in text[1:]:
        try:
            rows.append([complex(tok) for tok in line.split()])
        except ValueError as err:
            raise ConfigError(f"{path}: unparsable entry in row {len(rows)}") from err
        if len(rows[-1]) != dim:
            raise ConfigError(f"{path}: row {len(rows) - 1} has {len(rows[-1])} entries")
    if layout is not None and int(np.prod(layout)) != dim:
        raise ConfigError(f"{path}: layout {layout} does not multiply to {dim}")
    return np.array(rows, dtype=np.complex128), layout


# ---------------------------------------------------------------------------
# semi-local thermal operation verifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SltoCheckReport:
    residual_energy: float
    residual_weighted: float
    off_block_max: float
    fixed_point_residual: float
    threshold: float = PASS_THRESHOLDS["verify_slto"]

    @property
    def passed(self) -> bool:
        return (
            self.residual_energy <= self.threshold
            and self.residual_weighted <= self.threshold
            and self.off_block_max <= self.threshold
            and self.fixed_point_residual <= self.threshold
        )


def verify_slto(
    u: Operator,
    h_bath1: Operator,
    h_bath2: Operator,
    h_system: Operator,
    beta1: float,
    beta2: float,
    w_system: Operator | None = None,
) -> SltoCheckReport:
    """Check the defining properties of a semi-local thermal operation.

    The factor Hamiltonians are embedded into the (bath1, bath2, system)
    product space of the unitary.  Residuals reported: commutator with
    the total energy, commutator with the weighted energy beta1 H_B1 +
    beta2 H_B2 (+ an optional weighted system term), the worst unitary
    matrix element connecting different total-energy eigenspaces, and
    the invariance defect of the semi-Gibbs product state
    gibbs(beta1) x gibbs(beta2) x exp(-W_S)/Z.
    """
    d1, d2, ds = h_bath1.dim, h_bath2.dim, h_system.dim
    if d1 * d2 * ds != u.dim:
        raise ShapeError(
            f"factors {(d1, d2, ds)} do not multiply to the unitary dim {u.dim}"
        )
    big1 = tensor_product(tensor_product(h_bath1, identity(d2)), identity(ds))
    big2 = tensor_product(tensor_product(identity(d1), h_bath2), identity(ds))
    bigs = tensor_product(tensor_product(identity(d1), identity(d2)), h_system)
    h_total = Operator(big1.entries + big2.entries + bigs.entries, hermitian_hint=True)
    weighted = beta1 * big1.entries + beta2 * big2.entries
    sigma_s = None
    if w_system is not None:
        bigw = tensor_product(tensor_product(identity(d1), identity(d2)), w_system)
        weighted = weighted + bigw.entries
        sigma_s = gibbs_density(w_system, 1.0)
    h_weighted = Operator(weighted, hermitian_hint=True)

    residual_energy = commutator_norm(u, h_total)
    residual_weighted = commutator_norm(u, h_weighted)

    # off-block mass of U between different total-energy eigenspaces
    eigvals, eigvecs = np.linalg.eigh(h_total.entries)
    m = eigvecs.conj().T @ u.entries @ eigvecs
    different = np.abs(eigvals[:, None] - eigvals[None, :]) > 1e-8
    off_block = max_abs(m[different]) if different.any() else 0.0

    if sigma_s is None:
        sigma_s_entries = np.eye(ds, dtype=np.complex128) / ds
    else:
        sigma_s_entries = sigma_s.entries
    gamma = np.kron(
        np.kron(gibbs_density(h_bath1, beta1).entries, gibbs_density(h_bath2, beta2).entries),
        sigma_s_entries,
    )
    moved = u.entries @ gamma @ u.entries.conj().T
    fixed_point = max_abs(moved - gamma)

    return SltoCheckReport(
        residual_energy=residual_energy,
        residual_weighted=residual_weighted,
        off_block_max=off_block,
        fixed_point_residual=fixed_point,
    )


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunArtifact:
    kind: str
    report_path: str
    series_path: str | None
    config: dict
    tool_version: str
    wall_clock_seconds: float
    all_checks_passed: bool


def _check(value: float, threshold: float) -> dict:
    return {"value": float(value), "threshold": threshold, "passed": bool(value <= threshold)}


def _cycle_results(report: CycleReport) -> dict:
    return {
        "w_ext": report.w_ext,
        "q1": report.q1,
        "q2": report.q2,
        "q1_ensemble": report.q1_ensemble,
        "q2_ensemble": report.q2_ensemble,
        "eta": report.eta,
        "eta_carnot": 1.0 - report.beta1 / report.beta2,
        "tau": report.tau,
        "power": report.power,
        "clausius_residual": report.clausius_residual,
        "commutator_residual_energy": report.commutator_residual_energy,
        "commutator_residual_weighted": report.commutator_residual_weighted,
        "amplitude_residual": report.amplitude_residual,
        "success_weight": report.success_weight,
        "vacuum_weight": report.vacuum_weight,
        "boundary_weight": report.boundary_weight,
        "partition_function1": report.partition_function1,
        "partition_function2": report.partition_function2,
        "final_system_populations": [float(p) for p in report.final_system_populations],
        "entanglement_max": float(np.max(report.entanglement_trace[:, 1])),
        "speed_mean": float(np.mean(report.speed_trace[:, 1])),
    }


def _cycle_checks(report: CycleReport) -> dict:
    carnot = 1.0 - report.beta1 / report.beta2
    return {
        "carnot_efficiency": _check(abs(report.eta - carnot), PASS_THRESHOLDS["carnot_efficiency"]),
        "cycle_duration": _check(
            abs(report.tau - math.pi / (2 * report.g)), PASS_THRESHOLDS["cycle_duration"]
        ),
        "max_power": _check(
            abs(report.power - 2 * report.g * report.w_ext / math.pi),
            PASS_THRESHOLDS["max_power"],
        ),
        "clausius": _check(report.clausius_residual, PASS_THRESHOLDS["clausius"]),
        "commutator_energy": _check(
            report.commutator_residual_energy, PASS_THRESHOLDS["commutator_energy"]
        ),
        "commutator_weighted": _check(
            report.commutator_residual_weighted, PASS_THRESHOLDS["commutator_weighted"]
        ),
        "amplitudes": _check(report.amplitude_residual, PASS_THRESHOLDS["amplitudes"]),
    }


def _cycle_series(report: CycleReport) -> list[list]:
    rows = []
    pops = report.population_trace
    pop3 = np.zeros(len(report.times))
    for k, t in enumerate(report.times):
        rows.append([
            t, pops[k, 0], pops[k, 1], pop3[k],
            report.entanglement_trace[k, 1],
            report.bath1_energy_trace[k], report.bath2_energy_trace[k],
            report.residual_energy_trace[k], report.residual_weighted_trace[k],
        ])
    return rows


SERIES_HEADER = "t,pop1,pop2,pop3,S_ent,E_B1,E_B2,resid_energy,resid_weighted"


def run_abstract_cycle(params: dict, out_dir: Path) -> tuple[dict, dict, list | None]:
    beta1, beta2 = params["beta1"], params["beta2"]
    omega1 = params["omega1"]
    omega2 = params.get("omega2")
    if omega2 is None:
        omega2 = beta1 * omega1 / beta2
    if beta1 >= beta2:
        raise ConfigError("abstract-cycle needs beta1 < beta2")
    tail_delta = params.get("tail_delta", 1e-6)
    n_max1 = params.get("n_max1")
    if n_max1 is None:
        n_max1 = truncation_for_tail(omega1, beta1, tail_delta).n_max_used
    n_max2 = params.get("n_max2")
    if n_max2 is None:
        n_max2 = truncation_for_tail(omega2, beta2, tail_delta).n_max_used
    cfg = CompactEngineConfig(
        beta1=beta1, beta2=beta2, omega1=omega1, omega2=omega2,
        g=params["g"], n_max1=n_max1, n_max2=n_max2, a0=params.get("a0", 0.0),
    )
    report = evolve_cycle(cfg)
    if params.get("export_matrices"):
        target = Path(params["export_matrices"])
        target.mkdir(parents=True, exist_ok=True)
        layout = (cfg.n_max1 + 1, cfg.n_max2 + 1, 2)
        write_matrix_file(target / "u_tau.txt", evolution_operator(cfg, cfg.tau).entries, layout)
        write_matrix_file(target / "h_bath1.txt", np.diag(omega1 * np.arange(cfg.n_max1 + 1)).astype(complex))
        write_matrix_file(target / "h_bath2.txt", np.diag(omega2 * np.arange(cfg.n_max2 + 1)).astype(complex))
        write_matrix_file(target / "h_system.txt", np.diag([cfg.a0, cfg.a1]).astype(complex))
    results = _cycle_results(report)
    results["config_used"] = {
        "beta1": beta1, "beta2": beta2, "omega1": omega1, "omega2": omega2,
        "g": cfg.g, "n_max1": n_max1, "n_max2": n_max2, "a0": cfg.a0, "a1": cfg.a1,
    }
    return results, _cycle_checks(report), _cycle_series(report)


def run_optics_cycle_cmd(params: dict, out_dir: Path) -> tuple[dict, dict, list | None]:
    if params["beta1"] >= params["beta2"]:
        raise ConfigError("optics-cycle needs beta1 < beta2")
    cfg = OpticsEngineConfig.resonant(
        beta1=params["beta1"],
        beta2=params["beta2"],
        omega1=params["omega1"],
        g1=params.get("g1", 2.0),
        g2=params.get("g2", 2.0),
        detuning=params.get("detuning", 80.0),
        n_max1=params.get("n_max1"),
        n_max2=params.get("n_max2"),
        tail_delta=params.get("tail_delta", 1e-6),
        min_detuning_ratio=params.get("min_ratio", 20.0),
    )
    report = run_optics_cycle(cfg)
    results = _cycle_results(report)
    results["omega0"] = cfg.omega0
    results["delta"] = cfg.delta
    results["g"] = cfg.g
    corrected = report.corrected_final_populations
    expected = np.array([
        1.0 / report.partition_function1,
        1.0 - 1.0 / report.partition_function1,
    ])
    results["corrected_final_populations"] = [float(p) for p in corrected]
    results["final_state_expected"] = [float(p) for p in expected]
    checks = _cycle_checks(report)
    checks["final_state_formula"] = _check(
        float(np.max(np.abs(corrected - expected))), PASS_THRESHOLDS["final_state_formula"]
    )
    results["config_used"] = {
        "beta1": cfg.mode1.beta, "beta2": cfg.mode2.beta,
        "omega1": cfg.mode1.omega, "omega2": cfg.mode2.omega,
        "omega0": cfg.omega0, "g1": cfg.g1, "g2": cfg.g2,
        "delta": cfg.delta, "n_max1": cfg.mode1.n_max, "n_max2": cfg.mode2.n_max,
    }
    return results, checks, _cycle_series(report)


def run_delta_sweep(params: dict, out_dir: Path) -> tuple[dict, dict, list | None]:
    ratios = params.get("ratios") or [20.0, 40.0, 80.0, 160.0]
    g1 = params.get("g1", 0.5)
    g2 = params.get("g2", 0.5)
    cfg = OpticsEngineConfig.resonant(
        beta1=params.get("beta1", 0.5),
        beta2=params.get("beta2", 1.0),
        omega1=params.get("omega1", 2.0),
        g1=g1,
        g2=g2,
        detuning=min(ratios) * max(g1, g2),
        n_max1=params.get("n_max1", 4),
        n_max2=params.get("n_max2", 4),
        min_detuning_ratio=5.0,
    )
    block = tuple(params.get("block", (3, 1)))
    deltas = [r * max(g1, g2) for r in ratios]
    points = adiabatic_elimination_error(
        cfg, uniform_exchange_profile(cfg), deltas, initial_block=block
    )
    dev_slope, leak_slope = sweep_slopes(points)
    devs = [p.population_deviation for p in points]
    monotone = all(devs[i] > devs[i + 1] for i in range(len(devs) - 1))
    results = {
        "points": [dataclasses.asdict(p) for p in points],
        "deviation_slope": dev_slope,
        "leak_slope": leak_slope,
        "monotone_decreasing": monotone,
        "initial_block": list(block),
        "config_used": {"g1": g1, "g2": g2, "ratios": list(ratios)},
    }
    checks = {
        "deviation_monotone": {"value": float(not monotone), "threshold": 0.5,
                               "passed": monotone},
        "deviation_slope_band": {"value": dev_slope, "threshold": [-1.4, -0.6],
                                 "passed": -1.4 <= dev_slope <= -0.6},
        "leak_slope_band": {"value": leak_slope, "threshold": [-2.5, -1.5],
                            "passed": -2.5 <= leak_slope <= -1.5},
    }
    series = [[p.delta, p.ratio, p.population_deviation, p.leak_max] for p in points]
    return results, checks, series


def run_design(params: dict, out_dir: Path) -> tuple[dict, dict, list | None]:
    n_fit = params.get("n_fit", 6)
    q = params.get("q", 4.0)
    if params.get("design_in"):
        spec = json.loads(Path(params["design_in"]).read_text())
        _validate_keys(
            spec, {"ansatz", "targets", "schedule", "result", "schema_version"},
            "design file",
        )
        ansatz0 = PotentialAnsatz(
            np.array(spec["ansatz"]["v_coeffs"]), np.array(spec["ansatz"]["b_coeffs"])
        )
        targets = DesignTargets(
            np.array(spec["targets"]["f"]), np.array(spec["targets"]["theta"]),
            q=spec["targets"].get("q", q), n_work=spec["targets"].get("n_work", 0),
        )
        sched_in = spec.get("schedule", {})
    else:
        amplitude = params.get("amplitude", 0.0125)
        targets = DesignTargets.inverse_intensity(amplitude, n_fit, q=q)
        ansatz0 = PotentialAnsatz.zeros()
        sched_in = {}
    schedule = AnnealSchedule(
        iterations=int(params.get("iterations", sched_in.get("iterations", 20000))),
        proposal_scale=float(params.get("proposal_scale", sched_in.get("proposal_scale", 0.2))),
        mc_temperature=float(params.get("temperature", sched_in.get("mc_temperature", 0.0))),
        seed=int(params.get("seed", sched_in.get("seed", 0))),
    )
    best, trace = mc_optimize(ansatz0, targets, schedule)
    best_cost = design_cost(best, targets)
    f_act, theta_act = fock_matrix_elements(best, targets.n_work)
    results = {
        "initial_cost": float(trace[0]),
        "best_cost": float(best_cost),
        "iterations": schedule.iterations,
        "seed": schedule.seed,
        "v_coeffs": [float(c) for c in best.v_coeffs],
        "b_coeffs": [float(c) for c in best.b_coeffs],
        "f_achieved": [float(v) for v in f_act[1 : n_fit + 1]],
        "theta_achieved": [float(v) for v in theta_act[1 : n_fit + 1]],
        "f_target": [float(v) for v in targets.f_target],
        "theta_target": [float(v) for v in targets.theta_target],
    }
    running_min = np.minimum.accumulate(trace)
    checks = {
        "trace_running_min_nonincreasing": {
            "value": float(np.max(np.diff(running_min))), "threshold": 0.0,
            "passed": bool(np.all(np.diff(running_min) <= 0.0)),
        },
        "cost_not_increased": {
            "value": float(best_cost - trace[0]), "threshold": 0.0,
            "passed": bool(best_cost <= trace[0]),
        },
    }
    design_out = {
        "schema_version": SCHEMA_VERSION,
        "ansatz": {
            "v_degrees": [int(d) for d in best.v_degrees],
            "v_coeffs": results["v_coeffs"],
            "b_degrees": [int(d) for d in best.b_degrees],
            "b_coeffs": results["b_coeffs"],
        },
        "targets": {
            "f": results["f_target"], "theta": results["theta_target"],
            "q": targets.q, "n_work": targets.n_work,
        },
        "schedule": dataclasses.asdict(schedule),
        "result": {
            "initial_cost": results["initial_cost"], "best_cost": results["best_cost"],
            "f_achieved": results["f_achieved"], "theta_achieved": results["theta_achieved"],
        },
    }
    out_path = Path(params.get("design_out") or out_dir / "design.json")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(design_out, indent=2, sort_keys=True) + "\n")
    results["design_path"] = str(out_path)
    series = [[i, float(c)] for i, c in enumerate(trace)]
    return results, checks, series


def run_verify_slto(params: dict, out_dir: Path) -> tuple[dict, dict, list | None]:
    u_entries, layout = read_matrix_file(params["unitary"])
    h1, _ = read_matrix_file(params["bath1"])
    h2, _ = read_matrix_file(params["bath2"])
    hs, _ = read_matrix_file(params["system"])
    if layout is not None:
        SubsystemLayout(layout).check(u_entries.shape[0])
        if (h1.shape[0], h2.shape[0], hs.shape[0]) != tuple(layout):
            raise ConfigError(
                f"factor files {(h1.shape[0], h2.shape[0], hs.shape[0])} disagree "
                f"with the unitary layout {layout}"
            )
    w_system = None
    if params.get("weighted_system"):
        ws, _ = read_matrix_file(params["weighted_system"])
        w_system = Operator(ws, hermitian_hint=True)
    check = verify_slto(
        Operator(u_entries),
        Operator(h1, hermitian_hint=True),
        Operator(h2, hermitian_hint=True),
        Operator(hs, hermitian_hint=True),
        params["beta1"],
        params["beta2"],
        w_system=w_system,
    )
    results = dataclasses.asdict(check)
    results["passed"] = check.passed
    checks = {
        "commutator_energy": _check(check.residual_energy, check.threshold),
        "commutator_weighted": _check(check.residual_weighted, check.threshold),
        "block_diagonality": _check(check.off_block_max, check.threshold),
        "semi_gibbs_fixed_point": _check(check.fixed_point_residual, check.threshold),
    }
    return results, checks, None


RUNNERS = {
    "abstract-cycle": run_abstract_cycle,
    "optics-cycle": run_optics_cycle_cmd,
    "delta-sweep": run_delta_sweep,
    "design": run_design,
    "verify-slto": run_verify_slto,
}

KNOWN_KEYS = {
    "abstract-cycle": {
        "beta1", "beta2", "omega1", "omega2", "g", "n_max1", "n_max2", "a0",
        "tail_delta", "export_matrices",
    },
    "optics-cycle": {
        "beta1", "beta2", "omega1", "g1", "g2", "detuning", "n_max1", "n_max2",
        "tail_delta", "min_ratio",
    },
    "delta-sweep": {
        "beta1", "beta2", "omega1", "g1", "g2", "ratios", "n_max1", "n_max2", "block",
    },
    "design": {
        "iterations", "proposal_scale", "temperature", "seed", "n_fit", "q",
        "amplitude", "design_in", "design_out",
    },
    "verify-slto": {"unitary", "bath1", "bath2", "system", "weighted_system",
                    "beta1", "beta2"},
}


def _validate_keys(mapping: dict, allowed: set, source: str):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: its kind, validated parameters, and output settings."""

    kind: str
    params: dict
    out_dir: str = "out"
    write_series: bool = False

    def __post_init__(self):
        if self.kind not in RUNNERS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        _validate_keys(self.params, KNOWN_KEYS[self.kind], self.kind)


def run(config: ExperimentConfig) -> RunArtifact:
    """Execute one configured experiment and write its artifacts."""
    return run_experiment(config.kind, config.params, config.out_dir,
                          write_series=config.write_series)


def run_experiment(
    kind: str,
    params: dict,
    out_dir,
    write_series: bool = False,
) -> RunArtifact:
    """Execute one experiment and write its report (and optional series)."""
    if kind not in RUNNERS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    _validate_keys(params, KNOWN_KEYS[kind], kind)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    results, checks, series = RUNNERS[kind](params, out_dir)
    wall = time.perf_counter() - started
    all_passed = all(c["passed"] for c in checks.values())
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": "sltosim",
        "tool_version": __version__,
        "kind": kind,
        "config": _jsonable(params),
        "results": _jsonable(results),
        "checks": _jsonable(checks),
        "all_checks_passed": all_passed,
        "wall_clock_seconds": wall,
    }
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    series_path = None
    if write_series and series is not None:
        series_path = out_dir / "series.csv"
        if kind in ("abstract-cycle", "optics-cycle"):
            header = SERIES_HEADER
        elif kind == "delta-sweep":
            header = "delta,ratio,population_deviation,leak_max"
        else:
            header = "iteration,cost"
        with open(series_path, "w") as fh:
            fh.write(header + "\n")
            for row in series:
                fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    return RunArtifact(
        kind=kind,
        report_path=str(report_path),
        series_path=str(series_path) if series_path else None,
        config=params,
        tool_version=__version__,
        wall_clock_seconds=wall,
        all_checks_passed=all_passed,
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with experiment parameters")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="random seed where applicable")
    p.add_argument("--json-report", action="store_true", help="echo the report to stdout")
    p.add_argument("--series", action="store_true", help="also write series.csv")
    p.add_argument("--no-color", action="store_true", help="disable colored check output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sltosim",
        description="One-step quantum heat-engine cycles: simulate and verify.",
    )
    parser.add_argument("--version", action="version", version=f"sltosim {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("abstract-cycle", help="two-ladder engine cycle")
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--omega1", type=float)
    p.add_argument("--omega2", type=float)
    p.add_argument("--g", type=float)
    p.add_argument("--n-max1", type=int, dest="n_max1")
    p.add_argument("--n-max2", type=int, dest="n_max2")
    p.add_argument("--a0", type=float)
    p.add_argument("--tail-delta", type=float, dest="tail_delta")
    p.add_argument("--export-matrices", dest="export_matrices",
                   help="directory for U(tau) and Hamiltonian matrix files")
    _add_common(p)

    p = sub.add_parser("optics-cycle", help="cavity engine effective cycle")
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--omega1", type=float)
    p.add_argument("--g1", type=float)
    p.add_argument("--g2", type=float)
    p.add_argument("--detuning", type=float)
    p.add_argument("--n-max1", type=int, dest="n_max1")
    p.add_argument("--n-max2", type=int, dest="n_max2")
    p.add_argument("--tail-delta", type=float, dest="tail_delta")
    p.add_argument("--min-ratio", type=float, dest="min_ratio")
    _add_common(p)

    p = sub.add_parser("delta-sweep", help="full vs effective model over detunings")
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--omega1", type=float)
    p.add_argument("--g1", type=float)
    p.add_argument("--g2", type=float)
    p.add_argument("--ratios", type=lambda s: [float(x) for x in s.split(",")],
                   help="comma-separated detuning ratios")
    p.add_argument("--n-max1", type=int, dest="n_max1")
    p.add_argument("--n-max2", type=int, dest="n_max2")
    p.add_argument("--block", type=lambda s: [int(x) for x in s.split(",")],
                   help="probe sector n,m")
    _add_common(p)

    p = sub.add_parser("design", help="fit cavity intensity profiles")
    p.add_argument("--iterations", type=int)
    p.add_argument("--proposal-scale", type=float, dest="proposal_scale")
    p.add_argument("--temperature", type=float)
    p.add_argument("--n-fit", type=int, dest="n_fit")
    p.add_argument("--q", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--design-in", dest="design_in")
    p.add_argument("--design-out", dest="design_out")
    _add_common(p)

    p = sub.add_parser("verify-slto", help="verify an external unitary")
    p.add_argument("--unitary", required=True)
    p.add_argument("--bath1", required=True)
    p.add_argument("--bath2", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--weighted-system", dest="weighted_system")
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)
    _add_common(p)

    return parser


_COMMON_KEYS = {"config", "out", "seed", "json_report", "series", "no_color", "kind"}


def _merge_params(args: argparse.Namespace) -> dict:
    params = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {args.config} must hold a JSON object")
        kind = loaded.pop("kind", None)
        if kind is not None and kind != args.kind:
            raise ConfigError(f"config kind {kind!r} does not match subcommand {args.kind!r}")
        _validate_keys(loaded, KNOWN_KEYS[args.kind], args.config)
        params.update(loaded)
    for key, value in vars(args).items():
        if key in _COMMON_KEYS or value is None or value is False:
            continue
        params[key] = value
    if args.seed is not None and "seed" in KNOWN_KEYS[args.kind]:
        params["seed"] = args.seed
    return params


def _use_color(no_color_flag: bool) -> bool:
    return not no_color_flag and not os.environ.get("NO_COLOR") and sys.stdout.isatty()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = _merge_params(args)
        artifact = run_experiment(args.kind, params, args.out, write_series=args.series)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 3

    report = json.loads(Path(artifact.report_path).read_text())
    color = _use_color(args.no_color)
    for name, check in sorted(report["checks"].items()):
        tag = "PASS" if check["passed"] else "FAIL"
        if color:
            tag = f"\033[32m{tag}\033[0m" if check["passed"] else f"\033[31m{tag}\033[0m"
        print(f"[{tag}] {name}: value={check['value']!r} threshold={check['threshold']!r}")
    print(f"report: {artifact.report_path}")
    if artifact.series_path:
        print(f"series: {artifact.series_path}")
    if args.json_report:
        print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if artifact.all_checks_passed else 1


if __name__ == "__main__":
    sys.exit(main())
