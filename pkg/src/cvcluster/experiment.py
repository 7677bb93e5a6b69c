"""Batch experiment orchestration: program trials, the mini-cluster
post-selection protocol, and tomography-style summaries.

All sampling flows from a master seed through per-trial substreams, so
any trial can be replayed exactly from its index, and any recorded
outcome set can be replayed in pinned mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .distortion import NoiseBudget, apply_input_noise, apply_qnd_noise
from .exceptions import ConfigError, InvalidOperationError
from .gaussian import (
    GaussianState,
    apply_affine,
    coherent,
    fidelity,
    homodyne,
    squeezed_vacuum_p,
    vacuum,
    wigner,
)
from .mbqc import (
    ByproductFrame,
    GateProgram,
    compile_program,
    intended_affine,
    prepare_cluster_state,
    resolve_frame,
    run_schedule,
)
from .symplectic import SymplecticAffine, controlled_phase, fourier

DEFAULT_WIGNER_RANGE = 5.0
DEFAULT_WIGNER_POINTS = 101
TOMOGRAPHY_STATE_CAP = 500


@dataclass
class ExperimentConfig:
    """Everything a batch run needs, with the seed always recorded."""

    program: GateProgram | None = None
    omega: float = 0.1
    omega_overrides: dict[int, float] | None = None
    budget: NoiseBudget = field(default_factory=NoiseBudget)
    trials: int = 1
    seed: int = 0
    window: float = 0.5
    chain_nodes: int = 5
    input_mean: tuple[float, float] | None = None
    pins: dict[int, float] = field(default_factory=dict)
    accept: Callable[[dict[int, float]], bool] | None = None
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.window >= 0:
            raise ConfigError("post-selection window must be >= 0")
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ConfigError("omega must be positive and finite")
        if self.chain_nodes < 4:
            raise ConfigError("the chain experiment needs at least 4 nodes")


@dataclass
class TrialRecord:
    """One trial's outcomes and, when it produced output, its summary."""

    index: int
    outcomes: dict[int, float]
    accepted: bool
    mean: list[float] | None
    cov: list[list[float]] | None
    fidelity: float | None


def trial_rng(seed: int, trial: int, arm: int = 0) -> np.random.Generator:
    """Independent substream for one trial of one experiment arm."""
    return np.random.default_rng([seed, trial, arm])


def _input_state(config: ExperimentConfig, n_modes: int) -> GaussianState:
    if config.input_mean is None:
        source = vacuum(n_modes)
    else:
        if n_modes != 1:
            raise ConfigError("a coherent input mean needs a single-wire program")
        source = coherent(*config.input_mean)
    return apply_input_noise(source, config.budget)


def run_program(config: ExperimentConfig) -> list[TrialRecord]:
    """Compile and execute the configured program for every trial.

    Each record holds the sampled (or pinned) outcomes and the
    frame-resolved output compared against the program's intended
    action on the input.
    """
    if config.program is None:
        raise ConfigError("run_program needs a program in the config")
    compiled = compile_program(config.program, config.omega, config.omega_overrides)
    target_map = intended_affine(config.program)
    records = []
    for trial in range(config.trials):
        rng = trial_rng(config.seed, trial)
        source = _input_state(config, config.program.n_modes)
        prepared = prepare_cluster_state(compiled, source)
        if not config.budget.is_zero:
            for a, b, _ in compiled.graph.edges:
                prepared = apply_qnd_noise(
                    prepared,
                    1,
                    config.budget,
                    rng,
                    [compiled.graph.mode_index(a), compiled.graph.mode_index(b)],
                )
        result = run_schedule(
            prepared, compiled, rng=rng, pins=config.pins or None
        )
        resolved = resolve_frame(result.state, result.frame)
        value = fidelity(resolved, apply_affine(source, target_map))
        records.append(
            TrialRecord(
                index=trial,
                outcomes=dict(result.outcomes),
                accepted=True,
                mean=resolved.mean.tolist(),
                cov=resolved.cov.tolist(),
                fidelity=float(value),
            )
        )
    return records


def replay_trial(config: ExperimentConfig, record: TrialRecord) -> TrialRecord:
    """Re-run one trial with every outcome pinned from its record."""
    if config.program is None:
        raise ConfigError("replay needs a program in the config")
    single = ExperimentConfig(
        program=config.program,
        omega=config.omega,
        omega_overrides=config.omega_overrides,
        budget=config.budget,
        trials=1,
        seed=config.seed,
        window=config.window,
        chain_nodes=config.chain_nodes,
        input_mean=config.input_mean,
        pins=dict(record.outcomes),
    )
    replayed = run_program(single)[0]
    return TrialRecord(
        index=record.index,
        outcomes=replayed.outcomes,
        accepted=replayed.accepted,
        mean=replayed.mean,
        cov=replayed.cov,
        fidelity=replayed.fidelity,
    )


@dataclass(frozen=True)
class StrategySummary:
    mean_fidelity: float
    stderr: float
    trials: int


@dataclass
class PostSelectionSummary:
    """Comparison of the straight-through and mini-cluster strategies."""

    baseline: StrategySummary
    selected: StrategySummary
    acceptance_rate: float
    accepted_trials: int
    no_accepts: bool
    window: float
    omega: float
    trials: int
    seed: int
    acceptance_curve: list[tuple[float, float]]
    baseline_records: list[TrialRecord]
    mini_records: list[TrialRecord]


def _summarize(values: list[float]) -> StrategySummary:
    if not values:
        return StrategySummary(math.nan, math.nan, 0)
    array = np.asarray(values)
    stderr = float(array.std(ddof=1) / np.sqrt(array.size)) if array.size > 1 else 0.0
    return StrategySummary(float(array.mean()), stderr, array.size)


def _measure_momentum(state, mode_of, node, rng):
    result = homodyne(state, mode_of[node], math.pi / 2.0, rng=rng)
    mode_of.pop(node)
    updated = {n: result.relabel[i] for n, i in mode_of.items()}
    return result.outcome, result.state, updated


def _chain_frame(outcomes: dict[int, float], node_order: list[int]) -> ByproductFrame:
    """Byproduct frame of a teleport chain, composed in wire order."""
    physical = SymplecticAffine.identity(1)
    intended = SymplecticAffine.identity(1)
    for node in node_order:
        step = SymplecticAffine(fourier().matrix, np.array([outcomes[node], 0.0]))
        physical = step.compose(physical)
        intended = fourier().compose(intended)
    return ByproductFrame(physical.compose(intended.inverse()))


def _chain_target(input_state: GaussianState, steps: int) -> GaussianState:
    intended = SymplecticAffine.identity(1)
    for _ in range(steps):
        intended = fourier().compose(intended)
    return apply_affine(input_state, intended)


def _linked(state, mode_a, mode_b, budget, rng):
    state = apply_affine(state, controlled_phase(1.0), [mode_a, mode_b])
    if not budget.is_zero:
        state = apply_qnd_noise(state, 1, budget, rng, [mode_a, mode_b])
    return state


def run_postselection_experiment(config: ExperimentConfig) -> PostSelectionSummary:
    """The five-node comparison: measure straight down the full chain,
    versus pre-measuring the detached mini-cluster, keeping only small
    outcomes, and attaching the input afterwards.

    Both strategies teleport the node-1 input to the final node through
    the same number of steps; post-selection changes only which trials
    survive.  Rejected trials are counted, not retried.
    """
    n = config.chain_nodes
    node_ids = list(range(1, n + 1))
    inner = node_ids[2:-1]  # pre-measured mini-cluster nodes

    def default_accept(outcomes: dict[int, float]) -> bool:
        return all(abs(outcomes[node]) <= config.window for node in inner)

    accept = config.accept or default_accept

    baseline_records: list[TrialRecord] = []
    mini_records: list[TrialRecord] = []
    baseline_fidelities: list[float] = []
    selected_fidelities: list[float] = []
    inner_magnitudes = np.zeros(config.trials)

    for trial in range(config.trials):
        # strategy A: full chain, measure every node before the output
        rng = trial_rng(config.seed, trial, arm=0)
        source = _input_state(config, 1)
        state = source
        for _ in node_ids[1:]:
            state = state.tensor(squeezed_vacuum_p(config.omega))
        mode_of = {node: i for i, node in enumerate(node_ids)}
        for a, b in zip(node_ids, node_ids[1:]):
            state = _linked(state, mode_of[a], mode_of[b], config.budget, rng)
        outcomes: dict[int, float] = {}
        for node in node_ids[:-1]:
            outcomes[node], state, mode_of = _measure_momentum(
                state, mode_of, node, rng
            )
        frame = _chain_frame(outcomes, node_ids[:-1])
        resolved = resolve_frame(state, frame)
        value = float(fidelity(resolved, _chain_target(source, n - 1)))
        baseline_fidelities.append(value)
        baseline_records.append(
            TrialRecord(
                trial, outcomes, True, resolved.mean.tolist(), resolved.cov.tolist(), value
            )
        )

        # strategy B: detached mini-cluster, pre-measure, select, attach
        rng = trial_rng(config.seed, trial, arm=1)
        source = _input_state(config, 1)
        mini_nodes = node_ids[1:]
        state = squeezed_vacuum_p(config.omega)
        for _ in mini_nodes[1:]:
            state = state.tensor(squeezed_vacuum_p(config.omega))
        mode_of = {node: i for i, node in enumerate(mini_nodes)}
        for a, b in zip(mini_nodes, mini_nodes[1:]):
            state = _linked(state, mode_of[a], mode_of[b], config.budget, rng)
        outcomes = {}
        for node in inner:
            outcomes[node], state, mode_of = _measure_momentum(
                state, mode_of, node, rng
            )
        inner_magnitudes[trial] = max(abs(outcomes[node]) for node in inner)
        if not accept(outcomes):
            mini_records.append(TrialRecord(trial, outcomes, False, None, None, None))
            continue
        state = source.tensor(state)
        mode_of = {node: idx + 1 for node, idx in mode_of.items()}
        mode_of[node_ids[0]] = 0
        state = _linked(
            state, mode_of[node_ids[0]], mode_of[node_ids[1]], config.budget, rng
        )
        for node in node_ids[:2]:
            outcomes[node], state, mode_of = _measure_momentum(
                state, mode_of, node, rng
            )
        frame = _chain_frame(outcomes, node_ids[:-1])
        resolved = resolve_frame(state, frame)
        value = float(fidelity(resolved, _chain_target(source, n - 1)))
        selected_fidelities.append(value)
        mini_records.append(
            TrialRecord(
                trial, outcomes, True, resolved.mean.tolist(), resolved.cov.tolist(), value
            )
        )

    curve_grid = np.linspace(0.05, 5.0, 25)
    curve = [
        (float(w), float(np.mean(inner_magnitudes <= w))) for w in curve_grid
    ]
    if math.isfinite(config.window):
        curve.append((config.window, float(np.mean(inner_magnitudes <= config.window))))
        curve.sort()
    accepted = len(selected_fidelities)
    return PostSelectionSummary(
        baseline=_summarize(baseline_fidelities),
        selected=_summarize(selected_fidelities),
        acceptance_rate=accepted / config.trials,
        accepted_trials=accepted,
        no_accepts=accepted == 0,
        window=config.window,
        omega=config.omega,
        trials=config.trials,
        seed=config.seed,
        acceptance_curve=curve,
        baseline_records=baseline_records,
        mini_records=mini_records,
    )


@dataclass
class TomographySummary:
    """Sample statistics of an ensemble of single-mode outputs."""

    mean: np.ndarray
    cov_of_means: np.ndarray
    q_values: np.ndarray
    p_values: np.ndarray
    wigner: np.ndarray


def tomography_summary(
    states: list[GaussianState],
    grid_range: float = DEFAULT_WIGNER_RANGE,
    grid_points: int = DEFAULT_WIGNER_POINTS,
) -> TomographySummary:
    """Empirical moments of trial outputs plus their averaged
    phase-space density."""
    if len(states) < 2:
        raise InvalidOperationError("tomography needs at least two states")
    if any(state.n_modes != 1 for state in states):
        raise InvalidOperationError("tomography expects single-mode states")
    means = np.stack([state.mean for state in states])
    q_values = np.linspace(-grid_range, grid_range, grid_points)
    p_values = np.linspace(-grid_range, grid_range, grid_points)
    subset = states[:TOMOGRAPHY_STATE_CAP]
    grid = np.zeros((grid_points, grid_points))
    for state in subset:
        grid += wigner(state, q_values, p_values)
    grid /= len(subset)
    return TomographySummary(
        mean=means.mean(axis=0),
        cov_of_means=np.cov(means.T, ddof=1),
        q_values=q_values,
        p_values=p_values,
        wigner=grid,
    )
