"""Cross-validation of the Gaussian engine against the number-basis
oracle.

Every check is deterministic (pinned outcomes, fixed parameters) and
is evaluated twice, once at the default cutoffs and once with doubled
cutoffs, so a pass cannot be an artifact of where the basis was
truncated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import (
    FockState,
    default_cutoff,
    fock_coherent,
    fock_controlled_phase,
    fock_fourier,
    fock_homodyne,
    fock_shear,
    fock_squeezed_vacuum_p,
    fock_tensor,
    moments,
    overlap,
)
from .gaussian import (
    GaussianState,
    apply_affine,
    coherent,
    fidelity,
    homodyne,
    squeezed_vacuum_p,
)
from .mbqc import teleport_step
from .symplectic import controlled_phase, fourier, quadratic_phase

VALIDATION_TOLERANCE = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str


def _moment_deviation(fock_state: FockState, target: GaussianState) -> float:
    mean, cov = moments(fock_state)
    return max(
        float(np.max(np.abs(mean - target.mean))),
        float(np.max(np.abs(cov - target.cov))),
    )


def _check_squeezed_moments(factor: int) -> float:
    worst = 0.0
    for omega in (0.5, 0.8):
        oracle = fock_squeezed_vacuum_p(omega, cutoff=factor * default_cutoff(1))
        worst = max(worst, _moment_deviation(oracle, squeezed_vacuum_p(omega)))
    return worst


def _check_fourier_gate(factor: int) -> float:
    cutoff = factor * default_cutoff(1)
    oracle = fock_fourier(fock_coherent(0.7, -0.4, cutoff=cutoff))
    target = apply_affine(coherent(0.7, -0.4), fourier())
    return _moment_deviation(oracle, target)


def _check_shear_gate(factor: int) -> float:
    cutoff = factor * default_cutoff(1)
    oracle = fock_shear(fock_squeezed_vacuum_p(0.8, cutoff=cutoff), 0, 0.7)
    target = apply_affine(squeezed_vacuum_p(0.8), quadratic_phase(0.7))
    return _moment_deviation(oracle, target)


def _two_mode_linked(factor: int) -> tuple[FockState, GaussianState]:
    # widths below ~0.8 overflow the default two-mode cutoff once linked
    cutoff = factor * default_cutoff(2)
    oracle = fock_tensor(
        fock_squeezed_vacuum_p(0.8, cutoff=cutoff),
        fock_coherent(0.3, 0.2, cutoff=cutoff),
    )
    oracle = fock_controlled_phase(oracle, 0, 1, 1.0)
    target = squeezed_vacuum_p(0.8).tensor(coherent(0.3, 0.2))
    target = apply_affine(target, controlled_phase(1.0), [0, 1])
    return oracle, target


def _check_cross_link(factor: int) -> float:
    oracle, target = _two_mode_linked(factor)
    return _moment_deviation(oracle, target)


def _check_pinned_homodyne(factor: int) -> float:
    oracle, target = _two_mode_linked(factor)
    pin = 0.4
    _, oracle_out = fock_homodyne(oracle, 0, np.pi / 2.0, outcome=pin)
    engine_out = homodyne(target, 0, np.pi / 2.0, outcome=pin).state
    return _moment_deviation(oracle_out, engine_out)


def _check_fidelity(factor: int) -> float:
    cutoff = factor * default_cutoff(1)
    pairs = [
        (
            fock_coherent(0.4, -0.3, cutoff=cutoff),
            fock_coherent(-0.1, 0.5, cutoff=cutoff),
            coherent(0.4, -0.3),
            coherent(-0.1, 0.5),
        ),
        (
            fock_squeezed_vacuum_p(0.5, cutoff=cutoff),
            fock_coherent(0.3, 0.0, cutoff=cutoff),
            squeezed_vacuum_p(0.5),
            coherent(0.3, 0.0),
        ),
    ]
    worst = 0.0
    for oracle_a, oracle_b, state_a, state_b in pairs:
        oracle_value = abs(overlap(oracle_a, oracle_b)) ** 2
        worst = max(worst, abs(oracle_value - fidelity(state_a, state_b)))
    return worst


def _check_teleport_step(factor: int) -> float:
    omega = 0.8
    cutoff = factor * default_cutoff(2)
    source = coherent(0.6, -0.2)
    engine = teleport_step(source, 0, omega, outcome=0.0)
    oracle = fock_tensor(
        fock_coherent(0.6, -0.2, cutoff=cutoff),
        fock_squeezed_vacuum_p(omega, cutoff=cutoff),
    )
    oracle = fock_controlled_phase(oracle, 0, 1, 1.0)
    _, oracle_out = fock_homodyne(oracle, 0, np.pi / 2.0, outcome=0.0)
    return _moment_deviation(oracle_out, engine.state)


_CHECKS = [
    ("squeezed-state moments", _check_squeezed_moments),
    ("quarter-rotation gate", _check_fourier_gate),
    ("shear gate", _check_shear_gate),
    ("cross-wire link", _check_cross_link),
    ("pinned homodyne conditioning", _check_pinned_homodyne),
    ("state fidelity", _check_fidelity),
    ("teleport step", _check_teleport_step),
]


def run_validation_suite(
    tolerance: float = VALIDATION_TOLERANCE, doubling: bool = True
) -> list[CheckResult]:
    """Run every engine-versus-oracle check; with ``doubling`` each must
    also hold with all cutoffs doubled."""
    results = []
    factors = (1, 2) if doubling else (1,)
    for name, check in _CHECKS:
        deviations = [check(factor) for factor in factors]
        worst = max(deviations)
        at_default = deviations[0]
        detail = f"max deviation {worst:.2e} (default cutoff {at_default:.2e})"
        results.append(CheckResult(name, worst <= tolerance, worst, tolerance, detail))
    return results
