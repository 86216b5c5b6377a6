"""Experimental primitives: preparation pulses, qubit rotations, shelving.

Preparation drives the two atoms from the ground state into
alpha |a> + sqrt(1-|alpha|^2) |00> with |a> = (|10> - |01>)/sqrt(2), where a
pulse of length T realizes alpha = -i (W/|W|) sin(|W| T / 2) for effective
drive W (the antisymmetric Rabi combination).  A preparation "failure" is a
photon emission; the simulator reports the no-emission probability P0 and
the conditional state, and pipelines model failures as Bernoulli draws.

Fidelity convention: overlap with the superposition target built from the
realized antisymmetric amplitude, which measures how well the conditional
state keeps the target form; the overlap against the analytically expected
amplitude is reported separately (it collapses in the overdamped corner of
the parameter grids even though the state never leaves the target family).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .core import (
    ConvergenceError,
    HilbertDims,
    OperatorMatrix,
    StateVector,
    atom_transition,
    basis_index,
    evolve_nojump,
    survival_probability,
)
from .models import (
    FourLevelParams,
    RegimeCheck,
    RegimeReport,
    TwoLevelParams,
    antisymmetric_state,
    effective_params,
    ground_state,
    h_cond_four_level,
    h_cond_two_level,
    h_laser_two_level,
    validate_regime,
)
from .rng import substream

__all__ = [
    "PulseSpec",
    "PreparationResult",
    "RotationSpec",
    "ShelvingParams",
    "ShelvingOutcome",
    "ShelvingRunResult",
    "DEFAULT_PROBE_OMEGA",
    "DEFAULT_PROBE_GAMMA",
    "pulse_duration_for_alpha",
    "four_level_pulse_duration",
    "prepare_two_level",
    "prepare_four_level",
    "prepare_fock_converged",
    "qubit_amplitudes",
    "rotation_operator",
    "rotation_pulse_two_level",
    "rotation_pulse_four_level",
    "shelving_measure",
    "shelving_physical_sim",
]

QUBIT_DIMS = HilbertDims(n_max=0, atom_levels=2, n_atoms=1)


@dataclass(frozen=True)
class PulseSpec:
    """Pulse length, given directly or through the target amplitude."""

    duration: float | None = None
    target_alpha: complex | None = None

    def __post_init__(self) -> None:
        if (self.duration is None) == (self.target_alpha is None):
            raise ValueError("give exactly one of duration or target_alpha")
        if self.duration is not None and self.duration < 0:
            raise ValueError("pulse duration must be nonnegative")
        if self.target_alpha is not None and abs(self.target_alpha) > 1 + 1e-12:
            raise ValueError("|target_alpha| must not exceed 1")


@dataclass
class PreparationResult:
    p0: float
    state: StateVector
    fidelity: float
    alpha_realized: complex
    alpha_expected: complex
    fidelity_vs_expected: float
    regime: RegimeReport


@dataclass(frozen=True)
class RotationSpec:
    """Qubit rotation cos(xi) - i sin(xi) (e^{i phi}|0><1| + h.c.)."""

    xi: float
    phi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * np.pi))


@dataclass(frozen=True)
class ShelvingParams:
    """Probe drive on the 0-2 transition used for state readout."""

    omega_probe: float
    gamma_probe: float
    window: float

    def __post_init__(self) -> None:
        if self.omega_probe <= 0 or self.gamma_probe <= 0:
            raise ValueError("probe rates must be positive")
        if self.window <= 0:
            raise ValueError("window must be positive")

    @property
    def min_window(self) -> float:
        return max(1.0 / self.gamma_probe, self.gamma_probe / self.omega_probe**2)

    def window_check(self, factor: float = 10.0) -> RegimeCheck:
        ratio = self.window / self.min_window
        return RegimeCheck(
            "window >> max(1/Gamma_probe, Gamma_probe/Omega_probe^2)",
            float(ratio),
            "much_less",
            factor,
            bool(ratio >= factor),
        )


class ShelvingOutcome(IntEnum):
    """Fluorescence tells level 0 from level 1; the value is the level."""

    EMITS = 0
    SILENT = 1


#: probe strength and linewidth are not fixed by the scheme; the coupling
#: scale is a deliberate default, with the window at 100x its minimum length
DEFAULT_PROBE_OMEGA = 1.0
DEFAULT_PROBE_GAMMA = 1.0


@dataclass
class ShelvingRunResult:
    photon_count: int
    window_check: RegimeCheck


# ---------------------------------------------------------------------------
# pulse timing


def pulse_duration_for_alpha(alpha: complex, omega_minus: complex) -> float:
    """Shortest pulse length with sin(|W| T / 2) = |alpha|.

    The realizable amplitude phase is fixed by the drive,
    arg(alpha) = arg(-i W / |W|); a requested alpha with a different phase
    is rejected.
    """
    if omega_minus == 0:
        raise ValueError("zero antisymmetric drive cannot prepare the target")
    mag = abs(alpha)
    if mag > 1 + 1e-12:
        raise ValueError(f"|alpha| = {mag} exceeds 1")
    if mag == 0:
        return 0.0
    expected_phase = np.angle(-1j * omega_minus / abs(omega_minus))
    mismatch = (np.angle(alpha) - expected_phase + np.pi) % (2.0 * np.pi) - np.pi
    if abs(mismatch) > 1e-9:
        raise ValueError(
            f"alpha phase {np.angle(alpha):.6f} inconsistent with the drive "
            f"(realizable phase {expected_phase:.6f})"
        )
    return 2.0 * np.arcsin(min(mag, 1.0)) / abs(omega_minus)


def four_level_pulse_duration(p: FourLevelParams) -> float:
    """Maximally entangling pulse 2 sqrt(2) pi Delta_3 / |Omega_0 (O1 - O2)|."""
    diff = p.omega_i[0] - p.omega_i[1]
    if diff == 0:
        raise ValueError("equal weak drives give an infinite pulse length")
    if p.omega0 == 0:
        raise ValueError("zero Omega_0 gives an infinite pulse length")
    return 2.0 * np.sqrt(2.0) * np.pi * abs(p.delta3) / abs(p.omega0 * diff)


# ---------------------------------------------------------------------------
# preparation


def _superposition_fidelity(
    alpha: complex, c_a: complex, c_g: complex
) -> float:
    # |<target(alpha)|psi>|^2 with target = alpha|a> + sqrt(1-|alpha|^2)|g>
    mag = min(abs(alpha), 1.0)
    rest = np.sqrt(1.0 - mag * mag)
    overlap = np.conj(alpha) * c_a + rest * c_g
    return min(abs(overlap) ** 2, 1.0)


def _finish_preparation(
    psi: StateVector,
    alpha_expected: complex,
    regime: RegimeReport,
) -> PreparationResult:
    p0 = survival_probability(psi)
    psin = psi.normalized()
    c_a = antisymmetric_state(psi.dims).overlap(psin)
    c_g = ground_state(psi.dims).overlap(psin)
    alpha_realized = c_a
    return PreparationResult(
        p0=p0,
        state=psin,
        fidelity=_superposition_fidelity(alpha_realized, c_a, c_g),
        alpha_realized=alpha_realized,
        alpha_expected=alpha_expected,
        fidelity_vs_expected=_superposition_fidelity(alpha_expected, c_a, c_g),
        regime=regime,
    )


def _expected_alpha(omega_minus: complex, T: float) -> complex:
    if omega_minus == 0:
        return 0j
    w = abs(omega_minus)
    return -1j * (omega_minus / w) * np.sin(w * T / 2.0)


def prepare_two_level(
    p: TwoLevelParams, pulse: PulseSpec, dims: HilbertDims
) -> PreparationResult:
    """Propagate the driven two-level scheme from |0,00> for one pulse."""
    if pulse.duration is not None:
        T = pulse.duration
    else:
        T = pulse_duration_for_alpha(pulse.target_alpha, p.omega_minus)
    h = OperatorMatrix(
        dims, h_cond_two_level(p, dims).mat + h_laser_two_level(p, dims).mat
    )
    psi = evolve_nojump(h, ground_state(dims), T)
    return _finish_preparation(psi, _expected_alpha(p.omega_minus, T), validate_regime(p))


def prepare_four_level(
    p: FourLevelParams, dims: HilbertDims, *, duration: float | None = None
) -> PreparationResult:
    """Propagate the Raman scheme from |0,00>; default pulse targets |a>."""
    T = four_level_pulse_duration(p) if duration is None else duration
    if T < 0:
        raise ValueError("pulse duration must be nonnegative")
    _, omega_eff = effective_params(p)
    omega_eff_minus = (omega_eff[0] - omega_eff[1]) / np.sqrt(2.0)
    psi = evolve_nojump(h_cond_four_level(p, dims), ground_state(dims), T)
    return _finish_preparation(psi, _expected_alpha(omega_eff_minus, T), validate_regime(p))


def prepare_fock_converged(
    prepare,
    make_dims,
    *,
    n_max_start: int = 2,
    n_max_limit: int = 8,
    tol: float = 1e-8,
) -> tuple[PreparationResult, int]:
    """Raise the Fock truncation until P0 moves by less than ``tol``.

    ``prepare`` maps HilbertDims to a PreparationResult and ``make_dims``
    maps n_max to HilbertDims.
    """
    n_max = n_max_start
    result = prepare(make_dims(n_max))
    while n_max < n_max_limit:
        n_max += 1
        nxt = prepare(make_dims(n_max))
        if abs(nxt.p0 - result.p0) < tol:
            return nxt, n_max
        result = nxt
    raise ConvergenceError(
        f"P0 still moving by more than {tol} at n_max = {n_max_limit}"
    )


def qubit_amplitudes(state: StateVector) -> np.ndarray:
    """Cavity-vacuum ground-qubit amplitudes of a prepared state, renormalized.

    Works for both schemes: the qubit is levels {0, 1} of each atom; any
    weight outside the vacuum qubit block (tiny for in-regime pulses) is
    projected away.
    """
    dims = state.dims
    if dims.n_atoms != 2:
        raise ValueError("qubit extraction needs a two-atom state")
    amps = np.array(
        [
            state.amps[basis_index(dims, 0, j1, j2)]
            for j1 in (0, 1)
            for j2 in (0, 1)
        ],
        dtype=complex,
    )
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ValueError("state has no weight in the qubit block")
    return amps / norm


# ---------------------------------------------------------------------------
# single-qubit rotations


def rotation_operator(spec: RotationSpec) -> OperatorMatrix:
    """Unitary cos(xi) - i sin(xi) (e^{i phi}|0><1| + h.c.) on one qubit."""
    c, s = np.cos(spec.xi), np.sin(spec.xi)
    e = np.exp(1j * spec.phi)
    mat = np.array([[c, -1j * s * e], [-1j * s * np.conj(e), c]], dtype=complex)
    return OperatorMatrix(QUBIT_DIMS, mat)


def rotation_pulse_two_level(
    xi: float, phi: float, omega_abs: float
) -> tuple[complex, float]:
    """Drive settings realizing rotation_operator(xi, phi) on a free atom.

    Propagating (1/2)(Omega |1><0| + h.c.) for T gives the rotation with
    xi = |Omega| T / 2 and rotation phase arg(conj(Omega)), so the drive is
    Omega = |Omega| e^{-i phi}.
    """
    if xi < 0:
        raise ValueError("xi must be nonnegative for a pulse")
    if omega_abs <= 0:
        if xi == 0:
            return 0j, 0.0
        raise ValueError("zero drive cannot realize a nonzero rotation")
    return omega_abs * np.exp(-1j * phi), 2.0 * xi / omega_abs


def rotation_pulse_four_level(
    xi: float, phi: float, p: FourLevelParams, *, atom: int = 0
) -> tuple[complex, float, complex]:
    """Raman drive settings realizing the rotation up to a global phase.

    Returns (weak drive, pulse length, predicted global phase); the phase
    exp(i |Omega_0|^2 T / (4 Delta_3)) stems from the balanced level shifts
    and drops out of correlation measurements.
    """
    if xi < 0:
        raise ValueError("xi must be nonnegative for a pulse")
    if p.omega0 == 0 or p.delta3 == 0:
        raise ValueError("need nonzero Omega_0 and Delta_3")
    om_abs = abs(p.omega_i[atom])
    if om_abs == 0:
        raise ValueError("weak drive magnitude for the chosen atom is zero")
    omega_i = -np.exp(1j * phi) * om_abs * p.omega0 / abs(p.omega0)
    T = 4.0 * xi * abs(p.delta3) / (om_abs * abs(p.omega0))
    global_phase = np.exp(1j * abs(p.omega0) ** 2 * T / (4.0 * p.delta3))
    return omega_i, T, complex(global_phase)


# ---------------------------------------------------------------------------
# electron-shelving measurement


def _as_generator(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return substream(int(rng_seed), "shelving")


def shelving_measure(qubit_amplitudes, rng_seed) -> ShelvingOutcome:
    """Ideal readout: emission with probability |a0|^2 classifies level 0."""
    a0, a1 = qubit_amplitudes
    total = abs(a0) ** 2 + abs(a1) ** 2
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"amplitudes not normalized: |a0|^2+|a1|^2 = {total}")
    rng = _as_generator(rng_seed)
    emits = rng.random() < abs(a0) ** 2
    return ShelvingOutcome.EMITS if emits else ShelvingOutcome.SILENT


@lru_cache(maxsize=8)
def _telegraph_engine(params: ShelvingParams, n_steps: int):
    from .montecarlo import _TrajectoryEngine

    dims = HilbertDims(n_max=0, atom_levels=3, n_atoms=1)
    drive = 0.5 * params.omega_probe * atom_transition(dims, 0, 2, 0).mat
    h = OperatorMatrix(
        dims,
        drive
        + drive.conj().T
        - 1j * params.gamma_probe * atom_transition(dims, 0, 2, 2).mat,
    )
    jumps = [(atom_transition(dims, 0, 0, 2), 2.0 * params.gamma_probe)]
    return _TrajectoryEngine(h, jumps, params.window, n_steps)


def shelving_physical_sim(
    alpha0: complex, params: ShelvingParams, rng_seed, *, n_steps: int = 400
) -> ShelvingRunResult:
    """Telegraph simulation of the probe pulse on one three-level atom.

    Level 0 couples to the auxiliary level 2 (drive omega_probe, decay
    gamma_probe back to level 0); level 1 is a spectator.  Returns the
    emitted photon count over the window; count > 0 classifies level 0.
    """
    if abs(alpha0) > 1 + 1e-9:
        raise ValueError("|alpha0| must not exceed 1")
    engine = _telegraph_engine(params, n_steps)
    amps = np.zeros(3, dtype=complex)
    amps[0] = alpha0
    amps[1] = np.sqrt(max(1.0 - abs(alpha0) ** 2, 0.0))
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else substream(int(rng_seed), "shelving-telegraph")
    )
    record = engine.run(StateVector(engine.dims, amps), rng)
    return ShelvingRunResult(
        photon_count=len(record.jump_times),
        window_check=params.window_check(),
    )
