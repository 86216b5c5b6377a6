"""Hamiltonians and projectors for the two-level and four-level schemes.

The two-level scheme couples two resonant two-level atoms to a leaky cavity
mode; the four-level scheme replaces every transition by a far-detuned Raman
transition, trading the bare coupling g and drive Omega for effective values
g_eff = -g conj(Omega_1) / (2 Delta_2) and
Omega_eff = -Omega conj(Omega_0) / (2 Delta_3).

All builders are pure functions of their parameters.  Decay enters the
conditional Hamiltonians as -i * (amplitude rate), so the matching jump
operators carry population rates 2*Gamma and 2*kappa.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    HilbertDims,
    OperatorMatrix,
    StateVector,
    annihilator,
    atom_projector,
    atom_transition,
    basis_index,
    number_op,
)

__all__ = [
    "TwoLevelParams",
    "FourLevelParams",
    "RegimeThresholds",
    "RegimeCheck",
    "RegimeReport",
    "h_cond_two_level",
    "h_laser_two_level",
    "dfs_projector",
    "h_eff_zeno",
    "h_cond_four_level",
    "effective_params",
    "h_eff_four_level",
    "h_single_atom_laser",
    "h_single_atom_raman",
    "two_level_jumps",
    "four_level_jumps",
    "ground_state",
    "antisymmetric_state",
    "superposition_target",
    "validate_regime",
]

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class TwoLevelParams:
    """Rates and drives of the two-level scheme, in units of g."""

    kappa: float
    gamma: float = 0.0
    omega1: complex = 0j
    omega2: complex = 0j
    g: float = 1.0

    def __post_init__(self) -> None:
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("decay rates must be nonnegative")

    @property
    def omega_plus(self) -> complex:
        return (self.omega1 + self.omega2) / SQRT2

    @property
    def omega_minus(self) -> complex:
        return (self.omega1 - self.omega2) / SQRT2


@dataclass(frozen=True)
class FourLevelParams:
    """Rates, drives and detunings of the Raman scheme, in units of g.

    omega_i holds the weak per-atom drive pair (Omega^(1), Omega^(2)) on the
    1-3 transition; omega0 and omega1 drive 0-3 and 1-2 on both atoms.
    """

    kappa: float
    delta2: float
    delta3: float
    omega0: complex
    omega1: complex
    omega_i: tuple[complex, complex] = (0j, 0j)
    gamma2: float = 0.0
    gamma3: float = 0.0
    g: float = 1.0

    def __post_init__(self) -> None:
        if self.kappa < 0 or self.gamma2 < 0 or self.gamma3 < 0:
            raise ValueError("decay rates must be nonnegative")
        if self.delta2 == 0 or self.delta3 == 0:
            raise ValueError("detunings must be nonzero")

    @property
    def omega_i_minus(self) -> complex:
        return (self.omega_i[0] - self.omega_i[1]) / SQRT2


def _require(dims: HilbertDims, atom_levels: int, n_atoms: int) -> None:
    if dims.atom_levels != atom_levels or dims.n_atoms != n_atoms:
        raise ValueError(
            f"builder needs atom_levels={atom_levels}, n_atoms={n_atoms}; "
            f"got atom_levels={dims.atom_levels}, n_atoms={dims.n_atoms}"
        )


# ---------------------------------------------------------------------------
# two-level scheme


def h_cond_two_level(p: TwoLevelParams, dims: HilbertDims) -> OperatorMatrix:
    """Conditional Hamiltonian of two resonant two-level atoms in the cavity.

    i g sum_i (b |1><0|_i - h.c.) - i Gamma sum_i |1><1|_i - i kappa b'b.
    """
    _require(dims, 2, 2)
    b = annihilator(dims).mat
    h = np.zeros((dims.dim, dims.dim), dtype=complex)
    for i in range(2):
        raise_i = atom_transition(dims, i, 1, 0).mat
        coupling = b @ raise_i
        h += 1j * p.g * (coupling - coupling.conj().T)
        h += -1j * p.gamma * atom_projector(dims, i, 1).mat
    h += -1j * p.kappa * number_op(dims).mat
    return OperatorMatrix(dims, h)


def h_laser_two_level(p: TwoLevelParams, dims: HilbertDims) -> OperatorMatrix:
    """Laser Hamiltonian (1/2) sum_i (Omega^(i) |1><0|_i + h.c.); Hermitian."""
    _require(dims, 2, 2)
    h = np.zeros((dims.dim, dims.dim), dtype=complex)
    for i, omega in enumerate((p.omega1, p.omega2)):
        term = 0.5 * omega * atom_transition(dims, i, 1, 0).mat
        h += term + term.conj().T
    return OperatorMatrix(dims, h)


def two_level_jumps(p: TwoLevelParams, dims: HilbertDims) -> list[tuple[OperatorMatrix, float]]:
    """Jump operators matching h_cond_two_level: cavity leak and atomic decay."""
    _require(dims, 2, 2)
    jumps: list[tuple[OperatorMatrix, float]] = [(annihilator(dims), 2.0 * p.kappa)]
    for i in range(2):
        jumps.append((atom_transition(dims, i, 0, 1), 2.0 * p.gamma))
    return jumps


def ground_state(dims: HilbertDims) -> StateVector:
    """Cavity vacuum with both atoms in level 0."""
    return StateVector(
        dims,
        _unit(dims, [(basis_index(dims, 0, 0, 0), 1.0)]),
    )


def antisymmetric_state(dims: HilbertDims) -> StateVector:
    """Cavity vacuum with the atoms in (|10> - |01>)/sqrt(2) (trapped state)."""
    return StateVector(
        dims,
        _unit(
            dims,
            [
                (basis_index(dims, 0, 1, 0), 1.0 / SQRT2),
                (basis_index(dims, 0, 0, 1), -1.0 / SQRT2),
            ],
        ),
    )


def superposition_target(dims: HilbertDims, alpha: complex) -> StateVector:
    """Target state alpha * |0,a> + sqrt(1-|alpha|^2) * |0,00>."""
    if abs(alpha) > 1 + 1e-12:
        raise ValueError(f"|alpha| = {abs(alpha)} exceeds 1")
    a = min(abs(alpha), 1.0)
    rest = np.sqrt(1.0 - a * a)
    amps = alpha * antisymmetric_state(dims).amps + rest * ground_state(dims).amps
    return StateVector(dims, amps)


def _unit(dims: HilbertDims, entries: list[tuple[int, complex]]) -> np.ndarray:
    amps = np.zeros(dims.dim, dtype=complex)
    for idx, val in entries:
        amps[idx] = val
    return amps


def dfs_projector(dims: HilbertDims) -> OperatorMatrix:
    """Rank-2 projector onto span{|0,00>, |0,a>} (the decoherence-free states)."""
    _require(dims, 2, 2)
    g = ground_state(dims).amps
    a = antisymmetric_state(dims).amps
    return OperatorMatrix(dims, np.outer(g, g.conj()) + np.outer(a, a.conj()))


def h_eff_zeno(H_total: OperatorMatrix, P: OperatorMatrix) -> OperatorMatrix:
    """Zeno-limit effective Hamiltonian P H P for projector P."""
    if H_total.dims != P.dims:
        raise ValueError("Hamiltonian and projector dimensions differ")
    pm = P.mat
    if np.abs(pm @ pm - pm).max() > 1e-10 or np.abs(pm - pm.conj().T).max() > 1e-10:
        raise ValueError("P is not an orthogonal projector")
    return OperatorMatrix(H_total.dims, pm @ H_total.mat @ pm)


# ---------------------------------------------------------------------------
# four-level scheme


def h_cond_four_level(p: FourLevelParams, dims: HilbertDims) -> OperatorMatrix:
    """Conditional Hamiltonian of the Raman scheme (both atoms in the cavity).

    Cavity couples 0-2 with strength g; Omega_1 drives 1-2, Omega_0 drives
    0-3, Omega^(i) drives 1-3 of atom i; excited levels j = 2, 3 carry
    -i (Gamma_j + i Delta_j) |j><j| and the cavity mode -i kappa b'b.
    """
    _require(dims, 4, 2)
    b = annihilator(dims).mat
    h = np.zeros((dims.dim, dims.dim), dtype=complex)
    gammas = {2: p.gamma2, 3: p.gamma3}
    deltas = {2: p.delta2, 3: p.delta3}
    for i in range(2):
        coupling = b @ atom_transition(dims, i, 2, 0).mat
        h += 1j * p.g * (coupling - coupling.conj().T)
        for omega, ket, bra in (
            (p.omega1, 2, 1),
            (p.omega0, 3, 0),
            (p.omega_i[i], 3, 1),
        ):
            term = 0.5 * omega * atom_transition(dims, i, ket, bra).mat
            h += term + term.conj().T
        for j in (2, 3):
            h += -1j * (gammas[j] + 1j * deltas[j]) * atom_projector(dims, i, j).mat
    h += -1j * p.kappa * number_op(dims).mat
    return OperatorMatrix(dims, h)


def four_level_jumps(p: FourLevelParams, dims: HilbertDims) -> list[tuple[OperatorMatrix, float]]:
    """Jump operators matching h_cond_four_level.

    The conditional Hamiltonian fixes only the total decay rate of each
    excited level; branching is split equally between the two ground states.
    """
    _require(dims, 4, 2)
    jumps: list[tuple[OperatorMatrix, float]] = [(annihilator(dims), 2.0 * p.kappa)]
    for i in range(2):
        for j, gamma in ((2, p.gamma2), (3, p.gamma3)):
            for target in (0, 1):
                jumps.append((atom_transition(dims, i, target, j), gamma))
    return jumps


def effective_params(p: FourLevelParams) -> tuple[complex, tuple[complex, complex]]:
    """Adiabatically eliminated coupling and drives.

    g_eff = -g conj(Omega_1)/(2 Delta_2);
    Omega_eff^(i) = -Omega^(i) conj(Omega_0)/(2 Delta_3).
    """
    if p.delta2 == 0 or p.delta3 == 0:
        raise ValueError("detunings must be nonzero")
    g_eff = -p.g * np.conj(p.omega1) / (2.0 * p.delta2)
    omega_eff = tuple(
        -om * np.conj(p.omega0) / (2.0 * p.delta3) for om in p.omega_i
    )
    return complex(g_eff), (complex(omega_eff[0]), complex(omega_eff[1]))


def h_eff_four_level(
    p: FourLevelParams, dims_reduced: HilbertDims, *, include_shifts: bool = True
) -> OperatorMatrix:
    """Reduced ground-state-qubit Hamiltonian after eliminating levels 2, 3.

    include_shifts toggles the first-order level-shift line, which is
    proportional to the identity on the relevant subspace for balanced
    parameters (|Omega_0| = |Omega_1|, Delta_2 = Delta_3) and then only
    contributes a global phase.
    """
    _require(dims_reduced, 2, 2)
    if p.delta2 == 0 or p.delta3 == 0:
        raise ValueError("detunings must be nonzero")
    g_eff, omega_eff = effective_params(p)
    b = annihilator(dims_reduced).mat
    nphot = number_op(dims_reduced).mat
    h = np.zeros((dims_reduced.dim, dims_reduced.dim), dtype=complex)
    for i in range(2):
        coupling = g_eff * b @ atom_transition(dims_reduced, i, 1, 0).mat
        h += 1j * (coupling - coupling.conj().T)
        drive = 0.5 * omega_eff[i] * atom_transition(dims_reduced, i, 1, 0).mat
        h += drive + drive.conj().T
    h += -1j * p.kappa * nphot
    if include_shifts:
        for i in range(2):
            p0 = atom_projector(dims_reduced, i, 0).mat
            p1 = atom_projector(dims_reduced, i, 1).mat
            h -= 0.25 * (abs(p.omega1) ** 2 / p.delta2) * p1
            h -= 0.25 * (abs(p.omega0) ** 2 / p.delta3) * p0
            h -= 0.25 * (abs(p.omega_i[i]) ** 2 / p.delta3) * p1
            h -= 0.25 * (4.0 * p.g**2 / p.delta2) * (nphot @ p0)
    return OperatorMatrix(dims_reduced, h)


# ---------------------------------------------------------------------------
# single-atom builders (atom moved out of the cavity)


def h_single_atom_laser(omega: complex, dims: HilbertDims) -> OperatorMatrix:
    """Free two-level atom driven on 0-1: (1/2)(Omega |1><0| + h.c.)."""
    _require(dims, 2, 1)
    term = 0.5 * omega * atom_transition(dims, 0, 1, 0).mat
    return OperatorMatrix(dims, term + term.conj().T)


def h_single_atom_raman(p: FourLevelParams, omega_i: complex, dims: HilbertDims) -> OperatorMatrix:
    """Free four-level atom with all three drives (rotation configuration)."""
    _require(dims, 4, 1)
    h = np.zeros((dims.dim, dims.dim), dtype=complex)
    for omega, ket, bra in ((p.omega1, 2, 1), (p.omega0, 3, 0), (omega_i, 3, 1)):
        term = 0.5 * omega * atom_transition(dims, 0, ket, bra).mat
        h += term + term.conj().T
    for j, gamma, delta in ((2, p.gamma2, p.delta2), (3, p.gamma3, p.delta3)):
        h += -1j * (gamma + 1j * delta) * atom_projector(dims, 0, j).mat
    return OperatorMatrix(dims, h)


# ---------------------------------------------------------------------------
# regime validation


@dataclass(frozen=True)
class RegimeThresholds:
    """Numeric meaning of the working-regime comparisons.

    "much less" passes when the large side exceeds the small side by at
    least ``much_less``; "same order" passes within a factor ``similar``.
    The cavity-coupling hierarchy g << |Omega_1| only suppresses the
    photon-number level shift, which is inert for an empty cavity, so it
    gets the milder ``shift_hierarchy`` factor (the reference operating
    point itself uses |Omega_1| = 2 g).
    """

    much_less: float = 10.0
    similar: float = 3.0
    shift_hierarchy: float = 2.0


@dataclass(frozen=True)
class RegimeCheck:
    name: str
    ratio: float
    kind: str  # "much_less" or "similar"
    threshold: float
    passed: bool


@dataclass
class RegimeReport:
    checks: list[RegimeCheck] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[RegimeCheck]:
        return [c for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            verdict = "pass" if c.passed else "WARN"
            out.append(f"{verdict:4s}  {c.name}: ratio={c.ratio:.4g} (needs {c.kind} {c.threshold:g})")
        return out


def _much_less(name: str, small: float, large: float, factor: float) -> RegimeCheck:
    # ratio large/small; small = 0 passes trivially
    ratio = np.inf if small == 0 else large / small
    return RegimeCheck(name, float(ratio), "much_less", factor, bool(ratio >= factor))


def _similar(name: str, a: float, b: float, factor: float) -> RegimeCheck:
    if a == 0 or b == 0:
        return RegimeCheck(name, np.inf, "similar", factor, False)
    ratio = max(a / b, b / a)
    return RegimeCheck(name, float(ratio), "similar", factor, bool(ratio <= factor))


def validate_regime(
    p: TwoLevelParams | FourLevelParams,
    thresholds: RegimeThresholds = RegimeThresholds(),
) -> RegimeReport:
    """Dimensionless ratio table with pass/warn verdicts for the scheme."""
    t = thresholds
    report = RegimeReport()
    if isinstance(p, TwoLevelParams):
        for i, omega in enumerate((p.omega1, p.omega2), start=1):
            if omega == 0:
                continue
            report.checks.append(
                _much_less(f"Gamma << |Omega({i})|", p.gamma, abs(omega), t.much_less)
            )
            report.checks.append(
                _much_less(f"|Omega({i})| << g", abs(omega), p.g, t.much_less)
            )
        report.checks.append(_similar("kappa ~ g", p.kappa, p.g, t.similar))
        return report

    # four-level scheme: detuning dominance, balanced shifts, leak matching
    big = min(abs(p.delta2), abs(p.delta3))
    for name, value in (
        ("|Omega_0|", abs(p.omega0)),
        ("|Omega_1|", abs(p.omega1)),
        ("|Omega^(1)|", abs(p.omega_i[0])),
        ("|Omega^(2)|", abs(p.omega_i[1])),
        ("g", p.g),
        ("Gamma_2", p.gamma2),
        ("Gamma_3", p.gamma3),
    ):
        if value == 0:
            continue
        report.checks.append(_much_less(f"{name} << Delta", value, big, t.much_less))
    report.checks.append(_similar("Delta_2 ~ Delta_3", abs(p.delta2), abs(p.delta3), t.similar))
    report.checks.append(_similar("|Omega_0| ~ |Omega_1|", abs(p.omega0), abs(p.omega1), t.similar))
    report.checks.append(
        _much_less("g << |Omega_1|", p.g, abs(p.omega1), t.shift_hierarchy)
    )
    for i in range(2):
        if p.omega_i[i] == 0:
            continue
        report.checks.append(
            _much_less(f"|Omega^({i + 1})| << |Omega_0|", abs(p.omega_i[i]), abs(p.omega0), t.much_less)
        )
        report.checks.append(
            _much_less(f"|Omega^({i + 1})| << g", abs(p.omega_i[i]), p.g, t.much_less)
        )
    kappa_scale = p.g * abs(p.omega1) / abs(p.delta2)
    report.checks.append(
        _similar("kappa ~ g |Omega_1| / Delta_2", p.kappa, kappa_scale, t.similar)
    )
    return report
