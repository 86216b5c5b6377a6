"""Correlation observables and the four-setting Bell statistic.

Spin conventions follow the readout: sigma_z = |1><1| - |0><0| (shelving
classifies fluorescence as level 0, so <sigma_z> = 1 - 2|a0|^2), with
sigma_x = |0><1| + |1><0| and sigma_y = -i|0><1| + i|1><0|.  The rotated
observable sigma_theta = cos(theta) sigma_x + sin(theta) sigma_y obeys
sigma_theta = U'(pi/4, 3pi/2 - theta) sigma_z U(pi/4, 3pi/2 - theta), which
is how it is measured: rotate, then read sigma_z by shelving.

For the prepared family alpha |a> + sqrt(1-|alpha|^2)|00> the correlation is
E(t1, t2) = -|alpha|^2 cos(t1 - t2); with the equally spaced angle scheme
the four-setting statistic reduces to B = |3 E(v, 0) - E(3v, 0)|, maximal at
2 sqrt(2) for |alpha| = 1 and v = pi/4.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import HilbertDims, OperatorMatrix, StateVector

__all__ = [
    "QUBIT_DIMS",
    "PAIR_DIMS",
    "AngleScheme",
    "BellScanResult",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "sigma_theta",
    "correlation_expectation",
    "correlation_analytic",
    "bell_s",
    "bell_s_simplified",
    "bell_surface",
    "observed_bell_with_failures",
    "TSIRELSON_BOUND",
]

QUBIT_DIMS = HilbertDims(n_max=0, atom_levels=2, n_atoms=1)
PAIR_DIMS = HilbertDims(n_max=0, atom_levels=2, n_atoms=2)

TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)


def sigma_x() -> OperatorMatrix:
    return OperatorMatrix(QUBIT_DIMS, _SX.copy())


def sigma_y() -> OperatorMatrix:
    return OperatorMatrix(QUBIT_DIMS, _SY.copy())


def sigma_z() -> OperatorMatrix:
    """Readout observable: level 1 maps to +1, level 0 to -1."""
    return OperatorMatrix(QUBIT_DIMS, _SZ.copy())


def sigma_theta(theta: float) -> OperatorMatrix:
    """cos(theta) sigma_x + sin(theta) sigma_y; Hermitian involution."""
    return OperatorMatrix(QUBIT_DIMS, np.cos(theta) * _SX + np.sin(theta) * _SY)


@dataclass(frozen=True)
class AngleScheme:
    """Equally spaced settings: t1 - t2 = t2 - t1p = t1p - t2p = vartheta."""

    vartheta: float

    @property
    def theta1(self) -> float:
        return self.vartheta

    @property
    def theta2(self) -> float:
        return 0.0

    @property
    def theta1p(self) -> float:
        return -self.vartheta

    @property
    def theta2p(self) -> float:
        return -2.0 * self.vartheta

    def settings(self) -> tuple[tuple[float, float], ...]:
        """The four (atom-1, atom-2) pairs entering the Bell statistic."""
        return (
            (self.theta1, self.theta2),
            (self.theta1, self.theta2p),
            (self.theta1p, self.theta2),
            (self.theta1p, self.theta2p),
        )


def correlation_expectation(state: StateVector, theta1: float, theta2: float) -> float:
    """<sigma_theta1 (x) sigma_theta2> for a normalized two-qubit state."""
    if state.dims != PAIR_DIMS:
        raise ValueError("correlation needs an atoms-only two-qubit state")
    if abs(state.norm_sq() - 1.0) > 1e-9:
        raise ValueError("state must be normalized")
    op = np.kron(sigma_theta(theta1).mat, sigma_theta(theta2).mat)
    value = complex(np.vdot(state.amps, op @ state.amps))
    return float(value.real)


def correlation_analytic(alpha: complex, vartheta: float) -> float:
    """Correlation of the prepared family: -|alpha|^2 cos(vartheta)."""
    if abs(alpha) > 1 + 1e-12:
        raise ValueError("|alpha| must not exceed 1")
    return -abs(alpha) ** 2 * np.cos(vartheta)


def bell_s(e_values) -> float:
    """|E(t1,t2) - E(t1,t2p) + E(t1p,t2) + E(t1p,t2p)| for given correlations."""
    e = [float(v) for v in e_values]
    if len(e) != 4:
        raise ValueError("bell_s needs exactly four correlation values")
    for v in e:
        if abs(v) > 1 + 1e-9:
            raise ValueError(f"correlation value {v} outside [-1, 1]")
    return abs(e[0] - e[1] + e[2] + e[3])


def bell_s_simplified(alpha: complex, vartheta: float) -> float:
    """|3 E(v,0) - E(3v,0)| for the prepared family."""
    return abs(
        3.0 * correlation_analytic(alpha, vartheta)
        - correlation_analytic(alpha, 3.0 * vartheta)
    )


@dataclass
class BellScanResult:
    """Grid of the simplified statistic over pulse area and angle step."""

    omega_minus_T: np.ndarray
    vartheta: np.ndarray
    b_s: np.ndarray  # shape (len(omega_minus_T), len(vartheta))
    metadata: dict = field(default_factory=dict)

    def max_cell(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(int(np.argmax(self.b_s)), self.b_s.shape)
        return float(self.omega_minus_T[i]), float(self.vartheta[j]), float(self.b_s[i, j])


def bell_surface(
    *,
    area_points: int = 201,
    vartheta_points: int = 201,
    area_range: tuple[float, float] = (0.0, 2.0 * np.pi),
    vartheta_range: tuple[float, float] = (0.0, np.pi),
) -> BellScanResult:
    """Statistic over (|W| T, vartheta) with alpha(|W| T) from the pulse law."""
    if area_points < 2 or vartheta_points < 2:
        raise ValueError("grid needs at least 2 points per axis")
    areas = np.linspace(*area_range, area_points)
    vths = np.linspace(*vartheta_range, vartheta_points)
    alpha_sq = np.sin(areas / 2.0) ** 2
    angle_part = np.abs(3.0 * np.cos(vths) - np.cos(3.0 * vths))
    values = np.outer(alpha_sq, angle_part)
    return BellScanResult(
        omega_minus_T=areas,
        vartheta=vths,
        b_s=values,
        metadata={
            "area_points": area_points,
            "vartheta_points": vartheta_points,
            "alpha_model": "alpha = sin(|W| T / 2)",
        },
    )


def observed_bell_with_failures(p0: float, b_ideal: float) -> float:
    """Statistic when undetected failed preparations contribute no correlation.

    Failures enter every E with weight (1 - p0) and zero mean, scaling the
    ideal statistic by p0; the violation threshold B > 2 then needs
    p0 > 1/sqrt(2), about 71 percent, at the ideal maximum 2 sqrt(2).
    """
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 = {p0} outside [0, 1]")
    return p0 * b_ideal
