"""Quantum-jump trajectories and the simulated Bell-measurement pipeline.

Trajectory unraveling: evolve with the conditional Hamiltonian, jump when
the squared norm falls below a uniform draw, apply a normalized jump
operator, repeat.  Jump times are located by bisection on a precomputed
binary ladder of exact sub-step propagators, so the jump-time distribution
is sampled without first-order stepping bias (time resolution dt / 2**30).

Pipeline: preparation enters through the no-emission probability P0 once
per parameter set; runs draw success Bernoulli(P0), rotate both qubits,
and read sigma_z per atom by shelving draws from the rotated state's Born
probabilities.  Detected failures are discarded or, if undetected, yield an
uncorrelated random sign (zero mean correlation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import HilbertDims, OperatorMatrix, StateVector
from .models import FourLevelParams, TwoLevelParams
from .protocols import (
    PreparationResult,
    PulseSpec,
    RotationSpec,
    prepare_four_level,
    prepare_two_level,
    qubit_amplitudes,
    rotation_operator,
)
from .rng import bulk_uniforms, substream

__all__ = [
    "TrajectoryRecord",
    "CorrelationEstimate",
    "BellEstimate",
    "IdealPreparation",
    "TwoLevelPreparation",
    "FourLevelPreparation",
    "PreparedPair",
    "trajectory_run",
    "trajectory_ensemble",
    "prepare_pair",
    "estimate_correlation",
    "estimate_bell",
]

_BISECTION_DEPTH = 30


@dataclass
class TrajectoryRecord:
    final_state: StateVector
    jump_times: list[tuple[float, int]]
    survived: bool


class _TrajectoryEngine:
    """Shared propagators for one (H_cond, jumps, T) instance."""

    def __init__(
        self,
        h_cond: OperatorMatrix,
        jumps: list[tuple[OperatorMatrix, float]],
        T: float,
        n_steps: int,
    ) -> None:
        if T <= 0:
            raise ValueError("trajectory time must be positive")
        if n_steps < 1:
            raise ValueError("need at least one step")
        self.dims = h_cond.dims
        self.T = float(T)
        self.n_steps = int(n_steps)
        self.dt = self.T / self.n_steps
        self.jump_mats = []
        decay = np.zeros_like(h_cond.mat)
        for op, rate in jumps:
            if rate < 0:
                raise ValueError(f"negative jump rate {rate}")
            if op.dims != self.dims:
                raise ValueError("jump operator dimension mismatch")
            self.jump_mats.append((op.mat, rate))
            decay += 0.5 * rate * (op.mat.conj().T @ op.mat)
        anti = (h_cond.mat - h_cond.mat.conj().T) / 2.0
        scale = max(np.abs(h_cond.mat).max(), 1.0)
        if np.abs(anti - (-1j) * decay).max() > 1e-9 * scale:
            raise ValueError(
                "anti-Hermitian part of H_cond does not match the jump set"
            )
        # ladder[k] propagates by dt / 2**k; each level is an independent
        # dense exponential (building the family by squaring from the
        # smallest step would amplify its round-off 2**depth-fold)
        self.ladder = [
            scipy.linalg.expm(-1j * (self.dt / 2**k) * h_cond.mat)
            for k in range(_BISECTION_DEPTH + 1)
        ]

    def run(self, psi0: StateVector, rng: np.random.Generator) -> TrajectoryRecord:
        if psi0.dims != self.dims:
            raise ValueError("state dimension mismatch")
        psi = psi0.amps.copy()
        state = {"r": rng.random(), "t": 0.0, "jumps": []}

        def do_jump(vec: np.ndarray) -> np.ndarray:
            weights = np.array(
                [rate * np.linalg.norm(m @ vec) ** 2 for m, rate in self.jump_mats]
            )
            total = weights.sum()
            if total <= 0:
                raise RuntimeError("norm decayed with no open jump channel")
            channel = int(rng.choice(len(weights), p=weights / total))
            m, _ = self.jump_mats[channel]
            new = m @ vec
            new /= np.linalg.norm(new)
            state["jumps"].append((state["t"], channel))
            state["r"] = rng.random()
            return new

        def advance(vec: np.ndarray, level: int) -> np.ndarray:
            # propagate by dt / 2**level, resolving any norm crossing inside
            nxt = self.ladder[level] @ vec
            if np.real(np.vdot(nxt, nxt)) > state["r"]:
                state["t"] += self.dt / 2**level
                return nxt
            if level == _BISECTION_DEPTH:
                state["t"] += self.dt / 2**level
                return do_jump(nxt)
            half = advance(vec, level + 1)
            return advance(half, level + 1)

        for _ in range(self.n_steps):
            psi = advance(psi, 0)
        norm = np.linalg.norm(psi)
        if norm > 0:
            psi = psi / norm
        return TrajectoryRecord(
            final_state=StateVector(self.dims, psi),
            jump_times=state["jumps"],
            survived=not state["jumps"],
        )


def trajectory_run(
    H_cond: OperatorMatrix,
    jumps: list[tuple[OperatorMatrix, float]],
    psi0: StateVector,
    T: float,
    seed: int,
    *,
    n_steps: int = 200,
) -> TrajectoryRecord:
    """Single unraveled trajectory; deterministic given the seed."""
    engine = _TrajectoryEngine(H_cond, jumps, T, n_steps)
    return engine.run(psi0, substream(int(seed), "trajectory"))


def trajectory_ensemble(
    H_cond: OperatorMatrix,
    jumps: list[tuple[OperatorMatrix, float]],
    psi0: StateVector,
    T: float,
    n_runs: int,
    seed: int,
    *,
    n_steps: int = 200,
) -> list[TrajectoryRecord]:
    """n_runs independent trajectories sharing one propagator family."""
    engine = _TrajectoryEngine(H_cond, jumps, T, n_steps)
    return [
        engine.run(psi0, substream(int(seed), "trajectory", i))
        for i in range(n_runs)
    ]


# ---------------------------------------------------------------------------
# preparation models feeding the pipeline


@dataclass(frozen=True)
class IdealPreparation:
    """Inject the target state directly (skips the cavity simulation)."""

    alpha: complex = 1.0


@dataclass(frozen=True)
class TwoLevelPreparation:
    params: TwoLevelParams
    pulse: PulseSpec
    n_max: int = 2


@dataclass(frozen=True)
class FourLevelPreparation:
    params: FourLevelParams
    n_max: int = 2
    duration: float | None = None


@dataclass
class PreparedPair:
    """Qubit-pair amplitudes and success probability entering the pipeline."""

    amps: np.ndarray  # shape (4,), basis order (j1, j2) = 00, 01, 10, 11
    p0: float
    alpha_realized: complex
    preparation: PreparationResult | None = None


def prepare_pair(model, *, forced_p0: float | None = None) -> PreparedPair:
    """Resolve a preparation model into the qubit pair used per run."""
    if isinstance(model, IdealPreparation):
        alpha = complex(model.alpha)
        if abs(alpha) > 1 + 1e-12:
            raise ValueError("|alpha| must not exceed 1")
        rest = np.sqrt(max(1.0 - abs(alpha) ** 2, 0.0))
        amps = np.array(
            [rest, -alpha / np.sqrt(2.0), alpha / np.sqrt(2.0), 0.0], dtype=complex
        )
        pair = PreparedPair(amps=amps, p0=1.0, alpha_realized=alpha)
    elif isinstance(model, TwoLevelPreparation):
        dims = HilbertDims(n_max=model.n_max, atom_levels=2, n_atoms=2)
        res = prepare_two_level(model.params, model.pulse, dims)
        pair = PreparedPair(
            amps=qubit_amplitudes(res.state),
            p0=res.p0,
            alpha_realized=res.alpha_realized,
            preparation=res,
        )
    elif isinstance(model, FourLevelPreparation):
        dims = HilbertDims(n_max=model.n_max, atom_levels=4, n_atoms=2)
        res = prepare_four_level(model.params, dims, duration=model.duration)
        pair = PreparedPair(
            amps=qubit_amplitudes(res.state),
            p0=res.p0,
            alpha_realized=res.alpha_realized,
            preparation=res,
        )
    else:
        raise TypeError(f"unknown preparation model {model!r}")
    if forced_p0 is not None:
        if not 0.0 <= forced_p0 <= 1.0:
            raise ValueError("forced_p0 must lie in [0, 1]")
        pair.p0 = float(forced_p0)
    return pair


# ---------------------------------------------------------------------------
# correlation and Bell estimators


@dataclass
class CorrelationEstimate:
    vartheta: float
    e_hat: float
    std_err: float
    n_runs: int
    n_discarded: int


@dataclass
class BellEstimate:
    b_hat: float
    std_err: float
    e_small: CorrelationEstimate
    e_large: CorrelationEstimate


def _measure_runs(
    pair: PreparedPair,
    vartheta: float,
    n_runs: int,
    seed: int,
    failure_policy: str,
    stage: str,
) -> CorrelationEstimate:
    if n_runs < 1:
        raise ValueError("need at least one run")
    if failure_policy not in ("discard", "include_as_zero"):
        raise ValueError(f"unknown failure policy {failure_policy!r}")
    u1 = rotation_operator(RotationSpec(np.pi / 4.0, 3.0 * np.pi / 2.0 - vartheta))
    u2 = rotation_operator(RotationSpec(np.pi / 4.0, 3.0 * np.pi / 2.0))
    rotated = np.kron(u1.mat, u2.mat) @ pair.amps
    probs = np.abs(rotated) ** 2
    probs = probs / probs.sum()
    p1_marg = probs[2] + probs[3]  # atom 1 found in level 1
    p2_given1 = probs[3] / p1_marg if p1_marg > 0 else 0.0
    p2_given0 = probs[1] / (1.0 - p1_marg) if p1_marg < 1 else 0.0

    u = bulk_uniforms(seed, stage, (n_runs, 4))
    success = u[:, 0] < pair.p0
    j1 = u[:, 1] < p1_marg
    j2 = np.where(j1, u[:, 2] < p2_given1, u[:, 2] < p2_given0)
    sign = (2 * j1.astype(np.int64) - 1) * (2 * j2.astype(np.int64) - 1)
    if failure_policy == "include_as_zero":
        random_sign = 2 * (u[:, 3] < 0.5).astype(np.int64) - 1
        sign = np.where(success, sign, random_sign)
        used = sign
        n_discarded = 0
    else:
        used = sign[success]
        n_discarded = int(n_runs - used.size)
    n_used = int(used.size)
    if n_used == 0:
        raise RuntimeError("every run was discarded; nothing to average")
    n_plus = int(np.count_nonzero(used == 1))
    e_hat = (2 * n_plus - n_used) / n_used
    if n_used > 1:
        var = (1.0 - e_hat**2) * n_used / (n_used - 1)
        std_err = float(np.sqrt(max(var, 0.0) / n_used))
    else:
        std_err = float("inf")
    return CorrelationEstimate(
        vartheta=float(vartheta),
        e_hat=float(e_hat),
        std_err=std_err,
        n_runs=n_runs,
        n_discarded=n_discarded,
    )


def estimate_correlation(
    model,
    vartheta: float,
    n_runs: int,
    seed: int,
    failure_policy: str = "discard",
    *,
    forced_p0: float | None = None,
) -> CorrelationEstimate:
    """Simulated measurement of E(vartheta, 0) over n_runs preparations.

    Each run rotates atom 1 by (pi/4, 3pi/2 - vartheta) and atom 2 by
    (pi/4, 3pi/2), then reads sigma_z of both atoms by shelving.
    """
    pair = prepare_pair(model, forced_p0=forced_p0)
    stage = f"correlation:{float(vartheta)!r}"
    return _measure_runs(pair, vartheta, n_runs, seed, failure_policy, stage)


def estimate_bell(
    model,
    vartheta: float,
    n_runs_per_e: int,
    seed: int,
    failure_policy: str = "discard",
    *,
    forced_p0: float | None = None,
) -> BellEstimate:
    """|3 E(v,0) - E(3v,0)| from two independent correlation estimates."""
    pair = prepare_pair(model, forced_p0=forced_p0)
    e_small = _measure_runs(
        pair, vartheta, n_runs_per_e, seed, failure_policy,
        f"bell:small:{float(vartheta)!r}",
    )
    e_large = _measure_runs(
        pair, 3.0 * vartheta, n_runs_per_e, seed, failure_policy,
        f"bell:large:{float(vartheta)!r}",
    )
    b_hat = abs(3.0 * e_small.e_hat - e_large.e_hat)
    std_err = float(np.sqrt(9.0 * e_small.std_err**2 + e_large.std_err**2))
    return BellEstimate(b_hat=b_hat, std_err=std_err, e_small=e_small, e_large=e_large)
